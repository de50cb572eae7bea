"""Commutation-method ladders and Lieb-Thirring inequalities for 1D Schrodinger operators."""

from .commutation import Ladder, LadderStep, build_ladder
from .eigensolver import Spectrum, ground_state, reference_grid, solve_spectrum
from .errors import LadderError, NumericalFailure
from .liebthirring import InequalityReport, verify
from .numerics import Grid, GridFunction
from .potentials import BoundaryCondition, Domain, PotentialSpec, half_line, whole_line

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition",
    "Domain",
    "Grid",
    "GridFunction",
    "InequalityReport",
    "Ladder",
    "LadderError",
    "LadderStep",
    "NumericalFailure",
    "PotentialSpec",
    "Spectrum",
    "build_ladder",
    "ground_state",
    "half_line",
    "reference_grid",
    "solve_spectrum",
    "verify",
    "whole_line",
]
