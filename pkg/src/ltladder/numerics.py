"""Uniform grids, quadrature, finite differences and bracketed root finding.

Everything here works on a single uniform grid. The eigensolver relies on a
constant step, so non-uniform meshes are deliberately unsupported.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import NoSignChange

ROOT_TOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``x_min + i*h`` for ``i = 0 .. n_points-1``."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError(f"need x_min < x_max, got {self.x_min}, {self.x_max}")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise ValueError(f"n_points must be an integer >= 3, got {self.n_points}")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @cached_property
    def points(self) -> np.ndarray:
        x = self.x_min + self.h * np.arange(self.n_points)
        x.flags.writeable = False
        return x

    def index_of(self, x: float) -> int:
        """Index of the grid point nearest to ``x`` (clipped to the grid)."""
        i = int(round((x - self.x_min) / self.h))
        return min(max(i, 0), self.n_points - 1)

    def sub(self, i0: int, i1: int) -> "Grid":
        """The sub-grid spanning points ``i0..i1`` inclusive."""
        if not 0 <= i0 < i1 <= self.n_points - 1 or i1 - i0 < 2:
            raise ValueError(f"bad sub-grid range {i0}..{i1}")
        return Grid(float(self.points[i0]), float(self.points[i1]), i1 - i0 + 1)

    def offset_in(self, parent: "Grid") -> int:
        """Index of this grid's first point inside ``parent``."""
        i0 = int(round((self.x_min - parent.x_min) / parent.h))
        if abs(self.h - parent.h) > 1e-9 * parent.h or i0 < 0 or i0 + self.n_points > parent.n_points:
            raise ValueError("grid is not a sub-grid of parent")
        return i0

    def as_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "n_points": self.n_points}


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A real function sampled on every point of ``grid``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_points,):
            raise ValueError(
                f"values have shape {v.shape}, grid has {self.grid.n_points} points"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("GridFunction values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]):
        return cls(grid, fn(grid.points))

    @property
    def x(self) -> np.ndarray:
        return self.grid.points

    def __add__(self, other):
        return GridFunction(self.grid, self.values + _values(other, self.grid))

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - _values(other, self.grid))

    def __mul__(self, other):
        return GridFunction(self.grid, self.values * _values(other, self.grid))

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values)


def restrict(f: GridFunction, grid: Grid) -> GridFunction:
    """Restrict ``f`` to a sub-grid of its own grid."""
    if f.grid == grid:
        return f
    i0 = grid.offset_in(f.grid)
    return GridFunction(grid, f.values[i0 : i0 + grid.n_points])


def _values(other, grid: Grid):
    if isinstance(other, GridFunction):
        if other.grid != grid:
            raise ValueError("grid functions live on different grids")
        return other.values
    return other


def simpson(y: np.ndarray, h: float) -> float:
    """Composite Simpson rule on equally spaced samples.

    With an odd number of panels the last panel is integrated with the
    trapezoid rule.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < 2:
        return 0.0
    if n == 2:
        return 0.5 * h * (y[0] + y[1])
    tail = 0.0
    if n % 2 == 0:
        tail = 0.5 * h * (y[-2] + y[-1])
        y = y[:-1]
    s = y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum()
    return float(s * h / 3.0 + tail)


def integrate(f: GridFunction) -> float:
    """Integral of ``f`` over the whole grid (composite Simpson)."""
    return simpson(f.values, f.grid.h)


def cumulative_integrate(f: GridFunction) -> GridFunction:
    """Running integral from ``x_min`` (trapezoid rule, O(h^2))."""
    v = f.values
    out = np.concatenate([[0.0], np.cumsum(0.5 * f.grid.h * (v[1:] + v[:-1]))])
    return GridFunction(f.grid, out)


def derivative(y: np.ndarray, h: float, order: int = 2) -> np.ndarray:
    """Finite-difference derivative of equally spaced samples.

    ``order=2``: central differences inside, one-sided three-point stencils at
    the ends. ``order=4``: five-point central stencil inside, one-sided
    five-point stencils on the first and last two points.
    """
    y = np.asarray(y, dtype=float)
    if order == 2:
        return np.gradient(y, h, edge_order=2)
    if order != 4:
        raise ValueError(f"order must be 2 or 4, got {order}")
    if y.size < 5:
        raise ValueError("order=4 needs at least 5 samples")
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * h)
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12.0 * h)
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12.0 * h)
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12.0 * h)
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12.0 * h)
    return d


def differentiate(f: GridFunction, order: int = 4) -> GridFunction:
    """Derivative of ``f`` on its own grid; fourth order by default, since the
    O(h^2) stencil leaves errors near 1e-5 on the reference spacing."""
    return GridFunction(f.grid, derivative(f.values, f.grid.h, order))


def bisect_root(fn: Callable[[float], float], lo: float, hi: float, tol: float = ROOT_TOL) -> float:
    """Bisection on a sign-change bracket; the result does not depend on
    the order of ``lo`` and ``hi``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = min(lo, hi), max(lo, hi)
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise NoSignChange(f"f({lo})={flo} and f({hi})={fhi} have the same sign")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = fn(mid)
        if fmid == 0.0:
            return mid
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)
