"""Lieb-Thirring type inequalities for perturbed operators ``H0 - V``.

Every inequality is reported as ``lhs <= rhs`` except Schmincke's, which is a
lower bound on the spectral side; the report's ``orientation`` field says
which. ``holds`` means ``margin >= -slack`` with an explicit slack, by default
``1e-6 * max(1, |rhs|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate as sp_integrate
from scipy import special

from .commutation import build_ladder
from .eigensolver import DEFAULT_TOL, Spectrum, reference_grid, solve_spectrum
from .errors import DomainError, NoBoundState, PreconditionViolated
from .numerics import Grid
from .potentials import (
    BoundaryCondition,
    Coulomb,
    Domain,
    PoschlTeller,
    PotentialSpec,
    ZERO,
    Zero,
    closed_form_levels,
    combine,
    integral_of,
    is_non_increasing,
    is_single_well,
    positive_part_moment,
    sample,
)

NAMES = (
    "classical-lt",
    "schmincke",
    "theorem1",
    "theorem2",
    "theorem3",
    "theorem4",
    "theorem4-tail",
    "proposition1",
)


def semiclassical_constant(gamma: float) -> float:
    """One-dimensional ``Gamma(g+1) / (sqrt(4 pi) Gamma(g+3/2))``."""
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    return math.exp(math.lgamma(gamma + 1.0) - math.lgamma(gamma + 1.5)) / math.sqrt(4.0 * math.pi)


def normalization_constant(gamma: float, delta: float) -> float:
    """``C_{gamma,delta} = 1 / B(gamma - delta, delta + 1)``.

    This is the constant that makes
    ``lam_-^gamma = C * int_0^inf k^(gamma-delta-1) (lam + k)_-^delta dk``
    hold; evaluating at ``lam = -1`` gives the beta integral.
    """
    if not gamma > delta or delta < 0:
        raise DomainError(f"need gamma > delta >= 0, got gamma={gamma}, delta={delta}")
    return 1.0 / special.beta(gamma - delta, delta + 1.0)


def riesz_integral(gamma: float, delta: float, lam: float) -> float:
    """``int_0^inf k^(gamma-delta-1) (lam + k)_-^delta dk`` by adaptive
    quadrature with algebraic end-point weights (QUADPACK QAWS)."""
    if lam >= 0:
        return 0.0
    a = -lam
    val, _ = sp_integrate.quad(lambda k: 1.0, 0.0, a, weight="alg", wvar=(gamma - delta - 1.0, delta), epsabs=0.0, epsrel=1e-13)
    return val


def theorem_constant(gamma: float) -> float:
    """Constant of the shifted bound: ``L^cl_{3/2}`` at ``gamma = 3/2``, and
    ``3 C_{2g,3} / (32 C_{g+1/2,2})`` for ``gamma > 3/2``."""
    if gamma < 1.5:
        raise DomainError("gamma must be >= 3/2")
    if gamma == 1.5:
        return semiclassical_constant(1.5)
    return 3.0 * normalization_constant(2.0 * gamma, 3.0) / (32.0 * normalization_constant(gamma + 0.5, 2.0))


def aizenman_lieb_lift_check(gamma: float, sample_levels: Sequence[float], delta: float = 3.0) -> float:
    """Largest absolute defect of the lifting identity at exponent ``2*gamma``.

    At ``2*gamma == delta`` the identity degenerates to the point mass at
    ``k = 0`` and both sides are ``lam_-^delta``.
    """
    if gamma < 1.5:
        raise DomainError("gamma must be >= 3/2")
    expo = 2.0 * gamma
    worst = 0.0
    for lam in sample_levels:
        lhs = (-lam) ** expo if lam < 0 else 0.0
        if expo == delta:
            rhs = (-lam) ** delta if lam < 0 else 0.0
        else:
            rhs = normalization_constant(expo, delta) * riesz_integral(expo, delta, lam)
        worst = max(worst, abs(lhs - rhs))
    return worst


def _magnitudes(spectrum) -> np.ndarray:
    if isinstance(spectrum, Spectrum):
        return spectrum.magnitudes
    return -np.asarray(spectrum, dtype=float)


def shifted_sum(spectrumV, mu_ref: float, gamma: float) -> float:
    """``sum_k (sqrt(lam_k) - sqrt(mu_ref))_+^(2 gamma)``."""
    lam = _magnitudes(spectrumV)
    d = np.maximum(np.sqrt(lam) - math.sqrt(mu_ref), 0.0)
    return float(np.sum(d ** (2.0 * gamma)))


@dataclass(frozen=True)
class DifferenceSum:
    cubic: float
    proposition: float
    per_level_cubic: tuple
    per_level_proposition: tuple
    ordering_violation: bool


def ladder_difference_sum(spectrumV, spectrum0, K: int, tol: float = 1e-9) -> DifferenceSum:
    """Paired sums over ``k <= K``: the cubic ``(sqrt lam - sqrt mu)^3`` and the
    combination ``(sqrt lam - sqrt mu)^3 + 3/2 sqrt(mu) (sqrt lam - sqrt mu)^2``.
    ``ordering_violation`` flags some ``lam_k < mu_k`` beyond ``tol``."""
    lam = _magnitudes(spectrumV)
    mu = _magnitudes(spectrum0)
    if K > min(lam.size, mu.size):
        raise ValueError(f"K={K} exceeds the available levels ({lam.size}, {mu.size})")
    a, b = np.sqrt(lam[:K]), np.sqrt(mu[:K])
    d = a - b
    cubic = d**3
    prop = cubic + 1.5 * b * d**2
    return DifferenceSum(
        cubic=float(cubic.sum()),
        proposition=float(prop.sum()),
        per_level_cubic=tuple(float(c) for c in cubic),
        per_level_proposition=tuple(float(c) for c in prop),
        ordering_violation=bool(np.any(lam[:K] < mu[:K] - tol)),
    )


@dataclass(frozen=True)
class InequalityReport:
    name: str
    params: dict
    lhs: float
    rhs: float
    per_level: tuple
    orientation: str = "upper"
    error_term: Optional[float] = None
    slack: Optional[float] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.slack is None:
            object.__setattr__(self, "slack", 1e-6 * max(1.0, abs(self.rhs)))

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.margin >= -self.slack

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "orientation": self.orientation,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "holds": self.holds,
            "slack": self.slack,
            "per_level": [[k, c] for k, c in self.per_level],
            "error_term": self.error_term,
            "metadata": self.metadata,
        }


def _require(cond, msg):
    if not cond:
        raise PreconditionViolated(msg)


def _spectrum_or_empty(p, bc, grid, max_levels, tol) -> tuple:
    try:
        return solve_spectrum(p, bc, grid, max_levels=max_levels, tol=tol).eigenvalues
    except NoBoundState:
        return ()


def _v0_values(V0: PotentialSpec, grid: Grid) -> np.ndarray:
    return sample(V0, grid)


def verify(
    name: str,
    V0_spec: Optional[PotentialSpec],
    V_spec: PotentialSpec,
    bc: Optional[BoundaryCondition] = None,
    grid: Optional[Grid] = None,
    params: Optional[dict] = None,
) -> InequalityReport:
    """Evaluate the named inequality for ``H0 = -d^2 - V0`` and ``HV = H0 - V``.

    ``params`` keys: ``gamma`` (default 3/2), ``sigma`` (theorem2, when
    ``bc`` is not given), ``K`` (proposition1), ``k_max`` (theorem3, required),
    ``max_levels`` (default 50), ``tol``, ``slack``.
    """
    if name not in NAMES:
        raise PreconditionViolated(f"unknown inequality {name!r}; expected one of {NAMES}")
    params = dict(params or {})
    gamma = float(params.get("gamma", 1.5))
    max_levels = int(params.get("max_levels", 50))
    tol = float(params.get("tol", DEFAULT_TOL))
    slack = params.get("slack")
    V0 = ZERO if V0_spec is None else V0_spec
    domain = V0.domain if V0_spec is not None else V_spec.domain
    V0 = PotentialSpec(V0.family, domain)
    V = PotentialSpec(V_spec.family, domain)
    grid = reference_grid(domain) if grid is None else grid
    meta = {"grid": grid.as_dict(), "tol": tol, "max_levels": max_levels}
    report_params = {"V0": V0.as_dict(), "V": V.as_dict()}

    def report(lhs, rhs, per_level, orientation="upper", error_term=None, **extra):
        meta.update(extra)
        return InequalityReport(
            name=name,
            params=report_params,
            lhs=float(lhs),
            rhs=float(rhs),
            per_level=tuple((int(k), float(c)) for k, c in per_level),
            orientation=orientation,
            error_term=error_term,
            slack=slack,
            metadata=meta,
        )

    if name in ("classical-lt", "schmincke"):
        _require(domain is Domain.WHOLE_LINE, f"{name} is stated on the whole line")
        _require(isinstance(V0.family, Zero), f"{name} has no background potential")
        bc = BoundaryCondition.decay()
        levels = _spectrum_or_empty(V, bc, grid, max_levels, tol)
        lam = -np.asarray(levels)
        if name == "classical-lt":
            _require(gamma >= 0.5, "classical Lieb-Thirring needs gamma >= 1/2")
            report_params["gamma"] = gamma
            contrib = lam**gamma
            rhs = semiclassical_constant(gamma) * positive_part_moment(V, gamma + 0.5, grid)
            return report(contrib.sum(), rhs, enumerate(contrib, 1), eigenvalues_V=list(levels))
        contrib = np.sqrt(lam)
        lhs = 0.25 * integral_of(V, grid)
        return report(lhs, contrib.sum(), enumerate(contrib, 1), orientation="lower", eigenvalues_V=list(levels))

    if name == "theorem1":
        _require(domain is Domain.WHOLE_LINE, "theorem1 is stated on the whole line")
        _require(gamma >= 1.5, "theorem1 needs gamma >= 3/2")
        v0 = _v0_values(V0, grid)
        _require(np.all(v0 >= 0.0), "theorem1 needs V0 >= 0")
        _require(is_single_well(v0), "theorem1 needs a single-well V0")
        bc = BoundaryCondition.decay()
        report_params["gamma"] = gamma
        return _shifted_report(report, V0, V, bc, grid, gamma, max_levels, tol, theorem_constant(gamma))

    if name == "theorem2":
        _require(domain is Domain.HALF_LINE, "theorem2 is stated on the half-line")
        _require(gamma >= 1.5, "theorem2 needs gamma >= 3/2")
        if bc is None:
            _require("sigma" in params, "theorem2 needs a Robin parameter sigma")
            bc = BoundaryCondition.robin(params["sigma"])
        _require(bc.kind == "robin", "theorem2 needs a Robin boundary condition")
        v0 = _v0_values(V0, grid)
        _require(np.all(v0 >= 0.0), "theorem2 needs V0 >= 0")
        _require(is_non_increasing(v0), "theorem2 needs a non-increasing V0")
        report_params.update(gamma=gamma, sigma=bc.sigma)
        return _shifted_report(report, V0, V, bc, grid, gamma, max_levels, tol, 2.0 * theorem_constant(gamma))

    if name == "theorem3":
        _require(isinstance(V0.family, Coulomb), "theorem3 needs a Coulomb V0")
        bc = BoundaryCondition.dirichlet() if bc is None else bc
        _require(bc.kind == "dirichlet", "theorem3 needs a Dirichlet condition")
        _require(params.get("k_max") is not None, "theorem3 needs an explicit k_max")
        k_max = int(params["k_max"])
        report_params["k_max"] = k_max
        mu = -np.asarray(closed_form_levels(V0, k_max))
        levels = solve_spectrum(combine(V0, V), bc, grid, max_levels=k_max, tol=tol).eigenvalues
        _require(len(levels) == k_max, f"only {len(levels)} levels of HV resolved on the grid, k_max={k_max}")
        lam = -np.asarray(levels)
        contrib = (np.sqrt(lam) - np.sqrt(mu)) ** 3
        rhs = 0.375 * positive_part_moment(V, 2.0, grid)
        return report(contrib.sum(), rhs, enumerate(contrib, 1), eigenvalues_V=list(levels), eigenvalues_0=list(-mu))

    if name in ("theorem4", "theorem4-tail"):
        _require(isinstance(V0.family, PoschlTeller), f"{name} needs a Poschl-Teller V0")
        bc = BoundaryCondition.decay()
        n_pt = math.ceil(V0.family.nu)
        mu = -np.asarray(closed_form_levels(V0))
        levels = _spectrum_or_empty(combine(V0, V), bc, grid, max_levels, tol)
        lam = -np.asarray(levels)
        if name == "theorem4-tail":
            _require(gamma >= 1.5, "theorem4-tail needs gamma >= 3/2")
            report_params["gamma"] = gamma
            tail = lam[n_pt:] ** gamma
            rhs = semiclassical_constant(gamma) * positive_part_moment(V, gamma + 0.5, grid)
            return report(tail.sum(), rhs, enumerate(tail, n_pt + 1), eigenvalues_V=list(levels))
        paired = min(n_pt, lam.size)
        contrib = list((np.sqrt(lam[:paired]) - np.sqrt(mu[:paired])) ** 3) + list(lam[n_pt:] ** 1.5)
        rhs = 0.1875 * positive_part_moment(V, 2.0, grid)
        return report(
            sum(contrib),
            rhs,
            enumerate(contrib, 1),
            eigenvalues_V=list(levels),
            eigenvalues_0=list(-mu),
            paired_levels=paired,
        )

    # proposition1
    K = int(params.get("K", 1))
    if bc is None:
        bc = BoundaryCondition.decay() if domain is Domain.WHOLE_LINE else BoundaryCondition.dirichlet()
    report_params.update(K=K, bc=bc.as_dict())
    # the statement runs over k <= M with M the level count of both operators;
    # H0's count caps the ladder itself, H_V's is applied here
    n_V = len(_spectrum_or_empty(combine(V0, V), bc, grid, K, tol))
    _require(n_V >= 1, "proposition1 needs a bound state of HV")
    ladder = build_ladder(V0, V, bc, grid, min(K, n_V), tol)
    mu = [s.mu for s in ladder.steps]
    lam = [s.lam for s in ladder.steps]
    diff = ladder_difference_sum(-np.asarray(lam), -np.asarray(mu), ladder.K)
    factor = 0.375 if domain is Domain.HALF_LINE else 0.1875
    rhs = factor * integral_of(V, grid, power=2) + ladder.error_term
    return report(
        diff.proposition,
        rhs,
        enumerate(diff.per_level_proposition, 1),
        error_term=ladder.error_term,
        K_effective=ladder.K,
        mu=mu,
        lam=lam,
        cubic=diff.cubic,
        ordering_violation=diff.ordering_violation,
        ladder=[s.summary() for s in ladder.steps],
    )


def _shifted_report(report, V0, V, bc, grid, gamma, max_levels, tol, constant):
    ground = _spectrum_or_empty(V0, bc, grid, 1, tol)
    mu1 = -ground[0] if ground else 0.0
    levels = _spectrum_or_empty(combine(V0, V), bc, grid, max_levels, tol)
    lam = -np.asarray(levels)
    contrib = np.maximum(np.sqrt(lam) - math.sqrt(mu1), 0.0) ** (2.0 * gamma)
    rhs = constant * positive_part_moment(V, gamma + 0.5, grid)
    return report(contrib.sum(), rhs, enumerate(contrib, 1), eigenvalues_V=list(levels), mu1=mu1, constant=constant)
