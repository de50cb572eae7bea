"""Potential families and boundary conditions.

Sign convention: every potential ``V`` enters the operator as
``H = -d^2/dx^2 - V``, so positive values are attractive. The Coulomb family
therefore stores ``V(r) = kappa/r - nu(nu+1)/r^2`` and the operator reads
``-d^2/dr^2 + nu(nu+1)/r^2 - kappa/r``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import DomainError, UnsupportedFamily
from .numerics import Grid, GridFunction, integrate


class Domain(str, enum.Enum):
    WHOLE_LINE = "whole-line"
    HALF_LINE = "half-line"


def _sech2(x):
    # 1/cosh^2 without overflow for large |x|
    e = np.exp(-2.0 * np.abs(x))
    return 4.0 * e / (1.0 + e) ** 2


@dataclass(frozen=True)
class PoschlTeller:
    """``nu(nu+1) sech^2(x)``."""

    nu: float

    def __post_init__(self):
        if not self.nu > 0:
            raise DomainError(f"Poschl-Teller needs nu > 0, got {self.nu}")

    def __call__(self, x):
        return self.nu * (self.nu + 1.0) * _sech2(x)


@dataclass(frozen=True)
class Coulomb:
    """``kappa/r - nu(nu+1)/r^2`` on the half-line."""

    nu: float
    kappa: float

    def __post_init__(self):
        if not self.nu >= -0.5:
            raise DomainError(f"Coulomb needs nu >= -1/2, got {self.nu}")
        if not self.kappa > 0:
            raise DomainError(f"Coulomb needs kappa > 0, got {self.kappa}")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.kappa / r - self.nu * (self.nu + 1.0) / r**2


@dataclass(frozen=True)
class SquareWell:
    depth: float
    half_width: float

    def __post_init__(self):
        if not (self.depth > 0 and self.half_width > 0):
            raise DomainError("square well needs depth > 0 and half_width > 0")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= self.half_width, self.depth, 0.0)


@dataclass(frozen=True)
class Gaussian:
    """``depth * exp(-((x - center)/width)^2)``."""

    depth: float
    width: float = 1.0
    center: float = 0.0

    def __post_init__(self):
        if not (self.depth > 0 and self.width > 0):
            raise DomainError("gaussian needs depth > 0 and width > 0")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.depth * np.exp(-(((x - self.center) / self.width) ** 2))


@dataclass(frozen=True)
class DoubleWell:
    """``nu(nu+1) [sech^2(x - a) + sech^2(x + a)]``."""

    nu: float
    separation: float

    def __post_init__(self):
        if not (self.nu > 0 and self.separation > 0):
            raise DomainError("double well needs nu > 0 and separation > 0")

    def __call__(self, x):
        c = self.nu * (self.nu + 1.0)
        return c * (_sech2(np.asarray(x, dtype=float) - self.separation) + _sech2(np.asarray(x, dtype=float) + self.separation))


@dataclass(frozen=True)
class SechBump:
    """``amplitude * sech^2(scale*(x - center))``; amplitude may be any sign."""

    amplitude: float
    scale: float = 1.0
    center: float = 0.0

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError("sech bump needs scale > 0")

    def __call__(self, x):
        return self.amplitude * _sech2(self.scale * (np.asarray(x, dtype=float) - self.center))


@dataclass(frozen=True)
class Zero:
    def __call__(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Sum:
    """Pointwise sum of other families."""

    terms: tuple

    def __post_init__(self):
        if not self.terms:
            raise DomainError("Sum needs at least one term")
        object.__setattr__(self, "terms", tuple(self.terms))

    def __call__(self, x):
        return sum(t(x) for t in self.terms)


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Samples on a fixed grid.

    On the half-line a tabulated potential may carry a known singular part
    ``origin_kappa/r - origin_nu(origin_nu+1)/r^2`` near ``r = 0``; lifted
    Dirichlet potentials produced by the ladder do. The sample at ``r = 0`` is
    ignored in that case.
    """

    function: GridFunction
    origin_nu: Optional[float] = None
    origin_kappa: float = 0.0

    def __call__(self, x):
        return np.interp(x, self.function.x, self.function.values)


Family = Union[PoschlTeller, Coulomb, SquareWell, Gaussian, DoubleWell, SechBump, Zero, Sum, Tabulated]

FAMILY_NAMES = {
    PoschlTeller: "poschl-teller",
    Coulomb: "coulomb",
    SquareWell: "square-well",
    Gaussian: "gaussian",
    DoubleWell: "double-well",
    SechBump: "sech2",
    Zero: "zero",
    Sum: "sum",
    Tabulated: "tabulated",
}


@dataclass(frozen=True)
class PotentialSpec:
    family: Family
    domain: Domain = None

    def __post_init__(self):
        dom = self.domain
        if dom is None:
            dom = Domain.HALF_LINE if isinstance(self.family, Coulomb) else Domain.WHOLE_LINE
        dom = Domain(dom)
        object.__setattr__(self, "domain", dom)
        if isinstance(self.family, Coulomb) and dom is not Domain.HALF_LINE:
            raise DomainError("Coulomb potentials live on the half-line")
        if isinstance(self.family, (PoschlTeller, DoubleWell)) and dom is not Domain.WHOLE_LINE:
            raise DomainError(f"{FAMILY_NAMES[type(self.family)]} lives on the whole line")
        if isinstance(self.family, Tabulated) and self.family.origin_nu is not None and dom is not Domain.HALF_LINE:
            raise DomainError("an origin singularity only makes sense on the half-line")

    @property
    def name(self) -> str:
        return FAMILY_NAMES[type(self.family)]

    def origin_singularity(self) -> Optional[tuple]:
        """``(nu, kappa)`` of the singular part at ``r = 0``, or None."""
        fam = self.family
        if isinstance(fam, Coulomb):
            return fam.nu, fam.kappa
        if isinstance(fam, Tabulated) and fam.origin_nu is not None:
            return fam.origin_nu, fam.origin_kappa
        if isinstance(fam, Sum):
            found = [PotentialSpec(t, self.domain).origin_singularity() for t in fam.terms]
            found = [f for f in found if f is not None]
            if len(found) > 1:
                raise DomainError("at most one term of a sum may be singular at the origin")
            return found[0] if found else None
        return None

    def as_dict(self) -> dict:
        return {"family": self.name, "domain": self.domain.value, "params": _family_params(self.family)}


def _family_params(fam) -> dict:
    if isinstance(fam, Sum):
        return {"terms": [{"family": FAMILY_NAMES[type(t)], "params": _family_params(t)} for t in fam.terms]}
    if isinstance(fam, Tabulated):
        return {
            "grid": fam.function.grid.as_dict(),
            "origin_nu": fam.origin_nu,
            "origin_kappa": fam.origin_kappa,
        }
    return {k: float(v) for k, v in vars(fam).items()}


def whole_line(family) -> PotentialSpec:
    return PotentialSpec(family, Domain.WHOLE_LINE)


def half_line(family) -> PotentialSpec:
    return PotentialSpec(family, Domain.HALF_LINE)


ZERO = PotentialSpec(Zero())


def combine(base: PotentialSpec, extra: PotentialSpec) -> PotentialSpec:
    """The potential ``base + extra`` (as seen by ``-d^2 - base - extra``)."""
    if isinstance(extra.family, Zero):
        return base
    if isinstance(base.family, Zero):
        return PotentialSpec(extra.family, base.domain)
    return PotentialSpec(Sum((base.family, extra.family)), base.domain)


@dataclass(frozen=True)
class BoundaryCondition:
    """Condition at ``r = 0`` on the half-line, or decay at both ends.

    ``robin`` means ``u'(0) = sigma u(0)``.
    """

    kind: str = "decay"
    sigma: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("dirichlet", "robin", "decay"):
            raise ValueError(f"unknown boundary condition {self.kind!r}")
        if self.kind == "robin":
            if self.sigma is None or not math.isfinite(self.sigma):
                raise ValueError("robin condition needs a finite sigma")
        elif self.sigma is not None:
            raise ValueError(f"{self.kind} condition takes no sigma")

    @classmethod
    def dirichlet(cls):
        return cls("dirichlet")

    @classmethod
    def robin(cls, sigma: float):
        return cls("robin", float(sigma))

    @classmethod
    def decay(cls):
        return cls("decay")

    def check_domain(self, domain: Domain):
        if domain is Domain.WHOLE_LINE and self.kind != "decay":
            raise DomainError("whole-line problems only take the decay condition")
        if domain is Domain.HALF_LINE and self.kind == "decay":
            raise DomainError("half-line problems need a dirichlet or robin condition at 0")

    def as_dict(self) -> dict:
        return {"kind": self.kind, "sigma": self.sigma}


def evaluate(p: PotentialSpec, x):
    """Pointwise value of the potential (scalar or array input)."""
    xa = np.asarray(x, dtype=float)
    if p.domain is Domain.HALF_LINE:
        singular = p.origin_singularity() is not None
        if np.any(xa <= 0) if singular else np.any(xa < 0):
            raise DomainError(f"{p.name} is not defined at x = {x}")
    out = p.family(xa)
    return float(out) if np.ndim(out) == 0 else out


def sample(p: PotentialSpec, grid: Grid) -> np.ndarray:
    """Values on every grid point; a singular origin sample becomes NaN."""
    fam = p.family
    if isinstance(fam, Sum):
        v = sum(sample(PotentialSpec(t, p.domain), grid) for t in fam.terms)
    elif isinstance(fam, Tabulated):
        if fam.function.grid != grid:
            raise DomainError("tabulated potential lives on a different grid")
        v = np.array(fam.function.values)
    else:
        if p.domain is Domain.HALF_LINE and grid.x_min < 0:
            raise DomainError("half-line potentials need a grid with x_min >= 0")
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.array(fam(grid.points), dtype=float)
    if p.origin_singularity() is not None and grid.x_min == 0.0:
        v[0] = np.nan
    return v


def closed_form_levels(p: PotentialSpec, k_max: Optional[int] = None) -> list:
    """Negative eigenvalues in increasing order for the exactly solvable families.

    Poschl-Teller: ``-(nu-k+1)^2`` for ``k = 1..ceil(nu)``.
    Coulomb (Dirichlet): ``-kappa^2 / (4 (nu+k)^2)`` for ``k = 1..k_max``;
    the spectrum is infinite so ``k_max`` is mandatory there.
    """
    fam = p.family
    if isinstance(fam, PoschlTeller):
        n = math.ceil(fam.nu)
        if k_max is not None:
            n = min(n, k_max)
        return [-((fam.nu - k + 1.0) ** 2) for k in range(1, n + 1)]
    if isinstance(fam, Coulomb):
        if k_max is None or k_max < 1:
            raise ValueError("Coulomb levels need an explicit k_max >= 1")
        return [-(fam.kappa**2) / (4.0 * (fam.nu + k) ** 2) for k in range(1, k_max + 1)]
    raise UnsupportedFamily(f"no closed-form spectrum for {p.name}")


def positive_part_moment(p: PotentialSpec, exponent: float, grid: Grid) -> float:
    """``integral of max(V, 0)**exponent`` over the grid."""
    if exponent < 1:
        raise ValueError("exponent must be >= 1")
    v = sample(p, grid)
    if not np.all(np.isfinite(v)):
        raise DomainError(f"{p.name} is singular on the grid; moment diverges")
    return integrate(GridFunction(grid, np.maximum(v, 0.0) ** exponent))


def integral_of(p: PotentialSpec, grid: Grid, power: int = 1) -> float:
    """``integral of V**power`` over the grid (no positive part taken)."""
    v = sample(p, grid)
    if not np.all(np.isfinite(v)):
        raise DomainError(f"{p.name} is singular on the grid")
    return integrate(GridFunction(grid, v**power))


# -- single-well / monotonicity predicates --------------------------------


def is_single_well(values: np.ndarray, tol: float = 1e-12) -> bool:
    """Non-decreasing up to some index and non-increasing after it."""
    d = np.diff(np.asarray(values, dtype=float))
    scale = tol * max(1.0, float(np.max(np.abs(values))))
    signs = np.where(d > scale, 1, np.where(d < -scale, -1, 0))
    nz = signs[signs != 0]
    return not np.any((nz[1:] == 1) & (nz[:-1] == -1))


def is_non_increasing(values: np.ndarray, tol: float = 1e-12) -> bool:
    d = np.diff(np.asarray(values, dtype=float))
    return bool(np.all(d <= tol * max(1.0, float(np.max(np.abs(values))))))


# -- tabulated two-column text format -------------------------------------


def read_tabulated(path, domain: Domain = Domain.WHOLE_LINE, rtol: float = 1e-9) -> PotentialSpec:
    """Read whitespace-separated ``x V(x)`` pairs with uniform increasing ``x``.

    Lines starting with ``#`` are comments.
    """
    data = np.loadtxt(Path(path), comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns, found {data.shape[1]}")
    x, v = data[:, 0], data[:, 1]
    if x.size < 3:
        raise ValueError(f"{path}: need at least 3 samples")
    dx = np.diff(x)
    if np.any(dx <= 0):
        raise ValueError(f"{path}: x must be strictly increasing")
    grid = Grid(float(x[0]), float(x[-1]), int(x.size))
    if np.max(np.abs(x - grid.points)) > rtol * max(1.0, np.max(np.abs(x))) + 1e-6 * grid.h:
        raise ValueError(f"{path}: x is not uniformly spaced")
    return PotentialSpec(Tabulated(GridFunction(grid, v)), domain)


def write_tabulated(path, f: GridFunction, header: str = "") -> None:
    lines = [f"# {ln}" for ln in header.splitlines()] if header else []
    lines += [f"{x:.17g} {v:.17g}" for x, v in zip(f.x, f.values)]
    Path(path).write_text("\n".join(lines) + "\n")
