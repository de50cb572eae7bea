"""Bound states of ``H = -d^2/dx^2 - V`` by Numerov shooting.

Levels are bracketed with the node count of the solution shot from the left
end (Sturm oscillation: the count equals the number of eigenvalues below the
trial energy) and then refined by bisection on the Numerov Casoratian of the
left and right shots. The Casoratian is independent of the matching point, so
its sign is a clean matching determinant.

Boundary data:

* whole line, and the far end of the half-line: decaying WKB start
  ``u ~ s^(-1/4) exp(-integral sqrt(s))`` with ``s = -(V + E)``. For
  potentials that vanish at the box edge this is the exact decaying
  exponential, so the box problem reproduces the whole-line spectrum.
* Dirichlet at ``r = 0``: Frobenius series ``u = r^(nu+1) sum c_j r^j`` with
  the regular part of the potential replaced by a polynomial fit. Regular potentials
  start at ``r = h``. Singular ones (``nu(nu+1)/r^2`` and ``kappa/r`` terms)
  take the series out to ``r = 0.5`` and march from there: ``r^(nu+1)`` is not
  smooth, and marching through ``r ~ h`` loses accuracy like ``h^(nu+1/2)``.
* Robin ``u'(0) = sigma u(0)``: fourth-order Taylor start.

Reference configuration: ``h = 1e-2`` on ``[-20, 20]`` (whole line) or
``[0, 60]`` (half-line). Probability mass beyond the box is neglected; for a
level ``E`` it is of order ``exp(-2 sqrt|E| L)`` with ``L`` the distance from
the outer turning point to the box edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .errors import GridTooCoarse, NoBoundState, DomainError
from .numerics import Grid, GridFunction, bisect_root, simpson
from .potentials import BoundaryCondition, Domain, PotentialSpec, sample

DEFAULT_TOL = 1e-12
ENERGY_FLOOR = 1e-9
_RESCALE = 1e200
# singular half-line problems switch from the series to Numerov here
SERIES_START = 0.5
_SERIES_TERMS = 60


def reference_grid(domain: Domain) -> Grid:
    if Domain(domain) is Domain.HALF_LINE:
        return Grid(0.0, 60.0, 6001)
    return Grid(-20.0, 20.0, 4001)


@njit(cache=True)
def _numerov(s, h2, u0, u1, first):
    """March ``u'' = s u`` from indices (first, first+1) to the end.

    Returns the solution (entries before ``first`` are zero) and its number of
    sign changes. Blocks are rescaled on overflow, which keeps signs.
    """
    n = s.size
    u = np.zeros(n)
    u[first] = u0
    u[first + 1] = u1
    c = h2 / 12.0
    for i in range(first + 1, n - 1):
        u[i + 1] = (2.0 * (1.0 + 5.0 * c * s[i]) * u[i] - (1.0 - c * s[i - 1]) * u[i - 1]) / (1.0 - c * s[i + 1])
        if abs(u[i + 1]) > 1e200:
            for j in range(first, i + 2):
                u[j] *= 1e-200
    nodes = 0
    last = 0.0
    for i in range(first, n):
        if u[i] != 0.0:
            if last != 0.0 and (u[i] > 0.0) != (last > 0.0):
                nodes += 1
            last = u[i]
    return u, nodes


def _frobenius(r, nu, kappa, e, w, terms=_SERIES_TERMS):
    """Regular solution ``r^(nu+1) sum c_j r^j`` of
    ``u'' = (nu(nu+1)/r^2 - kappa/r - e - sum_m w_m r^m) u``."""
    c = np.zeros(terms)
    c[0] = 1.0
    for j in range(1, terms):
        acc = -kappa * c[j - 1]
        if j >= 2:
            acc -= e * c[j - 2]
            for m, wm in enumerate(w):
                if j - 2 - m >= 0:
                    acc -= wm * c[j - 2 - m]
        c[j] = acc / (j * (j + 2.0 * nu + 1.0))
    r = np.asarray(r, dtype=float)
    return r ** (nu + 1.0) * np.polynomial.polynomial.polyval(r, c)


def _regular_fit(r, w, tol=1e-9, max_degree=10, skip=4):
    """Monomial coefficients of a polynomial fit to the regular part of the
    potential near the origin.

    The degree grows until the fit error drops below ``tol`` (relative). The
    first ``skip`` samples are left out: for lifted potentials they carry the
    error of one-sided difference stencils, and chasing it with a high degree
    produces huge coefficients that the series cannot sum.
    """
    if w.size <= 8:
        return np.array([w[0]])
    if w.size > skip + 12:
        r, w = r[skip:], w[skip:]
    scale = max(1.0, float(np.max(np.abs(w))))
    best, best_err = None, math.inf
    for deg in range(3, min(max_degree, w.size - 4) + 1):
        coef = np.polynomial.Polynomial.fit(r, w, deg).convert().coef
        err = float(np.max(np.abs(np.polynomial.polynomial.polyval(r, coef) - w)))
        if err < best_err:
            best, best_err = coef, err
        if err <= tol * scale:
            break
    return best


@dataclass(frozen=True)
class _Problem:
    """Potential samples and boundary data prepared for repeated shooting."""

    grid: Grid
    v: np.ndarray
    bc: BoundaryCondition
    origin: Optional[tuple]  # (nu, kappa, power series of the regular part, start index) for Dirichlet
    first: int

    @classmethod
    def build(cls, p: PotentialSpec, bc: BoundaryCondition, grid: Grid) -> "_Problem":
        bc.check_domain(p.domain)
        v = sample(p, grid)
        origin = None
        first = 0
        if p.domain is Domain.HALF_LINE:
            if grid.x_min != 0.0:
                raise DomainError("half-line problems need a grid starting at r = 0")
            sing = p.origin_singularity()
            if sing is not None and bc.kind != "dirichlet":
                raise DomainError(f"{p.name} with a singular origin needs a Dirichlet condition")
            if bc.kind == "dirichlet":
                first = 1
                nu, kappa = (0.0, 0.0) if sing is None else sing
                start = 1 if sing is None else max(1, int(round(SERIES_START / grid.h)))
                if start + 3 >= grid.n_points:
                    raise DomainError("grid too short for the series start at the origin")
                r = grid.points[1 : start + 11]
                w = v[1 : start + 11] - (kappa / r - nu * (nu + 1.0) / r**2)
                coef = _regular_fit(r, w)
                origin = (float(nu), float(kappa), tuple(float(c) for c in coef), start)
        if not np.all(np.isfinite(v[first:])):
            raise DomainError(f"{p.name} is not finite on the grid")
        return cls(grid, v, bc, origin, first)

    def s(self, e):
        s = -(self.v + e)
        if self.first:
            s[0] = 0.0
        return s

    def shoot_left(self, e, s=None):
        s = self.s(e) if s is None else s
        h = self.grid.h
        if self.bc.kind == "decay":
            u0, u1 = _wkb_pair(s[0], s[1], h)
        elif self.bc.kind == "robin":
            u0, u1 = 1.0, _robin_start(s, h, self.bc.sigma)
        else:
            return self._shoot_series(e, s)
        return _numerov(s, h * h, u0, u1, self.first)

    def _shoot_series(self, e, s):
        nu, kappa, w, start = self.origin
        r = self.grid.points[1 : start + 2]
        head = _frobenius(r, nu, kappa, e, w)
        u, nodes = _numerov(s, self.grid.h ** 2, head[-2], head[-1], start)
        if start > 1:
            # Numerov may have rescaled everything it produced
            scale = u[start] / head[-2] if head[-2] != 0.0 else 1.0
            u[1:start] = head[:-2] * scale
            seg = u[1 : start + 1]
            seg = seg[seg != 0.0]
            nodes += int(np.count_nonzero(np.diff(np.sign(seg))))
        return u, nodes

    def shoot_right(self, e, s=None):
        s = self.s(e) if s is None else s
        h = self.grid.h
        u0, u1 = _wkb_pair(s[-1], s[-2], h)
        u, nodes = _numerov(s[::-1].copy(), h * h, u0, u1, 0)
        return u[::-1].copy(), nodes

    def nodes(self, e) -> int:
        """Sturm count of the left shot, extended past the box end.

        Beyond the last point the solution continues as a mix of the decaying
        and growing exponentials; it has one more zero out there exactly when
        it falls off faster than the decaying one. Without this, weakly bound
        levels whose turning point lies outside the box are missed.
        """
        s = self.s(e)
        u, n = self.shoot_left(e, s)
        if s[-1] > 0.0 and s[-2] > 0.0 and u[-1] != 0.0:
            w_end, w_prev = _wkb_pair(s[-1], s[-2], self.grid.h)
            if u[-2] / u[-1] > w_prev / w_end:
                n += 1
        return n


def _wkb_pair(s0, s1, h):
    if s0 <= 0.0 or s1 <= 0.0:
        # energy above the edge potential: fall back to a hard wall
        return 0.0, 1e-30
    q0, q1 = math.sqrt(s0), math.sqrt(s1)
    amp = 1.0
    # the s^(-1/4) amplitude only means something where WKB is valid,
    # |s'| << s^(3/2); near threshold it would just amplify sampling noise
    if abs(s1 - s0) < 0.1 * h * min(s0, s1) ** 1.5:
        amp = (s0 / s1) ** 0.25
    return 1e-30, 1e-30 * amp * math.exp(0.5 * h * (q0 + q1))


def _robin_start(s, h, sigma):
    s0 = s[0]
    ds = (-3.0 * s[0] + 4.0 * s[1] - s[2]) / (2.0 * h)
    d2s = (2.0 * s[0] - 5.0 * s[1] + 4.0 * s[2] - s[3]) / h**2
    u2 = s0
    u3 = ds + s0 * sigma
    u4 = d2s + 2.0 * ds * sigma + s0 * s0
    return 1.0 + h * sigma + h * h / 2.0 * u2 + h**3 / 6.0 * u3 + h**4 / 24.0 * u4


def _matching_index(prob: _Problem, s) -> int:
    allowed = np.nonzero(s[prob.first:] < 0.0)[0]
    m = prob.first + (int(allowed[-1]) if allowed.size else int(np.argmin(s[prob.first:])))
    return min(max(m, prob.first + 2), prob.grid.n_points - 3)


def _casoratian(prob: _Problem, e, m) -> float:
    s = prob.s(e)
    ul, _ = prob.shoot_left(e, s)
    ur, _ = prob.shoot_right(e, s)
    c = prob.grid.h ** 2 / 12.0
    zl = (1.0 - c * s[m : m + 2]) * ul[m : m + 2]
    zr = (1.0 - c * s[m : m + 2]) * ur[m : m + 2]
    zl = zl / np.max(np.abs(zl))
    zr = zr / np.max(np.abs(zr))
    return float(zl[1] * zr[0] - zl[0] * zr[1])


@dataclass(frozen=True)
class Spectrum:
    """Negative eigenvalues (increasing) with L2-normalized eigenfunctions."""

    potential: PotentialSpec
    bc: BoundaryCondition
    grid: Grid
    eigenvalues: tuple
    eigenfunctions: tuple
    count_requested: int

    @property
    def count_found(self) -> int:
        return len(self.eigenvalues)

    @property
    def magnitudes(self) -> np.ndarray:
        """``|E_k|``, i.e. the mu_k or lambda_k of the ladder."""
        return -np.asarray(self.eigenvalues)

    def __len__(self):
        return len(self.eigenvalues)


def _find_level(prob: _Problem, k: int, lo: float, hi: float, tol: float) -> float:
    """Energy of the k-th level (0-based) given nodes(lo) <= k < nodes(hi)."""
    width = 1e-6
    while hi - lo > width * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if prob.nodes(mid) > k:
            hi = mid
        else:
            lo = mid
    m = _matching_index(prob, prob.s(0.5 * (lo + hi)))
    for _ in range(4):
        clo, chi = _casoratian(prob, lo, m), _casoratian(prob, hi, m)
        if clo == 0.0:
            return lo
        if chi == 0.0:
            return hi
        if (clo > 0) != (chi > 0):
            return bisect_root(lambda e: _casoratian(prob, e, m), lo, hi, tol)
        # root sits just outside the node bracket; widen it
        d = hi - lo
        lo, hi = lo - d, hi + d
    # no matching root found: keep refining the node bracket instead
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if prob.nodes(mid) > k:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _eigenfunction(prob: _Problem, e: float) -> np.ndarray:
    s = prob.s(e)
    ul, _ = prob.shoot_left(e, s)
    ur, _ = prob.shoot_right(e, s)
    m = _matching_index(prob, s)
    # splice where both shots are far from a node
    cand = [m - 1, m, m + 1]
    j = max(cand, key=lambda i: min(abs(ul[i]) / np.max(np.abs(ul[m - 1 : m + 2])), abs(ur[i]) / np.max(np.abs(ur[m - 1 : m + 2]))))
    u = np.empty_like(ul)
    u[: j + 1] = ul[: j + 1]
    u[j + 1 :] = ur[j + 1 :] * (ul[j] / ur[j])
    norm = math.sqrt(simpson(u * u, prob.grid.h))
    u = u / norm
    # sign convention: first significant lobe positive
    big = np.nonzero(np.abs(u) > 1e-3 * np.max(np.abs(u)))[0][0]
    if u[big] < 0:
        u = -u
    return u


def _interior_nodes(u: np.ndarray, first: int) -> int:
    peak = np.max(np.abs(u))
    w = u[first:]
    w = w[np.abs(w) > 1e-10 * peak]
    return int(np.count_nonzero(np.diff(np.sign(w)) != 0))


def solve_spectrum(
    p: PotentialSpec,
    bc: BoundaryCondition,
    grid: Optional[Grid] = None,
    max_levels: int = 50,
    tol: float = DEFAULT_TOL,
    energy_floor: float = ENERGY_FLOOR,
) -> Spectrum:
    """Up to ``max_levels`` eigenvalues below ``-energy_floor``."""
    if max_levels < 1:
        raise ValueError("max_levels must be >= 1")
    grid = reference_grid(p.domain) if grid is None else grid
    prob = _Problem.build(p, bc, grid)
    v = prob.v[prob.first:]
    e_low = -float(np.max(v)) - 1.0
    if bc.kind == "robin" and bc.sigma < 0:
        e_low = min(e_low, -(bc.sigma**2) - 1.0)
    while prob.nodes(e_low) > 0:
        e_low = 2.0 * e_low - 1.0
    e_high = -energy_floor
    total = prob.nodes(e_high)
    n = min(total, max_levels)
    if n == 0:
        raise NoBoundState(f"no eigenvalue below {e_high:g} for {p.name}")

    energies, functions = [], []
    lo = e_low
    for k in range(n):
        e = _find_level(prob, k, lo, e_high, tol)
        if e >= e_high:
            # the level sits at the continuum edge within the energy floor
            break
        u = _eigenfunction(prob, e)
        nodes = _interior_nodes(u, prob.first)
        # a state whose decay length exceeds the box keeps its outer node(s)
        # outside the grid; its energy still comes from exact exterior matching
        contained = math.sqrt(-e) * (grid.x_max - grid.x_min) > 1.0
        if contained and nodes != k:
            raise GridTooCoarse(f"level {k + 1} of {p.name} at E={e:.10g} has {nodes} nodes, expected {k}")
        if energies and not e > energies[-1]:
            raise GridTooCoarse(f"levels {k} and {k + 1} of {p.name} are not separated")
        energies.append(e)
        functions.append(GridFunction(grid, u))
        lo = e
    if not energies:
        raise NoBoundState(f"no eigenvalue below {e_high:g} for {p.name}")
    return Spectrum(p, bc, grid, tuple(energies), tuple(functions), max_levels)


def ground_state(p: PotentialSpec, bc: BoundaryCondition, grid: Optional[Grid] = None, tol: float = DEFAULT_TOL):
    """Lowest eigenvalue and its eigenfunction, positive in the interior."""
    spec = solve_spectrum(p, bc, grid, max_levels=1, tol=tol)
    return spec.eigenvalues[0], spec.eigenfunctions[0]
