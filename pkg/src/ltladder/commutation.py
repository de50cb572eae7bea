"""Commutation (Darboux) ladder for the pair ``H0 = -d^2 - V0`` and
``HV = H0 - V``.

Sign convention: the first-order factor is ``D = d/dx - g`` with adjoint
``D* = -d/dx - g`` and ``g = u'/u`` the ground-state log-derivative, so that
``D u = 0``, ``D*D = H0 + mu`` and ``DD* = H0 - 2g' + mu``. For the perturbed
operator ``Q = D - f`` with ``f = (D v)/v = v'/v - g``. The lifted pair is

    V0 -> V0 + 2 g',     V -> V + 2 f'

and each lift removes exactly the lowest level of both operators.

``g`` and ``f`` are reported on an interior window that stays away from the
box edges and from a Dirichlet origin, where ``g ~ (nu+1)/r``. Lifted
potentials are assembled on the full grid: outside the window they use the
same finite differences. With a Dirichlet origin every derivative is taken
of the smooth quantities ``log(u / r^(nu+1))`` and ``log(v / u)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .eigensolver import DEFAULT_TOL, reference_grid, solve_spectrum
from .errors import LadderBreakdown, NoBoundState, NonPositiveGroundState, NumericalFailure
from .numerics import Grid, GridFunction, derivative, differentiate, restrict, simpson
from .potentials import (
    BoundaryCondition,
    Domain,
    PotentialSpec,
    Tabulated,
    ZERO,
    combine,
    sample,
)

# finite-difference order used for every log-derivative and its derivative
ORDER = 4
ORIGIN_PAD = 0.5
ASYMPTOTIC_TOL = 1e-2
_TINY = 1e-280


def _window_indices(grid: Grid, window) -> tuple:
    i0 = int(math.ceil((window[0] - grid.x_min) / grid.h - 1e-9))
    i1 = int(math.floor((window[1] - grid.x_min) / grid.h + 1e-9))
    i0, i1 = max(i0, 0), min(i1, grid.n_points - 1)
    if i1 - i0 < 4:
        raise ValueError(f"window {window} is too small for grid {grid}")
    return i0, i1


def _log_derivative_full(u: np.ndarray, h: float, i0: int, i1: int, order: int = ORDER) -> np.ndarray:
    """``u'/u`` on ``i0..i1`` by differentiating ``log u`` (exact for
    exponential tails), using up to two extra points on each side."""
    lo = i0
    while lo > i0 - 2 and lo > 0 and u[lo - 1] > _TINY:
        lo -= 1
    hi = i1
    while hi < i1 + 2 and hi < u.size - 1 and u[hi + 1] > _TINY:
        hi += 1
    d = derivative(np.log(u[lo : hi + 1]), h, order)
    return d[i0 - lo : i0 - lo + (i1 - i0 + 1)]


def log_derivative(u: GridFunction, window, order: int = ORDER) -> GridFunction:
    """``u'/u`` restricted to ``window``; ``u`` must be positive there.

    ``order=2`` uses central secants of ``log u``; those are exactly
    non-increasing whenever ``log u`` is concave, which makes them the right
    input for :func:`check_log_concavity` when ``V0`` has jumps.
    """
    i0, i1 = _window_indices(u.grid, window)
    seg = u.values[i0 : i1 + 1]
    if np.any(seg <= 0.0):
        bad = u.grid.points[i0 + int(np.argmax(seg <= 0.0))]
        raise NonPositiveGroundState(f"ground state is not positive at x = {bad:.6g}")
    return GridFunction(u.grid.sub(i0, i1), _log_derivative_full(u.values, u.grid.h, i0, i1, order))


def _on(f: GridFunction, grid: Grid) -> np.ndarray:
    return restrict(f, grid).values


def riccati_residual_g(g: GridFunction, V0: GridFunction, mu: float) -> float:
    """``sup |g' - (mu - V0 - g^2)|`` over g's window."""
    gp = differentiate(g, ORDER).values
    return float(np.max(np.abs(gp - (mu - _on(V0, g.grid) - g.values**2))))


def perturbed_factorizer(psi: GridFunction, g: GridFunction, window=None) -> GridFunction:
    """``f = psi'/psi - g`` on g's window (or ``window`` if given)."""
    window = (g.grid.x_min, g.grid.x_max) if window is None else window
    h_psi = log_derivative(psi, window)
    return GridFunction(h_psi.grid, h_psi.values - _on(g, h_psi.grid))


def riccati_residual_f(f: GridFunction, g: GridFunction, V: GridFunction, lam: float, mu: float) -> float:
    """``sup |f' - (lam - mu - V - f^2 - 2 g f)|`` over f's window."""
    fp = differentiate(f, ORDER).values
    fv, gv = f.values, _on(g, f.grid)
    return float(np.max(np.abs(fp - (lam - mu - _on(V, f.grid) - fv**2 - 2.0 * gv * fv))))


def lift_once(V0: GridFunction, V: GridFunction, g: GridFunction, f: GridFunction) -> tuple:
    """``(V0 + 2g', V + 2f')`` on the window of ``g``."""
    grid = g.grid
    gp = differentiate(g, ORDER).values
    fp = differentiate(restrict(f, grid) if f.grid != grid else f, ORDER).values
    return (
        GridFunction(grid, _on(V0, grid) + 2.0 * gp),
        GridFunction(grid, _on(V, grid) + 2.0 * fp),
    )


def check_log_concavity(g: GridFunction, tol: float = 1e-6) -> tuple:
    """``(g' <= tol everywhere, max g', argmax location)``.

    ``g'`` is taken as the secant slope between neighbouring points, i.e. the
    mean of ``g'`` over each cell. A non-increasing ``g`` therefore never
    reports a positive slope, even where ``V0`` jumps and a higher-order
    stencil would overshoot.
    """
    slopes = np.diff(g.values) / g.grid.h
    j = int(np.argmax(slopes))
    worst = float(slopes[j])
    return worst <= tol, worst, float(g.x[j] + 0.5 * g.grid.h)


@dataclass(frozen=True, eq=False)
class LadderStep:
    k: int
    mu: float
    lam: float
    g: GridFunction
    f: GridFunction
    lifted_V0: GridFunction
    lifted_V: GridFunction
    riccati_residual_g: float
    riccati_residual_f: float
    g_prime_max: float
    error_integral: float
    asymptotic_ok: bool
    bc: BoundaryCondition
    g_at_origin: Optional[float] = None
    f_at_origin: Optional[float] = None

    def summary(self) -> dict:
        return {
            "k": self.k,
            "mu": self.mu,
            "lambda": self.lam,
            "riccati_residual_g": self.riccati_residual_g,
            "riccati_residual_f": self.riccati_residual_f,
            "g_prime_max": self.g_prime_max,
            "error_integral": self.error_integral,
            "asymptotic_ok": self.asymptotic_ok,
            "bc": self.bc.as_dict(),
            "g_at_origin": self.g_at_origin,
            "f_at_origin": self.f_at_origin,
            "window": [self.g.grid.x_min, self.g.grid.x_max],
        }


@dataclass(frozen=True, eq=False)
class Ladder:
    steps: tuple
    domain: Domain
    requested: int
    lifted_V0: Optional[PotentialSpec] = None
    lifted_V: Optional[PotentialSpec] = None
    lifted_bc: Optional[BoundaryCondition] = None

    @property
    def K(self) -> int:
        return len(self.steps)

    @property
    def error_terms(self) -> list:
        """Per-step ``integral g_k' f_k^2``."""
        return [s.error_integral for s in self.steps]

    @property
    def error_term(self) -> float:
        """``E_K``: 3/4 of the summed error integrals (3/2 on the half-line)."""
        factor = 1.5 if self.domain is Domain.HALF_LINE else 0.75
        return factor * float(sum(self.error_terms))


def default_window(grid: Grid, domain: Domain, mu: float, bc: BoundaryCondition) -> tuple:
    pad = min(2.0 / math.sqrt(mu), 0.25 * (grid.x_max - grid.x_min))
    pad = max(pad, 3 * grid.h)
    if domain is Domain.WHOLE_LINE:
        return grid.x_min + pad, grid.x_max - pad
    left = 0.0 if bc.kind == "robin" else ORIGIN_PAD
    return left, grid.x_max - pad


def _lift_full(spec0, specV, bc, grid, u, v, window, mu, lam):
    """Full-grid quantities for one step.

    Returns (g, f, g', f' on the valid range as full arrays, new V0 spec,
    new V spec, new bc, error integral, origin values).
    """
    n = grid.n_points
    x = grid.points
    h = grid.h
    v0 = sample(spec0, grid)
    vv = sample(specV, grid)
    sing = spec0.origin_singularity()
    dirichlet_origin = spec0.domain is Domain.HALF_LINE and bc.kind == "dirichlet"
    kappa_tail = sing[1] if sing is not None else 0.0

    valid = (u > _TINY) & (v > _TINY)
    idx = np.nonzero(valid)[0]
    a, b = int(idx[0]), int(idx[-1])
    if dirichlet_origin:
        a = max(a, 1)
    if not np.all(valid[a : b + 1]):
        raise NonPositiveGroundState("ground state changes sign inside the grid")
    gfull, ffull, gp, fp = (np.zeros(n) for _ in range(4))
    i0, i1 = _window_indices(grid, window)
    origin_nu = None
    if dirichlet_origin:
        nu = sing[0] if sing is not None else 0.0
        expo = nu + 1.0
        origin_nu = expo
        # u / r^(nu+1) and v / u are smooth up to the origin (where the
        # eigensolver's series makes both accurate); differencing them avoids
        # the stencil error of the r^(-k) terms in log u
        rr = x[a : b + 1]
        dlu = derivative(np.log(u[a : b + 1]) - expo * np.log(rr), h, ORDER)
        fn = derivative(np.log(v[a : b + 1]) - np.log(u[a : b + 1]), h, ORDER)
        gfull[a : b + 1] = expo / rr + dlu
        gp[a : b + 1] = -expo / rr**2 + derivative(dlu, h, ORDER)
        ffull[a : b + 1] = fn
        fp[a : b + 1] = derivative(fn, h, ORDER)
        ffull[0] = 0.0
        gp[0] = fp[0] = 0.0
    else:
        gfull[a : b + 1] = _log_derivative_full(u, h, a, b)
        ffull[a : b + 1] = _log_derivative_full(v, h, a, b) - gfull[a : b + 1]
        gp[a : b + 1] = derivative(gfull[a : b + 1], h, ORDER)
        fp[a : b + 1] = derivative(ffull[a : b + 1], h, ORDER)

    new_v0 = v0 + 2.0 * gp
    new_vv = vv + 2.0 * fp
    if dirichlet_origin:
        # placeholder: the sample at r = 0 is ignored once origin_nu is set
        new_v0[0] = 0.0
        new_vv[0] = 2.0 * new_vv[1] - new_vv[2]

    # error integral over the window, plus tails from the asymptotic constants
    gw = gp[i0 : i1 + 1]
    fw = ffull[i0 : i1 + 1]
    err = simpson(gw * fw**2, h)
    s_mu, s_lam = math.sqrt(mu), math.sqrt(lam)
    f_inf = -(s_lam - s_mu)
    err += f_inf**2 * (-s_mu - gfull[i1])
    if spec0.domain is Domain.WHOLE_LINE:
        err += f_inf**2 * (gfull[i0] - s_mu)
    elif dirichlet_origin and i0 > 1:
        band = gp[1 : i0 + 1] * ffull[1 : i0 + 1] ** 2
        err += simpson(band, h) + h * band[0]

    # asymptotic checks at the window edges
    r_hi = x[i1]
    g_exp = -s_mu + (kappa_tail / (2.0 * s_mu * r_hi) if kappa_tail else 0.0)
    f_exp = f_inf + (kappa_tail / (2.0 * r_hi) * (1.0 / s_lam - 1.0 / s_mu) if kappa_tail else 0.0)
    ok = abs(gfull[i1] - g_exp) <= ASYMPTOTIC_TOL and abs(ffull[i1] - f_exp) <= ASYMPTOTIC_TOL
    if spec0.domain is Domain.WHOLE_LINE:
        ok = ok and abs(gfull[i0] - s_mu) <= ASYMPTOTIC_TOL and abs(ffull[i0] + f_inf) <= ASYMPTOTIC_TOL

    origin_vals = (None, None)
    if spec0.domain is Domain.HALF_LINE and bc.kind == "robin":
        origin_vals = (float(gfull[0]), float(ffull[0]))
        ok = ok and abs(gfull[0] - bc.sigma) <= ASYMPTOTIC_TOL and abs(ffull[0]) <= ASYMPTOTIC_TOL

    domain = spec0.domain
    if domain is Domain.HALF_LINE:
        new_spec0 = PotentialSpec(Tabulated(GridFunction(grid, new_v0), origin_nu, kappa_tail if origin_nu is not None else 0.0), domain)
        new_bc = BoundaryCondition.dirichlet()
    else:
        new_spec0 = PotentialSpec(Tabulated(GridFunction(grid, new_v0)), domain)
        new_bc = bc
    new_specV = PotentialSpec(Tabulated(GridFunction(grid, new_vv)), domain)
    return gfull, ffull, gp, new_spec0, new_specV, new_bc, float(err), bool(ok), origin_vals, (i0, i1), v0, vv


def build_ladder(
    V0_spec: PotentialSpec,
    V_spec: PotentialSpec = ZERO,
    bc: Optional[BoundaryCondition] = None,
    grid: Optional[Grid] = None,
    K: int = 1,
    tol: float = DEFAULT_TOL,
    window=None,
) -> Ladder:
    """Run ``K`` commutation steps (capped at the number of bound states of H0).

    ``window`` overrides the default evaluation window of every step. Raises
    :class:`LadderBreakdown` (with the partial ladder attached as
    ``.ladder``) when a lifted operator loses its ground state or the ground
    state is not positive.
    """
    domain = V0_spec.domain
    V_spec = PotentialSpec(V_spec.family, domain)
    if bc is None:
        bc = BoundaryCondition.decay() if domain is Domain.WHOLE_LINE else BoundaryCondition.dirichlet()
    grid = reference_grid(domain) if grid is None else grid
    if K < 1:
        raise ValueError("K must be >= 1")
    try:
        n0 = solve_spectrum(V0_spec, bc, grid, max_levels=K, tol=tol).count_found
    except NoBoundState as exc:
        raise LadderBreakdown(f"H0 has no bound state: {exc}") from exc
    K_eff = min(K, n0)

    steps = []
    cur0, curV, cur_bc = V0_spec, V_spec, bc
    for k in range(1, K_eff + 1):
        def partial(msg, exc=None):
            err = LadderBreakdown(f"step {k}: {msg}")
            err.ladder = Ladder(tuple(steps), domain, K, cur0, curV, cur_bc)
            return err

        try:
            spec0 = solve_spectrum(cur0, cur_bc, grid, max_levels=1, tol=tol)
            specV = solve_spectrum(combine(cur0, curV), cur_bc, grid, max_levels=1, tol=tol)
        except NumericalFailure as exc:
            raise partial(f"lifted operator lost its ground state ({exc})") from exc
        mu = -spec0.eigenvalues[0]
        lam = -specV.eigenvalues[0]
        u = spec0.eigenfunctions[0].values
        v = specV.eigenfunctions[0].values
        win = default_window(grid, domain, mu, cur_bc) if window is None else window
        try:
            (gfull, ffull, gp, new0, newV, new_bc, err_int, ok, origin_vals, (i0, i1), v0, vv) = _lift_full(
                cur0, curV, cur_bc, grid, u, v, win, mu, lam
            )
        except NonPositiveGroundState as exc:
            raise partial(str(exc)) from exc

        wgrid = grid.sub(i0, i1)
        g = GridFunction(wgrid, gfull[i0 : i1 + 1])
        f = GridFunction(wgrid, ffull[i0 : i1 + 1])
        V0w = GridFunction(wgrid, v0[i0 : i1 + 1])
        Vw = GridFunction(wgrid, vv[i0 : i1 + 1])
        step = LadderStep(
            k=k,
            mu=mu,
            lam=lam,
            g=g,
            f=f,
            lifted_V0=GridFunction(wgrid, new0.family.function.values[i0 : i1 + 1]),
            lifted_V=GridFunction(wgrid, newV.family.function.values[i0 : i1 + 1]),
            riccati_residual_g=riccati_residual_g(g, V0w, mu),
            riccati_residual_f=riccati_residual_f(f, g, Vw, lam, mu),
            g_prime_max=float(np.max(gp[i0 : i1 + 1])),
            error_integral=err_int,
            asymptotic_ok=ok,
            bc=cur_bc,
            g_at_origin=origin_vals[0],
            f_at_origin=origin_vals[1],
        )
        steps.append(step)
        cur0, curV, cur_bc = new0, newV, new_bc
    return Ladder(tuple(steps), domain, K, cur0, curV, cur_bc)
