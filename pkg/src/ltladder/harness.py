"""Random corpora of admissible ``(V0, V)`` pairs and falsification sweeps.

Randomness comes from numpy's Philox counter-based generator. Case ``i`` of a
corpus with seed ``s`` splits ``SeedSequence([s, i])`` into three independent
streams (background well, boundary data, perturbation), so any case can be
regenerated on its own and the sweep order does not matter.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .commutation import check_log_concavity, default_window, log_derivative
from .eigensolver import ground_state, reference_grid
from .errors import LadderError
from .liebthirring import InequalityReport, verify
from .numerics import Grid, GridFunction
from .potentials import (
    BoundaryCondition,
    Coulomb,
    DoubleWell,
    Domain,
    Gaussian,
    PoschlTeller,
    PotentialSpec,
    SechBump,
    Sum,
    sample,
    write_tabulated,
)

TARGETS = ("theorem1", "theorem2", "theorem3", "theorem4", "log-concavity", "log-concavity-double-well")

# parameter ranges of the samplers
WELL_DEPTH = (0.1, 10.0)
WELL_RATE = (0.2, 5.0)
WELL_CENTER = (-3.0, 3.0)
BUMP_AMPLITUDE = (0.1, 8.0)
BUMP_SCALE = (0.3, 3.0)
BUMP_CENTER = (-5.0, 5.0)
SIGMA_RANGE = (-2.0, 2.0)
LOG_CONCAVITY_TOL = 1e-6


def streams(seed: int, case: int = 0) -> tuple:
    """``(well, boundary, perturbation)`` generators of one case."""
    children = np.random.SeedSequence([int(seed), int(case)]).spawn(3)
    return tuple(np.random.Generator(np.random.Philox(c)) for c in children)


def _well(rng: np.random.Generator, center: float) -> object:
    """``c1 sech^2(a(x-x0)) + c2 exp(-b(x-x0)^2)``; a quarter of the draws
    drop the Gaussian and another quarter drop the sech^2 term."""
    c1, c2 = rng.uniform(*WELL_DEPTH, size=2)
    a, b = rng.uniform(*WELL_RATE, size=2)
    shape = rng.choice(["both", "both", "sech2", "gaussian"])
    sech = SechBump(float(c1), float(a), center)
    gauss = Gaussian(float(c2), float(1.0 / math.sqrt(b)), center)
    if shape == "sech2":
        return sech
    if shape == "gaussian":
        return gauss
    return Sum((sech, gauss))


def sample_single_well(seed: int, case: int = 0) -> PotentialSpec:
    """Random whole-line single well with every term centred at the same ``x0``."""
    rng = streams(seed, case)[0]
    x0 = float(rng.uniform(*WELL_CENTER))
    return PotentialSpec(_well(rng, x0), Domain.WHOLE_LINE)


def sample_non_increasing(seed: int, case: int = 0) -> PotentialSpec:
    """Random half-line well centred at the origin, hence non-increasing in ``r``."""
    return PotentialSpec(_well(streams(seed, case)[0], 0.0), Domain.HALF_LINE)


def sample_perturbation(rng: np.random.Generator, domain: Domain) -> PotentialSpec:
    """One or two sech^2 / Gaussian bumps; the second may be repulsive."""
    lo, hi = BUMP_CENTER if domain is Domain.WHOLE_LINE else (0.0, BUMP_CENTER[1])
    terms = []
    for j in range(int(rng.integers(1, 3))):
        amp = float(rng.uniform(*BUMP_AMPLITUDE)) if j == 0 else float(rng.uniform(-2.0, BUMP_AMPLITUDE[1]))
        scale = float(rng.uniform(*BUMP_SCALE))
        center = float(rng.uniform(lo, hi))
        # the Gaussian family is attractive only; repulsive bumps are sech^2
        if rng.random() < 0.5 or amp <= 0.0:
            terms.append(SechBump(amp, 1.0 / scale, center))
        else:
            terms.append(Gaussian(amp, scale, center))
    fam = terms[0] if len(terms) == 1 else Sum(tuple(terms))
    return PotentialSpec(fam, domain)


@dataclass(frozen=True)
class CorpusCase:
    id: int
    seed: int
    target: str
    V0_spec: PotentialSpec
    V_spec: Optional[PotentialSpec]
    bc: BoundaryCondition
    params: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "seed": self.seed,
            "target": self.target,
            "V0": self.V0_spec.as_dict(),
            "V": None if self.V_spec is None else self.V_spec.as_dict(),
            "bc": self.bc.as_dict(),
            "params": self.params,
        }


def make_case(target: str, seed: int, case: int, gamma: float = 1.5) -> CorpusCase:
    """Draw case ``case`` of the corpus for ``target``; V0 satisfies the
    target's hypotheses by construction."""
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}; expected one of {TARGETS}")
    rng_well, rng, rng_V = streams(seed, case)
    params = {"gamma": gamma}
    if target in ("theorem1", "log-concavity"):
        V0 = sample_single_well(seed, case)
        bc = BoundaryCondition.decay()
    elif target == "theorem2":
        V0 = sample_non_increasing(seed, case)
        bc = BoundaryCondition.robin(float(rng.uniform(*SIGMA_RANGE)))
    elif target == "theorem3":
        V0 = PotentialSpec(Coulomb(float(rng_well.uniform(-0.5, 1.0)), float(rng_well.uniform(1.5, 3.0))), Domain.HALF_LINE)
        bc = BoundaryCondition.dirichlet()
        params = {"k_max": 2}
    elif target == "theorem4":
        V0 = PotentialSpec(PoschlTeller(float(rng_well.uniform(0.5, 3.0))), Domain.WHOLE_LINE)
        bc = BoundaryCondition.decay()
        params = {}
    else:
        V0 = PotentialSpec(DoubleWell(float(rng_well.uniform(1.5, 3.0)), float(rng_well.uniform(3.0, 5.0))), Domain.WHOLE_LINE)
        bc = BoundaryCondition.decay()
        params = {}
    V = None
    if not target.startswith("log-concavity"):
        V = sample_perturbation(rng_V, V0.domain)
    return CorpusCase(case, seed, target, V0, V, bc, params)


def log_concavity_report(V0: PotentialSpec, bc: BoundaryCondition, grid: Optional[Grid] = None) -> InequalityReport:
    """``sup g' <= 0`` for the ground-state log-derivative ``g`` of ``-d^2 - V0``,
    with slack ``LOG_CONCAVITY_TOL``."""
    grid = reference_grid(V0.domain) if grid is None else grid
    e, u = ground_state(V0, bc, grid)
    window = default_window(grid, V0.domain, -e, bc)
    _, worst, where = check_log_concavity(log_derivative(u, window, order=2), LOG_CONCAVITY_TOL)
    return InequalityReport(
        name="log-concavity",
        params={"V0": V0.as_dict(), "bc": bc.as_dict()},
        lhs=worst,
        rhs=0.0,
        per_level=((1, worst),),
        slack=LOG_CONCAVITY_TOL,
        metadata={"grid": grid.as_dict(), "mu": -e, "argmax": where, "window": list(window)},
    )


def run_case(case: CorpusCase, grid: Optional[Grid] = None) -> InequalityReport:
    if case.target.startswith("log-concavity"):
        return log_concavity_report(case.V0_spec, case.bc, grid)
    return verify(case.target, case.V0_spec, case.V_spec, case.bc, grid, case.params)


@dataclass(frozen=True)
class CaseResult:
    case: CorpusCase
    report: Optional[InequalityReport]
    error: Optional[str] = None

    def as_dict(self) -> dict:
        out = {"case": self.case.as_dict()}
        if self.report is not None:
            out["report"] = self.report.as_dict()
        else:
            out["skipped"] = self.error
        return out


@dataclass(frozen=True)
class CorpusSummary:
    target: str
    seed: int
    n_cases: int
    n_holds: int
    n_skipped: int
    min_margin: float
    worst_case_id: Optional[int]
    runtime_s: float
    results: tuple = ()

    @property
    def all_hold(self) -> bool:
        return self.n_holds == self.n_cases

    def as_dict(self, with_cases: bool = True) -> dict:
        """Structured form; the runtime is left out so output stays byte-stable."""
        out = {
            "target": self.target,
            "seed": self.seed,
            "n_cases": self.n_cases,
            "n_holds": self.n_holds,
            "n_skipped": self.n_skipped,
            "min_margin": self.min_margin,
            "worst_case_id": self.worst_case_id,
        }
        if with_cases:
            out["cases"] = [r.as_dict() for r in self.results]
        return out


def dump_case(result: CaseResult, directory, grid: Optional[Grid] = None) -> list:
    """Write a replayable record of one case: JSON with specs, seed, grid and
    report, plus the sampled potentials in the tabulated format."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    case = result.case
    grid = reference_grid(case.V0_spec.domain) if grid is None else grid
    stem = f"{case.target}_seed{case.seed}_case{case.id:04d}"
    record = result.as_dict()
    record["grid"] = grid.as_dict()
    paths = [directory / f"{stem}.json"]
    paths[0].write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    header = f"target={case.target} seed={case.seed} case={case.id}"
    for label, spec in (("V0", case.V0_spec), ("V", case.V_spec)):
        if spec is None:
            continue
        v = sample(spec, grid)
        v = np.where(np.isfinite(v), v, 0.0)
        path = directory / f"{stem}_{label}.dat"
        write_tabulated(path, GridFunction(grid, v), f"{header}\n{label}: {json.dumps(spec.as_dict(), sort_keys=True)}")
        paths.append(path)
    return paths


def run_corpus(
    n: int,
    target: str,
    seed: int,
    gamma: float = 1.5,
    grid: Optional[Grid] = None,
    dump_dir=None,
) -> CorpusSummary:
    """Verify ``n`` sampled cases. Solver failures become skip records; cases
    with ``holds = false`` are dumped to ``dump_dir`` when it is given."""
    if n < 1:
        raise ValueError("n must be >= 1")
    start = time.perf_counter()
    results = []
    for i in range(n):
        case = make_case(target, seed, i, gamma)
        try:
            results.append(CaseResult(case, run_case(case, grid)))
        except LadderError as exc:
            results.append(CaseResult(case, None, f"{type(exc).__name__}: {exc}"))
    done = [r for r in results if r.report is not None]
    holds = [r for r in done if r.report.holds]
    worst = min(done, key=lambda r: r.report.margin, default=None)
    if dump_dir is not None:
        for r in done:
            if not r.report.holds:
                dump_case(r, dump_dir, grid)
    return CorpusSummary(
        target=target,
        seed=seed,
        n_cases=n,
        n_holds=len(holds),
        n_skipped=n - len(done),
        min_margin=math.inf if worst is None else worst.report.margin,
        worst_case_id=None if worst is None else worst.case.id,
        runtime_s=time.perf_counter() - start,
        results=tuple(results),
    )


@dataclass(frozen=True)
class ScanRow:
    parameter: float
    lhs: float
    rhs: float
    margin: float
    holds: bool


def margin_scan(
    V0_spec: PotentialSpec,
    family: Callable[[float], PotentialSpec],
    values: Sequence[float],
    name: str = "theorem1",
    bc: Optional[BoundaryCondition] = None,
    grid: Optional[Grid] = None,
    params: Optional[dict] = None,
) -> list:
    """Margins of ``name`` along the one-parameter family ``V = family(t)``."""
    if len(values) < 2:
        raise ValueError("a scan needs at least 2 parameter values")
    rows = []
    for t in values:
        r = verify(name, V0_spec, family(float(t)), bc, grid, params)
        rows.append(ScanRow(float(t), r.lhs, r.rhs, r.margin, r.holds))
    return rows
