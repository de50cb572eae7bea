"""Command-line front end: ``ltladder {spectrum,lift,verify,corpus,scan}``.

Exit codes: 0 success, 1 an inequality failed, 2 usage or configuration
error, 3 numerical failure. Output is JSON (default) or CSV and always carries
the fully resolved configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional

from .commutation import build_ladder
from .eigensolver import reference_grid, solve_spectrum
from .errors import LadderError, NoBoundState, NumericalFailure
from .harness import TARGETS, margin_scan, run_corpus
from .liebthirring import NAMES, verify
from .numerics import Grid
from .potentials import (
    BoundaryCondition,
    Coulomb,
    DoubleWell,
    Domain,
    Gaussian,
    PoschlTeller,
    PotentialSpec,
    SechBump,
    SquareWell,
    Zero,
    combine,
    read_tabulated,
)

COMMANDS = ("spectrum", "lift", "verify", "corpus", "scan")
FAMILIES = ("poschl-teller", "coulomb", "square-well", "gaussian", "double-well", "sech2", "zero", "file")

DEFAULTS = {
    "family": None,
    "domain": None,
    "nu": None,
    "kappa": None,
    "depth": None,
    "width": 1.0,
    "half_width": None,
    "separation": None,
    "amplitude": None,
    "scale": 1.0,
    "center": 0.0,
    "potential_file": None,
    "perturbation": "zero",
    "bc": None,
    "sigma": None,
    "grid_min": None,
    "grid_max": None,
    "grid_n": None,
    "gamma": 1.5,
    "K": 1,
    "k_max": None,
    "levels": 50,
    "name": None,
    "target": "theorem1",
    "n": 100,
    "seed": 0,
    "dump_dir": None,
    "values": None,
    "out": None,
    "format": "json",
}

# the family an inequality implies when --family is not given
IMPLIED_FAMILY = {"theorem3": "coulomb", "theorem4": "poschl-teller", "theorem4-tail": "poschl-teller"}


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("potential")
    g.add_argument("--family", choices=FAMILIES)
    g.add_argument("--domain", choices=[d.value for d in Domain])
    g.add_argument("--nu", type=float)
    g.add_argument("--kappa", type=float)
    g.add_argument("--depth", type=float)
    g.add_argument("--width", type=float)
    g.add_argument("--half-width", type=float)
    g.add_argument("--separation", type=float)
    g.add_argument("--amplitude", type=float)
    g.add_argument("--scale", type=float)
    g.add_argument("--center", type=float)
    g.add_argument("--potential-file", help="two-column tabulated potential (with --family file)")
    g.add_argument(
        "--perturbation",
        help="V as sech2:A[:scale[:center]], gaussian:D[:width[:center]], file:PATH or zero",
    )
    g.add_argument("--bc", choices=["dirichlet", "robin", "decay"])
    g.add_argument("--sigma", type=float, help="Robin parameter (implies --bc robin)")
    n = common.add_argument_group("numerics")
    n.add_argument("--grid-min", type=float)
    n.add_argument("--grid-max", type=float)
    n.add_argument("--grid-n", type=int)
    n.add_argument("--gamma", type=float)
    n.add_argument("--K", "-K", dest="K", type=int, help="ladder depth")
    n.add_argument("--k-max", type=int, help="number of Coulomb levels")
    n.add_argument("--levels", type=int, help="maximum number of levels to compute")
    o = common.add_argument_group("run")
    o.add_argument("--config", help="JSON file with RunConfig keys")
    o.add_argument("--seed", type=int)
    o.add_argument("--out", help="write output here instead of stdout")
    o.add_argument("--format", choices=["json", "csv"])

    parser = argparse.ArgumentParser(prog="ltladder", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="negative eigenvalues of -d^2 - V0 - V")
    sub.add_parser("lift", parents=[common], help="K commutation steps")
    p = sub.add_parser("verify", parents=[common], help="evaluate one inequality")
    p.add_argument("--name", choices=NAMES)
    p = sub.add_parser("corpus", parents=[common], help="verify a random corpus")
    p.add_argument("--target", choices=TARGETS)
    p.add_argument("--n", type=int)
    p.add_argument("--dump-dir", help="directory for failing-case dumps")
    p = sub.add_parser("scan", parents=[common], help="margins along a one-parameter family")
    p.add_argument("--name", choices=NAMES)
    p.add_argument("--values", help="comma-separated parameter values; 't' in --perturbation is replaced by each")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(loaded) - set(DEFAULTS) - {"command"}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update({k: v for k, v in loaded.items() if k != "command"})
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            cfg[key] = value
    cfg["command"] = args.command
    if cfg["sigma"] is not None and cfg["bc"] is None:
        cfg["bc"] = "robin"
    if cfg["command"] in ("verify", "scan"):
        cfg["name"] = cfg["name"] or ("theorem1" if cfg["command"] == "scan" else None)
        if cfg["name"] is None:
            raise UsageError("verify needs --name")
        if cfg["family"] is None:
            cfg["family"] = IMPLIED_FAMILY.get(cfg["name"], "zero")
    if cfg["command"] == "corpus":
        # corpus cases draw their own potentials
        cfg["family"] = None
        cfg["domain"] = Domain.HALF_LINE.value if cfg["target"] in ("theorem2", "theorem3") else Domain.WHOLE_LINE.value
    elif cfg["family"] is None:
        raise UsageError(f"{cfg['command']} needs --family")
    if cfg["domain"] is None:
        cfg["domain"] = Domain.HALF_LINE.value if cfg["family"] == "coulomb" else Domain.WHOLE_LINE.value
    cfg["_explicit_grid"] = any(cfg[k] is not None for k in ("grid_min", "grid_max", "grid_n"))
    ref = reference_grid(Domain(cfg["domain"]))
    for key, value in (("grid_min", ref.x_min), ("grid_max", ref.x_max), ("grid_n", ref.n_points)):
        if cfg[key] is None:
            cfg[key] = value
    if cfg["bc"] is None:
        cfg["bc"] = "decay" if cfg["domain"] == Domain.WHOLE_LINE.value else "dirichlet"
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    if cfg["grid_n"] < 5 or not cfg["grid_min"] < cfg["grid_max"]:
        raise UsageError("grid needs grid_min < grid_max and grid_n >= 5")
    if cfg["domain"] == Domain.HALF_LINE.value and cfg["grid_min"] != 0.0:
        raise UsageError("half-line grids start at 0")
    if cfg["K"] < 1 or cfg["levels"] < 1 or cfg["n"] < 1:
        raise UsageError("K, levels and n must be positive")
    if cfg["k_max"] is not None and cfg["k_max"] < 1:
        raise UsageError("k_max must be positive")
    if not cfg["gamma"] > 0:
        raise UsageError("gamma must be positive")
    if cfg["format"] not in ("json", "csv"):
        raise UsageError("format must be json or csv")


def _require(cfg: dict, *keys) -> list:
    missing = [k for k in keys if cfg[k] is None]
    if missing:
        raise UsageError(f"family {cfg['family']} needs " + ", ".join("--" + k.replace("_", "-") for k in missing))
    return [cfg[k] for k in keys]


def background(cfg: dict) -> PotentialSpec:
    fam = cfg["family"]
    domain = Domain(cfg["domain"])
    if fam == "file":
        (path,) = _require(cfg, "potential_file")
        return read_tabulated(path, domain)
    if fam == "poschl-teller":
        family = PoschlTeller(*_require(cfg, "nu"))
    elif fam == "coulomb":
        family = Coulomb(*_require(cfg, "nu", "kappa"))
    elif fam == "square-well":
        family = SquareWell(*_require(cfg, "depth", "half_width"))
    elif fam == "gaussian":
        family = Gaussian(*_require(cfg, "depth"), cfg["width"], cfg["center"])
    elif fam == "double-well":
        family = DoubleWell(*_require(cfg, "nu", "separation"))
    elif fam == "sech2":
        family = SechBump(*_require(cfg, "amplitude"), cfg["scale"], cfg["center"])
    else:
        family = Zero()
    return PotentialSpec(family, domain)


def parse_perturbation(text: str, domain: Domain, t: Optional[float] = None) -> PotentialSpec:
    """``sech2:A[:scale[:center]]``, ``gaussian:D[:width[:center]]``,
    ``file:PATH`` or ``zero``; a literal ``t`` stands for the scan parameter."""
    kind, _, rest = text.partition(":")
    if kind == "zero":
        return PotentialSpec(Zero(), domain)
    if kind == "file":
        return read_tabulated(rest, domain)
    if kind not in ("sech2", "gaussian"):
        raise UsageError(f"unknown perturbation {text!r}")
    fields = rest.split(":") if rest else []
    if not 1 <= len(fields) <= 3:
        raise UsageError(f"perturbation {text!r} needs 1 to 3 numbers")
    try:
        nums = [t if f == "t" else float(f) for f in fields]
    except ValueError as exc:
        raise UsageError(f"bad number in perturbation {text!r}") from exc
    if any(v is None for v in nums):
        raise UsageError("'t' in a perturbation only makes sense for scan")
    if nums[0] == 0.0:
        return PotentialSpec(Zero(), domain)
    if kind == "sech2":
        return PotentialSpec(SechBump(*nums), domain)
    return PotentialSpec(Gaussian(*nums), domain)


def _grid(cfg: dict) -> Grid:
    return Grid(float(cfg["grid_min"]), float(cfg["grid_max"]), int(cfg["grid_n"]))


def _bc(cfg: dict) -> BoundaryCondition:
    if cfg["bc"] == "robin":
        if cfg["sigma"] is None:
            raise UsageError("robin condition needs --sigma")
        return BoundaryCondition.robin(cfg["sigma"])
    return BoundaryCondition(cfg["bc"])


def _params(cfg: dict) -> dict:
    return {"gamma": cfg["gamma"], "K": cfg["K"], "k_max": cfg["k_max"], "max_levels": cfg["levels"]}


# -- commands -------------------------------------------------------------
# each returns (exit code, JSON result, CSV header, CSV rows, CSV comment lines)


def cmd_spectrum(cfg):
    V0 = background(cfg)
    V = parse_perturbation(cfg["perturbation"], V0.domain)
    levels = cfg["levels"]
    if isinstance(V0.family, Coulomb):
        (levels,) = _require(cfg, "k_max")
    spec = solve_spectrum(combine(V0, V), _bc(cfg), _grid(cfg), max_levels=levels)
    rows = [(k, e) for k, e in enumerate(spec.eigenvalues, 1)]
    return 0, {"eigenvalues": list(spec.eigenvalues), "count_found": spec.count_found}, ("k", "energy"), rows, []


def cmd_lift(cfg):
    V0 = background(cfg)
    V = parse_perturbation(cfg["perturbation"], V0.domain)
    grid = _grid(cfg)
    ladder = build_ladder(V0, V, _bc(cfg), grid, cfg["K"])
    try:
        lifted = solve_spectrum(ladder.lifted_V0, ladder.lifted_bc, grid, max_levels=cfg["levels"]).eigenvalues
    except NoBoundState:
        lifted = ()
    steps = [s.summary() for s in ladder.steps]
    result = {"K": ladder.K, "error_term": ladder.error_term, "steps": steps, "lifted_eigenvalues": list(lifted)}
    header = ("k", "mu", "lambda", "riccati_residual_g", "riccati_residual_f", "g_prime_max", "error_integral")
    rows = [tuple(s[h] for h in ("k", "mu", "lambda", *header[3:])) for s in steps]
    return 0, result, header, rows, [f"error_term {_fmt(ladder.error_term)}"]


def cmd_verify(cfg):
    V0 = background(cfg)
    V = parse_perturbation(cfg["perturbation"], V0.domain)
    bc = None if cfg["name"] in ("classical-lt", "schmincke", "theorem1", "theorem4", "theorem4-tail") else _bc(cfg)
    report = verify(cfg["name"], V0, V, bc, _grid(cfg), _params(cfg))
    comments = [f"{k} {_fmt(getattr(report, k))}" for k in ("lhs", "rhs", "margin", "holds", "slack", "orientation")]
    return (0 if report.holds else 1), report.as_dict(), ("k", "contribution"), list(report.per_level), comments


def cmd_corpus(cfg):
    grid = _grid(cfg) if cfg["_explicit_grid"] else None
    summary = run_corpus(cfg["n"], cfg["target"], cfg["seed"], cfg["gamma"], grid, cfg["dump_dir"])
    print(f"corpus: {summary.n_holds}/{summary.n_cases} hold, {summary.n_skipped} skipped, {summary.runtime_s:.1f} s", file=sys.stderr)
    rows = []
    for r in summary.results:
        if r.report is None:
            rows.append((r.case.id, math.nan, math.nan, math.nan, "skipped"))
        else:
            rows.append((r.case.id, r.report.lhs, r.report.rhs, r.report.margin, r.report.holds))
    violations = sum(1 for r in summary.results if r.report is not None and not r.report.holds)
    comments = [f"n_holds {summary.n_holds}", f"n_skipped {summary.n_skipped}", f"min_margin {_fmt(summary.min_margin)}"]
    return (1 if violations else 0), summary.as_dict(), ("id", "lhs", "rhs", "margin", "holds"), rows, comments


def cmd_scan(cfg):
    (values_text,) = _require(cfg, "values")
    try:
        values = [float(v) for v in str(values_text).split(",")]
    except ValueError as exc:
        raise UsageError(f"bad --values {values_text!r}") from exc
    V0 = background(cfg)
    domain = V0.domain
    bc = None if cfg["name"] in ("classical-lt", "schmincke", "theorem1", "theorem4", "theorem4-tail") else _bc(cfg)
    template = cfg["perturbation"]
    if "t" not in template.split(":")[1:]:
        raise UsageError("scan needs a perturbation with a 't' placeholder, e.g. sech2:t")
    rows = margin_scan(
        V0,
        lambda t: parse_perturbation(template, domain, t),
        values,
        cfg["name"],
        bc,
        _grid(cfg),
        _params(cfg),
    )
    table = [(r.parameter, r.lhs, r.rhs, r.margin, r.holds) for r in rows]
    result = {"rows": [dict(zip(("parameter", "lhs", "rhs", "margin", "holds"), t)) for t in table]}
    code = 0 if all(r.holds for r in rows) else 1
    return code, result, ("parameter", "lhs", "rhs", "margin", "holds"), table, []


HANDLERS = {"spectrum": cmd_spectrum, "lift": cmd_lift, "verify": cmd_verify, "corpus": cmd_corpus, "scan": cmd_scan}


# -- output ---------------------------------------------------------------


def _fmt(v):
    if isinstance(v, bool) or isinstance(v, str):
        return str(v).lower() if isinstance(v, bool) else v
    if isinstance(v, int):
        return str(v)
    return f"{v:.12g}"


def render(cfg: dict, result, header, rows, comments) -> str:
    public = {k: v for k, v in cfg.items() if not k.startswith("_")}
    if cfg["format"] == "json":
        return json.dumps({"config": public, "result": result}, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# config {json.dumps(public, sort_keys=True)}\n")
    for line in comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        code, result, header, rows, comments = HANDLERS[cfg["command"]](cfg)
        text = render(cfg, result, header, rows, comments)
    except UsageError as exc:
        print(f"ltladder: error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"ltladder: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (LadderError, ValueError, OSError) as exc:
        print(f"ltladder: error: {exc}", file=sys.stderr)
        return 2
    if cfg["out"]:
        Path(cfg["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
