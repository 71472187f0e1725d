"""Command-line front end.

Every command prints canonical JSON (floats as round-trip decimal strings)
unless another output format is requested.  Exit status: 0 success,
2 invalid input or spec, 3 resource budget, 4 internal inconsistency.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Optional, Sequence

from . import __version__
from ._util import dumps, low_discrepancy
from .analysis import (hat_modulus_check, porosity_report, restricted_system,
                       vertex_modulus)
from .conformal import (DEFAULT_TOL, TAU_CRIT, TAU_SUPP, attainment, clp_verdict,
                        critical_exponent, cutpoint_analysis, optimal_cascade_check,
                        verify_multiplicativity)
from .errors import ConfdimError, InputError
from .igs import DATA_DIR, GeneratorSpec, edge_budget, load_spec, require_valid, validate
from .kernels import BACKEND
from .metric_cascade import CascadeDensity, gh_embedding_error, regularity_report
from .modulus import TAU_FLOW, TAU_GAP, TOL_FEAS, solve_modulus

BUNDLED = ("diamond", "fig5_left", "fig5_right", "two_branch")


def bundled_examples() -> list[FsPath]:
    """Paths of the generator specs shipped with the package."""
    return [DATA_DIR / f"{name}.json" for name in BUNDLED]


def provenance() -> dict:
    return {"tool": "confdim", "version": __version__, "kernels": BACKEND,
            "tolerances": {"tol_feas": TOL_FEAS, "tau_gap": TAU_GAP, "tau_flow": TAU_FLOW,
                           "tau_crit": TAU_CRIT, "tau_supp": TAU_SUPP,
                           "bisection_width": DEFAULT_TOL},
            "tie_breaks": {"paths": "lexicographic edge-id sequence",
                           "theta_star": "lexicographically least qualifying shortest path",
                           "p1_minimizer": "lexicographically least optimal basic solution"},
            "edge_budget": edge_budget()}


@dataclass
class DimensionReport:
    name: str
    l_star: int
    n_edges: int
    intrinsic_dimension: float
    q_star: float
    attained: bool
    removable_edges: list
    clp: bool
    loewner_minimizer: bool
    witness: Optional[dict]
    theta_star: Optional[dict]
    provenance: dict = field(default_factory=provenance)

    def to_dict(self) -> dict:
        return {"name": self.name, "L_star": self.l_star, "n_edges": self.n_edges,
                "intrinsic_dimension": self.intrinsic_dimension, "q_star": self.q_star,
                "attained": self.attained, "removable_edges": self.removable_edges,
                "clp": self.clp, "loewner_minimizer": self.loewner_minimizer,
                "witness_density": self.witness, "theta_star": self.theta_star,
                "provenance": self.provenance}


def dimension_report(spec: GeneratorSpec) -> DimensionReport:
    require_valid(spec)
    crit = critical_exponent(spec)
    verdict = attainment(spec)
    clp = clp_verdict(spec, crit)
    L = int(spec.l_star)
    return DimensionReport(
        spec.name, L, spec.n_edges, math.log(spec.n_edges) / math.log(L), crit.q_star,
        verdict.attained, list(verdict.removable), clp["clp"], clp["loewner_minimizer"],
        None if verdict.witness is None else verdict.witness.as_dict(),
        None if verdict.theta_star is None else verdict.theta_star.to_dict())


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------
def _emit(obj, out: Optional[str] = None) -> None:
    text = obj if isinstance(obj, str) else dumps(obj)
    if out:
        FsPath(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_density(spec: GeneratorSpec, source: Optional[str]) -> CascadeDensity:
    if source is None:
        return CascadeDensity.constant(spec, 1.0 / int(spec.l_star))
    if source == "witness":
        verdict = attainment(spec)
        if verdict.witness is None:
            raise InputError("this generator has removable edges, so there is no attaining witness")
        return CascadeDensity(spec, verdict.witness)
    try:
        data = json.loads(FsPath(source).read_text())
    except FileNotFoundError as exc:
        raise InputError(f"density file not found: {source}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {source} at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    rho = data.get("rho") if isinstance(data, dict) else None
    if not isinstance(rho, dict):
        raise InputError('density JSON must have the form {"rho": {edge: value}}')
    return CascadeDensity(spec, {k: float(v) for k, v in rho.items()})


def _edges_arg(raw: str) -> list[str]:
    return [e.strip() for e in raw.split(",") if e.strip()]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------
def cmd_validate(args) -> int:
    spec = load_spec(args.spec)
    rep = validate(spec, auto_find_symmetry=args.find_symmetry)
    _emit(rep)
    return 0 if rep.ok else 2


def cmd_build(args) -> int:
    spec = require_valid(load_spec(args.spec))
    lev = spec.level(args.level)
    g = lev.graph
    if args.out == "dot":
        text = g.to_dot(f"G{args.level}")
    elif args.out == "graphml":
        text = g.to_graphml()
    else:
        fam = lev.family
        text = dumps({"level": args.level, "graph": g.to_json(),
                      "i_minus": sorted(fam.sources), "i_plus": sorted(fam.targets)})
    _emit(text, args.output)
    return 0


def cmd_modulus(args) -> int:
    spec = require_valid(load_spec(args.spec))
    lev = spec.level(args.level)
    res = solve_modulus(lev.graph, lev.family, args.p, tol=args.tol)
    _emit(res.to_dict(), args.json)
    return 0


def cmd_critical(args) -> int:
    spec = load_spec(args.spec)
    res = critical_exponent(spec, tol=args.tol)
    d = res.to_dict()
    d.pop("bracket")
    d["bisection_steps"] = len(res.bracket) - 1
    _emit(d)
    return 0


def cmd_attainment(args) -> int:
    spec = load_spec(args.spec)
    _emit(attainment(spec).to_dict(), args.json)
    return 0


def cmd_clp(args) -> int:
    _emit(clp_verdict(load_spec(args.spec)))
    return 0


def cmd_verify(args) -> int:
    spec = require_valid(load_spec(args.spec))
    if args.check == "multiplicativity":
        out = verify_multiplicativity(spec, args.p, args.level)
        ok = out["abs_error"] <= 1e-5
    elif args.check == "cascade":
        out = optimal_cascade_check(spec, args.p, args.level)
        ok = out["max_deviation"] <= 1e-5 and out["max_on_zero_words"] == 0.0
    elif args.check == "cutpoints":
        out = cutpoint_analysis(spec)
        ok = out["agree"]
    else:
        out = hat_modulus_check(spec, args.level)
        ok = out["ok"]
    out = dict(out, check=args.check, ok=ok)
    _emit(out)
    return 0 if ok else 4


def cmd_metric(args) -> int:
    spec = require_valid(load_spec(args.spec))
    cd = _load_density(spec, args.density)
    lev = spec.level(args.level)
    bg = cd.blocks(args.level)
    names = lev.vertex_names
    nv = lev.n_vertices
    if args.pairs == "all":
        sources = list(range(nv))
    elif args.pairs.startswith("sample:"):
        k = int(args.pairs.split(":", 1)[1])
        sources = sorted(set(low_discrepancy(min(k, nv), nv)))
    else:
        raise InputError("--pairs must be 'all' or 'sample:k'")
    rows = []
    for v in sources:
        d = bg.distances_from([v])
        for w in range(nv):
            if args.pairs == "all" and w < v:
                continue
            rows.append((names[v], names[w], float(d[w])))
    if args.out == "csv":
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["v", "w", "distance"])
        for a, b, d in rows:
            wr.writerow([a, b, repr(d)])
        _emit(buf.getvalue(), args.output)
    else:
        _emit({"level": args.level, "pairs": [{"v": a, "w": b, "distance": d} for a, b, d in rows]},
              args.output)
    return 0


def cmd_regularity(args) -> int:
    spec = require_valid(load_spec(args.spec))
    cd = _load_density(spec, args.density)
    rep = regularity_report(spec, cd, samples=args.samples, max_edges=spec.n_edges ** args.level)
    _emit(rep, args.json)
    return 0 if rep["all_inside"] else 4


def cmd_subset(args) -> int:
    spec = require_valid(load_spec(args.spec))
    F = _edges_arg(args.edges)
    rs = restricted_system(spec, F, args.level)
    out = rs.to_dict()
    if args.report:
        out["levels"] = [{"level": n, "n_edges": int(len(restricted_system(spec, F, n).edges)),
                          "expected": len(set(F)) ** n} for n in range(1, args.level + 1)]
    _emit(out)
    return 0


def cmd_porosity(args) -> int:
    spec = require_valid(load_spec(args.spec))
    F = None if args.auto or not args.edges else _edges_arg(args.edges)
    rep = porosity_report(spec, F, samples=args.samples)
    _emit(rep)
    return 0 if rep["ok"] or not rep["proper"] else 4


def cmd_vertex_modulus(args) -> int:
    spec = require_valid(load_spec(args.spec))
    lev = spec.level(args.level)
    _emit(vertex_modulus(lev, lev.minus_vertices, lev.plus_vertices, args.p))
    return 0


def cmd_report(args) -> int:
    spec = load_spec(args.spec)
    rep = dimension_report(spec)
    _emit(rep, args.json)
    if args.plot:
        from .plot import report_svg
        FsPath(args.plot).write_text(report_svg(spec, rep))
    return 0


def cmd_gh_error(args) -> int:
    spec = require_valid(load_spec(args.spec))
    cd = _load_density(spec, args.density)
    _emit({"level": args.level, "M_rho": cd.M, "error_bound": gh_embedding_error(cd, args.level)})
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------
def _positive_int(raw: str) -> int:
    v = int(raw)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _positive_float(raw: str) -> float:
    v = float(raw)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="confdim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"confdim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, func, help_, spec=True):
        sp = sub.add_parser(name, help=help_)
        if spec:
            sp.add_argument("spec", help="generator spec JSON (bundled examples resolve by name)")
        sp.set_defaults(func=func)
        return sp

    sp = cmd("validate", cmd_validate, "check the structural conditions of a spec")
    sp.add_argument("--find-symmetry", action="store_true")

    sp = cmd("build", cmd_build, "build the level-n replacement graph")
    sp.add_argument("--level", type=_positive_int, required=True)
    sp.add_argument("--out", choices=["dot", "graphml", "json"], default="json")
    sp.add_argument("--output")

    sp = cmd("modulus", cmd_modulus, "p-modulus of the end-to-end family")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--level", type=_positive_int, default=1)
    sp.add_argument("--tol", type=_positive_float, default=TAU_GAP)
    sp.add_argument("--json")

    sp = cmd("critical-exponent", cmd_critical, "exponent where the generator family has modulus one")
    sp.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL)

    sp = cmd("attainment", cmd_attainment, "removable edges and attainment verdict")
    sp.add_argument("--json")

    cmd("clp", cmd_clp, "combinatorial Loewner verdict")

    sp = cmd("verify", cmd_verify, "consistency checks")
    sp.add_argument("--check", choices=["multiplicativity", "cascade", "cutpoints", "hat"], required=True)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--level", type=_positive_int, default=2)

    sp = cmd("metric", cmd_metric, "cascade distances on level-n vertices")
    sp.add_argument("--density", help="density JSON, 'witness', or omitted for 1/L*")
    sp.add_argument("--level", type=_positive_int, required=True)
    sp.add_argument("--pairs", default="all")
    sp.add_argument("--out", choices=["csv", "json"], default="csv")
    sp.add_argument("--output")

    sp = cmd("regularity", cmd_regularity, "sampled ball-measure ratios")
    sp.add_argument("--density")
    sp.add_argument("--level", type=_positive_int, default=4)
    sp.add_argument("--samples", type=_positive_int, default=100)
    sp.add_argument("--json")

    sp = cmd("subset", cmd_subset, "restricted subsystem on an edge subset")
    sp.add_argument("--edges", required=True)
    sp.add_argument("--level", type=_positive_int, default=1)
    sp.add_argument("--report", action="store_true")

    sp = cmd("porosity", cmd_porosity, "porosity witnesses for X(F)")
    sp.add_argument("--auto", action="store_true", help="use the essential edges as F")
    sp.add_argument("--edges")
    sp.add_argument("--samples", type=_positive_int, default=50)

    sp = cmd("vertex-modulus", cmd_vertex_modulus, "vertex against edge modulus")
    sp.add_argument("--level", type=_positive_int, default=1)
    sp.add_argument("--p", type=float, default=2.0)

    sp = cmd("report", cmd_report, "full dimension report")
    sp.add_argument("--json")
    sp.add_argument("--plot", help="write an SVG weight table")

    sp = cmd("gh-error", cmd_gh_error, "per-level Gromov-Hausdorff embedding bound", spec=False)
    sp.add_argument("--level", type=_positive_int, required=True)
    sp.add_argument("--spec", default="diamond")
    sp.add_argument("--density")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return int(args.func(args))
    except ConfdimError as exc:
        sys.stderr.write(f"confdim: {type(exc).__name__}: {exc}\n")
        return exc.exit_code
    except (ValueError, KeyError) as exc:
        sys.stderr.write(f"confdim: invalid input: {exc}\n")
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
