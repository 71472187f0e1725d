"""Critical exponent, removable edges and the attainment verdict.

The conformal dimension of a symmetric Laakso-type space equals the unique
exponent ``Q*`` at which the generator's end-to-end family has modulus one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._util import UNREACHABLE
from .errors import ConsistencyError, ConfdimError, InputError, ValidationError
from .graph_core import MultiGraph, Path, enumerate_paths, hop_distance, max_edge_disjoint_paths
from .igs import GeneratorSpec, require_valid
from .modulus import Density, solve_modulus

TAU_CRIT = 1e-7
TAU_SUPP = 1e-6
DEFAULT_TOL = 1e-10


@dataclass
class CriticalExponentResult:
    q_star: float
    bracket: list = field(default_factory=list)
    residual: float = 0.0
    rho: Optional[Density] = None
    cut_edge_case: bool = False

    def to_dict(self) -> dict:
        return {
            "q_star": self.q_star,
            "residual": self.residual,
            "cut_edge_case": self.cut_edge_case,
            "rho": None if self.rho is None else self.rho.as_dict(),
            "bracket": self.bracket,
        }


@dataclass
class AttainmentVerdict:
    q_star: float
    essential: tuple[str, ...]
    removable: tuple[str, ...]
    attained: bool
    witness: Optional[Density] = None
    theta_star: Optional[Path] = None
    rho_star: Optional[Density] = None

    def to_dict(self) -> dict:
        return {
            "q_star": self.q_star,
            "essential_edges": list(self.essential),
            "removable_edges": list(self.removable),
            "attained": self.attained,
            "witness": None if self.witness is None else self.witness.as_dict(),
            "theta_star": None if self.theta_star is None else self.theta_star.to_dict(),
        }


# ---------------------------------------------------------------------------
# cut points
# ---------------------------------------------------------------------------
def cut_edges(spec: GeneratorSpec) -> list[str]:
    """Generator edges lying on every end-to-end path (found by deletion)."""
    g = spec.g1
    out = []
    for e in g.edges:
        h = MultiGraph(g.vertices, [(f, *g.ends(f)) for f in g.edges if f != e])
        if hop_distance(h, spec.i_minus, spec.i_plus) is UNREACHABLE:
            out.append(e)
    return out


def cutpoint_analysis(spec: GeneratorSpec) -> dict:
    """Three equivalent cut-edge characterizations, which must agree."""
    g = spec.g1
    mod1 = solve_modulus(g, spec.family, 1.0).value
    cuts = cut_edges(spec)
    disjoint, _ = max_edge_disjoint_paths(g, spec.i_minus, spec.i_plus)
    a = abs(mod1 - 1.0) <= TAU_CRIT
    b = bool(cuts)
    c = disjoint < 2
    if not (a == b == c):
        raise ConsistencyError(
            f"cut-edge characterizations disagree: Mod1={mod1!r}, cut edges={cuts}, disjoint paths={disjoint}")
    return {"mod1": mod1, "mod1_is_one": a, "edge_on_every_path": b,
            "fewer_than_two_disjoint": c, "disjoint_paths": disjoint,
            "witness_edge": cuts[0] if cuts else None, "cut_edges": cuts, "agree": True}


# ---------------------------------------------------------------------------
# critical exponent
# ---------------------------------------------------------------------------
def _level_one_modulus(spec: GeneratorSpec, q: float):
    return solve_modulus(spec.g1, spec.family, q)


def critical_exponent(spec: GeneratorSpec, tol: float = DEFAULT_TOL) -> CriticalExponentResult:
    """Bisection for the exponent where the generator family has modulus one."""
    require_valid(spec)
    if hop_distance(spec.g1, spec.i_minus, spec.i_plus) is UNREACHABLE:
        raise ValidationError("the generator has no end-to-end path")
    cp = cutpoint_analysis(spec)
    if cp["mod1"] <= 1.0 + TAU_CRIT and cp["edge_on_every_path"]:
        return CriticalExponentResult(1.0, [[1.0, 1.0]], abs(cp["mod1"] - 1.0), None, True)
    lo, hi = 1.0, math.log2(spec.n_edges)
    history = [[lo, hi]]
    r_hi = _level_one_modulus(spec, hi)
    if r_hi.value >= 1.0:
        # the constant 1/2 density is optimal at the upper end
        return CriticalExponentResult(hi, history, abs(r_hi.value - 1.0), r_hi.rho)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        r = _level_one_modulus(spec, mid)
        if r.value > 1.0:
            lo = mid
        else:
            hi = mid
        history.append([lo, hi])
    q = 0.5 * (lo + hi)
    r = _level_one_modulus(spec, q)
    return CriticalExponentResult(q, history, abs(r.value - 1.0), r.rho)


def ar_exponent(rho, tol: float = 1e-12) -> float:
    """The exponent ``Q >= 1`` with ``sum rho(e)^Q = 1``."""
    vals = rho.values if isinstance(rho, Density) else np.asarray(
        list(rho.values()) if isinstance(rho, dict) else rho, dtype=np.float64)
    vals = vals[vals > 0]
    if vals.size == 0 or np.any(vals >= 1.0):
        raise InputError("density values must lie in (0, 1)")
    logs = np.log(vals)

    def f(q):
        return float(np.sum(np.exp(q * logs))) - 1.0

    if f(1.0) < -tol:
        raise InputError("density has total mass below one; no exponent Q >= 1 normalizes it")
    lo, hi = 1.0, 2.0
    while f(hi) > 0:
        lo, hi = hi, 2.0 * hi
    def polish(q):
        # a few extra Newton steps while they still shrink the residual
        best = abs(f(q))
        for _ in range(4):
            cand = q - f(q) / float(np.sum(logs * np.exp(q * logs)))
            if not abs(f(cand)) < best:
                break
            q, best = cand, abs(f(cand))
        return q

    q = lo
    for _ in range(200):
        val = f(q)
        if abs(val) <= tol:
            return polish(q)
        if val > 0:
            lo = q
        else:
            hi = q
        slope = float(np.sum(logs * np.exp(q * logs)))
        step = q - val / slope
        q = step if lo < step < hi else 0.5 * (lo + hi)
    return q


# ---------------------------------------------------------------------------
# removable edges and attainment
# ---------------------------------------------------------------------------
def theta_star(spec: GeneratorSpec) -> Path:
    """Lexicographically least shortest end-to-end path with symmetric endpoints."""
    if spec.symmetry is None:
        raise ValidationError("theta* needs a symmetric spec")
    l_star = spec.l_star
    if l_star is UNREACHABLE:
        raise ValidationError("the generator has no end-to-end path")
    paths = enumerate_paths(spec.g1, spec.family, simple_only=True, cap=200_000)
    good = [p for p in paths
            if len(p) == l_star and spec.symmetry[p.start] == p.end]
    if not good:
        raise ConfdimError("theta* not found: no shortest path has eta-paired endpoints")
    return min(good, key=lambda p: p.edges)


def removable_edges(spec: GeneratorSpec, crit: Optional[CriticalExponentResult] = None,
                    tau_supp: float = TAU_SUPP) -> AttainmentVerdict:
    crit = crit or critical_exponent(spec)
    edges = spec.g1.edges
    theta = None
    if crit.q_star == 1.0 and crit.cut_edge_case:
        theta = theta_star(spec)
        essential = set(theta.edges)
    else:
        essential = {e for e, v in zip(edges, crit.rho.values) if v > tau_supp}
    ess = tuple(e for e in edges if e in essential)
    rem = tuple(e for e in edges if e not in essential)
    return AttainmentVerdict(crit.q_star, ess, rem, not rem, None, theta, crit.rho)


def symmetrize(spec: GeneratorSpec, values: np.ndarray) -> np.ndarray:
    """Average a density over the orbits of the edge symmetry."""
    perm = spec.eta_edge_index()
    out = np.asarray(values, dtype=np.float64).copy()
    seen = np.zeros(len(out), dtype=bool)
    for k in range(len(out)):
        if seen[k]:
            continue
        orbit = [k]
        j = perm[k]
        while j != k:
            orbit.append(int(j))
            j = perm[j]
        out[orbit] = out[orbit].mean()
        seen[orbit] = True
    return out


def attainment(spec: GeneratorSpec, tol: float = DEFAULT_TOL) -> AttainmentVerdict:
    """Attained exactly when no generator edge is removable."""
    crit = critical_exponent(spec, tol)
    verdict = removable_edges(spec, crit)
    if verdict.attained and crit.rho is None:
        # Q* = 1 with theta* covering every edge: the generator is one path
        verdict.witness = Density(spec.g1, np.full(spec.n_edges, 1.0 / spec.l_star))
    elif verdict.attained:
        vals = symmetrize(spec, crit.rho.values)
        q = crit.q_star
        vals = vals * np.sum(vals ** q) ** (-1.0 / q)
        verdict.witness = Density(spec.g1, vals)
    return verdict


# ---------------------------------------------------------------------------
# consistency checks
# ---------------------------------------------------------------------------
def verify_multiplicativity(spec: GeneratorSpec, p: float, n: int) -> dict:
    """Compare the level-``n`` modulus with the ``n``-th power of the level-1 value."""
    base = solve_modulus(spec.g1, spec.family, p).value
    lev = spec.level(n)
    top = solve_modulus(lev.graph, lev.family, p).value
    expected = base ** n
    return {"p": p, "n": n, "level_modulus": top, "power": expected,
            "abs_error": abs(top - expected), "rel_error": abs(top - expected) / expected}


def cascade_product(spec: GeneratorSpec, base: np.ndarray, n: int) -> np.ndarray:
    """Level-``n`` products of base weights, first letter most significant."""
    out = np.asarray(base, dtype=np.float64)
    for _ in range(n - 1):
        out = np.multiply.outer(out, base).ravel()
    return out


def optimal_cascade_check(spec: GeneratorSpec, p: float, n: int) -> dict:
    if p <= 1:
        raise InputError("the cascade representation of the optimum needs p > 1")
    r1 = solve_modulus(spec.g1, spec.family, p)
    lev = spec.level(n)
    rn = solve_modulus(lev.graph, lev.family, p)
    prod = cascade_product(spec, r1.rho.values, n)
    dev = np.abs(rn.rho.values - prod)
    zeros = prod == 0.0
    return {"p": p, "n": n, "max_deviation": float(dev.max()),
            "zero_words": int(zeros.sum()),
            "max_on_zero_words": float(rn.rho.values[zeros].max(initial=0.0))}


def clp_verdict(spec: GeneratorSpec, crit: Optional[CriticalExponentResult] = None) -> dict:
    """CLP holds exactly when the generator has two edge-disjoint end-to-end paths."""
    disjoint, _ = max_edge_disjoint_paths(spec.g1, spec.i_minus, spec.i_plus)
    clp = disjoint >= 2
    verdict = removable_edges(spec, crit)
    q = verdict.q_star
    return {"clp": clp, "disjoint_paths": disjoint, "q_star": q,
            "attained": verdict.attained,
            "loewner_minimizer": bool(clp and verdict.attained and q > 1.0)}
