"""Restricted subsystems X(F), porosity witnesses and vertex modulus.

Ball statements are checked combinatorially. A level-``N`` cylinder that
meets no other cylinder of a family lies at distance at least
``(m/M) rho_N`` from it, so containment questions reduce to intersection
tests between words, carried out by :class:`~confdim.igs.LocalAddressing`
at any depth without building the level.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._util import UNREACHABLE, low_discrepancy
from .conformal import TAU_CRIT, AttainmentVerdict, removable_edges
from .errors import BudgetError, ConsistencyError, InputError
from .graph_core import MultiGraph, PathFamilySpec, hop_distance
from .igs import GeneratorSpec, LocalAddressing, ReplacementLevel, require_valid
from .kernels import dijkstra_csr
from .metric_cascade import CascadeDensity, space_diameter_bounds
from .modulus import TOL_FEAS, constraint_generation, solve_modulus

DEFAULT_DEPTH = 40
HAT_TOL = 1e-5


# ---------------------------------------------------------------------------
# restricted systems
# ---------------------------------------------------------------------------
def _edge_indices(spec: GeneratorSpec, F: Sequence) -> np.ndarray:
    g = spec.g1
    out = set()
    for e in F:
        if isinstance(e, (int, np.integer)):
            if not 0 <= int(e) < g.n_edges:
                raise InputError(f"edge index {e} out of range")
            out.add(int(e))
        elif e in g.eindex:
            out.add(g.eindex[e])
        else:
            raise InputError(f"unknown generator edge {e!r}")
    if not out:
        raise InputError("the edge subset F must be non-empty")
    return np.array(sorted(out), dtype=np.int64)


def restricted_words(spec: GeneratorSpec, F: Sequence, n: int) -> np.ndarray:
    """Sorted level-``n`` edge indices whose every letter lies in ``F``."""
    letters = _edge_indices(spec, F)
    idx = letters.copy()
    for _ in range(n - 1):
        idx = (idx[:, None] * spec.n_edges + letters[None, :]).ravel()
    return np.sort(idx)


def has_symmetric_path(spec: GeneratorSpec, F: Sequence) -> bool:
    """Whether ``G_1(F)`` holds a path from some ``v`` in I- to ``eta(v)``."""
    if spec.symmetry is None:
        return False
    g = spec.g1
    sub = g.edge_subgraph([g.edges[k] for k in _edge_indices(spec, F)])
    for v in sorted(spec.i_minus):
        w = spec.symmetry[v]
        if v in sub.vindex and w in sub.vindex and hop_distance(sub, [v], [w]) is not UNREACHABLE:
            return True
    return False


@dataclass
class RestrictedSystem:
    spec: GeneratorSpec
    F: tuple
    n: int
    edges: np.ndarray
    graph: MultiGraph
    family: Optional[PathFamilySpec]
    symmetric_path: bool

    @property
    def non_empty(self) -> bool:
        if self.family is None:
            return False
        return hop_distance(self.graph, self.family.sources, self.family.targets) is not UNREACHABLE

    def to_dict(self) -> dict:
        return {"F": list(self.F), "level": self.n, "n_edges": int(len(self.edges)),
                "n_vertices": self.graph.n_vertices, "family_non_empty": self.non_empty,
                "symmetric_path_in_F": self.symmetric_path,
                "sources": [] if self.family is None else sorted(self.family.sources),
                "targets": [] if self.family is None else sorted(self.family.targets)}


def restricted_system(spec: GeneratorSpec, F: Sequence, n: int) -> RestrictedSystem:
    """``G_n(F)`` with its restricted end-to-end family."""
    if n < 1:
        raise InputError("level must be at least 1")
    letters = _edge_indices(spec, F)
    names = tuple(spec.g1.edges[k] for k in letters)
    lev = spec.level(n)
    full = lev.graph
    keep = restricted_words(spec, letters, n)
    sub = full.edge_subgraph([full.edges[k] for k in keep])
    src = [full.vertices[i] for i in lev.minus_vertices if full.vertices[i] in sub.vindex]
    dst = [full.vertices[i] for i in lev.plus_vertices if full.vertices[i] in sub.vindex]
    fam = PathFamilySpec(src, dst) if src and dst else None
    rs = RestrictedSystem(spec, names, n, keep, sub, fam, has_symmetric_path(spec, letters))
    if rs.symmetric_path and n <= 2 and not rs.non_empty:
        raise ConsistencyError(f"G_{n}(F) holds no end-to-end path although F contains a symmetric one")
    return rs


def hat_modulus_check(spec: GeneratorSpec, n: int, verdict: Optional[AttainmentVerdict] = None,
                      tol: float = HAT_TOL) -> dict:
    """Modulus of the restricted family on ``G_n(E-hat)`` at the critical exponent."""
    verdict = verdict or removable_edges(spec)
    rs = restricted_system(spec, verdict.essential, n)
    if not rs.non_empty:
        raise ConsistencyError("the restricted family on the essential edges is empty")
    res = solve_modulus(rs.graph, rs.family, verdict.q_star)
    err = abs(res.value - 1.0)
    return {"level": n, "q_star": verdict.q_star, "essential_edges": list(verdict.essential),
            "n_edges": int(len(rs.edges)), "value": res.value, "abs_error": err,
            "within_tau_crit": err <= TAU_CRIT, "ok": err <= tol}


# ---------------------------------------------------------------------------
# intrinsic geometry helpers
# ---------------------------------------------------------------------------
def _word(spec: GeneratorSpec, word) -> tuple[int, ...]:
    g = spec.g1
    out = []
    for c in word:
        if isinstance(c, (int, np.integer)):
            out.append(int(c))
        elif c in g.eindex:
            out.append(g.eindex[c])
        else:
            raise InputError(f"unknown generator edge {c!r} in address")
    if not out:
        raise InputError("addresses must be non-empty words")
    return tuple(out)


def _extend(word: tuple, n: int) -> tuple:
    return word[:n] if len(word) >= n else word + (word[-1],) * (n - len(word))


class _Geometry:
    """Intrinsic-metric constants shared by the witness searches."""

    def __init__(self, spec: GeneratorSpec):
        require_valid(spec)
        self.spec = spec
        self.L = int(spec.l_star)
        self.la = LocalAddressing(spec)
        cd = CascadeDensity.constant(spec, 1.0 / self.L)
        self.diam_lo, self.diam_hi = space_diameter_bounds(cd)

    def level_for(self, r: float) -> int:
        """Smallest ``n >= 1`` with ``L^-n <= r``."""
        n = max(1, math.ceil(-math.log(r) / math.log(self.L) - 1e-12))
        while self.L ** (-n) > r:
            n += 1
        return n

    def isolated_within(self, word: tuple, prefix: tuple, allowed=None) -> bool:
        """Every edge meeting ``word`` (among ``allowed`` letters) starts with ``prefix``."""
        k = len(prefix)
        for w in self.la.neighbours(word):
            if allowed is not None and not set(w) <= allowed:
                continue
            if w[:k] != prefix:
                return False
        return True


# ---------------------------------------------------------------------------
# porosity
# ---------------------------------------------------------------------------
@dataclass
class PorosityWitness:
    y: tuple
    r: float
    n: int
    f: tuple
    cylinder: tuple
    x: tuple
    constant: tuple
    valid: bool
    checks: dict = field(default_factory=dict)
    warning: Optional[str] = None

    def to_dict(self) -> dict:
        return {"y": list(self.y), "r": self.r, "n": self.n, "f": list(self.f),
                "witness_cylinder": list(self.cylinder), "x": list(self.x),
                "c_interval": list(self.constant), "valid": self.valid,
                "checks": self.checks, "warning": self.warning}


def _interior_suffix(geo: _Geometry, base: tuple, allowed=None) -> tuple:
    """A two-letter suffix ``h`` so that ``base + h`` meets only edges inside ``base``."""
    letters = sorted(allowed) if allowed is not None else range(geo.spec.n_edges)
    for a in letters:
        for b in letters:
            w = base + (a, b)
            if geo.isolated_within(w, base, allowed):
                return (a, b)
    raise ConsistencyError(f"no interior level-{len(base) + 2} cylinder inside {base}")


def porosity_witness(spec: GeneratorSpec, F: Sequence, y, r: float,
                     depth: int = DEFAULT_DEPTH, geometry: Optional[_Geometry] = None) -> PorosityWitness:
    """A ball of radius ``c r`` inside ``B(y, r)`` that misses ``X(F)``."""
    geo = geometry or _Geometry(spec)
    letters = set(_edge_indices(spec, F).tolist())
    if len(letters) == spec.n_edges:
        raise InputError("porosity needs a proper subset F")
    y = _word(spec, y)
    if not set(y) <= letters:
        raise InputError("the centre address must be a word over F")
    if not 0 < r <= geo.diam_hi:
        raise InputError(f"radius must lie in (0, {geo.diam_hi!r}]")
    L = geo.L
    n = geo.level_for(r)
    if n + 4 > depth:
        raise BudgetError(f"radius {r!r} needs word depth {n + 4} beyond the limit {depth}")
    warning = "radius at the depth limit" if n + 4 == depth else None
    e = _extend(y, n + 1)
    g = min(set(range(spec.n_edges)) - letters)
    f = e + (g,)
    h = _interior_suffix(geo, f)
    cyl = f + h
    c_lo, c_hi = L ** -5 / geo.diam_hi, L ** -5 / geo.diam_lo
    checks = {
        # X_{e_{n+1}} has diameter at most L^-(n+1) and contains y
        "cylinder_in_ball": L ** -(n + 1) < r,
        # f carries a letter outside F, so no descendant lies in X(F)
        "misses_subset": not set(f) <= letters,
        # the witness cylinder touches only cylinders below f
        "interior": geo.isolated_within(cyl, f),
        # c r stays below the separation L^-(n+4) for every diameter in the bracket
        "radius_fits": c_hi * r <= L ** -(n + 4) * (1 + 1e-12),
    }
    return PorosityWitness(y, float(r), n, f, cyl, _extend(cyl, n + 6), (c_lo, c_hi),
                           all(checks.values()), checks, warning)


def _sample_words(letters: list, count: int, length: int, offset: int = 0) -> list[tuple]:
    k = len(letters)
    out = []
    for j, s in enumerate(low_discrepancy(count, k ** length, offset)):
        w = []
        for _ in range(length):
            s, d = divmod(s, k)
            w.append(letters[d])
        out.append(tuple(w))
    return out


def _sample_radii(count: int, top: float, L: int, span: float = 6.0) -> list[float]:
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    return [top * L ** (-((k + 1) * phi % 1.0) * span) for k in range(count)]


# ---------------------------------------------------------------------------
# subset lemma checks
# ---------------------------------------------------------------------------
def interior_ball_check(spec: GeneratorSpec, F: Sequence, n_max: int = 2,
                        geometry: Optional[_Geometry] = None) -> dict:
    """Every ``e`` in ``E_n(F)`` holds a child ``e.h`` meeting no other ``F``-cylinder."""
    geo = geometry or _Geometry(spec)
    letters = set(_edge_indices(spec, F).tolist())
    checked, failures = 0, []
    for n in range(1, n_max + 1):
        for k in restricted_words(spec, sorted(letters), n):
            e = _digits(int(k), spec.n_edges, n)
            try:
                _interior_suffix(geo, e, letters)
            except ConsistencyError:
                failures.append(list(e))
            checked += 1
    return {"checked": checked, "failures": failures, "ok": not failures}


def _digits(k: int, base: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(n):
        k, r = divmod(k, base)
        out.append(r)
    return tuple(reversed(out))


def uniform_perfectness_check(spec: GeneratorSpec, F: Sequence, samples: int = 50,
                              n_max: int = 4, geometry: Optional[_Geometry] = None) -> dict:
    """Annulus witnesses ``B(y, r) minus B(y, r/C)`` in ``X(F)`` with ``C = 2 L^3 diam``.

    ``diam(X(F)) >= 1`` is used as the certified lower bound on the diameter,
    since X(F) meets both ends whose intrinsic distance is one.
    """
    geo = geometry or _Geometry(spec)
    letters = sorted(set(_edge_indices(spec, F).tolist()))
    allowed = set(letters)
    L = geo.L
    C = 2.0 * L ** 3
    words = _sample_words(letters, samples, n_max + 2, offset=3)
    radii = [r for r in _sample_radii(samples, 1.0, L, span=float(n_max))]
    rows, ok = [], True
    for y, r in zip(words, radii):
        k = geo.level_for(r)
        k = k + 1 if L ** -k >= r else k
        if k > n_max:
            k = n_max
        ek, ek2 = y[:k], _extend(y, k + 2)
        found = None
        for a in letters:
            for b in letters:
                cand = ek + (a, b)
                if not geo.la.intersect(cand, ek2):
                    found = cand
                    break
            if found:
                break
        good = (found is not None and set(found) <= allowed
                and L ** -k < r and L ** -(k + 2) >= r / C * (1 - 1e-12))
        ok &= good
        rows.append({"y": list(y), "r": r, "k": k, "witness": None if found is None else list(found),
                     "ok": good})
    return {"C_lower": C, "samples": rows, "ok": ok}


def porosity_report(spec: GeneratorSpec, F: Optional[Sequence] = None, samples: int = 50,
                    depth: int = DEFAULT_DEPTH) -> dict:
    """Uniform perfectness first, then deterministic porosity witnesses.

    With ``F`` omitted the essential edge set is used.
    """
    geo = _Geometry(spec)
    if F is None:
        F = removable_edges(spec).essential
    letters = sorted(set(_edge_indices(spec, F).tolist()))
    if len(letters) == spec.n_edges:
        return {"F": [spec.g1.edges[k] for k in letters], "proper": False,
                "uniformly_perfect": None, "witnesses": [], "ok": False}
    up = uniform_perfectness_check(spec, letters, samples=samples, geometry=geo)
    words = _sample_words(letters, samples, 6, offset=11)
    radii = _sample_radii(samples, min(1.0, geo.diam_hi), geo.L)
    wits = [porosity_witness(spec, letters, y, r, depth=depth, geometry=geo) for y, r in zip(words, radii)]
    return {"F": [spec.g1.edges[k] for k in letters], "proper": True,
            "diameter_bracket": [geo.diam_lo, geo.diam_hi],
            "uniformly_perfect": up["ok"], "uniform_perfectness": up,
            "witnesses": [w.to_dict() for w in wits],
            "valid": sum(w.valid for w in wits), "ok": up["ok"] and all(w.valid for w in wits)}


# ---------------------------------------------------------------------------
# vertex modulus
# ---------------------------------------------------------------------------
def _split_vertex_csr(level_graph: MultiGraph):
    """Directed split graph: node ``2v`` enters ``v``, node ``2v+1`` leaves it.

    The arc ``2v -> 2v+1`` carries the weight of ``v``; every edge gives two
    free arcs ``2u+1 -> 2w`` and ``2w+1 -> 2u``.
    """
    nv = level_graph.n_vertices
    t, h = level_graph.tail, level_graph.head
    src = np.concatenate([2 * np.arange(nv), 2 * t + 1, 2 * h + 1])
    dst = np.concatenate([2 * np.arange(nv) + 1, 2 * h, 2 * t])
    var = np.concatenate([np.arange(nv), -np.ones(2 * len(t), dtype=np.int64)])
    order = np.lexsort((dst, src))
    src, dst, var = src[order], dst[order], var[order]
    indptr = np.zeros(2 * nv + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    return np.cumsum(indptr), dst, var, src


def vertex_modulus(level: ReplacementLevel, a: Sequence, b: Sequence, p: float,
                   charge_endpoints: bool = True) -> dict:
    """Vertex and edge ``p``-modulus of the paths joining ``a`` to ``b``.

    Star sets are passed as vertex names or indices of the level.
    """
    g = level.graph
    ai = sorted({int(v) if isinstance(v, (int, np.integer)) else g.vindex[v] for v in a})
    bi = sorted({int(v) if isinstance(v, (int, np.integer)) else g.vindex[v] for v in b})
    if not ai or not bi:
        raise InputError("star sets must be non-empty")
    if set(ai) & set(bi):
        raise InputError("star sets overlap")
    fam = PathFamilySpec([g.vertices[i] for i in ai], [g.vertices[i] for i in bi])
    edge = solve_modulus(g, fam, p)
    indptr, dst, var, src = _split_vertex_csr(g)
    nv = g.n_vertices
    free = set() if charge_endpoints else set(ai) | set(bi)
    sources = np.array([2 * v for v in ai], dtype=np.int64)
    targets = np.array([2 * v + 1 for v in bi], dtype=np.int64)

    def weights(x):
        x = x.copy()
        x[list(free)] = 0.0
        w = np.zeros(len(var))
        m = var >= 0
        w[m] = x[var[m]]
        return w

    def separate(x):
        dist, pred = dijkstra_csr(indptr, dst, weights(x), sources)
        db = dist[targets]
        new = []
        for j in np.argsort(db, kind="stable"):
            if db[j] >= 1.0 - TOL_FEAS:
                break
            row, node = [], int(targets[j])
            while pred[node] >= 0:
                arc = int(pred[node])
                if var[arc] >= 0 and var[arc] not in free:
                    row.append(int(var[arc]))
                node = int(src[arc])
            new.append(tuple(row))
        return float(db.min()), new

    _, first = separate(np.zeros(nv))
    if not first or not first[0]:
        raise InputError("no chargeable vertices on the connecting paths")
    out = constraint_generation(nv, float(p), separate, first[:1])
    rho = out.x
    length = float(dijkstra_csr(indptr, dst, weights(rho), sources)[0][targets].min())
    rho = rho / length
    value_d = float(np.sum(rho ** p))
    return {"level": level.n, "p": float(p), "vertex_modulus": value_d, "edge_modulus": edge.value,
            "ratio": edge.value / value_d, "charge_endpoints": charge_endpoints,
            "vertex_density": {g.vertices[i]: float(rho[i]) for i in range(nv) if rho[i] > 0}}


def vertex_comparability(spec: GeneratorSpec, p: float, levels: Sequence[int] = (1, 2)) -> dict:
    """Ratios of edge to vertex modulus for the end-to-end stars at several levels."""
    rows = []
    for n in levels:
        lev = spec.level(n)
        rows.append(vertex_modulus(lev, lev.minus_vertices, lev.plus_vertices, p))
    c = [max(r["ratio"], 1.0 / r["ratio"]) for r in rows]
    c_emp = max(c)
    for r in rows:
        r["within_band"] = 1.0 / c_emp <= r["ratio"] <= c_emp
        r.pop("vertex_density")
    return {"p": float(p), "levels": rows, "C_emp": c_emp,
            "spread": max(c) / min(c), "ok": all(r["within_band"] for r in rows)}
