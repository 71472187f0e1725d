"""Cascade densities, the finite metrics ``d_{rho,n}`` and the cylinder measure.

The level-``n`` distance is an infimum over collections of edges from all
levels ``m <= n`` whose covered subgraphs connect two vertices.  Each covered
subgraph ``e . G_{n-m}`` is connected, so the infimum is a shortest path in an
auxiliary graph with one node per block, joined to every level-``n`` vertex it
covers by an arc of half its weight.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from ._util import low_discrepancy
from .errors import BudgetError, FamilyTooLargeError, InputError
from .graph_core import dijkstra
from .igs import GeneratorSpec, ReplacementLevel, index_of, parse_word
from .modulus import Density

ADMISSIBILITY_SLACK = 1e-8
DEFAULT_LEVEL_EDGES = 300_000
ORACLE_BLOCK_CAP = 24


# ---------------------------------------------------------------------------
# cascade densities
# ---------------------------------------------------------------------------
class CascadeDensity:
    """A base density on ``E1`` and its multiplicative level weights."""

    def __init__(self, spec: GeneratorSpec, rho, check_symmetry: bool = True):
        g = spec.g1
        if isinstance(rho, Density):
            vals = rho.values
        elif isinstance(rho, dict):
            missing = [e for e in g.edges if e not in rho]
            if missing:
                raise InputError(f"density missing edges {missing}")
            vals = [float(rho[e]) for e in g.edges]
        else:
            vals = rho
        vals = np.asarray(vals, dtype=np.float64)
        if vals.shape != (g.n_edges,):
            raise InputError("density length does not match the generator")
        if np.any(vals <= 0) or np.any(vals >= 1):
            raise InputError("cascade densities must take values strictly inside (0, 1)")
        a = g.vertex_ids(spec.i_minus)
        b = g.vertex_ids(spec.i_plus)
        shortest = float(dijkstra(g, vals, a)[0][b].min())
        if shortest < 1.0 - ADMISSIBILITY_SLACK:
            raise InputError(f"density is not admissible: shortest path has length {shortest!r}")
        if check_symmetry and spec.edge_symmetry is not None:
            perm = spec.eta_edge_index()
            if np.max(np.abs(vals - vals[perm])) > 1e-9:
                raise InputError("density is not invariant under the symmetry")
        self.spec = spec
        self.base = vals
        self.log_base = np.log(vals)
        self.M = float(vals.max())
        self.m = float(vals.min())
        self.shortest = shortest
        # normalized witnesses may sit a rounding error below admissibility
        self.defect = max(0.0, 1.0 - shortest)
        self._levels: dict[int, np.ndarray] = {}
        self._blocks: dict[int, "BlockGraph"] = {}

    @classmethod
    def constant(cls, spec: GeneratorSpec, value: float) -> "CascadeDensity":
        return cls(spec, np.full(spec.n_edges, float(value)))

    def log_level(self, n: int) -> np.ndarray:
        out = self.log_base
        for _ in range(n - 1):
            out = np.add.outer(out, self.log_base).ravel()
        return out

    def level(self, n: int) -> np.ndarray:
        """``rho_n`` over ``E_n`` in word-index order."""
        if n < 1:
            raise InputError("levels start at 1")
        hit = self._levels.get(n)
        if hit is None:
            hit = np.exp(self.log_level(n))
            self._levels[n] = hit
        return hit

    def weight(self, word: Sequence[int]) -> float:
        return float(math.exp(sum(self.log_base[i] for i in word)))

    def blocks(self, n: int) -> "BlockGraph":
        hit = self._blocks.get(n)
        if hit is None:
            hit = BlockGraph(self.spec.level(n), self)
            self._blocks[n] = hit
        return hit

    def as_dict(self) -> dict[str, float]:
        return {e: float(v) for e, v in zip(self.spec.g1.edges, self.base)}

    def to_dict(self) -> dict:
        return {"rho": self.as_dict(), "M": self.M, "m": self.m}


def cascade(spec: GeneratorSpec, rho, n: int) -> np.ndarray:
    return CascadeDensity(spec, rho).level(n)


# ---------------------------------------------------------------------------
# block graph
# ---------------------------------------------------------------------------
def _incidence_csr(tail: np.ndarray, head: np.ndarray, n_vertices: int):
    ends = np.concatenate([tail, head])
    edge = np.concatenate([np.arange(len(tail)), np.arange(len(tail))])
    order = np.argsort(ends, kind="stable")
    indptr = np.zeros(n_vertices + 1, dtype=np.int64)
    np.add.at(indptr, ends + 1, 1)
    return np.cumsum(indptr), edge[order]


class BlockGraph:
    """Auxiliary graph whose shortest paths realize ``d_{rho,n}``."""

    def __init__(self, level: ReplacementLevel, cd: CascadeDensity):
        self.level = level
        self.cd = cd
        n, base = level.n, level.base
        nv = level.n_vertices
        self.offsets = {}
        pos = nv
        for m in range(1, n + 1):
            self.offsets[m] = pos
            pos += base ** m
        self.n_nodes = pos
        src, dst, wt = [], [], []
        for m in range(1, n + 1):
            half = cd.level(m) / 2.0
            if m == n:
                verts = np.concatenate([level.tail, level.head])
                blocks = np.concatenate([np.arange(level.n_edges)] * 2)
            else:
                kind, idx = level.project_vertices(m)
                low = level.spec.level(m)
                in_edge = kind == 0
                v_edge = np.flatnonzero(in_edge)
                b_edge = idx[in_edge]
                ip, inc = _incidence_csr(low.tail, low.head, low.n_vertices)
                v_vert = np.flatnonzero(~in_edge)
                at = idx[~in_edge]
                deg = ip[at + 1] - ip[at]
                starts = np.repeat(ip[at], deg)
                within = np.arange(deg.sum()) - np.repeat(np.cumsum(deg) - deg, deg)
                verts = np.concatenate([v_edge, np.repeat(v_vert, deg)])
                blocks = np.concatenate([b_edge, inc[starts + within]])
            nodes = blocks + self.offsets[m]
            w = half[blocks]
            src += [verts, nodes]
            dst += [nodes, verts]
            wt += [w, w]
        src = np.concatenate(src)
        dst = np.concatenate(dst)
        wt = np.concatenate(wt)
        order = np.lexsort((dst, src))
        self.indices = dst[order]
        self.weights = wt[order]
        counts = np.bincount(src, minlength=self.n_nodes)
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)

    @property
    def n_blocks(self) -> int:
        return self.n_nodes - self.level.n_vertices

    def distances_from(self, sources) -> np.ndarray:
        """``d_{rho,n}`` from a vertex set to every level-``n`` vertex."""
        src = np.atleast_1d(np.asarray(sources, dtype=np.int64))
        dist, _ = kernels.dijkstra_csr(self.indptr, self.indices, self.weights, src)
        return np.asarray(dist)[: self.level.n_vertices]

    def edge_distances_from(self, e: int) -> np.ndarray:
        """``d_{rho,n}(e, f)`` for every level-``n`` edge ``f``."""
        lev = self.level
        d = self.distances_from([lev.tail[e], lev.head[e]])
        return np.minimum(d[lev.tail], d[lev.head])

    def vertex_table(self) -> np.ndarray:
        nv = self.level.n_vertices
        return np.vstack([self.distances_from([v]) for v in range(nv)])


@dataclass
class BlockDistanceTable:
    level: int
    vertex: np.ndarray

    def edge(self, lev: ReplacementLevel, e: int, f: int) -> float:
        ends_e = (lev.tail[e], lev.head[e])
        ends_f = (lev.tail[f], lev.head[f])
        return float(min(self.vertex[a, b] for a in ends_e for b in ends_f))


def block_distance(level: ReplacementLevel, cd: CascadeDensity, v, w) -> float:
    v, w = _vertex(level, v), _vertex(level, w)
    if v == w:
        return 0.0
    return float(cd.blocks(level.n).distances_from([v])[w])


def distance_table(level: ReplacementLevel, cd: CascadeDensity) -> BlockDistanceTable:
    return BlockDistanceTable(level.n, cd.blocks(level.n).vertex_table())


def _vertex(level: ReplacementLevel, v) -> int:
    if isinstance(v, str):
        names = level.graph.vindex
        if v not in names:
            raise InputError(f"vertex {v!r} is not at level {level.n}")
        return names[v]
    v = int(v)
    if not 0 <= v < level.n_vertices:
        raise InputError(f"vertex index {v} is not at level {level.n}")
    return v


# ---------------------------------------------------------------------------
# exhaustive oracle
# ---------------------------------------------------------------------------
def _block_vertex_sets(level: ReplacementLevel) -> list[tuple[int, int, np.ndarray]]:
    """Vertices covered by each block, read off the edge ranges of its word prefix."""
    out = []
    base, n = level.base, level.n
    for m in range(1, n + 1):
        span = base ** (n - m)
        for e in range(base ** m):
            ks = np.arange(e * span, (e + 1) * span)
            out.append((m, e, np.unique(np.concatenate([level.tail[ks], level.head[ks]]))))
    return out


def _subset_table(level: ReplacementLevel, cd: CascadeDensity) -> np.ndarray:
    blocks = _block_vertex_sets(level)
    nb, nv = len(blocks), level.n_vertices
    if nv > 64:
        raise FamilyTooLargeError("subset oracle supports at most 64 vertices")
    masks = np.array([sum(1 << int(v) for v in vs) for _, _, vs in blocks], dtype=np.uint64)
    weights = np.array([cd.level(m)[e] for m, e, _ in blocks])
    cost = np.zeros(1)
    union = np.zeros(1, dtype=np.uint64)
    for w, mk in zip(weights, masks):
        cost = np.concatenate([cost, cost + w])
        union = np.concatenate([union, union | mk])
    ids = np.arange(1 << nb, dtype=np.int64)
    size = np.zeros(1 << nb, dtype=np.int64)
    for b in range(nb):
        size += (ids >> b) & 1
    # a collection covers a connected subgraph iff some member can be dropped
    # leaving a connected collection that it touches
    conn = size == 1
    zero = np.uint64(0)
    for k in range(2, nb + 1):
        layer = ids[size == k]
        for b in range(nb):
            bit = np.int64(1) << np.int64(b)
            sub = layer[(layer & bit) != 0]
            prev = sub ^ bit
            ok = conn[prev] & ((union[prev] & masks[b]) != zero)
            conn[sub] |= ok
    good = np.flatnonzero(conn)
    cost, union = cost[good], union[good]
    has = [((union >> np.uint64(v)) & np.uint64(1)).astype(bool) for v in range(nv)]
    table = np.zeros((nv, nv))
    for v in range(nv):
        for w in range(v + 1, nv):
            table[v, w] = table[w, v] = cost[has[v] & has[w]].min()
    return table


def _cover_cost(level: ReplacementLevel, cd: CascadeDensity, edges: Sequence[int]) -> float:
    """Cheapest set of blocks covering the given level-``n`` edges (tree DP)."""
    base = level.base
    costs = {int(f): float(cd.level(level.n)[f]) for f in edges}
    for m in range(level.n - 1, 0, -1):
        rho_m = cd.level(m)
        grouped: dict[int, float] = {}
        for f, c in costs.items():
            grouped[f // base] = grouped.get(f // base, 0.0) + c
        costs = {e: min(float(rho_m[e]), c) for e, c in grouped.items()}
    return sum(costs.values())


def _path_cover_table(level: ReplacementLevel, cd: CascadeDensity, cap: int) -> np.ndarray:
    nv = level.n_vertices
    inc = level.incidence
    ends = list(zip(level.tail.tolist(), level.head.tolist()))
    table = np.full((nv, nv), np.inf)
    np.fill_diagonal(table, 0.0)
    count = 0
    for s in range(nv):
        stack = [(s, [], {s})]
        while stack:
            v, path, seen = stack.pop()
            if path:
                c = _cover_cost(level, cd, path)
                if c < table[s, v]:
                    table[s, v] = c
                count += 1
                if count > cap:
                    raise FamilyTooLargeError(f"more than {cap} simple paths in the oracle")
            for k in inc[v]:
                a, b = ends[k]
                u = b if a == v else a
                if u not in seen:
                    stack.append((u, path + [k], seen | {u}))
    return table


def brute_force_distance_table(level: ReplacementLevel, cd: CascadeDensity,
                               block_cap: int = ORACLE_BLOCK_CAP, path_cap: int = 5_000_000) -> np.ndarray:
    """All-pairs ``d_{rho,n}`` by exhaustive search (test oracle).

    Up to ``block_cap`` blocks every collection is enumerated and its covered
    subgraph tested for connectivity.  Beyond that, every simple path is
    enumerated and charged its cheapest block cover.
    """
    n_blocks = sum(level.base ** m for m in range(1, level.n + 1))
    if n_blocks <= block_cap:
        return _subset_table(level, cd)
    return _path_cover_table(level, cd, path_cap)


def brute_force_block_distance(level: ReplacementLevel, cd: CascadeDensity, v, w, **kw) -> float:
    v, w = _vertex(level, v), _vertex(level, w)
    return float(brute_force_distance_table(level, cd, **kw)[v, w])


# ---------------------------------------------------------------------------
# limit distances and diameters
# ---------------------------------------------------------------------------
def extend_word(word: Sequence[int], n: int) -> tuple[int, ...]:
    """Truncate or extend periodically by repeating the last letter."""
    word = tuple(int(c) for c in word)
    if not word:
        raise InputError("addresses need at least one letter")
    if len(word) >= n:
        return word[:n]
    return word + (word[-1],) * (n - len(word))


@dataclass
class LimitDistance:
    value: float
    error_bound: float
    level: int
    converged: bool
    trace: list = field(default_factory=list)

    @property
    def interval(self) -> tuple[float, float]:
        return self.value, self.value + self.error_bound

    def to_dict(self) -> dict:
        return {"value": self.value, "upper": self.value + self.error_bound,
                "error_bound": self.error_bound, "level": self.level,
                "converged": self.converged, "warning": None if self.converged else "level budget exhausted"}


def max_level(spec: GeneratorSpec, max_edges: int = DEFAULT_LEVEL_EDGES) -> int:
    n = 1
    while spec.n_edges ** (n + 1) <= max_edges:
        n += 1
    return n


def edge_distance(cd: CascadeDensity, n: int, e: int, f: int) -> float:
    if e == f:
        return 0.0
    return float(cd.blocks(n).edge_distances_from(e)[f])


def limit_distance(spec: GeneratorSpec, cd: CascadeDensity, x, y, eps: float = 1e-3,
                   max_edges: int = DEFAULT_LEVEL_EDGES) -> LimitDistance:
    """Certified bracket ``[value, value + error]`` on the limit distance."""
    x, y = parse_word(spec, x), parse_word(spec, y)
    top = max_level(spec, max_edges)
    trace = []
    for n in range(1, top + 1):
        ex, ey = extend_word(x, n), extend_word(y, n)
        ie, jf = index_of(spec, ex), index_of(spec, ey)
        rho = cd.level(n)
        err = float(rho[ie] + rho[jf])
        val = edge_distance(cd, n, ie, jf)
        trace.append({"level": n, "value": val, "error_bound": err})
        if err <= eps:
            return LimitDistance(val, err, n, True, trace)
    return LimitDistance(val, err, top, False, trace)


def diameter_bounds(cd: CascadeDensity, n: int, e: int) -> tuple[float, float]:
    w = float(cd.level(n)[e])
    return cd.m ** 3 / cd.M * w, w


def diameter_estimate(cd: CascadeDensity, n: int, e: int) -> float:
    """Lower estimate of ``diam(X_e)``: largest level ``n+2`` edge distance inside ``e``."""
    from .igs import interior_edge_pair

    f1, _ = interior_edge_pair(cd.spec, n, e)
    span = cd.spec.n_edges ** 2
    d = cd.blocks(n + 2).edge_distances_from(f1)
    return float(d[e * span:(e + 1) * span].max())


def space_diameter_bounds(cd: CascadeDensity) -> tuple[float, float]:
    """Bracket on ``diam(X)`` from level-1 edge distances."""
    lo = diameter_estimate_top(cd)
    bg = cd.blocks(1)
    rho = cd.level(1)
    hi = 0.0
    for e in range(cd.spec.n_edges):
        d = bg.edge_distances_from(e)
        hi = max(hi, float(np.max(d + rho + rho[e])))
    return lo, hi


def diameter_estimate_top(cd: CascadeDensity) -> float:
    d = cd.blocks(2).vertex_table()
    return float(d.max())


# ---------------------------------------------------------------------------
# measure
# ---------------------------------------------------------------------------
@dataclass
class MeasureModel:
    cd: CascadeDensity
    Q: float

    def cylinders(self, n: int) -> np.ndarray:
        return np.exp(self.Q * self.cd.log_level(n))

    def total(self, n: int) -> float:
        return float(math.fsum(self.cylinders(n)))

    def to_dict(self) -> dict:
        return {"Q": self.Q, "rho": self.cd.as_dict()}


def measure_model(spec: GeneratorSpec, cd: CascadeDensity) -> MeasureModel:
    from .conformal import ar_exponent

    return MeasureModel(cd, ar_exponent(cd.base))


def ball_measure_bounds(mm: MeasureModel, x, r: float, n: int) -> tuple[float, float]:
    """Two-sided bounds on ``mu(B(x, r))`` from level-``n`` cylinders.

    Cylinders within ``r`` minus both diameters of the center cylinder count
    towards the lower bound; any cylinder closer than ``r`` may meet the ball.
    """
    cd = mm.cd
    word = extend_word(parse_word(cd.spec, x), n)
    e = index_of(cd.spec, word)
    rho = cd.level(n)
    d = cd.blocks(n).edge_distances_from(e)
    mu = mm.cylinders(n)
    inside = d + rho + rho[e] <= r
    touching = d < r
    return float(math.fsum(mu[inside])), float(math.fsum(mu[touching]))


def regularity_bracket(mm: MeasureModel, diam: float) -> tuple[float, float]:
    cd, q = mm.cd, mm.Q
    c_deg = cd.spec.g1.max_degree()
    return (cd.m / (2.0 * diam)) ** q, (2 * c_deg + 1) * (cd.M ** 2 / cd.m ** 3) ** q


def regularity_report(spec: GeneratorSpec, cd: CascadeDensity, samples: int = 100,
                      r_min: Optional[float] = None, max_edges: int = DEFAULT_LEVEL_EDGES) -> dict:
    """Ball-measure ratios ``mu/r^Q`` on deterministic ``(x, r)`` samples."""
    mm = measure_model(spec, cd)
    diam_lo, diam_hi = space_diameter_bounds(cd)
    lo_c, hi_c = regularity_bracket(mm, diam_hi)
    top = max_level(spec, max_edges)
    r_floor = 2.0 * cd.M ** top if r_min is None else r_min
    if r_floor >= diam_lo:
        raise BudgetError("level budget too small to resolve any ball radius")
    depth = top + 2
    letters = low_discrepancy(samples * depth, spec.n_edges, offset=7)
    radii = low_discrepancy(samples, 1_000_000, offset=3)
    rows = []
    ok = True
    for s in range(samples):
        word = tuple(letters[s * depth:(s + 1) * depth])
        t = radii[s] / 1_000_000
        r = math.exp(math.log(r_floor) + t * (math.log(diam_lo) - math.log(r_floor)))
        w_levels = [cd.weight(word[:i]) for i in range(1, depth + 1)]
        n_low = next(i for i, w in enumerate(w_levels, 1) if 2.0 * w <= r)
        k_up = next(i for i, w in enumerate(w_levels, 1) if r >= w * cd.m ** 2 / cd.M)
        n_low, k_up = min(n_low, top), min(k_up, top)
        lower, _ = ball_measure_bounds(mm, word, r, n_low)
        _, upper = ball_measure_bounds(mm, word, r, k_up)
        rq = r ** mm.Q
        inside = lo_c <= lower / rq and upper / rq <= hi_c and lower <= upper + 1e-15
        ok &= inside
        rows.append({"word": list(word), "r": r, "lower": lower, "upper": upper,
                     "lower_ratio": lower / rq, "upper_ratio": upper / rq,
                     "levels": [n_low, k_up], "inside": inside})
    return {"Q": mm.Q, "bracket": [lo_c, hi_c], "diameter": [diam_lo, diam_hi],
            "samples": rows, "all_inside": ok,
            "min_lower_ratio": min(r["lower_ratio"] for r in rows),
            "max_upper_ratio": max(r["upper_ratio"] for r in rows)}


# ---------------------------------------------------------------------------
# quasi-visual, Gromov-Hausdorff, quasiconvexity
# ---------------------------------------------------------------------------
def quasi_visual_k0(cd: CascadeDensity) -> int:
    k = 1
    while cd.M ** (k + 2) >= cd.m ** 4:
        k += 1
    return k


def _intersecting_pairs(level: ReplacementLevel):
    for edges in level.incidence:
        for a, b in itertools.combinations(sorted(set(edges)), 2):
            yield a, b


def quasi_visual_report(spec: GeneratorSpec, cd: CascadeDensity, n_max: int = 3) -> dict:
    """Empirical constants of the cylinder covers, with weights as diameter proxies.

    Weights bound diameters within the factor ``M / m^3``; the report gives
    both the weight ratios and the certified constants they imply.
    """
    slack = cd.M / cd.m ** 3
    k0 = quasi_visual_k0(cd)
    per_level = []
    for n in range(1, n_max + 1):
        lev = spec.level(n)
        rho = cd.level(n)
        ratio_i = max((max(rho[a] / rho[b], rho[b] / rho[a]) for a, b in _intersecting_pairs(lev)),
                      default=1.0)
        bg = cd.blocks(n)
        ratio_ii = 0.0
        for e in low_discrepancy(min(16, lev.n_edges), lev.n_edges, offset=n):
            d = bg.edge_distances_from(e)
            near = set(k for v in (lev.tail[e], lev.head[e]) for k in lev.incidence[v])
            far = np.ones(lev.n_edges, dtype=bool)
            far[list(near)] = False
            if far.any():
                ratio_ii = max(ratio_ii, float(rho[e] / d[far].min()))
        row = {"level": n, "i_weight_ratio": float(ratio_i), "ii_weight_over_distance": ratio_ii}
        if n < n_max:
            nxt = cd.level(n + 1)
            parent = np.arange(len(nxt)) // spec.n_edges
            ratio_iii = float(np.max(np.maximum(rho[parent] / nxt, nxt / rho[parent])))
            row["iii_weight_ratio"] = max(ratio_iii, ratio_i / cd.m)
        per_level.append(row)
    ci = max(r["i_weight_ratio"] for r in per_level)
    cii = max(r["ii_weight_over_distance"] for r in per_level)
    ciii = max((r.get("iii_weight_ratio", 1.0) for r in per_level), default=1.0)
    lam = cd.M ** (k0 + 2) / cd.m ** 4
    return {"levels": per_level, "k0": k0, "lambda": lam, "iv_holds": lam < 1.0,
            "C_i": ci * slack, "C_ii": cii * slack, "C_iii": ciii * slack,
            "weight_constants": {"i": ci, "ii": cii, "iii": ciii}}


def gh_embedding_error(cd: CascadeDensity, n: int) -> float:
    return 2.0 * cd.M ** n


def _ancestor(spec: GeneratorSpec, v: int, n: int, top: int) -> int:
    for m in range(n + 1, top + 1):
        lev = spec.level(m)
        hits = np.flatnonzero((lev.proj_kind == 1) & (lev.proj_idx == v))
        v = int(hits[0])
    return v


def gh_observed(spec: GeneratorSpec, cd: CascadeDensity, n: int, deep: int, samples: int = 16) -> dict:
    """Distances from deep cylinders to the embedded vertices of their level-``n`` edge."""
    lev = spec.level(n)
    bg = cd.blocks(deep)
    worst = 0.0
    for e in low_discrepancy(min(samples, lev.n_edges), lev.n_edges, offset=11):
        word = extend_word(lev.word(e), deep)
        k = index_of(spec, word)
        for v in (lev.tail[e], lev.head[e]):
            anc = _ancestor(spec, int(v), n, deep)
            d = bg.distances_from([anc])
            worst = max(worst, float(min(d[bg.level.tail[k]], d[bg.level.head[k]])))
    bound = gh_embedding_error(cd, n)
    return {"level": n, "deep": deep, "observed": worst, "bound": bound, "within": worst <= bound}


def is_quasiconvex(spec: GeneratorSpec, cd: CascadeDensity, tol: float = 1e-9) -> bool:
    return abs(cd.shortest - 1.0) <= tol


# ---------------------------------------------------------------------------
# inequality suite
# ---------------------------------------------------------------------------
def _edge_neighbours(lev: ReplacementLevel, e: int) -> set:
    return set(k for v in (lev.tail[e], lev.head[e]) for k in lev.incidence[v])


def distance_inequality_suite(spec: GeneratorSpec, cd: CascadeDensity, n_max: int = 4,
                              samples: int = 12, tol: float = 1e-12) -> dict:
    """Checks of the projection, sandwich, neighbour and separation inequalities."""
    m, M = cd.m, cd.M
    out = {name: {"checked": 0, "failed": 0} for name in
           ("DL1", "DL4", "DL6", "DL7", "DL8", "diameter")}

    def tick(name, ok):
        out[name]["checked"] += 1
        out[name]["failed"] += 0 if ok else 1

    for n in range(1, n_max):
        low, top = spec.level(n), spec.level(n + 1)
        bl, bt = cd.blocks(n), cd.blocks(n + 1)
        # DL1: ancestors keep their distances
        kind, idx = top.project_vertices(n)
        verts = np.flatnonzero(kind == 1)
        for a in low_discrepancy(min(samples, len(verts)), len(verts), offset=n):
            x = int(verts[a])
            d_top = bt.distances_from([x])
            d_low = bl.distances_from([int(idx[x])])
            ok = np.abs(d_top[verts] - d_low[idx[verts]])
            mask = idx[verts] != idx[x]
            ref = d_low[idx[verts]][mask]
            for good in (ok[mask] <= tol * (1 + ref) + cd.defect * ref):
                tick("DL1", bool(good))
        # DL4: projected edge distances sandwich finer ones
        rho_low = cd.level(n)
        for f in low_discrepancy(min(samples, top.n_edges), top.n_edges, offset=3 * n):
            d_top = bt.edge_distances_from(f)
            pf = f // spec.n_edges
            d_low = bl.edge_distances_from(pf)
            parents = np.arange(top.n_edges) // spec.n_edges
            lo = d_low[parents]
            hi = lo + rho_low[pf] + rho_low[parents]
            for good in ((lo * (1 - cd.defect) <= d_top + tol) & (d_top <= hi + tol)):
                tick("DL4", bool(good))
        # DL6: deeper cylinders of intersecting edges stay within their weights
        for e in low_discrepancy(min(samples, low.n_edges), low.n_edges, offset=5 * n):
            rho = cd.level(n)
            children = np.arange(e * spec.n_edges, (e + 1) * spec.n_edges)
            d_top = None
            for f in _edge_neighbours(low, e):
                if d_top is None:
                    d_top = {c: bt.edge_distances_from(int(c)) for c in children}
                f_children = np.arange(f * spec.n_edges, (f + 1) * spec.n_edges)
                worst = max(float(d_top[c][f_children].max()) for c in children)
                tick("DL6", worst <= rho[e] + rho[f] + tol)
    for n in range(1, n_max + 1):
        lev = spec.level(n)
        rho = cd.level(n)
        # DL7 exhaustively over intersecting pairs
        for a, b in _intersecting_pairs(lev):
            tick("DL7", m / M * rho[a] <= rho[b] * (1 + 1e-12) and rho[b] <= M / m * rho[a] * (1 + 1e-12))
        # DL8 on sampled centres against every disjoint edge
        bg = cd.blocks(n)
        for e in low_discrepancy(min(samples, lev.n_edges), lev.n_edges, offset=7 * n):
            d = bg.edge_distances_from(e)
            far = np.ones(lev.n_edges, dtype=bool)
            far[list(_edge_neighbours(lev, e))] = False
            for good in d[far] >= m / M * rho[e] * (1 - 1e-12):
                tick("DL8", bool(good))
    top = max(1, min(n_max, max_level(spec) - 2))
    for n in range(1, top + 1):
        lev = spec.level(n)
        for e in low_discrepancy(min(4, lev.n_edges), lev.n_edges, offset=13 * n):
            lo, hi = diameter_bounds(cd, n, e)
            est = diameter_estimate(cd, n, e)
            tick("diameter", lo * (1 - 1e-12) <= est <= hi * (1 + 1e-12))
    out["all_pass"] = all(v["failed"] == 0 for k, v in out.items() if isinstance(v, dict))
    return out
