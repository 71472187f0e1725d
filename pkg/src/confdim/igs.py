"""Iterated graph systems: generator specs, validation and replacement levels.

Level ``n`` edges are stored by integer index.  The index of the word
``(w1, ..., wn)`` is its base-``|E1|`` value with ``w1`` most significant, so
index order is lexicographic word order and ``parent(k) = k // |E1|``.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path as FsPath
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import kernels
from ._util import UNREACHABLE
from .errors import BudgetError, InputError, ValidationError
from .graph_core import MultiGraph, Path, PathFamilySpec, hop_distance, weighted_shortest_path

DEFAULT_BUDGET = 2_000_000
DATA_DIR = FsPath(__file__).parent / "data"


def edge_budget() -> int:
    raw = os.environ.get("CONFDIM_BUDGET")
    if raw is None:
        return DEFAULT_BUDGET
    try:
        return int(raw)
    except ValueError as exc:
        raise InputError(f"CONFDIM_BUDGET must be an integer, got {raw!r}") from exc


# ---------------------------------------------------------------------------
# generator specs
# ---------------------------------------------------------------------------
@dataclass(eq=False)
class GeneratorSpec:
    """Generator graph with the two gluing maps and an optional symmetry.

    The graph is stored canonically (vertices and edges sorted by id).
    """

    g1: MultiGraph
    gluing_set: tuple[str, ...]
    phi_minus: dict[str, str]
    phi_plus: dict[str, str]
    symmetry: Optional[dict[str, str]] = None
    edge_symmetry: Optional[dict[str, str]] = None
    name: str = ""
    _levels: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        g = self.g1
        order = sorted(range(g.n_edges), key=lambda k: g.edges[k])
        self.g1 = MultiGraph(
            sorted(g.vertices),
            [(g.edges[k], g.vertices[g.tail[k]], g.vertices[g.head[k]]) for k in order],
        )
        self.gluing_set = tuple(sorted(str(i) for i in self.gluing_set))
        self.phi_minus = {str(k): str(v) for k, v in self.phi_minus.items()}
        self.phi_plus = {str(k): str(v) for k, v in self.phi_plus.items()}
        for label, phi in (("phi_minus", self.phi_minus), ("phi_plus", self.phi_plus)):
            if set(phi) != set(self.gluing_set):
                raise InputError(f"{label} must be defined exactly on the gluing set")
            for v in phi.values():
                if v not in self.g1.vindex:
                    raise InputError(f"{label} maps to unknown vertex {v!r}")
        if self.symmetry is not None:
            self.symmetry = {str(k): str(v) for k, v in self.symmetry.items()}
            if self.edge_symmetry is None:
                try:
                    self.edge_symmetry = induced_edge_map(self.g1, self.symmetry)
                except (ValidationError, KeyError):
                    self.edge_symmetry = None

    # -- derived quantities ------------------------------------------------
    @property
    def n_edges(self) -> int:
        return self.g1.n_edges

    @property
    def i_minus(self) -> frozenset:
        return frozenset(self.phi_minus.values())

    @property
    def i_plus(self) -> frozenset:
        return frozenset(self.phi_plus.values())

    @cached_property
    def l_star(self):
        return hop_distance(self.g1, self.i_minus, self.i_plus)

    @property
    def family(self) -> PathFamilySpec:
        return PathFamilySpec(self.i_minus, self.i_plus)

    def eta_edge_index(self) -> np.ndarray:
        """The edge symmetry as an index permutation of ``E1``."""
        if self.edge_symmetry is None:
            raise InputError("spec has no symmetry")
        ix = self.g1.eindex
        return np.array([ix[self.edge_symmetry[e]] for e in self.g1.edges], dtype=np.int64)

    def level(self, n: int) -> "ReplacementLevel":
        return build_level(self, n)

    # -- serialization -----------------------------------------------------
    @classmethod
    def from_json(cls, data: Mapping, name: str = "") -> "GeneratorSpec":
        try:
            g = MultiGraph.from_json(data["graph"])
            sym = data.get("symmetry")
            return cls(
                g1=g,
                gluing_set=tuple(data["gluing_set"]),
                phi_minus=dict(data["phi_minus"]),
                phi_plus=dict(data["phi_plus"]),
                symmetry=None if sym is None else dict(sym["vertices"]),
                edge_symmetry=None if sym is None or "edges" not in sym else dict(sym["edges"]),
                name=str(data.get("name", name)),
            )
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed generator spec: missing or bad field {exc}") from exc

    def to_json(self) -> dict:
        out = {
            "graph": self.g1.to_json(),
            "gluing_set": list(self.gluing_set),
            "phi_minus": dict(sorted(self.phi_minus.items())),
            "phi_plus": dict(sorted(self.phi_plus.items())),
        }
        if self.name:
            out["name"] = self.name
        if self.symmetry is not None:
            out["symmetry"] = {
                "vertices": dict(sorted(self.symmetry.items())),
                "edges": dict(sorted(self.edge_symmetry.items())),
            }
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    def with_symmetry(self, eta: Mapping[str, str]) -> "GeneratorSpec":
        return GeneratorSpec(self.g1, self.gluing_set, self.phi_minus, self.phi_plus,
                             dict(eta), None, self.name)


def load_spec(source) -> GeneratorSpec:
    """Load a spec from a path, falling back to the bundled example of the same stem."""
    path = FsPath(source)
    if not path.exists():
        bundled = DATA_DIR / (path.stem + ".json")
        if not bundled.exists():
            raise InputError(f"spec file not found: {source}")
        path = bundled
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path} at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return GeneratorSpec.from_json(data, name=path.stem)


def bundled_spec(name: str) -> GeneratorSpec:
    return load_spec(DATA_DIR / f"{name}.json")


def induced_edge_map(g: MultiGraph, eta: Mapping[str, str]) -> dict[str, str]:
    """Edge bijection induced by a vertex map; parallel classes are paired in id order."""
    classes: dict[frozenset, list[str]] = {}
    for e in g.edges:
        classes.setdefault(frozenset(g.ends(e)), []).append(e)
    out = {}
    for pair, members in classes.items():
        image = frozenset(eta[v] for v in pair)
        target = classes.get(image, [])
        if len(target) != len(members):
            raise ValidationError("vertex map is not a graph isomorphism")
        out.update(zip(sorted(members), sorted(target)))
    return out


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------
@dataclass
class ValidationReport:
    checks: dict[str, bool]
    messages: list[str]
    eta: Optional[dict[str, str]]
    l_star: object

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checks": self.checks,
            "messages": self.messages,
            "symmetry": self.eta if self.eta is not None else "none",
            "L_star": self.l_star,
        }


def _pair_counts(g: MultiGraph) -> dict[frozenset, int]:
    out: dict[frozenset, int] = {}
    for k in range(g.n_edges):
        key = frozenset((int(g.tail[k]), int(g.head[k])))
        out[key] = out.get(key, 0) + 1
    return out


def is_symmetry(spec: GeneratorSpec, eta: Mapping[str, str]) -> bool:
    g = spec.g1
    if set(eta) != set(g.vertices) or set(eta.values()) != set(g.vertices):
        return False
    for i in spec.gluing_set:
        if eta[spec.phi_minus[i]] != spec.phi_plus[i] or eta[spec.phi_plus[i]] != spec.phi_minus[i]:
            return False
    counts = _pair_counts(g)
    vi = g.vindex
    for key, c in counts.items():
        u, w = tuple(key)
        if counts.get(frozenset((vi[eta[g.vertices[u]]], vi[eta[g.vertices[w]]])), 0) != c:
            return False
    return True


def find_symmetry(spec: GeneratorSpec) -> Optional[dict[str, str]]:
    """Backtracking search for an isomorphism swapping the gluing maps."""
    g = spec.g1
    n = g.n_vertices
    counts = _pair_counts(g)
    deg = [len(g.incident(v)) for v in range(n)]
    nbrs = [sorted({g.other_end(k, v) for k in g.incident(v)}) for v in range(n)]
    vi = g.vindex
    fixed: dict[int, int] = {}
    for i in spec.gluing_set:
        a, b = vi[spec.phi_minus[i]], vi[spec.phi_plus[i]]
        for x, y in ((a, b), (b, a)):
            if fixed.get(x, y) != y:
                return None
            fixed[x] = y
    if len(set(fixed.values())) != len(fixed):
        return None

    def mult(u: int, w: int) -> int:
        return counts.get(frozenset((u, w)), 0)

    def consistent(x: int, y: int, assign: dict[int, int]) -> bool:
        if deg[x] != deg[y]:
            return False
        for u, w in assign.items():
            if mult(x, u) != mult(y, w):
                return False
        return True

    assign: dict[int, int] = {}
    for x, y in fixed.items():
        if not consistent(x, y, assign):
            return None
        assign[x] = y
    # order free vertices by BFS from the fixed ones so adjacency prunes early
    order: list[int] = []
    seen = set(assign)
    frontier = sorted(assign)
    while len(order) + len(assign) < n:
        nxt = []
        for v in frontier:
            for w in nbrs[v]:
                if w not in seen:
                    seen.add(w)
                    order.append(w)
                    nxt.append(w)
        if not nxt:
            rest = [v for v in range(n) if v not in seen]
            if not rest:
                break
            seen.add(rest[0])
            order.append(rest[0])
            nxt = [rest[0]]
        frontier = nxt
    used = set(assign.values())

    def search(pos: int) -> bool:
        if pos == len(order):
            return True
        x = order[pos]
        for y in range(n):
            if y in used or not consistent(x, y, assign):
                continue
            assign[x] = y
            used.add(y)
            if search(pos + 1):
                return True
            del assign[x]
            used.discard(y)
        return False

    if not search(0):
        return None
    return {g.vertices[x]: g.vertices[y] for x, y in sorted(assign.items())}


def validate(spec: GeneratorSpec, auto_find_symmetry: bool = False) -> ValidationReport:
    g = spec.g1
    msgs: list[str] = []
    checks: dict[str, bool] = {}
    im, ip = spec.i_minus, spec.i_plus
    checks["connected"] = g.n_vertices > 0 and g.is_connected()
    if not checks["connected"]:
        msgs.append("generator is not connected")
    injective = len(im) == len(spec.gluing_set) and len(ip) == len(spec.gluing_set)
    checks["gluing_a"] = injective and not (im & ip)
    if not checks["gluing_a"]:
        msgs.append("gluing maps must be injective with disjoint images")
    inside = [e for e in g.edges if set(g.ends(e)) <= im or set(g.ends(e)) <= ip]
    checks["gluing_b"] = not inside
    if inside:
        msgs.append(f"edges with both ends in one gluing set: {inside}")
    bad_deg = sorted(v for v in im | ip if g.degree(v) != 1)
    checks["doubling"] = not bad_deg
    if bad_deg:
        msgs.append(f"gluing vertices of degree != 1: {bad_deg}")
    cross = [e for e in g.edges if (g.ends(e)[0] in im and g.ends(e)[1] in ip)
             or (g.ends(e)[0] in ip and g.ends(e)[1] in im)]
    checks["non_degenerate"] = not cross
    if cross:
        msgs.append(f"edges joining I- to I+: {cross}")
    eta = spec.symmetry
    if eta is not None:
        checks["symmetric"] = is_symmetry(spec, eta)
        if checks["symmetric"] and spec.edge_symmetry is not None:
            try:
                ok_edges = _edge_map_ok(spec)
            except ValidationError:
                ok_edges = False
            if not ok_edges:
                checks["symmetric"] = False
                msgs.append("edge symmetry does not follow the vertex symmetry")
        if not checks["symmetric"]:
            msgs.append("supplied symmetry is not a valid end-swapping isomorphism")
    elif auto_find_symmetry:
        eta = find_symmetry(spec) if checks["gluing_a"] else None
        checks["symmetric"] = eta is not None
        if eta is None:
            msgs.append("no end-swapping isomorphism exists")
    else:
        checks["symmetric"] = False
        msgs.append("no symmetry supplied (use auto search)")
    return ValidationReport(checks, msgs, eta, spec.l_star)


def _edge_map_ok(spec: GeneratorSpec) -> bool:
    g, eta, em = spec.g1, spec.symmetry, spec.edge_symmetry
    if sorted(em) != sorted(g.edges) or sorted(em.values()) != sorted(g.edges):
        return False
    return all({eta[v] for v in g.ends(e)} == set(g.ends(em[e])) for e in g.edges)


def require_valid(spec: GeneratorSpec) -> GeneratorSpec:
    """Validate, filling in an automatically found symmetry; raise on failure."""
    rep = validate(spec, auto_find_symmetry=True)
    if not rep.ok:
        raise ValidationError("; ".join(rep.messages))
    if spec.symmetry is None:
        spec.symmetry = rep.eta
        spec.edge_symmetry = induced_edge_map(spec.g1, rep.eta)
    return spec


# ---------------------------------------------------------------------------
# replacement levels
# ---------------------------------------------------------------------------
class ReplacementLevel:
    """The level-``n`` replacement graph in array form.

    Attributes
    ----------
    tail, head : edge endpoints (vertex indices); ``tail`` carries the ``e-`` label.
    rep_v1, rep_word : canonical representative ``(v, word)`` of each vertex
        class (``rep_word`` indexes a level ``n-1`` edge; ``-1`` at level 1).
    proj_kind, proj_idx : one-step vertex projection (kind 0 = edge, 1 = vertex).
    minus, plus : boolean masks of ``I-^(n)`` and ``I+^(n)``.
    """

    def __init__(self, spec, n, tail, head, rep_v1, rep_word, proj_kind, proj_idx,
                 elem_to_vertex, minus, plus):
        self.spec = spec
        self.n = n
        self.tail = tail
        self.head = head
        self.rep_v1 = rep_v1
        self.rep_word = rep_word
        self.proj_kind = proj_kind
        self.proj_idx = proj_idx
        self.elem_to_vertex = elem_to_vertex
        self.minus = minus
        self.plus = plus
        self.base = spec.n_edges

    @property
    def n_edges(self) -> int:
        return len(self.tail)

    @property
    def n_vertices(self) -> int:
        return len(self.rep_v1)

    @property
    def minus_vertices(self) -> np.ndarray:
        return np.flatnonzero(self.minus)

    @property
    def plus_vertices(self) -> np.ndarray:
        return np.flatnonzero(self.plus)

    # -- names ---------------------------------------------------------
    def word(self, k: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.n):
            k, r = divmod(int(k), self.base)
            out.append(r)
        return tuple(reversed(out))

    def word_ids(self, k: int) -> tuple[str, ...]:
        return tuple(self.spec.g1.edges[i] for i in self.word(k))

    def edge_index(self, word: Sequence) -> int:
        if len(word) != self.n:
            raise InputError(f"word length {len(word)} does not match level {self.n}")
        k = 0
        for letter in word:
            if isinstance(letter, str):
                letter = self.spec.g1.eindex[letter]
            k = k * self.base + int(letter)
        return k

    def edge_name(self, k: int) -> str:
        return ".".join(self.word_ids(k))

    def vertex_name(self, i: int) -> str:
        v = self.spec.g1.vertices[self.rep_v1[i]]
        if self.n == 1:
            return v
        prev = self.spec.level(self.n - 1)
        return f"[{v},{prev.edge_name(self.rep_word[i])}]"

    @cached_property
    def vertex_names(self) -> tuple[str, ...]:
        return tuple(self.vertex_name(i) for i in range(self.n_vertices))

    @cached_property
    def graph(self) -> MultiGraph:
        vn = self.vertex_names
        return MultiGraph(vn, [(self.edge_name(k), vn[t], vn[h])
                               for k, (t, h) in enumerate(zip(self.tail.tolist(), self.head.tolist()))])

    @property
    def family(self) -> PathFamilySpec:
        vn = self.vertex_names
        return PathFamilySpec([vn[i] for i in self.minus_vertices], [vn[i] for i in self.plus_vertices])

    # -- structure -------------------------------------------------------
    @cached_property
    def incidence(self) -> list[list[int]]:
        inc: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for k, (t, h) in enumerate(zip(self.tail.tolist(), self.head.tolist())):
            inc[t].append(k)
            inc[h].append(k)
        return inc

    def max_degree(self) -> int:
        deg = np.bincount(np.concatenate([self.tail, self.head]), minlength=self.n_vertices)
        return int(deg.max())

    def project_vertex(self, i: int, m: int) -> tuple[int, int]:
        """``pi_{n,m}`` of vertex ``i``: ``(1, vertex)`` or ``(0, edge)`` at level ``m``."""
        if not 1 <= m <= self.n:
            raise InputError(f"cannot project level {self.n} to level {m}")
        kind, idx, lev = 1, int(i), self
        while lev.n > m:
            if kind == 1:
                kind, idx = int(lev.proj_kind[idx]), int(lev.proj_idx[idx])
            else:
                idx //= self.base
            lev = self.spec.level(lev.n - 1)
        return kind, idx

    def project_vertices(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized ``pi_{n,m}`` on all vertices."""
        kind = np.ones(self.n_vertices, dtype=np.int8)
        idx = np.arange(self.n_vertices, dtype=np.int64)
        lev = self
        while lev.n > m:
            is_v = kind == 1
            new_kind = kind.copy()
            new_idx = idx // self.base
            new_kind[is_v] = lev.proj_kind[idx[is_v]]
            new_idx[is_v] = lev.proj_idx[idx[is_v]]
            kind, idx = new_kind, new_idx
            lev = self.spec.level(lev.n - 1)
        return kind, idx

    def project_edge(self, k: int, m: int) -> int:
        return int(k) // self.base ** (self.n - m)

    def __repr__(self):
        return f"ReplacementLevel(n={self.n}, |V|={self.n_vertices}, |E|={self.n_edges})"


def _level_one(spec: GeneratorSpec) -> ReplacementLevel:
    g = spec.g1
    nv = g.n_vertices
    minus = np.zeros(nv, dtype=bool)
    plus = np.zeros(nv, dtype=bool)
    minus[g.vertex_ids(spec.i_minus)] = True
    plus[g.vertex_ids(spec.i_plus)] = True
    return ReplacementLevel(spec, 1, g.tail.copy(), g.head.copy(), np.arange(nv, dtype=np.int64),
                            np.full(nv, -1, dtype=np.int64), None, None, None, minus, plus)


def _next_level(spec: GeneratorSpec, prev: ReplacementLevel) -> ReplacementLevel:
    g = spec.g1
    ne1, nv1 = g.n_edges, g.n_vertices
    nen = prev.n_edges
    vi = g.vindex
    gl = spec.gluing_set
    phi = np.array([[vi[spec.phi_minus[i]] for i in gl], [vi[spec.phi_plus[i]] for i in gl]], dtype=np.int64)

    # arcs (vertex w, edge f, side) grouped by w; every arc is glued to the
    # first arc of its group, separately for each gluing index
    w_arc = np.concatenate([prev.tail, prev.head])
    f_arc = np.concatenate([np.arange(nen), np.arange(nen)])
    s_arc = np.concatenate([np.zeros(nen, dtype=np.int64), np.ones(nen, dtype=np.int64)])
    order = np.lexsort((f_arc, w_arc))
    w_arc, f_arc, s_arc = w_arc[order], f_arc[order], s_arc[order]
    first = np.ones(len(w_arc), dtype=bool)
    first[1:] = w_arc[1:] != w_arc[:-1]
    head_pos = np.maximum.accumulate(np.where(first, np.arange(len(w_arc)), 0))
    rest = ~first
    a_list, b_list = [], []
    for j in range(len(gl)):
        keys = phi[s_arc, j] * nen + f_arc
        a_list.append(keys[head_pos[rest]])
        b_list.append(keys[rest])
    a = np.concatenate(a_list) if a_list else np.zeros(0, dtype=np.int64)
    b = np.concatenate(b_list) if b_list else np.zeros(0, dtype=np.int64)
    labels = kernels.union_find_labels(nv1 * nen, a, b)
    roots = np.unique(labels)
    elem_to_vertex = np.searchsorted(roots, labels)
    rep_v1 = roots // nen
    rep_word = roots % nen

    k = np.arange(nen * ne1, dtype=np.int64)
    f, gi = k // ne1, k % ne1
    tail = elem_to_vertex[g.tail[gi] * nen + f]
    head = elem_to_vertex[g.head[gi] * nen + f]

    in_minus = np.zeros(nv1, dtype=bool)
    in_plus = np.zeros(nv1, dtype=bool)
    in_minus[phi[0]] = True
    in_plus[phi[1]] = True
    proj_kind = np.where(in_minus[rep_v1] | in_plus[rep_v1], 1, 0).astype(np.int8)
    proj_idx = np.where(in_minus[rep_v1], prev.tail[rep_word],
                        np.where(in_plus[rep_v1], prev.head[rep_word], rep_word))
    is_v = proj_kind == 1
    minus = is_v & prev.minus[np.where(is_v, proj_idx, 0)]
    plus = is_v & prev.plus[np.where(is_v, proj_idx, 0)]
    return ReplacementLevel(spec, prev.n + 1, tail, head, rep_v1, rep_word, proj_kind, proj_idx,
                            elem_to_vertex, minus, plus)


def build_level(spec: GeneratorSpec, n: int) -> ReplacementLevel:
    """Level ``n`` of the replacement sequence (cached on the spec)."""
    if n < 1:
        raise InputError("levels start at 1")
    if n in spec._levels:
        return spec._levels[n]
    budget = edge_budget()
    if spec.n_edges ** n > budget:
        raise BudgetError(f"|E_1|^n = {spec.n_edges}^{n} = {spec.n_edges ** n} exceeds the edge budget {budget}")
    if 1 not in spec._levels:
        rep = validate(spec, auto_find_symmetry=spec.symmetry is None)
        structural = {k: v for k, v in rep.checks.items() if k != "symmetric"}
        if not all(structural.values()):
            raise ValidationError("; ".join(rep.messages))
        spec._levels[1] = _level_one(spec)
    for m in range(2, n + 1):
        if m not in spec._levels:
            spec._levels[m] = _next_level(spec, spec._levels[m - 1])
    return spec._levels[n]


# ---------------------------------------------------------------------------
# similarity maps, path lifts, local addressing
# ---------------------------------------------------------------------------
def similarity_image(spec: GeneratorSpec, n: int, e: int, m: int, item: int, kind: str = "edge") -> int:
    """``sigma_{e,m}`` applied to a level-``m`` edge or vertex, for ``e`` in ``E_n``."""
    base = spec.n_edges
    if not 0 <= e < base ** n:
        raise InputError("edge index out of range for its level")
    if kind == "edge":
        if not 0 <= item < base ** m:
            raise InputError("item index out of range for its level")
        return e * base ** m + item
    if kind != "vertex":
        raise InputError("kind must be 'edge' or 'vertex'")
    lev_m = spec.level(m)
    target = spec.level(n + m)
    u = int(lev_m.rep_v1[item])
    suffix = 0 if m == 1 else int(lev_m.rep_word[item])
    parent = e * base ** (m - 1) + suffix
    return int(target.elem_to_vertex[u * base ** (n + m - 1) + parent])


@dataclass
class PathLift:
    shadow: Path
    windows: list[tuple[int, int]]

    def to_dict(self) -> dict:
        return {"shadow": self.shadow.to_dict(), "windows": [list(w) for w in self.windows]}


def lift_path(spec: GeneratorSpec, theta: Path, n: int, m: int,
              a: Iterable[str], b: Iterable[str]) -> PathLift:
    """Project a level ``n+m`` path to its shadow in ``G_n`` with crossing windows."""
    top = spec.level(n + m)
    low = spec.level(n)
    gt, gl = top.graph, low.graph
    a_set, b_set = set(a), set(b)
    proj = []
    for v in theta.vertices:
        if v not in gt.vindex:
            raise InputError(f"vertex {v!r} is not at level {n + m}")
        proj.append(top.project_vertex(gt.vindex[v], n))
    if proj[0][0] != 1 or gl.vertices[proj[0][1]] not in a_set:
        raise InputError("path does not start over the source set")
    if proj[-1][0] != 1 or gl.vertices[proj[-1][1]] not in b_set:
        raise InputError("path does not end over the target set")
    checkpoints = [i for i, (kind, _) in enumerate(proj) if kind == 1]
    verts = [proj[0][1]]
    edges: list[int] = []
    windows: list[tuple[int, int]] = []
    for j0, j1 in zip(checkpoints, checkpoints[1:]):
        u0, u1 = proj[j0][1], proj[j1][1]
        if u0 == u1:
            continue
        f = top.project_edge(gt.eindex[theta.edges[j0]], n)
        edges.append(f)
        verts.append(u1)
        windows.append((j0, j1))
    shadow = Path(tuple(gl.vertices[v] for v in verts), tuple(gl.edges[f] for f in edges))
    return PathLift(shadow, windows)


class LocalAddressing:
    """Endpoints and incidences of level-``N`` edges computed from words alone.

    Vertex keys: ``("v", u)`` at level 1, ``("e", u, parent_word)`` for a
    non-gluing generator vertex inside the copy of ``parent_word``, and
    ``("g", i, vertex_key)`` for the class of gluing index ``i`` around a
    lower-level vertex.  Words are tuples of generator edge indices.
    """

    def __init__(self, spec: GeneratorSpec):
        g = spec.g1
        self.spec = spec
        vi = g.vindex
        self.glue = {}
        for i in spec.gluing_set:
            self.glue[vi[spec.phi_minus[i]]] = (i, 0)
            self.glue[vi[spec.phi_plus[i]]] = (i, 1)
        self.ends = [(int(g.tail[k]), int(g.head[k])) for k in range(g.n_edges)]
        self.inc = [list(g.incident(v)) for v in range(g.n_vertices)]
        self.phi = {0: {i: vi[spec.phi_minus[i]] for i in spec.gluing_set},
                    1: {i: vi[spec.phi_plus[i]] for i in spec.gluing_set}}
        self._ep: dict = {}

    def endpoint(self, word: tuple, side: int):
        key = (word, side)
        hit = self._ep.get(key)
        if hit is None:
            u = self.ends[word[-1]][side]
            parent = word[:-1]
            if not parent:
                hit = ("v", u)
            elif u in self.glue:
                i, s = self.glue[u]
                hit = ("g", i, self.endpoint(parent, s))
            else:
                hit = ("e", u, parent)
            self._ep[key] = hit
        return hit

    def endpoints(self, word: tuple) -> tuple:
        return self.endpoint(word, 0), self.endpoint(word, 1)

    def incident(self, vkey) -> list[tuple]:
        tag = vkey[0]
        if tag == "v":
            return [(k,) for k in self.inc[vkey[1]]]
        if tag == "e":
            return [vkey[2] + (k,) for k in self.inc[vkey[1]]]
        _, i, w = vkey
        out = []
        for f in self.incident(w):
            side = 0 if self.endpoint(f, 0) == w else 1
            u = self.phi[side][i]
            out.append(f + (self.inc[u][0],))
        return out

    def vertex_index(self, vkey) -> int:
        """Index of a local vertex key in the built level it lives on."""
        tag = vkey[0]
        if tag == "v":
            return int(vkey[1])
        if tag == "e":
            parent = vkey[2]
            lev = self.spec.level(len(parent) + 1)
            return int(lev.elem_to_vertex[vkey[1] * self.spec.n_edges ** len(parent) + index_of(self.spec, parent)])
        _, i, w = vkey
        f = self.incident(w)[0]
        side = 0 if self.endpoint(f, 0) == w else 1
        lev = self.spec.level(len(f) + 1)
        return int(lev.elem_to_vertex[self.phi[side][i] * self.spec.n_edges ** len(f) + index_of(self.spec, f)])

    def neighbours(self, word: tuple) -> set[tuple]:
        """Edges sharing a vertex with ``word`` (including itself)."""
        out: set[tuple] = set()
        for v in self.endpoints(word):
            out.update(self.incident(v))
        return out

    def intersect(self, w1: tuple, w2: tuple) -> bool:
        return bool(set(self.endpoints(w1)) & set(self.endpoints(w2)))


def interior_edge_pair(spec: GeneratorSpec, n: int, e: int) -> tuple[int, int]:
    """Two disjoint level ``n+2`` edges inside ``e``; the first touches nothing outside ``e``."""
    rep = validate(spec, auto_find_symmetry=spec.symmetry is None)
    if not (rep.checks["doubling"] and rep.checks["non_degenerate"]):
        raise ValidationError("interior edges need a doubling, non-degenerate spec")
    lev2 = spec.level(2)
    g2 = lev2.graph
    unit = np.ones(g2.n_edges)
    _, theta = weighted_shortest_path(g2, unit, lev2.family.sources, lev2.family.targets)
    if len(theta) < 4:  # pragma: no cover - L* >= 2 forces length >= 4
        raise ValidationError("level-2 path too short for the interior construction")
    h1, h2 = g2.eindex[theta.edges[1]], g2.eindex[theta.edges[3]]
    return similarity_image(spec, n, e, 2, h1), similarity_image(spec, n, e, 2, h2)


def word_of(spec: GeneratorSpec, index: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(n):
        index, r = divmod(int(index), spec.n_edges)
        out.append(r)
    return tuple(reversed(out))


def index_of(spec: GeneratorSpec, word: Sequence[int]) -> int:
    k = 0
    for letter in word:
        k = k * spec.n_edges + int(letter)
    return k


def parse_word(spec: GeneratorSpec, word) -> tuple[int, ...]:
    """Accept a word as edge ids (list or dot-joined string) or indices."""
    if isinstance(word, str):
        word = [w for w in word.split(".") if w]
    out = []
    for letter in word:
        if isinstance(letter, str):
            if letter not in spec.g1.eindex:
                raise InputError(f"unknown generator edge {letter!r}")
            out.append(spec.g1.eindex[letter])
        else:
            out.append(int(letter))
    return tuple(out)


@dataclass
class WordRelation:
    intersecting: bool
    split_index: Optional[int]
    letters: list[str]

    def to_dict(self) -> dict:
        if not self.intersecting:
            return {"relation": "disjoint"}
        return {"relation": "intersecting", "m": self.split_index, "letters": self.letters}


def word_relation(spec: GeneratorSpec, x, y, n: int) -> WordRelation:
    x, y = parse_word(spec, x), parse_word(spec, y)
    if len(x) < n or len(y) < n:
        raise InputError("words must have length at least n")
    x, y = x[:n], y[:n]
    eta = spec.eta_edge_index()
    if x == y:
        return WordRelation(True, n + 1, ["direct"] * n)
    loc = LocalAddressing(spec)
    if not loc.intersect(x, y):
        return WordRelation(False, None, [])
    m = next(i for i in range(n) if x[i] != y[i]) + 1
    letters = []
    for i in range(m, n):
        if x[i] == y[i]:
            letters.append("direct")
        elif x[i] == eta[y[i]]:
            letters.append("eta")
        else:
            letters.append("unrelated")
    return WordRelation(True, m, letters)


# ---------------------------------------------------------------------------
# random symmetric generators (test corpus)
# ---------------------------------------------------------------------------
def random_symmetric_spec(rng: np.random.Generator, max_edges: int = 10, tries: int = 1000) -> GeneratorSpec:
    """A random valid symmetric spec with at most ``max_edges`` edges.

    Built as a left half mirrored across a set of fixed middle vertices.
    """
    for _ in range(tries):
        k = int(rng.integers(1, 3))
        n_left = int(rng.integers(1, 4))
        n_mid = int(rng.integers(0, 3))
        left = [f"l{i}" for i in range(n_left)]
        mid = [f"m{i}" for i in range(n_mid)]
        glue_l = [f"a{i}" for i in range(k)]
        mirror = {v: v.replace("l", "r", 1) for v in left} | {v: v.replace("a", "b", 1) for v in glue_l}
        mirror |= {v: v for v in mid}
        mirror |= {w: v for v, w in list(mirror.items()) if v != w}
        half: list[tuple[str, str]] = [(glue_l[i], left[int(rng.integers(n_left))]) for i in range(k)]
        pool = [(u, w) for i, u in enumerate(left) for w in left[i + 1:]]
        pool += [(u, m) for u in left for m in mid]
        pool += [(u, mirror[w]) for u in left for w in left]
        pool += [(u, w) for i, u in enumerate(mid) for w in mid[i + 1:]]
        extra = int(rng.integers(0, 5))
        for _ in range(extra):
            if pool:
                half.append(pool[int(rng.integers(len(pool)))])
        edges: list[tuple[str, str]] = []
        for u, w in half:
            edges.append((u, w))
            if {mirror[u], mirror[w]} != {u, w}:
                edges.append((mirror[u], mirror[w]))
        if len(edges) > max_edges:
            continue
        vertices = sorted({v for e in edges for v in e})
        g = MultiGraph(vertices, [(f"e{j + 1:02d}", u, w) for j, (u, w) in enumerate(edges)])
        spec = GeneratorSpec(g, tuple(str(i + 1) for i in range(k)),
                             {str(i + 1): glue_l[i] for i in range(k)},
                             {str(i + 1): mirror[glue_l[i]] for i in range(k)},
                             symmetry={v: mirror[v] for v in vertices}, name="random")
        if not set(mirror[v] for v in vertices) <= set(vertices):
            continue
        rep = validate(spec)
        if rep.ok and spec.l_star is not UNREACHABLE:
            return spec
    raise ValidationError("could not draw a valid random spec")  # pragma: no cover
