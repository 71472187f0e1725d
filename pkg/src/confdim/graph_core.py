"""Finite multigraphs with ordered edge ends, paths and path-family utilities."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence
from xml.etree import ElementTree as ET

import numpy as np

from . import kernels
from ._util import UNREACHABLE
from .errors import EmptyFamilyError, FamilyTooLargeError, InputError


class MultiGraph:
    """Immutable multigraph ``(V, E, xi)``.

    Each edge keeps the order its ends were given in: ``ends(e)[0]`` is the
    tail (``e-``) and ``ends(e)[1]`` the head (``e+``).  Parallel edges are
    allowed, loops are rejected.
    """

    __slots__ = ("vertices", "edges", "tail", "head", "vindex", "eindex", "_inc", "_csr")

    def __init__(self, vertices: Iterable[str], edges: Iterable[tuple[str, str, str]]):
        verts = tuple(str(v) for v in vertices)
        vindex = {v: i for i, v in enumerate(verts)}
        if len(vindex) != len(verts):
            raise InputError("duplicate vertex id")
        ids, tails, heads = [], [], []
        for eid, u, w in edges:
            eid, u, w = str(eid), str(u), str(w)
            if u not in vindex or w not in vindex:
                raise InputError(f"edge {eid!r} has an unknown endpoint")
            if u == w:
                raise InputError(f"edge {eid!r} is a loop")
            ids.append(eid)
            tails.append(vindex[u])
            heads.append(vindex[w])
        eindex = {e: i for i, e in enumerate(ids)}
        if len(eindex) != len(ids):
            raise InputError("duplicate edge id")
        self.vertices = verts
        self.edges = tuple(ids)
        self.tail = np.array(tails, dtype=np.int64)
        self.head = np.array(heads, dtype=np.int64)
        self.vindex = vindex
        self.eindex = eindex
        inc: list[list[int]] = [[] for _ in verts]
        for k, (t, h) in enumerate(zip(tails, heads)):
            inc[t].append(k)
            inc[h].append(k)
        # incident edges sorted by id: lexicographic tie-breaks walk this order
        self._inc = tuple(tuple(sorted(lst, key=lambda k: ids[k])) for lst in inc)
        self._csr = None

    # -- basic queries -------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def ends(self, e: str) -> tuple[str, str]:
        k = self.eindex[e]
        return self.vertices[self.tail[k]], self.vertices[self.head[k]]

    def other_end(self, k: int, v: int) -> int:
        t = int(self.tail[k])
        return int(self.head[k]) if t == v else t

    def incident(self, v: int) -> tuple[int, ...]:
        return self._inc[v]

    def degree(self, v: str) -> int:
        return len(self._inc[self.vindex[v]])

    def max_degree(self) -> int:
        return max((len(x) for x in self._inc), default=0)

    def vertex_ids(self, names: Iterable[str]) -> np.ndarray:
        out = []
        for v in names:
            if v not in self.vindex:
                raise InputError(f"unknown vertex id {v!r}")
            out.append(self.vindex[v])
        return np.array(sorted(set(out)), dtype=np.int64)

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        seen = {0}
        todo = [0]
        while todo:
            u = todo.pop()
            for k in self._inc[u]:
                w = self.other_end(k, u)
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return len(seen) == len(self.vertices)

    def edge_subgraph(self, edge_ids: Iterable[str]) -> "MultiGraph":
        keep = sorted({self.eindex[e] for e in edge_ids})
        used = sorted({int(self.tail[k]) for k in keep} | {int(self.head[k]) for k in keep})
        return MultiGraph(
            [self.vertices[i] for i in used],
            [(self.edges[k], self.vertices[self.tail[k]], self.vertices[self.head[k]]) for k in keep],
        )

    def csr(self):
        """Both orientations of every edge as CSR arcs: ``(indptr, dst, arc_edge, src)``."""
        if self._csr is None:
            n = self.n_vertices
            src = np.concatenate([self.tail, self.head])
            dst = np.concatenate([self.head, self.tail])
            arc_edge = np.concatenate([np.arange(self.n_edges), np.arange(self.n_edges)])
            order = np.lexsort((arc_edge, src))
            indptr = np.zeros(n + 1, dtype=np.int64)
            np.add.at(indptr, src + 1, 1)
            indptr = np.cumsum(indptr)
            self._csr = (indptr, dst[order], arc_edge[order], src[order])
        return self._csr

    # -- serialization -------------------------------------------------
    @classmethod
    def from_json(cls, data: Mapping) -> "MultiGraph":
        try:
            verts = list(data["vertices"])
            edges = [(e["id"], e["ends"][0], e["ends"][1]) for e in data["edges"]]
        except (KeyError, TypeError, IndexError) as exc:
            raise InputError(f"malformed graph JSON: {exc}") from exc
        return cls(verts, edges)

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [{"id": e, "ends": list(self.ends(e))} for e in self.edges],
        }

    def to_dot(self, name: str = "G") -> str:
        out = [f"graph {json.dumps(name)} {{"]
        out += [f"  {json.dumps(v)};" for v in self.vertices]
        for e in self.edges:
            u, w = self.ends(e)
            out.append(f"  {json.dumps(u)} -- {json.dumps(w)} [label={json.dumps(e)}];")
        out.append("}")
        return "\n".join(out) + "\n"

    def to_graphml(self) -> str:
        root = ET.Element("graphml", xmlns="http://graphml.graphdrawing.org/xmlns")
        ET.SubElement(root, "key", id="label", attrib={"for": "edge", "attr.name": "label", "attr.type": "string"})
        g = ET.SubElement(root, "graph", id="G", edgedefault="undirected")
        for v in self.vertices:
            ET.SubElement(g, "node", id=v)
        for e in self.edges:
            u, w = self.ends(e)
            el = ET.SubElement(g, "edge", id=e, source=u, target=w)
            ET.SubElement(el, "data", key="label").text = e
        return ET.tostring(root, encoding="unicode") + "\n"

    def __repr__(self):
        return f"MultiGraph(|V|={self.n_vertices}, |E|={self.n_edges})"


@dataclass(frozen=True)
class Path:
    """Alternating vertex/edge sequence ``[v0, e1, v1, ..., ek, vk]``."""

    vertices: tuple[str, ...]
    edges: tuple[str, ...]

    def __post_init__(self):
        if len(self.vertices) != len(self.edges) + 1:
            raise InputError("a path needs exactly one more vertex than edges")

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def start(self) -> str:
        return self.vertices[0]

    @property
    def end(self) -> str:
        return self.vertices[-1]

    @property
    def is_simple(self) -> bool:
        return len(set(self.vertices)) == len(self.vertices)

    def sequence(self) -> list[str]:
        out = [self.vertices[0]]
        for e, v in zip(self.edges, self.vertices[1:]):
            out += [e, v]
        return out

    def is_valid_in(self, g: MultiGraph) -> bool:
        for i, e in enumerate(self.edges):
            if e not in g.eindex or set(g.ends(e)) != {self.vertices[i], self.vertices[i + 1]}:
                return False
        return all(v in g.vindex for v in self.vertices)

    def concat(self, other: "Path") -> "Path":
        if self.end != other.start:
            raise InputError("paths do not meet")
        return Path(self.vertices + other.vertices[1:], self.edges + other.edges)

    def length(self, w: Mapping[str, float]) -> float:
        return float(sum(w[e] for e in self.edges))

    def to_dict(self) -> dict:
        return {"sequence": self.sequence(), "length": len(self)}


@dataclass(frozen=True)
class PathFamilySpec:
    """The family Theta(A, B) of paths from a vertex of A to a vertex of B."""

    sources: frozenset
    targets: frozenset

    def __init__(self, sources: Iterable[str], targets: Iterable[str]):
        object.__setattr__(self, "sources", frozenset(sources))
        object.__setattr__(self, "targets", frozenset(targets))
        if not self.sources or not self.targets:
            raise InputError("path family endpoints must be non-empty")

    def check(self, g: MultiGraph, disjoint: bool = False) -> tuple[np.ndarray, np.ndarray]:
        a = g.vertex_ids(self.sources)
        b = g.vertex_ids(self.targets)
        if disjoint and self.sources & self.targets:
            raise InputError("source and target sets intersect")
        return a, b


# -- distances ---------------------------------------------------------
def _bfs(g: MultiGraph, src: Iterable[int]) -> np.ndarray:
    dist = np.full(g.n_vertices, -1, dtype=np.int64)
    q = deque()
    for s in src:
        dist[s] = 0
        q.append(s)
    while q:
        u = q.popleft()
        for k in g.incident(u):
            w = g.other_end(k, u)
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def hop_distance(g: MultiGraph, a: Iterable[str], b: Iterable[str]):
    """Fewest edges on a path from ``a`` to ``b``; ``UNREACHABLE`` if none."""
    ai = g.vertex_ids(a)
    bi = g.vertex_ids(b)
    if len(ai) == 0 or len(bi) == 0:
        raise InputError("vertex sets must be non-empty")
    d = _bfs(g, ai.tolist())[bi]
    d = d[d >= 0]
    return int(d.min()) if len(d) else UNREACHABLE


def _weights_array(g: MultiGraph, w) -> np.ndarray:
    if isinstance(w, Mapping):
        arr = np.array([float(w[e]) for e in g.edges])
    else:
        arr = np.asarray(w, dtype=np.float64)
        if arr.shape != (g.n_edges,):
            raise InputError("weight vector length does not match the edge count")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise InputError("weights must be finite and non-negative")
    return arr


def dijkstra(g: MultiGraph, w: np.ndarray, sources: np.ndarray):
    """Distances from a vertex set plus predecessor edge indices (-1 at roots)."""
    indptr, dst, arc_edge, _ = g.csr()
    dist, pred_arc = kernels.dijkstra_csr(indptr, dst, w[arc_edge], sources)
    pred = np.where(pred_arc >= 0, arc_edge[np.maximum(pred_arc, 0)], -1)
    return dist, pred


def _path_from_pred(g: MultiGraph, pred: np.ndarray, end: int) -> Path:
    verts, edges = [end], []
    v = end
    while pred[v] >= 0:
        k = int(pred[v])
        edges.append(k)
        v = g.other_end(k, v)
        verts.append(v)
    verts.reverse()
    edges.reverse()
    return Path(tuple(g.vertices[i] for i in verts), tuple(g.edges[k] for k in edges))


def weighted_shortest_path(g: MultiGraph, w, a: Iterable[str], b: Iterable[str]) -> tuple[float, Path]:
    """Minimum-weight path from ``a`` to ``b``.

    Ties are broken by the lexicographically least edge-id sequence among
    simple minimum-weight paths.
    """
    wa = _weights_array(g, w)
    ai = g.vertex_ids(a)
    bi = g.vertex_ids(b)
    da, _ = dijkstra(g, wa, ai)
    best = float(da[bi].min())
    if not np.isfinite(best):
        raise EmptyFamilyError("no path joins the two vertex sets")
    db, _ = dijkstra(g, wa, bi)
    slack = 1e-12 * max(1.0, best)
    is_target = np.zeros(g.n_vertices, dtype=bool)
    is_target[bi] = True
    any_zero = bool(np.any(wa == 0.0))

    def tight(u: int, k: int, v: int) -> bool:
        return da[u] + wa[k] + db[v] <= best + slack

    def reach_target(v: int, blocked: set) -> bool:
        if is_target[v]:
            return True
        seen = {v}
        todo = [v]
        while todo:
            x = todo.pop()
            for k in g.incident(x):
                y = g.other_end(k, x)
                if y in seen or y in blocked or not tight(x, k, y):
                    continue
                if is_target[y]:
                    return True
                seen.add(y)
                todo.append(y)
        return False

    starts = [int(s) for s in ai if da[s] + db[s] <= best + slack]
    if any(is_target[s] for s in starts):
        s = min((s for s in starts if is_target[s]), key=lambda s: g.vertices[s])
        return 0.0 if best == 0.0 else best, Path((g.vertices[s],), ())
    visited: set[int] = set()
    current = None
    edges: list[int] = []
    verts: list[int] = []
    while True:
        pool = starts if current is None else [current]
        choice = None
        for u in pool:
            for k in g.incident(u):
                v = g.other_end(k, u)
                if v in visited or v == u or not tight(u, k, v):
                    continue
                if any_zero and not reach_target(v, visited | {u}):
                    continue
                key = (g.edges[k], g.vertices[u])
                if choice is None or key < choice[0]:
                    choice = (key, u, k, v)
        if choice is None:  # pragma: no cover - guarded by the tightness test
            raise EmptyFamilyError("shortest-path reconstruction failed")
        _, u, k, v = choice
        if current is None:
            verts.append(u)
            visited.add(u)
        edges.append(k)
        verts.append(v)
        visited.add(v)
        current = v
        if is_target[v]:
            break
    path = Path(tuple(g.vertices[i] for i in verts), tuple(g.edges[k] for k in edges))
    return float(wa[edges].sum()), path


# -- edge-disjoint paths -------------------------------------------------
def max_edge_disjoint_paths(g: MultiGraph, a: Iterable[str], b: Iterable[str]) -> tuple[int, list[Path]]:
    """Maximum number of pairwise edge-disjoint a->b paths (unit-capacity max-flow)."""
    spec = PathFamilySpec(a, b)
    ai, bi = spec.check(g, disjoint=True)
    n = g.n_vertices
    src_set = set(ai.tolist())
    dst_set = set(bi.tolist())
    # flow[k] in {-1, 0, 1}: +1 means one unit tail -> head
    flow = np.zeros(g.n_edges, dtype=np.int64)

    def residual(k: int, u: int) -> bool:
        return flow[k] < 1 if u == g.tail[k] else flow[k] > -1

    count = 0
    while True:
        prev = [-2] * n
        q = deque()
        for s in sorted(src_set):
            prev[s] = -1
            q.append(s)
        hit = -1
        while q and hit < 0:
            u = q.popleft()
            for k in g.incident(u):
                v = g.other_end(k, u)
                if prev[v] != -2 or not residual(k, u):
                    continue
                prev[v] = k
                if v in dst_set:
                    hit = v
                    break
                q.append(v)
        if hit < 0:
            break
        v = hit
        while prev[v] >= 0:
            k = prev[v]
            u = g.other_end(k, v)
            flow[k] += 1 if u == g.tail[k] else -1
            v = u
        count += 1

    paths = []
    for _ in range(count):
        start = next(s for s in sorted(src_set) if _net_out(g, flow, s) > 0)
        verts, edges = [start], []
        pos = {start: 0}
        v = start
        while v not in dst_set or (v == start and not edges):
            k = next(k for k in g.incident(v) if _out(g, flow, k, v))
            w = g.other_end(k, v)
            flow[k] -= 1 if v == g.tail[k] else -1
            if w in pos:  # cancel a cycle
                cut = pos[w]
                for x in verts[cut + 1:]:
                    del pos[x]
                verts = verts[: cut + 1]
                edges = edges[:cut]
            else:
                pos[w] = len(verts)
                verts.append(w)
                edges.append(k)
            v = w
        paths.append(Path(tuple(g.vertices[i] for i in verts), tuple(g.edges[k] for k in edges)))
    return count, paths


def _net_out(g: MultiGraph, flow: np.ndarray, v: int) -> int:
    return sum(int(flow[k]) if v == g.tail[k] else -int(flow[k]) for k in g.incident(v))


def _out(g: MultiGraph, flow: np.ndarray, k: int, v: int) -> bool:
    return flow[k] == 1 if v == g.tail[k] else flow[k] == -1


# -- enumeration -------------------------------------------------------
def enumerate_paths(g: MultiGraph, spec: PathFamilySpec, simple_only: bool = True,
                    cap: int = 100_000) -> list[Path]:
    """All simple A->B paths (or all edge-simple trails when ``simple_only`` is off).

    Order: by start vertex id, then depth-first over incident edges in id order.
    """
    ai, bi = spec.check(g)
    targets = set(bi.tolist())
    out: list[Path] = []
    for s in sorted(ai.tolist(), key=lambda i: g.vertices[i]):
        verts = [s]
        edges: list[int] = []
        on_path = {s}
        used: set[int] = set()
        stack = [iter(g.incident(s))]
        if s in targets:
            out.append(Path((g.vertices[s],), ()))
        while stack:
            advanced = False
            for k in stack[-1]:
                u = verts[-1]
                v = g.other_end(k, u)
                if simple_only and v in on_path:
                    continue
                if not simple_only and k in used:
                    continue
                verts.append(v)
                edges.append(k)
                on_path.add(v)
                used.add(k)
                if v in targets:
                    if len(out) >= cap:
                        raise FamilyTooLargeError(f"family too large for enumeration (cap {cap})")
                    out.append(Path(tuple(g.vertices[i] for i in verts), tuple(g.edges[j] for j in edges)))
                stack.append(iter(g.incident(v)))
                advanced = True
                break
            if not advanced:
                stack.pop()
                if edges:
                    used.discard(edges.pop())
                    x = verts.pop()
                    if x not in verts:
                        on_path.discard(x)
    return out


def contract_family(g: MultiGraph, spec: PathFamilySpec) -> tuple[MultiGraph, str, str]:
    """Identify all of A to one vertex and all of B to another, dropping loops.

    Returns the contracted graph with the names of the two new vertices; edge
    ids are preserved.
    """
    ai, bi = spec.check(g, disjoint=True)
    a_set, b_set = set(ai.tolist()), set(bi.tolist())
    a_name, b_name = "<A>", "<B>"

    def name(i: int) -> str:
        if i in a_set:
            return a_name
        if i in b_set:
            return b_name
        return g.vertices[i]

    verts = [a_name, b_name] + [v for i, v in enumerate(g.vertices) if i not in a_set | b_set]
    edges = []
    for k, e in enumerate(g.edges):
        u, w = name(int(g.tail[k])), name(int(g.head[k]))
        if u != w:
            edges.append((e, u, w))
    return MultiGraph(verts, edges), a_name, b_name


def graph_from_edges(edges: Sequence[tuple[str, str, str]]) -> MultiGraph:
    """Convenience constructor taking vertices from the edge list in first-seen order."""
    seen: dict[str, None] = {}
    for _, u, w in edges:
        seen.setdefault(str(u))
        seen.setdefault(str(w))
    return MultiGraph(list(seen), edges)
