"""Discrete p-modulus of path families, with dual flows and duality certificates.

The solver is a constraint-generation loop.  A restricted program over the
current working set of paths is solved exactly (a primal-dual interior point
method for ``p > 1``, an LP for ``p = 1``), then a shortest-path oracle under
the current density looks for paths shorter than one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import linprog, minimize

from ._util import UNREACHABLE
from .errors import ConvergenceError, EmptyFamilyError, InputError
from .graph_core import (MultiGraph, PathFamilySpec, contract_family, dijkstra, enumerate_paths,
                         hop_distance, weighted_shortest_path)

TOL_FEAS = 1e-9
TAU_GAP = 1e-7
TAU_FLOW = 1e-7
ITERATION_CAP = 100_000


# ---------------------------------------------------------------------------
# result types
# ---------------------------------------------------------------------------
@dataclass
class Density:
    graph: MultiGraph
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.graph.n_edges,):
            raise InputError("density length does not match the edge count")

    @classmethod
    def from_mapping(cls, g: MultiGraph, rho: Mapping[str, float]) -> "Density":
        missing = [e for e in g.edges if e not in rho]
        if missing:
            raise InputError(f"density missing edges {missing}")
        return cls(g, np.array([float(rho[e]) for e in g.edges]))

    def __getitem__(self, e: str) -> float:
        return float(self.values[self.graph.eindex[e]])

    @property
    def support(self) -> frozenset:
        return frozenset(e for e, v in zip(self.graph.edges, self.values) if v != 0.0)

    def mass(self, p: float) -> float:
        return float(np.sum(self.values ** p))

    def as_dict(self) -> dict[str, float]:
        return {e: float(v) for e, v in zip(self.graph.edges, self.values)}

    def to_dict(self) -> dict:
        return {"rho": self.as_dict()}


@dataclass
class UnitFlow:
    """Signed flow per edge, positive meaning from ``e-`` to ``e+``."""

    graph: MultiGraph
    values: np.ndarray

    def divergence(self) -> np.ndarray:
        g = self.graph
        div = np.zeros(g.n_vertices)
        np.add.at(div, g.tail, self.values)
        np.add.at(div, g.head, -self.values)
        return div

    def residuals(self, spec: PathFamilySpec) -> dict[str, float]:
        a, b = spec.check(self.graph)
        div = self.divergence()
        interior = np.ones(self.graph.n_vertices, dtype=bool)
        interior[a] = False
        interior[b] = False
        return {
            "max_interior_divergence": float(np.max(np.abs(div[interior]), initial=0.0)),
            "net_flux_error": float(abs(div[a].sum() - 1.0)),
        }

    def energy(self, q: float) -> float:
        if np.isinf(q):
            return float(np.max(np.abs(self.values), initial=0.0))
        return float(np.sum(np.abs(self.values) ** q))

    def as_dict(self) -> dict[str, float]:
        return {e: float(v) for e, v in zip(self.graph.edges, self.values)}

    def to_dict(self) -> dict:
        return {"J": self.as_dict()}


@dataclass
class ModulusResult:
    p: float
    value: float
    rho: Density
    flow: UnitFlow
    feasibility_margin: float
    duality_product: float
    trace: list = field(default_factory=list)
    active_paths: int = 0

    @property
    def certified(self) -> bool:
        return self.duality_product <= TAU_GAP and self.feasibility_margin >= -TOL_FEAS

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "value": self.value,
            "rho": self.rho.as_dict(),
            "flow": self.flow.as_dict(),
            "feasibility_margin": self.feasibility_margin,
            "duality_product": self.duality_product,
            "certified": self.certified,
            "active_paths": self.active_paths,
            "trace": self.trace,
        }


def dual_exponent(p: float) -> float:
    return np.inf if p == 1 else p / (p - 1.0)


# ---------------------------------------------------------------------------
# restricted programs
# ---------------------------------------------------------------------------
def _ipm(A: np.ndarray, p: float, scale: float = 2.0, max_iter: int = 300):
    """Primal-dual interior point for ``min sum x^p  s.t.  A x >= 1, x >= 0``.

    Returns ``(x, lam, iterations)``.  ``A`` is a dense 0/1 row-per-path matrix
    whose columns all appear in some row.  Newton steps solve the augmented
    KKT system, which stays well conditioned as active slacks vanish.
    """
    m, n = A.shape
    x = np.full(n, scale / A.sum(axis=1).min())
    s = A @ x - 1.0
    lam = np.ones(m)
    z = np.ones(n)
    AT = A.T
    K = np.zeros((n + m, n + m))
    K[:n, n:] = -AT
    K[n:, :n] = A
    diag_n = np.diag_indices(n)
    diag_m = (np.arange(n, n + m), np.arange(n, n + m))

    def max_step(v, dv):
        neg = dv < 0
        return min(1.0, float(np.min(-v[neg] / dv[neg]))) if np.any(neg) else 1.0

    for it in range(1, max_iter + 1):
        grad = p * x ** (p - 1.0)
        rd = grad - AT @ lam - z
        rp = A @ x - 1.0 - s
        mu = (s @ lam + x @ z) / (m + n)
        if (np.max(np.abs(rd)) <= 1e-12 * (1.0 + np.max(grad))
                and np.max(np.abs(rp)) <= 1e-13 and mu <= 1e-15):
            return x, lam, it
        K[diag_n] = p * (p - 1.0) * x ** (p - 2.0) + z / x
        # dependent path rows make the dual block singular as slacks vanish
        K[diag_m] = s / lam + 1e-14

        def direction(target):
            rhs = np.concatenate([-rd + target / x - z, -rp + target / lam - s])
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
            dx, dlam = sol[:n], sol[n:]
            ds = A @ dx + rp
            dz = (target - x * z - z * dx) / x
            return dx, ds, dlam, dz

        aff = direction(0.0)
        a_aff = min(max_step(x, aff[0]), max_step(s, aff[1]), max_step(lam, aff[2]), max_step(z, aff[3]))
        mu_aff = ((s + a_aff * aff[1]) @ (lam + a_aff * aff[2])
                  + (x + a_aff * aff[0]) @ (z + a_aff * aff[3])) / (m + n)
        sigma = min(1.0, (mu_aff / mu) ** 3) if mu > 0 else 0.0
        dx, ds, dlam, dz = direction(sigma * mu)
        alpha = min(1.0, 0.995 * min(max_step(x, dx), max_step(s, ds), max_step(lam, dlam), max_step(z, dz)))
        x = np.maximum(x + alpha * dx, 1e-300)
        s = np.maximum(s + alpha * ds, 1e-300)
        lam = np.maximum(lam + alpha * dlam, 1e-300)
        z = np.maximum(z + alpha * dz, 1e-300)
    raise ConvergenceError(f"interior point did not converge in {max_iter} iterations")


def _lp(A: np.ndarray, lexicographic: bool = True):
    """``min sum x  s.t.  A x >= 1, x >= 0``; lexicographically least optimal vertex."""
    m, n = A.shape
    res = linprog(np.ones(n), A_ub=-A, b_ub=-np.ones(m), bounds=[(0, None)] * n, method="highs")
    if res.status != 0:  # pragma: no cover - the LP is always feasible and bounded
        raise ConvergenceError(f"LP solve failed: {res.message}")
    lam = -np.asarray(res.ineqlin.marginals)
    value = float(res.fun)
    x = np.asarray(res.x)
    if lexicographic:
        ub = [None] * n
        a_ub = np.vstack([-A, np.ones((1, n))])
        b_ub = np.concatenate([-np.ones(m), [value * (1 + 1e-12) + 1e-14]])
        for i in range(n):
            c = np.zeros(n)
            c[i] = 1.0
            r = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=[(0, u) for u in ub], method="highs")
            if r.status != 0:  # pragma: no cover
                break
            ub[i] = float(r.x[i]) + 1e-13
            x = np.asarray(r.x)
        x = np.where(np.abs(x) < 1e-12, 0.0, x)
    return x, np.maximum(lam, 0.0)


# ---------------------------------------------------------------------------
# constraint generation core
# ---------------------------------------------------------------------------
@dataclass
class CGOutcome:
    x: np.ndarray
    rows: list
    lam: np.ndarray
    min_length: float
    trace: list


def constraint_generation(n_vars: int, p: float,
                          separate: Callable[[np.ndarray], tuple[float, list]],
                          seed_rows: Sequence[tuple[int, ...]],
                          tol_feas: float = TOL_FEAS,
                          max_iter: int = ITERATION_CAP,
                          start_scale: float = 2.0) -> CGOutcome:
    """Generic loop: ``separate(x)`` returns the minimum row sum over all
    constraints and a list of violated rows (tuples of variable indices)."""
    rows: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    for r in seed_rows:
        r = tuple(sorted(set(r)))
        if r not in seen:
            seen.add(r)
            rows.append(r)
    trace = []
    used = 0
    polish = False
    while True:
        cols = sorted({c for r in rows for c in r})
        pos = {c: i for i, c in enumerate(cols)}
        A = np.zeros((len(rows), len(cols)))
        for i, r in enumerate(rows):
            A[i, [pos[c] for c in r]] = 1.0
        if p == 1:
            # the lexicographic polish is only worth paying for once feasible
            xr, lam = _lp(A, lexicographic=polish)
            used += 1
        else:
            xr, lam, its = _ipm(A, p, scale=start_scale)
            used += its
        x = np.zeros(n_vars)
        x[cols] = xr
        min_len, new = separate(x)
        trace.append({"round": len(trace) + 1, "paths": len(rows),
                      "restricted_value": float(np.sum(xr ** p)), "min_length": float(min_len)})
        fresh = []
        for r in new:
            r = tuple(sorted(set(r)))
            if r not in seen:
                seen.add(r)
                fresh.append(r)
        if min_len >= 1.0 - tol_feas or not fresh:
            if p == 1 and not polish:
                polish = True
                continue
            return CGOutcome(x, rows, lam, float(min_len), trace)
        rows.extend(fresh)
        if used >= max_iter:
            raise ConvergenceError("modulus solver hit the iteration cap", trace)


# ---------------------------------------------------------------------------
# edge modulus
# ---------------------------------------------------------------------------
def _check_family(g: MultiGraph, spec: PathFamilySpec, p: float):
    if p < 1:
        raise InputError("p must be at least 1")
    a, b = spec.check(g, disjoint=True)
    if hop_distance(g, spec.sources, spec.targets) is UNREACHABLE:
        raise EmptyFamilyError("no connecting paths")
    return a, b


def _oriented(g: MultiGraph, verts: Sequence[int], edges: Sequence[int]) -> tuple[tuple[int, ...], np.ndarray]:
    sign = np.array([1.0 if g.tail[k] == verts[i] else -1.0 for i, k in enumerate(edges)])
    return tuple(edges), sign


def _tree_path(g: MultiGraph, pred: np.ndarray, end: int) -> tuple[list[int], list[int]]:
    verts, edges = [end], []
    v = end
    while pred[v] >= 0:
        k = int(pred[v])
        edges.append(k)
        v = g.other_end(k, v)
        verts.append(v)
    return verts[::-1], edges[::-1]


def solve_modulus(g: MultiGraph, spec: PathFamilySpec, p: float, tol: float = TAU_GAP,
                  seed: Optional[int] = None, max_iter: int = ITERATION_CAP) -> ModulusResult:
    """p-modulus of Theta(A, B) on ``g``, with its optimal density and dual flow.

    ``seed`` perturbs the initial working set and starting point; the optimum
    does not depend on it for ``p > 1``.
    """
    p = float(p)
    a, b = _check_family(g, spec, p)
    oriented: dict[tuple[int, ...], list] = {}

    def separate(x: np.ndarray):
        dist, pred = dijkstra(g, x, a)
        db = dist[b]
        new = []
        for j in np.argsort(db, kind="stable"):
            if db[j] >= 1.0 - TOL_FEAS:
                break
            verts, edges = _tree_path(g, pred, int(b[j]))
            key = tuple(sorted(edges))
            oriented.setdefault(key, _oriented(g, verts, edges))
            new.append(edges)
        return float(db.min()), new

    unit = np.ones(g.n_edges)
    if seed is not None:
        unit = np.random.default_rng(seed).uniform(0.5, 1.5, g.n_edges)
    _, first = weighted_shortest_path(g, unit, spec.sources, spec.targets)
    verts0 = [g.vindex[v] for v in first.vertices]
    edges0 = [g.eindex[e] for e in first.edges]
    oriented[tuple(sorted(edges0))] = _oriented(g, verts0, edges0)
    scale = 2.0 if seed is None else float(np.random.default_rng(seed + 1).uniform(1.5, 4.0))
    out = constraint_generation(g.n_edges, p, separate, [tuple(edges0)], max_iter=max_iter,
                                start_scale=scale)
    rho = out.x.copy()
    if p > 1:
        rho[rho < 1e-300] = 0.0
    length = float(dijkstra(g, rho, a)[0][b].min())
    if length <= 0:  # pragma: no cover - impossible for a converged solve
        raise ConvergenceError("degenerate density after constraint generation", out.trace)
    rho = rho / length
    # rounding can leave the minimum length a hair below one
    fix = float(dijkstra(g, rho, a)[0][b].min())
    if fix < 1.0:
        rho = rho / fix
    margin = float(dijkstra(g, rho, a)[0][b].min()) - 1.0
    value = float(np.sum(rho ** p))

    flow = np.zeros(g.n_edges)
    total = float(out.lam.sum())
    for r, w in zip(out.rows, out.lam):
        if w <= 0:
            continue
        edges, sign = oriented[r]
        flow[list(edges)] += w * sign
    flow /= total
    J = UnitFlow(g, flow)
    q = dual_exponent(p)
    if p == 1:
        prod = value * J.energy(q)
    else:
        prod = value ** (1.0 / p) * J.energy(q) ** (1.0 / q)
    return ModulusResult(p, value, Density(g, rho), J, margin, abs(prod - 1.0), out.trace, len(out.rows))


@dataclass
class FlowCandidate:
    flow: UnitFlow
    residuals: dict
    valid: bool

    def to_dict(self) -> dict:
        return {"flow": self.flow.as_dict(), "residuals": self.residuals, "valid": self.valid}


def dual_flow_from_density(g: MultiGraph, spec: PathFamilySpec, p: float, rho, mod_value: float,
                           tau_flow: float = TAU_FLOW) -> FlowCandidate:
    """Flow with magnitude ``rho^(p-1) / Mod`` signed by shortest-path potentials."""
    if p <= 1:
        raise InputError("the density-to-flow relation needs p > 1")
    vals = rho.values if isinstance(rho, Density) else np.asarray(
        [rho[e] for e in g.edges] if isinstance(rho, Mapping) else rho, dtype=np.float64)
    a, _ = spec.check(g, disjoint=True)
    pot, _ = dijkstra(g, vals, a)
    mag = vals ** (p - 1.0) / mod_value
    dpot = pot[g.head] - pot[g.tail]
    sign = np.where(dpot < 0, -1.0, 1.0)
    J = UnitFlow(g, mag * sign)
    res = J.residuals(spec)
    valid = res["max_interior_divergence"] <= tau_flow and res["net_flux_error"] <= tau_flow
    return FlowCandidate(J, res, valid)


def resistance(g: MultiGraph, spec: PathFamilySpec, p: float) -> dict:
    """p-resistance from the duality identity, with the certified flow energy."""
    if p <= 1:
        raise InputError("resistance needs p > 1")
    r = solve_modulus(g, spec, p)
    q = dual_exponent(p)
    return {"resistance": r.value ** (-1.0 / (p - 1.0)), "flow_energy": r.flow.energy(q),
            "modulus": r.value}


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------
def brute_force_modulus(g: MultiGraph, spec: PathFamilySpec, p: float, tol: float = 1e-10,
                        cap: int = 20_000) -> float:
    """Modulus with every simple path as an explicit constraint (test oracle).

    A and B are first contracted to single vertices.  ``p = 1`` is an LP;
    ``p > 1`` maximizes the smooth concave dual over path weights with a
    bound-constrained quasi-Newton method, then reads off the primal density.
    """
    _check_family(g, spec, p)
    h, sa, sb = contract_family(g, spec)
    paths = enumerate_paths(h, PathFamilySpec([sa], [sb]), simple_only=True, cap=cap)
    if not paths:
        raise EmptyFamilyError("no connecting paths")
    A = np.zeros((len(paths), h.n_edges))
    for i, path in enumerate(paths):
        A[i, [h.eindex[e] for e in path.edges]] = 1.0
    if p == 1:
        res = linprog(np.ones(h.n_edges), A_ub=-A, b_ub=-np.ones(len(paths)),
                      bounds=[(0, None)] * h.n_edges, method="highs")
        return float(res.fun)
    q = p / (p - 1.0)

    def negdual(lam):
        s = A.T @ lam
        t = s / p
        val = lam.sum() - (p - 1.0) * np.sum(t ** q)
        grad = 1.0 - A @ (t ** (q - 1.0))
        return -val, -grad

    lam0 = np.full(len(paths), 1.0 / len(paths))
    res = minimize(negdual, lam0, jac=True, method="L-BFGS-B", bounds=[(0, None)] * len(paths),
                   options={"ftol": 1e-16, "gtol": tol * 1e-3, "maxiter": 100_000, "maxcor": 50})
    rho = (A.T @ res.x / p) ** (1.0 / (p - 1.0))
    rho = rho / (A @ rho).min()
    return float(np.sum(rho ** p))
