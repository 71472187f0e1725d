import itertools
import json

import numpy as np
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from confdim.conformal import symmetrize
from confdim.graph_core import (MultiGraph, PathFamilySpec, dijkstra, hop_distance,
                                max_edge_disjoint_paths)
from confdim.cli import dimension_report
from confdim.igs import GeneratorSpec, load_spec, random_symmetric_spec, validate
from confdim.metric_cascade import CascadeDensity, distance_table
from confdim.modulus import solve_modulus
from confdim._util import UNREACHABLE

SPECS = {name: load_spec(name) for name in ("diamond", "fig5_left", "two_branch")}
fast = settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def admissible_density(spec, raw):
    vals = symmetrize(spec, np.asarray(raw))
    g = spec.g1
    short = dijkstra(g, vals, g.vertex_ids(spec.i_minus))[0][g.vertex_ids(spec.i_plus)].min()
    vals = vals / short
    assume(np.all(vals < 1.0))
    return vals


@st.composite
def spec_and_density(draw):
    name = draw(st.sampled_from(sorted(SPECS)))
    spec = SPECS[name]
    raw = draw(st.lists(st.floats(0.05, 1.0), min_size=spec.n_edges, max_size=spec.n_edges))
    return spec, admissible_density(spec, raw)


@fast
@given(spec_and_density(), st.integers(1, 2))
def test_metric_axioms(sd, n):
    spec, vals = sd
    lev = spec.level(n)
    d = distance_table(lev, CascadeDensity(spec, vals)).vertex
    assert np.allclose(d, d.T, atol=1e-12)
    assert np.all(np.diag(d) == 0)
    off = d[~np.eye(len(d), dtype=bool)]
    assert np.all(off > 0)
    # triangle inequality through every intermediate vertex
    assert np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :] + 1e-12)


@fast
@given(st.sampled_from(sorted(SPECS)), st.floats(1.1, 3.0), st.floats(0.05, 0.5))
def test_modulus_monotone_in_p(name, p, dp):
    # an optimal density never exceeds one, so its p-mass shrinks as p grows
    spec = SPECS[name]
    a = solve_modulus(spec.g1, spec.family, p).value
    b = solve_modulus(spec.g1, spec.family, p + dp).value
    assert b <= a + 1e-7


@fast
@given(st.sampled_from(sorted(SPECS)), st.data())
def test_modulus_monotone_in_family(name, data):
    # deleting edges shrinks the family, hence the modulus
    spec = SPECS[name]
    g = spec.g1
    drop = data.draw(st.sets(st.sampled_from(g.edges), max_size=2))
    keep = [(e, *g.ends(e)) for e in g.edges if e not in drop]
    h = MultiGraph(g.vertices, keep)
    fam = PathFamilySpec(spec.i_minus, spec.i_plus)
    if hop_distance(h, spec.i_minus, spec.i_plus) is UNREACHABLE:
        return
    full = solve_modulus(g, fam, 2.0).value
    part = solve_modulus(h, fam, 2.0).value
    assert part <= full + 1e-7


@fast
@given(st.integers(0, 10_000))
def test_t_bijective_random(seed):
    spec = random_symmetric_spec(np.random.default_rng(seed), 10)
    rep = validate(spec)
    assert rep.ok
    lev = spec.level(2)
    words = [lev.word(k) for k in range(lev.n_edges)]
    assert len(set(words)) == lev.n_edges == spec.n_edges ** 2
    assert all(lev.edge_index(w) == k for k, w in enumerate(words))


@fast
@given(st.integers(0, 10_000))
def test_spec_json_round_trip(seed):
    spec = random_symmetric_spec(np.random.default_rng(seed), 10)
    data = json.loads(json.dumps(spec.to_json()))
    again = GeneratorSpec.from_json(data)
    assert again.to_json() == spec.to_json()
    assert again.l_star == spec.l_star


@st.composite
def small_graph(draw):
    nv = draw(st.integers(2, 5))
    verts = [f"v{i}" for i in range(nv)]
    m = draw(st.integers(1, 7))
    pairs = draw(st.lists(st.tuples(st.integers(0, nv - 1), st.integers(0, nv - 1))
                          .filter(lambda t: t[0] != t[1]), min_size=1, max_size=m))
    return MultiGraph(verts, [(f"e{k}", verts[u], verts[w]) for k, (u, w) in enumerate(pairs)])


@fast
@given(small_graph())
def test_menger_against_deletion(g):
    a, b = [g.vertices[0]], [g.vertices[-1]]
    k, paths = max_edge_disjoint_paths(g, a, b)
    used = [e for p in paths for e in p.edges]
    assert len(used) == len(set(used)) and len(paths) == k
    # minimum edge cut by exhaustive deletion
    cut = None
    for size in range(g.n_edges + 1):
        for drop in itertools.combinations(g.edges, size):
            h = MultiGraph(g.vertices, [(e, *g.ends(e)) for e in g.edges if e not in drop])
            if hop_distance(h, a, b) is UNREACHABLE:
                cut = size
                break
        if cut is not None:
            break
    assert k == cut


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 10_000))
def test_report_deterministic(seed):
    spec = random_symmetric_spec(np.random.default_rng(seed), 8)
    a = json.dumps(dimension_report(spec).to_dict(), sort_keys=True)
    b = json.dumps(dimension_report(spec).to_dict(), sort_keys=True)
    assert a == b
