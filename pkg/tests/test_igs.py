import json

import numpy as np
import pytest

from confdim.errors import BudgetError, InputError, ValidationError
from confdim.graph_core import enumerate_paths, hop_distance
from confdim.igs import (GeneratorSpec, LocalAddressing, find_symmetry, index_of, interior_edge_pair,
                         lift_path, load_spec, parse_word, random_symmetric_spec, similarity_image,
                         validate, word_of, word_relation)


def _modified(spec, extra_edges=(), drop_symmetry=False):
    data = spec.to_json()
    data["graph"]["edges"] += [{"id": i, "ends": [u, v]} for i, u, v in extra_edges]
    if drop_symmetry:
        data.pop("symmetry", None)
    return GeneratorSpec.from_json(data)


def test_validate_diamond(diamond):
    rep = validate(_modified(diamond, drop_symmetry=True), auto_find_symmetry=True)
    assert rep.ok and rep.l_star == 4
    assert rep.eta == {"x0": "x3", "x1": "x2", "x2": "x1", "x3": "x0", "y1": "y1", "y2": "y2"}


def test_validate_non_degenerate_fails(diamond):
    rep = validate(_modified(diamond, [("e7", "x0", "x3")]))
    assert not rep.checks["non_degenerate"]


def test_validate_doubling_fails(diamond):
    rep = validate(_modified(diamond, [("e7", "x0", "y1")]))
    assert not rep.checks["doubling"]


def test_fig5_left_symmetry_fixes_middle(fig5_left):
    eta = find_symmetry(_modified(fig5_left, drop_symmetry=True))
    assert eta["t"] == "t" and eta["b"] == "b"


def test_fig5_right_counts(fig5_right):
    assert fig5_right.n_edges == 8 and fig5_right.l_star == 3


def test_level_one_is_generator(all_specs):
    for spec in all_specs.values():
        lev = spec.level(1)
        assert lev.n_edges == spec.n_edges
        assert sorted(lev.graph.edges) == sorted(spec.g1.edges)


def test_level_two_diamond(diamond):
    lev = diamond.level(2)
    assert lev.n_edges == 36
    # 6 copies of 6 vertices glued at the 5 inner vertices of the generator,
    # each inner vertex of degree d merging d copies of the gluing vertex
    assert lev.n_vertices == 6 * 6 - sum(diamond.g1.degree(v) - 1 for v in diamond.g1.vertices)


def test_budget(diamond, monkeypatch):
    monkeypatch.setenv("CONFDIM_BUDGET", "100")
    fresh = load_spec("diamond")
    with pytest.raises(BudgetError):
        fresh.level(3)


def test_single_edge_generator_invalid():
    data = {"graph": {"vertices": ["a", "b"], "edges": [{"id": "e", "ends": ["a", "b"]}]},
            "gluing_set": ["1"], "phi_minus": {"1": "a"}, "phi_plus": {"1": "b"}}
    spec = GeneratorSpec.from_json(data)
    assert not validate(spec).checks["non_degenerate"]
    with pytest.raises(ValidationError):
        spec.level(2)


def test_t_bijectivity(all_specs):
    for spec in all_specs.values():
        for n in (1, 2, 3):
            if spec.n_edges ** n > 1000:
                continue
            lev = spec.level(n)
            words = {lev.word(k) for k in range(lev.n_edges)}
            assert len(words) == lev.n_edges == spec.n_edges ** n
            for k in range(lev.n_edges):
                assert lev.edge_index(lev.word(k)) == k == index_of(spec, word_of(spec, k, n))


def test_degree_bound(all_specs):
    for spec in all_specs.values():
        for n in range(1, 5):
            if spec.n_edges ** n > 5000:
                break
            assert spec.level(n).max_degree() == spec.g1.max_degree()


def test_shortest_level_paths(all_specs):
    for spec in all_specs.values():
        for n in (1, 2, 3):
            if spec.n_edges ** n > 1000:
                break
            lev = spec.level(n)
            fam = lev.family
            assert hop_distance(lev.graph, fam.sources, fam.targets) == spec.l_star ** n


def test_similarity_partition(diamond):
    images = [{similarity_image(diamond, 1, e, 1, f) for f in range(6)} for e in range(6)]
    assert sum(len(s) for s in images) == 36
    assert set().union(*images) == set(range(36))
    verts = {similarity_image(diamond, 1, 0, 1, v, kind="vertex") for v in range(6)}
    assert len(verts) == 6


def test_sm2_intersections(diamond):
    lev1, lev2 = diamond.level(1), diamond.level(2)
    ends = [set(lev1.graph.ends(e)) for e in lev1.graph.edges]
    for e in range(6):
        for f in range(e + 1, 6):
            ve = {similarity_image(diamond, 1, e, 1, v, kind="vertex") for v in range(6)}
            vf = {similarity_image(diamond, 1, f, 1, v, kind="vertex") for v in range(6)}
            shared = ends[e] & ends[f]
            assert bool(ve & vf) == bool(shared)
            if shared:
                kinds, idx = lev2.project_vertices(1)
                pre = {i for i in range(lev2.n_vertices)
                       if kinds[i] == 1 and lev1.graph.vertices[idx[i]] in shared}
                assert ve & vf == pre


def test_lift_paths(diamond):
    lev2 = diamond.level(2)
    fam = lev2.family
    for theta in enumerate_paths(lev2.graph, fam, simple_only=True, cap=100):
        lift = lift_path(diamond, theta, 1, 1, diamond.i_minus, diamond.i_plus)
        assert lift.shadow.is_valid_in(diamond.g1)
        assert lift.shadow.start in diamond.i_minus and lift.shadow.end in diamond.i_plus
        assert len(lift.windows) == len(lift.shadow)


def test_lift_m_zero(diamond):
    theta = enumerate_paths(diamond.g1, diamond.family, simple_only=True, cap=10)[0]
    lift = lift_path(diamond, theta, 1, 0, diamond.i_minus, diamond.i_plus)
    assert lift.shadow == theta
    assert lift.windows == [(i, i + 1) for i in range(len(theta))]


def test_interior_edge_pair(diamond):
    lev3 = diamond.level(3)
    for e in range(6):
        f1, f2 = interior_edge_pair(diamond, 1, e)
        assert f1 // 36 == e and f2 // 36 == e
        assert not set(lev3.graph.ends(lev3.graph.edges[f1])) & set(lev3.graph.ends(lev3.graph.edges[f2]))
        touching = {k for k in range(lev3.n_edges)
                    if set(lev3.graph.ends(lev3.graph.edges[k])) & set(lev3.graph.ends(lev3.graph.edges[f1]))}
        assert all(k // 36 == e for k in touching)


def test_local_addressing_matches_built_level(fig5_left):
    lev = fig5_left.level(2)
    la = LocalAddressing(fig5_left)
    g = lev.graph
    for k in range(lev.n_edges):
        w = lev.word(k)
        nb = {lev.edge_index(x) for x in la.neighbours(w)}
        ends = set(g.ends(g.edges[k]))
        truth = {j for j in range(lev.n_edges) if set(g.ends(g.edges[j])) & ends}
        assert nb == truth


def test_word_relation(diamond):
    assert word_relation(diamond, "e1.e2", "e1.e2", 2).split_index == 3
    assert word_relation(diamond, "e1.e1", "e6.e6", 2).to_dict() == {"relation": "disjoint"}
    lev = diamond.level(2)
    g = lev.graph
    eta = diamond.eta_edge_index()
    for k in range(36):
        for j in range(36):
            a, b = lev.word(k), lev.word(j)
            if k != j and a[0] != b[0] and set(g.ends(g.edges[k])) & set(g.ends(g.edges[j])):
                rel = word_relation(diamond, a, b, 2)
                assert rel.split_index == 1
                assert rel.letters[0] in ("direct", "eta")
                assert (rel.letters[0] == "eta") == (a[1] == eta[b[1]] and a[1] != b[1])


def test_parse_word(diamond):
    assert parse_word(diamond, "e1.e6") == (0, 5)
    with pytest.raises(InputError):
        parse_word(diamond, ["nope"])


def test_json_round_trip(all_specs):
    for spec in all_specs.values():
        text = spec.dumps()
        again = GeneratorSpec.from_json(json.loads(text), name=spec.name)
        assert again.dumps() == text


def test_examples_path_resolves_to_bundled():
    assert load_spec("examples/fig5_right.json").n_edges == 8
    with pytest.raises(InputError):
        load_spec("examples/missing.json")


def test_random_specs_valid():
    rng = np.random.default_rng(5)
    for _ in range(10):
        spec = random_symmetric_spec(rng, 10)
        assert spec.n_edges <= 10 and validate(spec).ok
