import numpy as np
import pytest

from confdim.errors import EmptyFamilyError, InputError
from confdim.graph_core import MultiGraph, PathFamilySpec, graph_from_edges
from confdim.modulus import (Density, brute_force_modulus, dual_flow_from_density, resistance,
                             solve_modulus)


def path_graph(k):
    return graph_from_edges([(f"e{i}", f"v{i}", f"v{i + 1}") for i in range(k)]), \
        PathFamilySpec(["v0"], [f"v{k}"])


# symmetric reduction for the diamond at p = 2: min 2a^2 + 4b^2 with 2a + 2b = 1
DIAMOND_RHO2 = np.array([1 / 3, 1 / 6, 1 / 6, 1 / 6, 1 / 6, 1 / 3])


def test_diamond_p2(diamond):
    r = solve_modulus(diamond.g1, diamond.family, 2.0)
    assert r.value == pytest.approx(1 / 3, abs=1e-9)
    np.testing.assert_allclose(r.rho.values, DIAMOND_RHO2, atol=1e-9)
    assert r.duality_product <= 1e-7 and r.certified
    assert r.feasibility_margin >= 0


def test_diamond_p1(diamond):
    r = solve_modulus(diamond.g1, diamond.family, 1.0)
    assert r.value == pytest.approx(1.0, abs=1e-9)
    assert float(np.min(np.sum(r.rho.values[[0, 1, 3, 5]]))) >= 1 - 1e-9


@pytest.mark.parametrize("k", [2, 3, 5])
@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
def test_single_path(k, p):
    g, fam = path_graph(k)
    r = solve_modulus(g, fam, p)
    assert r.value == pytest.approx(k ** (1 - p), rel=1e-9)
    if p > 1:
        np.testing.assert_allclose(r.rho.values, 1 / k, atol=1e-9)
    else:
        # a vertex of the LP polytope, lexicographically least
        assert sorted(r.rho.values) == [0.0] * (k - 1) + [1.0]


def test_dual_flow_diamond(diamond):
    rho = Density(diamond.g1, DIAMOND_RHO2)
    cand = dual_flow_from_density(diamond.g1, diamond.family, 2.0, rho, 1 / 3)
    np.testing.assert_allclose(np.abs(cand.flow.values), [1, .5, .5, .5, .5, 1], atol=1e-12)
    assert cand.valid


def test_dual_flow_rejects_non_optimal(diamond):
    rho = Density(diamond.g1, np.full(6, 0.5))
    cand = dual_flow_from_density(diamond.g1, diamond.family, 2.0, rho, rho.mass(2))
    assert not cand.valid


def test_dual_flow_single_path():
    g, fam = path_graph(4)
    cand = dual_flow_from_density(g, fam, 2.0, np.full(4, 0.25), 0.25)
    assert cand.valid
    np.testing.assert_allclose(cand.flow.values, 1.0)


def test_resistance(diamond):
    r = resistance(diamond.g1, diamond.family, 2.0)
    assert r["resistance"] == pytest.approx(3.0, rel=1e-9)
    assert r["flow_energy"] == pytest.approx(3.0, rel=1e-7)
    g, fam = path_graph(5)
    assert resistance(g, fam, 2.0)["resistance"] == pytest.approx(5.0)
    par = graph_from_edges([("p", "u", "v"), ("q", "u", "v")])
    assert resistance(par, PathFamilySpec(["u"], ["v"]), 2.0)["resistance"] == pytest.approx(0.5)


@pytest.mark.parametrize("name", ["diamond", "fig5_left", "fig5_right", "two_branch"])
@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
def test_brute_force_agrees(all_specs, name, p):
    spec = all_specs[name]
    fast = solve_modulus(spec.g1, spec.family, p).value
    oracle = brute_force_modulus(spec.g1, spec.family, p)
    assert fast == pytest.approx(oracle, abs=1e-8)


def test_errors():
    g = MultiGraph(["a", "b", "c", "d"], [("e", "a", "b"), ("f", "c", "d")])
    with pytest.raises(EmptyFamilyError):
        solve_modulus(g, PathFamilySpec(["a"], ["d"]), 2.0)
    with pytest.raises(EmptyFamilyError):
        brute_force_modulus(g, PathFamilySpec(["a"], ["d"]), 2.0)
    with pytest.raises(InputError):
        solve_modulus(g, PathFamilySpec(["a"], ["b"]), 0.5)
    with pytest.raises(InputError):
        solve_modulus(g, PathFamilySpec(["a"], ["a", "b"]), 2.0)


def test_monotone_in_p(all_specs):
    ps = [1.0, 1.25, 1.5, 2.0, 2.5, 3.0]
    for spec in all_specs.values():
        vals = [solve_modulus(spec.g1, spec.family, p).value for p in ps]
        assert all(a > b for a, b in zip(vals, vals[1:]))


def test_sub_unit_optimum(all_specs):
    for spec in all_specs.values():
        for p in (1.5, 2.0):
            assert np.all(solve_modulus(spec.g1, spec.family, p).rho.values < 1)


def test_uniqueness_across_seeds(fig5_right):
    a = solve_modulus(fig5_right.g1, fig5_right.family, 2.0)
    b = solve_modulus(fig5_right.g1, fig5_right.family, 2.0, seed=11)
    np.testing.assert_allclose(a.rho.values, b.rho.values, atol=1e-6)


def test_symmetrization_does_not_increase(all_specs):
    for spec in all_specs.values():
        r = solve_modulus(spec.g1, spec.family, 2.0)
        perm = spec.eta_edge_index()
        avg = 0.5 * (r.rho.values + r.rho.values[perm])
        assert np.sum(avg ** 2) <= r.value + 1e-12
        np.testing.assert_allclose(r.rho.values, r.rho.values[perm], atol=1e-7)


def test_level_two_certified(diamond):
    lev = diamond.level(2)
    r = solve_modulus(lev.graph, lev.family, 2.0)
    assert r.value == pytest.approx(1 / 9, abs=1e-9)
    assert r.certified
    res = r.flow.residuals(lev.family)
    assert res["max_interior_divergence"] <= 1e-7 and res["net_flux_error"] <= 1e-7
