import pytest

from confdim.analysis import (hat_modulus_check, interior_ball_check, porosity_report,
                              porosity_witness, restricted_system, restricted_words,
                              uniform_perfectness_check, vertex_comparability, vertex_modulus)
from confdim.errors import BudgetError, InputError
from confdim.graph_core import graph_from_edges
from confdim.igs import GeneratorSpec

THETA_STAR = ["e1", "e2", "e4", "e6"]


def test_restricted_counts(diamond, fig5_left):
    for spec, F in ((diamond, THETA_STAR), (fig5_left, [f"e{i}" for i in range(1, 9)])):
        for n in range(1, 5):
            assert len(restricted_words(spec, F, n)) == len(F) ** n


def test_restricted_diamond(diamond):
    rs = restricted_system(diamond, THETA_STAR, 2)
    assert len(rs.edges) == 16 and rs.non_empty and rs.symmetric_path
    full = restricted_system(diamond, diamond.g1.edges, 2)
    assert len(full.edges) == 36 and full.graph.n_edges == diamond.level(2).n_edges


def test_restricted_single_edge(diamond):
    rs = restricted_system(diamond, ["e2"], 1)
    assert not rs.non_empty and not rs.symmetric_path
    with pytest.raises(InputError):
        restricted_system(diamond, [], 1)


def test_hat_modulus(diamond, fig5_left):
    for spec in (diamond, fig5_left):
        for n in (1, 2):
            rep = hat_modulus_check(spec, n)
            assert rep["abs_error"] <= 1e-7, rep


def test_hat_q1_uses_every_edge(diamond):
    rs = restricted_system(diamond, THETA_STAR, 2)
    assert rs.graph.n_edges == 4 ** 2


def test_porosity_witness_diamond(diamond):
    w = porosity_witness(diamond, THETA_STAR, ["e1"], 4.0 ** -2)
    assert w.valid and w.n == 2 and len(w.cylinder) == 6
    assert w.f[:3] == (0, 0, 0) and set(w.f) - {0, 1, 3, 5}
    assert w.warning is None


def test_porosity_preconditions(diamond):
    with pytest.raises(InputError):
        porosity_witness(diamond, diamond.g1.edges, ["e1"], 0.1)
    with pytest.raises(InputError):
        porosity_witness(diamond, THETA_STAR, ["e3"], 0.1)
    with pytest.raises(InputError):
        porosity_witness(diamond, THETA_STAR, ["e1"], 50.0)
    r = 4.0 ** -16
    assert porosity_witness(diamond, THETA_STAR, ["e1"], r, depth=20).warning
    with pytest.raises(BudgetError):
        porosity_witness(diamond, THETA_STAR, ["e1"], r, depth=19)


@pytest.mark.parametrize("name", ["diamond", "fig5_left"])
def test_porosity_samples(all_specs, name):
    rep = porosity_report(all_specs[name], samples=50)
    assert rep["proper"] and rep["uniformly_perfect"]
    assert rep["valid"] == 50 and rep["ok"]


def test_porosity_not_proper(fig5_right):
    assert not porosity_report(fig5_right)["proper"]


@pytest.mark.parametrize("name,F", [("diamond", THETA_STAR), ("fig5_left", [f"e{i}" for i in range(1, 9)])])
def test_subset_claims(all_specs, name, F):
    assert interior_ball_check(all_specs[name], F, n_max=2)["ok"]
    assert uniform_perfectness_check(all_specs[name], F, samples=30)["ok"]


@pytest.mark.parametrize("k", [3, 4, 5])
def test_vertex_modulus_single_path(k):
    g = graph_from_edges([(f"e{i}", f"v{i}", f"v{i + 1}") for i in range(k)])
    data = {"graph": g.to_json(), "gluing_set": ["1"], "phi_minus": {"1": "v0"}, "phi_plus": {"1": f"v{k}"}}
    spec = GeneratorSpec.from_json(data)
    lev = spec.level(1)
    rep = vertex_modulus(lev, ["v0"], [f"v{k}"], 2.0)
    # uniform charge 1/(k+1) on k+1 vertices against 1/k on k edges
    assert rep["vertex_modulus"] == pytest.approx(1 / (k + 1))
    assert rep["ratio"] == pytest.approx((k + 1) / k)
    inner = vertex_modulus(lev, ["v0"], [f"v{k}"], 2.0, charge_endpoints=False)
    assert inner["vertex_modulus"] == pytest.approx(1 / (k - 1))


def test_vertex_modulus_diamond(diamond):
    lev = diamond.level(1)
    rep = vertex_modulus(lev, ["x0"], ["x3"], 2.0)
    # symmetric reduction: 4a + b = 1 minimizing 4a^2 + 2b^2
    assert rep["vertex_modulus"] == pytest.approx(2 / 9)
    with pytest.raises(InputError):
        vertex_modulus(lev, ["x0"], ["x0"], 2.0)


def test_vertex_comparability_stable(all_specs):
    for spec in all_specs.values():
        rep = vertex_comparability(spec, 2.0)
        assert rep["ok"] and rep["spread"] < 1.25
