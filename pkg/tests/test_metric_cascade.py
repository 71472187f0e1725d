import math

import numpy as np
import pytest

from confdim.conformal import attainment
from confdim.errors import InputError
from confdim.igs import index_of
from confdim.metric_cascade import (CascadeDensity, ball_measure_bounds, block_distance,
                                    brute_force_block_distance, brute_force_distance_table, cascade,
                                    diameter_bounds, diameter_estimate, distance_table,
                                    gh_embedding_error, gh_observed, is_quasiconvex, limit_distance,
                                    measure_model, quasi_visual_k0, quasi_visual_report,
                                    space_diameter_bounds)


@pytest.fixture(scope="module")
def quarter(diamond):
    return CascadeDensity.constant(diamond, 0.25)


@pytest.fixture(scope="module")
def witness(fig5_right):
    return CascadeDensity(fig5_right, attainment(fig5_right).witness)


def test_cascade_products(diamond, quarter):
    np.testing.assert_allclose(quarter.level(2), 1 / 16)
    a, b = 0.3, 0.2
    rho = {"e1": a, "e6": a, "e2": b, "e3": b, "e4": b, "e5": b}
    lev = cascade(diamond, rho, 2)
    assert lev[index_of(diamond, (0, 1))] == pytest.approx(a * b, rel=1e-15)
    cd = CascadeDensity(diamond, {"e1": 1 / 3, "e6": 1 / 3, "e2": 1 / 6, "e3": 1 / 6, "e4": 1 / 6, "e5": 1 / 6})
    assert (cd.m, cd.M) == (1 / 6, 1 / 3)


def test_level_ratio_bounds(witness):
    for n in (2, 3):
        ratio = witness.level(n) / np.repeat(witness.level(n - 1), witness.spec.n_edges)
        assert np.all(ratio >= witness.m * (1 - 1e-14)) and np.all(ratio <= witness.M * (1 + 1e-14))


def test_density_errors(diamond):
    with pytest.raises(InputError):
        CascadeDensity.constant(diamond, 0.2)  # not admissible
    with pytest.raises(InputError):
        CascadeDensity.constant(diamond, 1.0)
    with pytest.raises(InputError):
        CascadeDensity(diamond, [0.5, 0.3, 0.3, 0.3, 0.3, 0.4])  # not symmetric


def test_block_distance_examples(diamond, quarter):
    lev1, lev2 = diamond.level(1), diamond.level(2)
    assert block_distance(lev1, quarter, "x0", "x3") == pytest.approx(1.0, abs=1e-15)
    assert block_distance(lev1, quarter, "x1", "x1") == 0.0
    a, b = lev2.family.sources, lev2.family.targets
    assert block_distance(lev2, quarter, next(iter(a)), next(iter(b))) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(InputError):
        block_distance(lev1, quarter, "nowhere", "x0")


def test_oracle_two_branch(two_branch):
    cd = CascadeDensity.constant(two_branch, 0.5)
    for n in (1, 2):
        lev = two_branch.level(n)
        fast = distance_table(lev, cd).vertex
        slow = brute_force_distance_table(lev, cd)
        np.testing.assert_allclose(fast, slow, atol=1e-12, rtol=0)
    lev = two_branch.level(1)
    assert brute_force_block_distance(lev, cd, "a1", "b2") == pytest.approx(1.0)


def test_single_block_bound(diamond, quarter):
    # any two vertices of one level-1 block are within its weight
    lev2 = diamond.level(2)
    t = distance_table(lev2, quarter).vertex
    kinds, idx = lev2.project_vertices(1)
    for e in range(6):
        inside = [i for i in range(lev2.n_vertices)
                  if any(lev2.tail[k] == i or lev2.head[k] == i for k in range(6 * e, 6 * e + 6))]
        assert t[np.ix_(inside, inside)].max() <= 0.25 + 1e-15


def test_metric_axioms(all_specs):
    for spec in all_specs.values():
        cd = CascadeDensity.constant(spec, 1.0 / spec.l_star)
        for n in (1, 2):
            d = distance_table(spec.level(n), cd).vertex
            assert np.allclose(d, d.T, atol=0)
            off = d + np.eye(len(d))
            assert off.min() > 0
            for k in range(len(d)):
                assert np.all(d <= d[:, [k]] + d[[k], :] + 1e-14)


def test_limit_distance(diamond, quarter):
    assert limit_distance(diamond, quarter, "e1", "e1").value == 0.0
    ld = limit_distance(diamond, quarter, "e1", "e6", eps=1e-3)
    assert ld.converged and ld.error_bound <= 1e-3
    lo, hi = ld.interval
    assert lo <= 1.0 <= hi + 1e-12


def test_dl6_dl8_samples(diamond, quarter):
    lev = diamond.level(3)
    rho = quarter.level(3)
    bg = quarter.blocks(3)
    for e in range(0, lev.n_edges, 17):
        d = bg.edge_distances_from(e)
        ends = {lev.tail[e], lev.head[e]}
        for f in range(lev.n_edges):
            meets = bool(ends & {lev.tail[f], lev.head[f]})
            if meets:
                assert d[f] <= rho[e] + rho[f] + 1e-15
            else:
                assert d[f] >= quarter.m / quarter.M * rho[e] * (1 - 1e-12)


def test_diameter_bounds(quarter):
    lo, hi = diameter_bounds(quarter, 1, 0)
    assert (lo, hi) == pytest.approx((1 / 64, 1 / 4))
    assert lo <= diameter_estimate(quarter, 1, 0) <= hi
    slo, shi = space_diameter_bounds(quarter)
    assert slo <= shi and slo >= 1.0 - 1e-12


def test_measure_normalization(quarter, witness):
    for cd in (quarter, witness):
        mm = measure_model(cd.spec, cd)
        for n in range(1, 6):
            assert abs(mm.total(n) - 1.0) <= 1e-12


def test_whole_space_ball(diamond, quarter):
    mm = measure_model(diamond, quarter)
    _, hi = space_diameter_bounds(quarter)
    lower, upper = ball_measure_bounds(mm, "e2.e3", 2 * hi + 1, 3)
    assert lower == pytest.approx(1.0) and upper == pytest.approx(1.0)


def test_quasi_visual(diamond, quarter):
    assert quasi_visual_k0(quarter) == 3
    cd = CascadeDensity(diamond, {"e1": 1 / 3, "e6": 1 / 3, "e2": 1 / 6, "e3": 1 / 6, "e4": 1 / 6, "e5": 1 / 6})
    rep = quasi_visual_report(diamond, cd, n_max=4)
    assert rep["iv_holds"]
    assert all(math.isfinite(rep[k]) for k in ("C_i", "C_ii", "C_iii"))
    ii = [row["ii_weight_over_distance"] for row in rep["levels"][1:]]
    assert max(ii) / min(ii) < 2.0
    flat = quasi_visual_report(diamond, quarter, n_max=2)
    assert flat["weight_constants"]["i"] == 1.0


def test_gh(diamond, quarter):
    assert gh_embedding_error(quarter, 3) == 1 / 32
    assert all(gh_embedding_error(quarter, n + 1) < gh_embedding_error(quarter, n) for n in range(1, 6))
    assert gh_observed(diamond, quarter, 2, 4)["within"]


def test_quasiconvex(all_specs, witness):
    for spec in all_specs.values():
        assert is_quasiconvex(spec, CascadeDensity.constant(spec, 1.0 / spec.l_star))
