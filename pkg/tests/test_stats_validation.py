import math

import numpy as np
import pytest

from acg import stats_validation as sv
from acg.degree_model import load_params, self_loop_rate
from acg.errors import DegenerateVariance
from acg.sampler import generate_graph

SINGLE_TYPE = {
    "K": 1,
    "P": [[0, 0], [0, 1.0]],
    "Q": [[0, 0], [0, 1.0]],
}


def test_node_lln_fields_and_determinism(bal2):
    p, q = bal2
    rep = sv.node_lln(p, q, sizes=[100, 400], reps=3, seed=7)
    assert rep.kind == "node"
    assert rep.sizes == (100, 400)
    assert len(rep.max_deviations) == 2
    assert len(rep.acceptance_rates) == 2
    assert all(0 < r <= 1 for r in rep.acceptance_rates)
    assert rep.max_deviations[1] < rep.max_deviations[0]
    assert all(0 <= tv <= 1 for tv in rep.tv_distances)
    again = sv.node_lln(p, q, sizes=[100, 400], reps=3, seed=7)
    assert again == rep


def test_node_lln_degenerate_law_has_zero_deviation():
    p, q = load_params(SINGLE_TYPE)
    rep = sv.node_lln(p, q, sizes=[50], reps=2, seed=1)
    assert rep.max_deviations[0] == pytest.approx(0.0, abs=1e-12)
    assert rep.acceptance_rates[0] == 1.0


def test_edge_lln_fields_and_determinism(bal2):
    p, q = bal2
    rep = sv.edge_lln(p, q, sizes=[100, 1600], reps=3, seed=11)
    assert rep.kind == "edge"
    assert rep.acceptance_rates is None
    assert rep.max_deviations[1] < rep.max_deviations[0]
    assert sv.edge_lln(p, q, sizes=[100, 1600], reps=3, seed=11) == rep


def test_lln_slope_over_three_decades(bal2):
    p, q = bal2
    rep = sv.node_lln(p, q, sizes=[100, 1000, 10000], reps=3, seed=3)
    # sqrt(n) concentration: log-log slope near -1/2
    assert -0.7 < rep.slope < -0.3
    assert rep.slope_window == (-0.65, -0.35)


def test_first_edges_matches_product_measure(bal2):
    p, q = bal2
    rep = sv.first_edges_distribution(p, q, n=500, length=2, reps=400, seed=19)
    assert rep.off_support == 0
    assert sum(rep.counts.values()) == 400
    assert rep.dof == 15
    assert rep.p_value > 0.001
    assert abs(rep.mutual_information) < 0.05


def test_first_edges_single_cell():
    p, q = load_params(SINGLE_TYPE)
    rep = sv.first_edges_distribution(p, q, n=60, length=1, reps=50, seed=2)
    assert rep.chi_square == 0.0
    assert rep.p_value == 1.0
    assert rep.mutual_information is None
    assert rep.counts == {(((1, 1)),): 50}


def test_first_edges_length_bounds(bal2):
    p, q = bal2
    with pytest.raises(ValueError):
        sv.first_edges_distribution(p, q, n=100, length=0, reps=5, seed=1)
    with pytest.raises(ValueError):
        sv.first_edges_distribution(p, q, n=100, length=6, reps=5, seed=1)


def test_self_loop_report(bal2):
    p, q = bal2
    rep = sv.self_loop_poisson(p, q, n=400, reps=200, seed=23)
    assert len(rep.counts) == 200
    assert rep.mean == pytest.approx(np.mean(rep.counts))
    assert rep.predicted == pytest.approx(self_loop_rate(p, q))
    assert 0.6 < rep.var_mean_ratio < 1.4
    assert math.isfinite(rep.z_score)
    assert sv.self_loop_poisson(p, q, n=400, reps=200, seed=23) == rep


def test_assortativity_sign(bal2, disas):
    p, q = bal2
    rs = [
        sv.assortativity_coefficient(generate_graph(p, q, 4000, seed=[29, i]))
        for i in range(5)
    ]
    assert abs(np.mean(rs)) < 0.1
    pd, qd = disas
    rs = [
        sv.assortativity_coefficient(generate_graph(pd, qd, 4000, seed=[31, i]))
        for i in range(5)
    ]
    assert np.mean(rs) < -0.2


def test_assortativity_degenerate():
    p, q = load_params(SINGLE_TYPE)
    g = generate_graph(p, q, 50, seed=5)
    with pytest.raises(DegenerateVariance):
        sv.assortativity_coefficient(g)


def test_to_jsonable_round():
    rep = sv.SelfLoopReport(
        n=1,
        reps=1,
        seed=0,
        counts=(np.int64(2),),
        mean=np.float64(2.0),
        variance=0.0,
        predicted=1.0,
        z_score=float("inf"),
        var_mean_ratio=float("nan"),
        mean_within_4se=False,
    )
    out = sv.to_jsonable(rep)
    assert out["counts"] == [2]
    assert isinstance(out["counts"][0], int)
    assert out["mean"] == 2.0
    assert out["z_score"] == "inf"
    assert out["var_mean_ratio"] == "nan"
    assert sv.to_jsonable({1: np.arange(2), (1, 2): "x"}) == {"1": [0, 1], "(1, 2)": "x"}
