import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from acg import exact_kernel as kernel
from acg.errors import AcgError, CapExceeded, MarginMismatch, ZeroPartition

from helpers import ORACLE_SEQUENCES

E3_SEQUENCE = [(1, 2), (2, 1)]
E3_MINUS = np.array([0, 1, 2])
E3_PLUS = np.array([0, 1, 2])
TABLE_A = [[0, 0, 0], [0, 1, 0], [0, 0, 2]]
TABLE_B = [[0, 0, 0], [0, 0, 1], [0, 1, 1]]

Q_FRAC = [
    [Fraction(0), Fraction(0), Fraction(0)],
    [Fraction(0), Fraction(1, 9), Fraction(2, 9)],
    [Fraction(0), Fraction(2, 9), Fraction(4, 9)],
]
Q_FRAC_DISAS = [
    [Fraction(0), Fraction(0), Fraction(0)],
    [Fraction(0), Fraction(0), Fraction(1, 3)],
    [Fraction(0), Fraction(1, 3), Fraction(1, 3)],
]


def test_margins_of_sequence():
    em, ep = kernel.margins_of_sequence(E3_SEQUENCE, 3)
    assert em.tolist() == [0, 1, 2]
    assert ep.tolist() == [0, 1, 2]
    with pytest.raises(MarginMismatch):
        kernel.margins_of_sequence([(1, 2)], 3)  # unbalanced stubs
    with pytest.raises(MarginMismatch):
        kernel.margins_of_sequence([(3, 3)], 3)  # beyond cutoff


def test_wiring_counts_of_e3_tables():
    assert kernel.wiring_count(TABLE_A) == 12
    assert kernel.wiring_count(TABLE_B) == 24


def test_iter_tables_enumerates_margin_polytope():
    tables = list(kernel.iter_tables(E3_PLUS, E3_MINUS))
    keys = {tuple(map(tuple, t.tolist())) for t in tables}
    assert keys == {tuple(map(tuple, TABLE_A)), tuple(map(tuple, TABLE_B))}


def test_partition_constant_e3(bal2, disas):
    _, q = bal2
    assert kernel.partition_C(E3_MINUS, E3_PLUS, q) == pytest.approx(64 / 81, rel=1e-14)
    # Z drops ordering and within-class stub labels: C = E! (prod e_d!) Z
    assert kernel.log_partition(E3_MINUS, E3_PLUS, q) == pytest.approx(math.log(24 / 729), abs=1e-13)
    _, qd = disas
    assert kernel.partition_C(E3_MINUS, E3_PLUS, qd) == pytest.approx(8 / 9, rel=1e-14)
    assert kernel.partition_C(E3_MINUS, E3_PLUS, Q_FRAC) == Fraction(64, 81)


def test_table_probabilities_e3(bal2, disas):
    _, q = bal2
    assert kernel.table_probability(TABLE_A, q) == pytest.approx(1 / 3, rel=1e-13)
    assert kernel.table_probability(TABLE_B, q) == pytest.approx(2 / 3, rel=1e-13)
    _, qd = disas
    assert kernel.table_probability(TABLE_A, qd) == 0.0
    assert kernel.table_probability(TABLE_B, qd) == pytest.approx(1.0, rel=1e-13)
    assert kernel.table_probability(TABLE_A, Q_FRAC) == Fraction(1, 3)


def test_exact_edge_mean_fixture_values(bal2, disas):
    _, q = bal2
    assert kernel.exact_edge_mean(E3_MINUS, E3_PLUS, q, 2, 2) == pytest.approx(4 / 3, abs=1e-13)
    _, qd = disas
    assert kernel.exact_edge_mean(E3_MINUS, E3_PLUS, qd, 2, 2) == pytest.approx(1.0, abs=1e-13)
    assert kernel.exact_edge_mean(E3_MINUS, E3_PLUS, Q_FRAC, 2, 2) == Fraction(4, 3)
    assert kernel.exact_edge_mean(E3_MINUS, E3_PLUS, Q_FRAC_DISAS, 2, 2) == Fraction(1)


def test_exact_edge_variance_fixture_values(bal2):
    _, q = bal2
    assert kernel.exact_edge_variance(E3_MINUS, E3_PLUS, q, 2, 2) == pytest.approx(2 / 9, abs=1e-13)
    assert kernel.exact_edge_variance(E3_MINUS, E3_PLUS, Q_FRAC, 2, 2) == Fraction(2, 9)
    # the forced-zero cell has zero mean and variance
    assert kernel.exact_edge_variance(E3_MINUS, E3_PLUS, Q_FRAC_DISAS, 1, 1) == Fraction(0)


def test_margin_sums_are_exact():
    for em, ep in [(E3_MINUS, E3_PLUS), (np.array([0, 3, 2]), np.array([0, 1, 4]))]:
        for k in (1, 2):
            total = sum(kernel.exact_edge_mean(em, ep, Q_FRAC, k, j) for j in (1, 2))
            assert total == Fraction(int(ep[k]))
        for j in (1, 2):
            total = sum(kernel.exact_edge_mean(em, ep, Q_FRAC, k, j) for k in (1, 2))
            assert total == Fraction(int(em[j]))


def test_oracle_matches_kernel_on_small_sequences(bal2, disas):
    _, q = bal2
    _, qd = disas
    for x in ORACLE_SEQUENCES:
        for qq in (q, qd):
            dist = kernel.enumerate_wirings_oracle(x, qq)
            em, ep = kernel.margins_of_sequence(x, 3)
            c = kernel.partition_C(em, ep, qq)
            assert dist.total_weight == pytest.approx(c, rel=1e-12, abs=1e-300)
            if dist.total_weight == 0:
                continue
            for key, prob in dist.tables.items():
                assert kernel.table_probability(np.array(key), qq) == pytest.approx(prob, rel=1e-12)
                assert kernel.wiring_count(np.array(key)) == dist.wiring_counts[key]
            assert sum(dist.tables.values()) == pytest.approx(1.0, abs=1e-12)


def test_oracle_e3_wiring_counts(bal2):
    _, q = bal2
    dist = kernel.enumerate_wirings_oracle(E3_SEQUENCE, q)
    counts = {key: count for key, count in dist.wiring_counts.items()}
    assert counts[tuple(map(tuple, TABLE_A))] == 12
    assert counts[tuple(map(tuple, TABLE_B))] == 24


def test_joint_first_prob_sums_to_one(bal2):
    _, q = bal2
    support = [(1, 1), (1, 2), (2, 1), (2, 2)]
    for x in [E3_SEQUENCE, [(1, 1), (2, 2)], [(2, 2), (2, 2)]]:
        for m in (1, 2, 3):
            total = sum(
                kernel.joint_first_M_prob(x, q, list(types))
                for types in itertools.product(support, repeat=m)
            )
            assert total == pytest.approx(1.0, abs=1e-10)


def test_joint_first_prob_matches_oracle(bal2, disas):
    _, q = bal2
    _, qd = disas
    support = [(1, 1), (1, 2), (2, 1), (2, 2)]
    for x in [E3_SEQUENCE, [(2, 2), (2, 2)], [(1, 1), (1, 2), (2, 1)]]:
        for qq in (q, qd):
            dist = kernel.enumerate_wirings_oracle(x, qq)
            if dist.total_weight == 0:
                continue
            for m in (1, 2):
                for types in itertools.product(support, repeat=m):
                    got = kernel.joint_first_M_prob(x, qq, list(types))
                    want = dist.first_m_prob(list(types))
                    assert got == pytest.approx(want, abs=1e-12)


def test_joint_accepts_margin_pair(bal2):
    _, q = bal2
    by_seq = kernel.joint_first_M_prob(E3_SEQUENCE, q, [(2, 2)])
    by_margins = kernel.joint_first_M_prob((E3_MINUS, E3_PLUS), q, [(2, 2)])
    assert by_seq == pytest.approx(by_margins, abs=1e-15)


def test_cumulant_function_derivative_is_mean(bal2):
    _, q = bal2
    h = 1e-6
    tilt = np.zeros((3, 3))
    tilt[2, 2] = h
    f_plus = kernel.cumulant_generating_F(tilt, E3_MINUS, E3_PLUS, q)
    f_minus = kernel.cumulant_generating_F(-tilt, E3_MINUS, E3_PLUS, q)
    mean = kernel.exact_edge_mean(E3_MINUS, E3_PLUS, q, 2, 2)
    assert (f_plus - f_minus) / (2 * h) == pytest.approx(mean, abs=1e-7)
    second = (f_plus - 2 * kernel.cumulant_generating_F(np.zeros((3, 3)), E3_MINUS, E3_PLUS, q) + f_minus) / h**2
    var = kernel.exact_edge_variance(E3_MINUS, E3_PLUS, q, 2, 2)
    assert second == pytest.approx(var, abs=1e-3)


def test_zero_partition_raised_off_support(disas):
    _, qd = disas
    with pytest.raises(ZeroPartition):
        kernel.exact_edge_mean(np.array([0, 2, 0]), np.array([0, 2, 0]), qd, 1, 1)


def test_margin_validation_errors(bal2):
    _, q = bal2
    with pytest.raises(MarginMismatch):
        kernel.log_partition(np.array([1, 1, 2]), np.array([0, 2, 2]), q)
    with pytest.raises(MarginMismatch):
        kernel.log_partition(np.array([0, 1, 2]), np.array([0, 2, 2]), q)
    with pytest.raises(CapExceeded):
        kernel.log_partition(np.array([0, 1, 2]), np.array([0, 1, 2]), q, cap=2)
    with pytest.raises(CapExceeded):
        kernel.enumerate_wirings_oracle([(2, 2)] * 5, q)


def test_wiring_probability_consistency(bal2):
    _, q = bal2
    # a full wiring's probability is its table's probability split evenly
    # over the equally likely wirings of that table
    wiring = [(0, 1), (0, 1), (1, 0)]
    table = kernel.table_of_wiring(wiring, E3_SEQUENCE)
    p_w = kernel.wiring_probability(wiring, E3_SEQUENCE, q)
    p_t = kernel.table_probability(table, q)
    assert p_w * kernel.wiring_count(table) == pytest.approx(p_t, rel=1e-12)
