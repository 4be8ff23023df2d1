"""Exact finite-size combinatorics of the weighted wiring measure.

Everything here conditions on the stub-count margins e- (in-stubs per
degree) and e+ (out-stubs per degree), both indexed 0..K with entry 0
identically zero.  A wiring is an ordered pairing of in- and out-stubs;
its probability depends only on the edge-type contingency table e[k, j].

Float paths accumulate table weights in log space with compensated
summation.  Passing Q as nested Fractions switches the partition,
moment, table-probability and oracle routines to exact rational
arithmetic (tilts excluded).  Enumeration sizes are capped explicitly:
tables at DEFAULT_TABLE_CAP total edges, the brute-force oracle at
ORACLE_CAP.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    AcgError,
    CapExceeded,
    InconsistentWiring,
    MarginMismatch,
    ZeroPartition,
)

DEFAULT_TABLE_CAP = 60
ORACLE_CAP = 7


def _q_matrix(q) -> np.ndarray:
    m = getattr(q, "matrix", q)
    return m if isinstance(m, np.ndarray) else np.asarray(m, dtype=float)


def _is_exact(q) -> bool:
    m = getattr(q, "matrix", q)
    if isinstance(m, np.ndarray):
        return m.dtype == object
    return isinstance(m[0][0], (Fraction, int))


def _exact_rows(q) -> list[list[Fraction]]:
    m = getattr(q, "matrix", q)
    if isinstance(m, np.ndarray):
        m = m.tolist()
    return [[Fraction(x) for x in row] for row in m]


def _q_size(q) -> int:
    m = getattr(q, "matrix", q)
    return m.shape[0] if isinstance(m, np.ndarray) else len(m)


def _check_margins(e_minus, e_plus, size: int, cap: int) -> tuple[np.ndarray, np.ndarray, int]:
    em = np.asarray(e_minus)
    ep = np.asarray(e_plus)
    if em.shape != (size,) or ep.shape != (size,):
        raise MarginMismatch(f"margins must have length {size}, got {em.shape} and {ep.shape}")
    if (
        (em < 0).any()
        or (ep < 0).any()
        or not np.array_equal(em, em.astype(int))
        or not np.array_equal(ep, ep.astype(int))
    ):
        raise MarginMismatch("margins must be nonnegative integers")
    em = em.astype(int)
    ep = ep.astype(int)
    if em[0] != 0 or ep[0] != 0:
        raise MarginMismatch("degree-0 stubs cannot exist; margin entry 0 must be zero")
    total_minus = int(em.sum())
    total_plus = int(ep.sum())
    if total_minus != total_plus:
        raise MarginMismatch(f"stub totals differ: {total_minus} in-stubs vs {total_plus} out-stubs")
    if total_minus > cap:
        raise CapExceeded(f"enumeration over {total_minus} edges exceeds cap {cap}")
    return em, ep, total_minus


def _sequence_degrees(x) -> tuple[np.ndarray, np.ndarray]:
    """Extract (in-degree, out-degree) arrays from a node-type sequence.

    Accepts anything with .in_degrees/.out_degrees, or an iterable of
    (j, k) pairs.
    """
    if hasattr(x, "in_degrees"):
        return np.asarray(x.in_degrees, dtype=int), np.asarray(x.out_degrees, dtype=int)
    pairs = np.asarray(list(x), dtype=int)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise MarginMismatch(f"expected a sequence of (j, k) pairs, got shape {pairs.shape}")
    return pairs[:, 0].copy(), pairs[:, 1].copy()


def margins_of_sequence(x, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Stub-count margins (e-, e+) of a node-type sequence."""
    j_seq, k_seq = _sequence_degrees(x)
    if j_seq.max(initial=0) >= size or k_seq.max(initial=0) >= size:
        raise MarginMismatch("sequence contains degrees beyond the distribution cutoff")
    em = np.zeros(size, dtype=int)
    ep = np.zeros(size, dtype=int)
    for d in range(1, size):
        em[d] = d * int((j_seq == d).sum())
        ep[d] = d * int((k_seq == d).sum())
    if em.sum() != ep.sum():
        raise MarginMismatch(f"stub totals differ: {em.sum()} vs {ep.sum()}")
    return em, ep


def iter_tables(row_sums, col_sums, support=None):
    """Yield all nonnegative integer matrices with the given margins.

    Row index is the out-degree k, column index the in-degree j, matching
    Q's orientation.  Rows are filled recursively with margin pruning; if
    support (a boolean matrix) is given, entries outside it are forced to
    zero.
    """
    rows = [int(r) for r in row_sums]
    cols = [int(c) for c in col_sums]
    if sum(rows) != sum(cols):
        return
    n_rows, n_cols = len(rows), len(cols)
    table = [[0] * n_cols for _ in range(n_rows)]
    col_rem = list(cols)

    def fill_row(r, c, remaining_row):
        if c == n_cols - 1:
            blocked = support is not None and not support[r][c] and remaining_row > 0
            if remaining_row <= col_rem[c] and not blocked:
                table[r][c] = remaining_row
                col_rem[c] -= remaining_row
                yield from next_row(r)
                col_rem[c] += remaining_row
                table[r][c] = 0
            return
        hi = min(remaining_row, col_rem[c])
        if support is not None and not support[r][c]:
            hi = 0
        for v in range(hi + 1):
            table[r][c] = v
            col_rem[c] -= v
            yield from fill_row(r, c + 1, remaining_row - v)
            col_rem[c] += v
        table[r][c] = 0

    def next_row(r):
        if r == n_rows - 1:
            if all(v == 0 for v in col_rem):
                yield np.array(table, dtype=int)
            return
        yield from fill_row(r + 1, 0, rows[r + 1])

    yield from fill_row(0, 0, rows[0])


def _iter_margin_tables(em, ep, support=None):
    # wiring tables: rows follow e+ (k axis), columns follow e- (j axis)
    return iter_tables(ep, em, support=support)


def _log_weight(table: np.ndarray, log_q: np.ndarray, tilt=None) -> float:
    mask = table > 0
    if not np.isfinite(log_q[mask]).all():
        return -math.inf
    val = float((table[mask] * log_q[mask]).sum())
    val -= float(sum(math.lgamma(v + 1) for v in table[mask]))
    if tilt is not None:
        val += float((table * np.asarray(tilt, dtype=float)).sum())
    return val


def log_partition(e_minus, e_plus, q, tilt=None, cap: int = DEFAULT_TABLE_CAP) -> float:
    """log of the tilted partition sum over tables; -inf when no table has weight."""
    qm = _q_matrix(q)
    em, ep, total = _check_margins(e_minus, e_plus, qm.shape[0], cap)
    if total == 0:
        return 0.0
    with np.errstate(divide="ignore"):
        log_q = np.log(qm)
    logs = [
        lw
        for table in _iter_margin_tables(em, ep, support=qm > 0)
        if (lw := _log_weight(table, log_q, tilt)) > -math.inf
    ]
    if not logs:
        return -math.inf
    peak = max(logs)
    return peak + math.log(math.fsum(math.exp(v - peak) for v in logs))


def _partition_exact(e_minus, e_plus, q, cap: int) -> Fraction:
    rows = _exact_rows(q)
    size = len(rows)
    em, ep, total = _check_margins(e_minus, e_plus, size, cap)
    if total == 0:
        return Fraction(1)
    support = [[rows[k][j] > 0 for j in range(size)] for k in range(size)]
    acc = Fraction(0)
    for table in _iter_margin_tables(em, ep, support=support):
        term = Fraction(1)
        for k in range(size):
            for j in range(size):
                v = int(table[k, j])
                if v:
                    term = term * rows[k][j] ** v / math.factorial(v)
        acc += term
    return acc


def tilted_partition_Z(e_minus, e_plus, q, tilt=None, cap: int = DEFAULT_TABLE_CAP):
    """Sum over tables e of prod (Q[k,j] exp(tilt[k,j]))^e[k,j] / e[k,j]!.

    Q given as nested Fractions switches to exact arithmetic (no tilt).
    """
    if _is_exact(q):
        if tilt is not None:
            raise ValueError("tilted sums are not available in exact arithmetic")
        return _partition_exact(e_minus, e_plus, q, cap)
    lp = log_partition(e_minus, e_plus, q, tilt=tilt, cap=cap)
    return math.exp(lp) if lp > -math.inf else 0.0


def partition_C(e_minus, e_plus, q, cap: int = DEFAULT_TABLE_CAP):
    """Normalizing constant of the wiring measure: E! (prod e-!)(prod e+!) Z."""
    em = np.asarray(e_minus, dtype=int)
    ep = np.asarray(e_plus, dtype=int)
    z = tilted_partition_Z(e_minus, e_plus, q, cap=cap)
    scale = math.factorial(int(em.sum()))
    for v in itertools.chain(em, ep):
        scale *= math.factorial(int(v))
    return scale * z


def wiring_count(table) -> int:
    """Number of ordered wirings realizing a given edge-type table (exact integer)."""
    t = np.asarray(table, dtype=int)
    if (t < 0).any():
        raise MarginMismatch("table entries must be nonnegative")
    e_plus = t.sum(axis=1)
    e_minus = t.sum(axis=0)
    count = math.factorial(int(t.sum()))
    for v in itertools.chain(e_minus, e_plus):
        count *= math.factorial(int(v))
    for v in t.flat:
        count //= math.factorial(int(v))
    return count


def _pad_table(table, size: int) -> np.ndarray:
    t = np.asarray(table, dtype=int)
    if t.shape[0] > size or t.shape[1] > size:
        raise MarginMismatch(f"table shape {t.shape} exceeds distribution size {size}")
    pad = np.zeros((size, size), dtype=int)
    pad[: t.shape[0], : t.shape[1]] = t
    return pad


def table_probability(table, q, cap: int = DEFAULT_TABLE_CAP):
    """Probability that the wiring realizes a given edge-type table."""
    size = _q_size(q)
    t = _pad_table(table, size)
    ep = t.sum(axis=1)
    em = t.sum(axis=0)
    if _is_exact(q):
        rows = _exact_rows(q)
        z = _partition_exact(em, ep, q, cap)
        if z == 0:
            raise ZeroPartition("no admissible wiring for these margins")
        w = Fraction(1)
        for k in range(size):
            for j in range(size):
                v = int(t[k, j])
                if v:
                    w = w * rows[k][j] ** v / math.factorial(v)
        return w / z
    qm = _q_matrix(q)
    lz = log_partition(em, ep, qm, cap=cap)
    if lz == -math.inf:
        raise ZeroPartition("no admissible wiring for these margins")
    with np.errstate(divide="ignore"):
        log_q = np.log(qm)
    lw = _log_weight(t, log_q)
    return math.exp(lw - lz) if lw > -math.inf else 0.0


def table_of_wiring(wiring, x) -> np.ndarray:
    """Edge-type table of an ordered (source, target) pair list under sequence x.

    Raises InconsistentWiring unless every node's stubs are used exactly.
    """
    j_seq, k_seq = _sequence_degrees(x)
    n = len(j_seq)
    size = int(max(j_seq.max(initial=0), k_seq.max(initial=0))) + 1
    out_used = np.zeros(n, dtype=int)
    in_used = np.zeros(n, dtype=int)
    table = np.zeros((size, size), dtype=int)
    for src, dst in wiring:
        if not (0 <= src < n and 0 <= dst < n):
            raise InconsistentWiring(f"edge ({src}, {dst}) references a missing node")
        out_used[src] += 1
        in_used[dst] += 1
        table[k_seq[src], j_seq[dst]] += 1
    if not (np.array_equal(out_used, k_seq) and np.array_equal(in_used, j_seq)):
        raise InconsistentWiring("wiring does not use each node's stubs exactly")
    return table


def wiring_probability(wiring, x, q, cap: int = DEFAULT_TABLE_CAP):
    """Probability of one ordered wiring: all wirings sharing a table are equally likely."""
    table = table_of_wiring(wiring, x)
    return table_probability(table, q, cap=cap) / wiring_count(table)


def exact_edge_mean(e_minus, e_plus, q, k: int, j: int, cap: int = DEFAULT_TABLE_CAP, cross_tol: float = 1e-12):
    """Expected count of type-(k, j) edges given the margins.

    Computed two ways, direct table average and the margin-reduction
    ratio Q[k,j] Z(e - d_jk) / Z(e); the routes must agree to cross_tol.
    """
    if _is_exact(q):
        direct = _exact_moment(e_minus, e_plus, q, k, j, cap, order=1)
        ratio = _exact_ratio_mean(e_minus, e_plus, q, k, j, cap)
        if direct != ratio:
            raise AcgError(f"edge-mean routes disagree: {direct} vs {ratio}")
        return ratio
    qm = _q_matrix(q)
    em, ep, _ = _check_margins(e_minus, e_plus, qm.shape[0], cap)
    direct = _direct_moment(em, ep, qm, k, j, cap, order=1)
    ratio = _ratio_mean(em, ep, qm, k, j, cap)
    if abs(direct - ratio) > cross_tol * max(1.0, abs(direct), abs(ratio)):
        raise AcgError(f"edge-mean routes disagree: {direct!r} vs {ratio!r}")
    return ratio


def exact_edge_variance(e_minus, e_plus, q, k: int, j: int, cap: int = DEFAULT_TABLE_CAP, cross_tol: float = 1e-12):
    """Variance of the type-(k, j) edge count given the margins (two routes)."""
    if _is_exact(q):
        mean = _exact_moment(e_minus, e_plus, q, k, j, cap, order=1)
        second = _exact_moment(e_minus, e_plus, q, k, j, cap, order=2)
        return second - mean * mean
    qm = _q_matrix(q)
    em, ep, _ = _check_margins(e_minus, e_plus, qm.shape[0], cap)
    mean_d = _direct_moment(em, ep, qm, k, j, cap, order=1)
    second_d = _direct_moment(em, ep, qm, k, j, cap, order=2)
    direct = second_d - mean_d * mean_d
    ratio = _ratio_variance(em, ep, qm, k, j, cap)
    if abs(direct - ratio) > cross_tol * max(1.0, abs(direct), abs(ratio)):
        raise AcgError(f"edge-variance routes disagree: {direct!r} vs {ratio!r}")
    return ratio


def _direct_moment(em, ep, qm, k, j, cap, order):
    lz = log_partition(em, ep, qm, cap=cap)
    if lz == -math.inf:
        raise ZeroPartition("no admissible wiring for these margins")
    with np.errstate(divide="ignore"):
        log_q = np.log(qm)
    acc = []
    for table in _iter_margin_tables(em, ep, support=qm > 0):
        if table[k, j] == 0:
            continue
        lw = _log_weight(table, log_q)
        if lw > -math.inf:
            acc.append((int(table[k, j]) ** order) * math.exp(lw - lz))
    return math.fsum(acc)


def _reduced(em, ep, k, j, times=1):
    em2 = np.array(em, dtype=int)
    ep2 = np.array(ep, dtype=int)
    em2[j] -= times
    ep2[k] -= times
    return em2, ep2


def _ratio_mean(em, ep, qm, k, j, cap):
    lz = log_partition(em, ep, qm, cap=cap)
    if lz == -math.inf:
        raise ZeroPartition("no admissible wiring for these margins")
    if qm[k, j] == 0 or em[j] < 1 or ep[k] < 1:
        return 0.0
    lz2 = log_partition(*_reduced(em, ep, k, j), qm, cap=cap)
    if lz2 == -math.inf:
        return 0.0
    return float(qm[k, j]) * math.exp(lz2 - lz)


def _ratio_variance(em, ep, qm, k, j, cap):
    mean = _ratio_mean(em, ep, qm, k, j, cap)
    second_falling = 0.0
    if qm[k, j] > 0 and em[j] >= 2 and ep[k] >= 2:
        lz = log_partition(em, ep, qm, cap=cap)
        lz2 = log_partition(*_reduced(em, ep, k, j, times=2), qm, cap=cap)
        if lz2 > -math.inf:
            second_falling = float(qm[k, j]) ** 2 * math.exp(lz2 - lz)
    return mean + second_falling - mean * mean


def _exact_ratio_mean(e_minus, e_plus, q, k, j, cap) -> Fraction:
    rows = _exact_rows(q)
    em, ep, _ = _check_margins(e_minus, e_plus, len(rows), cap)
    z = _partition_exact(em, ep, q, cap)
    if z == 0:
        raise ZeroPartition("no admissible wiring for these margins")
    if rows[k][j] == 0 or em[j] < 1 or ep[k] < 1:
        return Fraction(0)
    z2 = _partition_exact(*_reduced(em, ep, k, j), q, cap)
    return rows[k][j] * z2 / z


def _exact_moment(e_minus, e_plus, q, k, j, cap, order) -> Fraction:
    rows = _exact_rows(q)
    size = len(rows)
    em, ep, _ = _check_margins(e_minus, e_plus, size, cap)
    z = _partition_exact(em, ep, q, cap)
    if z == 0:
        raise ZeroPartition("no admissible wiring for these margins")
    support = [[rows[kk][jj] > 0 for jj in range(size)] for kk in range(size)]
    acc = Fraction(0)
    for table in _iter_margin_tables(em, ep, support=support):
        if table[k, j] == 0:
            continue
        term = Fraction(int(table[k, j]) ** order)
        for kk in range(size):
            for jj in range(size):
                v = int(table[kk, jj])
                if v:
                    term = term * rows[kk][jj] ** v / math.factorial(v)
        acc += term
    return acc / z


def cumulant_generating_F(tilt, e_minus, e_plus, q, cap: int = DEFAULT_TABLE_CAP) -> float:
    """log Z(tilt) - log Z(0) for the edge-count vector given the margins."""
    base = log_partition(e_minus, e_plus, q, cap=cap)
    if base == -math.inf:
        raise ZeroPartition("no admissible wiring for these margins")
    return log_partition(e_minus, e_plus, q, tilt=tilt, cap=cap) - base


def joint_first_M_prob(x, q, types, cap: int = DEFAULT_TABLE_CAP):
    """Probability that the first M wired edges have the given (k, j) types, in order.

    x may be a node-type sequence or a margins pair (e-, e+).  The value
    telescopes through conditional edge means over shrinking margins; a
    vanished partition mid-product means the prefix is impossible.
    """
    exact = _is_exact(q)
    size = _q_size(q)
    if isinstance(x, tuple) and len(x) == 2 and np.ndim(x[0]) == 1 and len(np.asarray(x[0])) == size:
        em, ep, total = _check_margins(np.asarray(x[0]), np.asarray(x[1]), size, cap)
    else:
        em, ep = margins_of_sequence(x, size)
        em, ep, total = _check_margins(em, ep, size, cap)
    if len(types) > total:
        raise MarginMismatch(f"asked for {len(types)} leading edges but only {total} exist")
    prob = Fraction(1) if exact else 1.0
    for k, j in types:
        try:
            step = (
                _exact_ratio_mean(em, ep, q, k, j, cap)
                if exact
                else _ratio_mean(em, ep, _q_matrix(q), k, j, cap)
            )
        except ZeroPartition:
            return Fraction(0) if exact else 0.0
        if step == 0:
            return Fraction(0) if exact else 0.0
        prob *= step
        em, ep = _reduced(em, ep, k, j)
    for i in range(len(types)):
        prob /= total - i
    return prob


@dataclass
class OracleDistribution:
    """Brute-force wiring distribution from stub-pairing enumeration."""

    tables: dict  # table tuple -> probability
    wiring_counts: dict  # table tuple -> number of ordered wirings
    total_weight: object  # partition constant C
    n_edges: int
    _matchings: list  # (weight, type list) per stub bijection

    @property
    def _zero(self):
        return Fraction(0) if isinstance(self.total_weight, Fraction) else 0.0

    def table_probability(self, table):
        key = tuple(map(tuple, np.asarray(table, dtype=int).tolist()))
        return self.tables.get(key, self._zero)

    def first_m_prob(self, types):
        """Probability of a leading type sequence, recomputed from raw matchings.

        Each stub bijection is equally likely to appear in any of its E!
        edge orders, so the leading types follow sequential sampling
        without replacement from the bijection's type multiset.
        """
        norm = sum(w for w, _ in self._matchings)
        if norm == 0:
            raise ZeroPartition("oracle total weight is zero")
        total = self._zero
        for weight, tlist in self._matchings:
            if weight == 0:
                continue
            counts = {}
            for t in tlist:
                counts[t] = counts.get(t, 0) + 1
            piece = weight / norm
            remaining = self.n_edges
            ok = True
            for t in types:
                c = counts.get(t, 0)
                if c == 0:
                    ok = False
                    break
                piece = piece * c / remaining
                counts[t] = c - 1
                remaining -= 1
            if ok:
                total += piece
        return total


def enumerate_wirings_oracle(x, q, cap: int = ORACLE_CAP) -> OracleDistribution:
    """Enumerate every stub bijection of a node-type sequence, weighted by Q.

    Ordered wirings are bijections plus an edge ordering; the ordering
    multiplies counts by E! and leaves probabilities untouched, so the
    total weight reported is E! times the bijection-weight sum.
    """
    exact = _is_exact(q)
    rows = _exact_rows(q) if exact else _q_matrix(q)
    size = len(rows) if exact else rows.shape[0]
    em, ep = margins_of_sequence(x, size)
    total = int(em.sum())
    if total > cap:
        raise CapExceeded(f"oracle over {total} edges exceeds cap {cap}")
    in_stub_deg = [d for d in range(1, size) for _ in range(em[d])]
    out_stub_deg = [d for d in range(1, size) for _ in range(ep[d])]
    zero = Fraction(0) if exact else 0.0
    table_weights: dict = {}
    bijection_counts: dict = {}
    matchings = []
    for perm in itertools.permutations(range(total)):
        weight = Fraction(1) if exact else 1.0
        table = np.zeros((size, size), dtype=int)
        tlist = []
        for pos, out_slot in enumerate(perm):
            k = out_stub_deg[out_slot]
            j = in_stub_deg[pos]
            weight = weight * (rows[k][j] if exact else float(rows[k, j]))
            table[k, j] += 1
            tlist.append((k, j))
        key = tuple(map(tuple, table.tolist()))
        table_weights[key] = table_weights.get(key, zero) + weight
        bijection_counts[key] = bijection_counts.get(key, 0) + 1
        matchings.append((weight, tlist))
    weight_sum = sum(table_weights.values(), zero)
    fact = math.factorial(total)
    if weight_sum == 0:
        probs = {k: zero for k in table_weights}
    else:
        probs = {k: v / weight_sum for k, v in table_weights.items()}
    return OracleDistribution(
        tables=probs,
        wiring_counts={k: v * fact for k, v in bijection_counts.items()},
        total_weight=weight_sum * fact,
        n_edges=total,
        _matchings=matchings,
    )
