"""Monte Carlo checks of the model's limit behavior.

Each suite draws graphs (or just node sequences) at one or more sizes
with seeded, replayable random streams and summarizes how close the
empirical type frequencies come to their targets: node types against P,
edge types against Q, the first wired edges against the product measure,
self-loop counts against the predicted rate, and the degree correlation
across edges.  Deviations shrink like N^(-1/2), so log-log slope fits
sit near -1/2.
"""

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .degree_model import EdgeTypeDist, NodeTypeDist, self_loop_rate
from .errors import ClipOverflow, DegenerateVariance, RetriesExhausted
from .sampler import (
    DEFAULT_DELTA,
    DEFAULT_MAX_REDRAWS,
    classify_graph,
    clip_sequence,
    draw_node_sequence,
    first_edge_types,
    generate_graph,
)

SLOPE_WINDOW = (-0.65, -0.35)


@dataclass(frozen=True)
class LLNReport:
    """Per-size deviation summary of empirical type frequencies."""

    kind: str
    sizes: tuple
    max_deviations: tuple
    tv_distances: tuple
    slope: float
    slope_window: tuple
    slope_ok: bool
    acceptance_rates: tuple | None
    reps: int
    seed: int


@dataclass(frozen=True)
class FirstEdgesReport:
    """First-L wired edge types compared with the product measure."""

    n: int
    length: int
    reps: int
    seed: int
    counts: dict
    chi_square: float
    p_value: float
    dof: int
    off_support: int
    mutual_information: float | None


@dataclass(frozen=True)
class SelfLoopReport:
    """Self-loop counts over repeated graphs vs the predicted rate."""

    n: int
    reps: int
    seed: int
    counts: tuple
    mean: float
    variance: float
    predicted: float
    z_score: float
    var_mean_ratio: float
    mean_within_4se: bool


def _fit_slope(sizes, deviations) -> float:
    xs = np.log(np.asarray(sizes, dtype=float))
    ys = np.log(np.maximum(np.asarray(deviations, dtype=float), 1e-300))
    if len(xs) < 2:
        return float("nan")
    return float(np.polyfit(xs, ys, 1)[0])


def _accepted_sequence(p, n, delta, rng, max_redraws=DEFAULT_MAX_REDRAWS):
    """Draw until the clip accepts; return (sequence, attempts)."""
    attempts = 0
    while True:
        attempts += 1
        x = draw_node_sequence(p, n, rng)
        try:
            clipped = clip_sequence(x, p.K, delta=delta, rng=rng)
        except ClipOverflow:
            clipped = None
        if clipped is not None:
            return clipped, attempts
        if attempts > max_redraws:
            raise RetriesExhausted(f"no acceptable node sequence in {max_redraws} draws")


def node_lln(
    p: NodeTypeDist,
    q: EdgeTypeDist,
    sizes,
    reps: int,
    seed: int,
    delta: float = DEFAULT_DELTA,
    slope_window=SLOPE_WINDOW,
) -> LLNReport:
    """Deviation of clipped node-type frequencies from P at each size.

    Also reports the fraction of raw draws whose stub discrepancy passed
    the clip threshold.
    """
    sizes = [int(v) for v in sizes]
    devs, tvs, rates = [], [], []
    for size in sizes:
        rng = np.random.default_rng([seed, size])
        rep_devs, rep_tvs = [], []
        accepted = 0
        attempts = 0
        for _ in range(reps):
            x, tries = _accepted_sequence(p, size, delta, rng)
            accepted += 1
            attempts += tries
            freq = np.zeros_like(p.matrix)
            np.add.at(freq, (x.in_degrees, x.out_degrees), 1.0 / size)
            diff = np.abs(freq - p.matrix)
            rep_devs.append(diff.max())
            rep_tvs.append(0.5 * diff.sum())
        devs.append(float(np.mean(rep_devs)))
        tvs.append(float(np.mean(rep_tvs)))
        rates.append(accepted / attempts if attempts else float("nan"))
    slope = _fit_slope(sizes, devs)
    return LLNReport(
        kind="node",
        sizes=tuple(sizes),
        max_deviations=tuple(devs),
        tv_distances=tuple(tvs),
        slope=slope,
        slope_window=tuple(slope_window),
        slope_ok=bool(slope_window[0] <= slope <= slope_window[1]),
        acceptance_rates=tuple(rates),
        reps=reps,
        seed=seed,
    )


def _padded(table: np.ndarray, size: int) -> np.ndarray:
    out = np.zeros((size, size))
    s = min(size, table.shape[0])
    out[:s, :s] = table[:s, :s]
    return out


def edge_lln(
    p: NodeTypeDist,
    q: EdgeTypeDist,
    sizes,
    reps: int,
    seed: int,
    delta: float = DEFAULT_DELTA,
    slope_window=SLOPE_WINDOW,
) -> LLNReport:
    """Deviation of sampled edge-type frequencies from Q at each size."""
    sizes = [int(v) for v in sizes]
    devs, tvs = [], []
    for size in sizes:
        rep_devs, rep_tvs = [], []
        for rep in range(reps):
            g = generate_graph(p, q, size, delta=delta, seed=[seed, size, rep])
            table = _padded(classify_graph(g).edge_type_matrix, q.K + 1)
            diff = np.abs(table / g.n_edges - q.matrix)
            rep_devs.append(diff.max())
            rep_tvs.append(0.5 * diff.sum())
        devs.append(float(np.mean(rep_devs)))
        tvs.append(float(np.mean(rep_tvs)))
    slope = _fit_slope(sizes, devs)
    return LLNReport(
        kind="edge",
        sizes=tuple(sizes),
        max_deviations=tuple(devs),
        tv_distances=tuple(tvs),
        slope=slope,
        slope_window=tuple(slope_window),
        slope_ok=bool(slope_window[0] <= slope <= slope_window[1]),
        acceptance_rates=None,
        reps=reps,
        seed=seed,
    )


def _mutual_information(pair_counts: dict, reps: int) -> float:
    firsts = {}
    seconds = {}
    for (a, b), c in pair_counts.items():
        firsts[a] = firsts.get(a, 0) + c
        seconds[b] = seconds.get(b, 0) + c
    mi = 0.0
    for (a, b), c in pair_counts.items():
        if c:
            p_ab = c / reps
            mi += p_ab * math.log(p_ab * reps * reps / (firsts[a] * seconds[b]))
    return mi


def first_edges_distribution(
    p: NodeTypeDist,
    q: EdgeTypeDist,
    n: int,
    length: int,
    reps: int,
    seed: int,
    delta: float = DEFAULT_DELTA,
) -> FirstEdgesReport:
    """Joint law of the first `length` wired edge types vs product of Q.

    Chi-square compares the empirical counts with reps * prod Q over the
    supported type tuples; for length >= 2 the mutual information
    between the first two edge types is reported in nats.
    """
    if length < 1 or length > 5:
        raise ValueError("length must be between 1 and 5")
    support = [
        (k, j)
        for k in range(q.K + 1)
        for j in range(q.K + 1)
        if q.matrix[k, j] > 0
    ]
    counts = {}
    pair_counts = {}
    for rep in range(reps):
        rng = np.random.default_rng([seed, rep])
        x, _ = _accepted_sequence(p, n, delta, rng)
        types = tuple(first_edge_types(x, q, rng, length))
        counts[types] = counts.get(types, 0) + 1
        if length >= 2:
            key = (types[0], types[1])
            pair_counts[key] = pair_counts.get(key, 0) + 1
    cells = [combo for combo in _product_tuples(support, length)]
    observed = np.array([counts.get(c, 0) for c in cells], dtype=float)
    expected = np.array(
        [reps * math.prod(q.matrix[k, j] for k, j in c) for c in cells]
    )
    off_support = reps - int(observed.sum())
    if off_support:
        chi2, p_value = float("inf"), 0.0
    elif len(cells) == 1:
        chi2, p_value = 0.0, 1.0
    else:
        chi2, p_value = sps.chisquare(observed, expected)
    mi = _mutual_information(pair_counts, reps) if length >= 2 else None
    return FirstEdgesReport(
        n=n,
        length=length,
        reps=reps,
        seed=seed,
        counts=counts,
        chi_square=float(chi2),
        p_value=float(p_value),
        dof=len(cells) - 1,
        off_support=off_support,
        mutual_information=mi,
    )


def _product_tuples(support, length):
    if length == 1:
        for s in support:
            yield (s,)
        return
    for rest in _product_tuples(support, length - 1):
        for s in support:
            yield rest + (s,)


def self_loop_poisson(
    p: NodeTypeDist,
    q: EdgeTypeDist,
    n: int,
    reps: int,
    seed: int,
    delta: float = DEFAULT_DELTA,
) -> SelfLoopReport:
    """Self-loop count statistics over repeated graphs.

    The mean is flagged against the predicted rate at 4 standard errors
    and the variance/mean ratio is reported; a Poisson count keeps that
    ratio near 1.
    """
    counts = []
    for rep in range(reps):
        g = generate_graph(p, q, n, delta=delta, seed=[seed, rep])
        counts.append(int(g.self_loop_mask.sum()))
    arr = np.array(counts, dtype=float)
    mean = float(arr.mean())
    variance = float(arr.var(ddof=1)) if reps > 1 else 0.0
    predicted = self_loop_rate(p, q)
    se = math.sqrt(variance / reps) if reps > 1 else float("nan")
    if se > 0:
        z = (mean - predicted) / se
    elif mean == predicted:
        z = 0.0
    else:
        z = math.copysign(float("inf"), mean - predicted)
    return SelfLoopReport(
        n=n,
        reps=reps,
        seed=seed,
        counts=tuple(counts),
        mean=mean,
        variance=variance,
        predicted=predicted,
        z_score=float(z),
        var_mean_ratio=variance / mean if mean > 0 else float("nan"),
        mean_within_4se=bool(abs(z) <= 4),
    )


def assortativity_coefficient(g) -> float:
    """Pearson correlation of source out-degree and target in-degree over edges."""
    if g.n_edges < 2:
        raise DegenerateVariance("need at least two edges to correlate degrees")
    ks = g.edge_out_type.astype(float)
    js = g.edge_in_type.astype(float)
    if ks.std() == 0 or js.std() == 0:
        raise DegenerateVariance("edge endpoint degrees are constant")
    return float(np.corrcoef(ks, js)[0, 1])


def to_jsonable(obj):
    """Recursively convert reports and numpy values to JSON-ready types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {_key_str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and (math.isnan(obj) or math.isinf(obj)):
        return repr(obj)
    return obj


def _key_str(key):
    if isinstance(key, str):
        return key
    if isinstance(key, (int, np.integer)):
        return str(int(key))
    return repr(key)
