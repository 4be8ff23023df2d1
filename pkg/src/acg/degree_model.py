"""Node- and edge-type distributions for directed configuration multigraphs.

A node type is a pair (j, k) of in- and out-degree, both in {0, ..., K}.
Node types are drawn from a matrix P with entry P[j, k]; an edge type is
the pair (k, j) of its source out-degree and target in-degree, drawn from
a matrix Q with entry Q[k, j].  A pair (P, Q) is consistent when Q's
margins equal the degree-size-biased margins of P.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InconsistentPair, InvalidDistribution, ZeroMeanDegree

RENORM_TOL = 1e-9
CONSISTENCY_TOL = 1e-9


@dataclass(frozen=True)
class DegreeSupport:
    """Degree cutoff K; degrees live in {0, ..., K}."""

    K: int

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise InvalidDistribution(f"degree cutoff must be an integer >= 1, got {self.K}")

    @property
    def size(self) -> int:
        return self.K + 1


def _as_prob_matrix(weights, name: str, renorm_tol: float) -> np.ndarray:
    m = np.array(weights, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
        raise InvalidDistribution(f"{name} must be a square matrix of size K+1 >= 2, got shape {m.shape}")
    if not np.isfinite(m).all() or (m < 0).any():
        raise InvalidDistribution(f"{name} must have finite nonnegative entries")
    total = m.sum()
    if abs(total - 1.0) > renorm_tol:
        raise InvalidDistribution(
            f"{name} sums to {total!r}; deviation from 1 exceeds the renormalization tolerance {renorm_tol}"
        )
    m /= total
    m.setflags(write=False)
    return m


def derive_marginals(weights) -> tuple[np.ndarray, np.ndarray, float]:
    """Return (in-degree marginal, out-degree marginal, mean degree z) of a node-type matrix.

    The two computations of z (from either marginal) must agree; z = 0 raises.
    """
    m = np.asarray(weights, dtype=float)
    p_in = m.sum(axis=1)
    p_out = m.sum(axis=0)
    degrees = np.arange(m.shape[0], dtype=float)
    z_in = float(degrees @ p_in)
    z_out = float(degrees @ p_out)
    z = z_out
    if abs(z_in - z_out) > 1e-12 * max(1.0, z):
        raise InvalidDistribution(f"marginal mean degrees disagree: {z_in} vs {z_out}")
    if z <= 0.0:
        raise ZeroMeanDegree("node-type distribution has mean degree zero")
    p_in.setflags(write=False)
    p_out.setflags(write=False)
    return p_in, p_out, z


@dataclass(frozen=True)
class NodeTypeDist:
    """Distribution over node types (j, k), stored as matrix[j, k]."""

    matrix: np.ndarray
    in_marginal: np.ndarray
    out_marginal: np.ndarray
    mean_degree: float

    @classmethod
    def from_weights(cls, weights, renorm_tol: float = RENORM_TOL) -> "NodeTypeDist":
        m = _as_prob_matrix(weights, "node-type weights", renorm_tol)
        p_in, p_out, z = derive_marginals(m)
        return cls(matrix=m, in_marginal=p_in, out_marginal=p_out, mean_degree=z)

    @property
    def K(self) -> int:
        return self.matrix.shape[0] - 1

    @property
    def support(self) -> DegreeSupport:
        return DegreeSupport(self.K)


@dataclass(frozen=True)
class EdgeTypeDist:
    """Distribution over edge types (k, j), stored as matrix[k, j].

    k is the source node's out-degree and j the target node's in-degree,
    so row 0 and column 0 carry no mass: a degree-0 stub does not exist.
    """

    matrix: np.ndarray
    out_marginal: np.ndarray  # row sums, indexed by k
    in_marginal: np.ndarray  # column sums, indexed by j

    @classmethod
    def from_weights(cls, weights, renorm_tol: float = RENORM_TOL) -> "EdgeTypeDist":
        m = _as_prob_matrix(weights, "edge-type weights", renorm_tol)
        if m[0, :].any() or m[:, 0].any():
            raise InvalidDistribution("edge-type weights must vanish on the degree-0 row and column")
        q_out = m.sum(axis=1)
        q_in = m.sum(axis=0)
        q_out.setflags(write=False)
        q_in.setflags(write=False)
        return cls(matrix=m, out_marginal=q_out, in_marginal=q_in)

    @property
    def K(self) -> int:
        return self.matrix.shape[0] - 1


@dataclass(frozen=True)
class ConsistencyReport:
    """Residuals of the stub-balance conditions linking P and Q."""

    is_consistent: bool
    max_violation: float
    out_residuals: np.ndarray  # Q+_k - k P+_k / z
    in_residuals: np.ndarray  # Q-_j - j P-_j / z
    tol: float


def size_biased_marginals(p: NodeTypeDist) -> tuple[np.ndarray, np.ndarray]:
    """Return (k P+_k / z, j P-_j / z): the edge-type margins implied by P."""
    degrees = np.arange(p.K + 1, dtype=float)
    out = degrees * p.out_marginal / p.mean_degree
    inn = degrees * p.in_marginal / p.mean_degree
    return out, inn


def validate_pair(p: NodeTypeDist, q: EdgeTypeDist, tol: float = CONSISTENCY_TOL) -> ConsistencyReport:
    """Check the consistency conditions between a node- and edge-type distribution."""
    if p.K != q.K:
        raise InvalidDistribution(f"degree cutoffs differ: node K={p.K}, edge K={q.K}")
    implied_out, implied_in = size_biased_marginals(p)
    out_res = q.out_marginal - implied_out
    in_res = q.in_marginal - implied_in
    worst = float(max(np.abs(out_res).max(), np.abs(in_res).max()))
    return ConsistencyReport(
        is_consistent=worst <= tol,
        max_violation=worst,
        out_residuals=out_res,
        in_residuals=in_res,
        tol=tol,
    )


def require_consistent(p: NodeTypeDist, q: EdgeTypeDist, tol: float = CONSISTENCY_TOL) -> None:
    report = validate_pair(p, q, tol)
    if not report.is_consistent:
        raise InconsistentPair(
            f"edge-type margins violate stub balance by {report.max_violation:.3e} (tol {tol:.1e})"
        )


def independent_edge_dist(p: NodeTypeDist) -> EdgeTypeDist:
    """The product edge-type distribution Q[k, j] = (k P+_k / z)(j P-_j / z)."""
    out, inn = size_biased_marginals(p)
    return EdgeTypeDist.from_weights(np.outer(out, inn))


@dataclass(frozen=True)
class Conditionals:
    """Row-stochastic conditionals; the first index is always the conditioning degree.

    Rows whose conditioning marginal has zero mass are all-zero.
    """

    out_given_in: np.ndarray  # [j, k] = P[j, k] / P-_j
    in_given_out: np.ndarray  # [k, j] = P[j, k] / P+_k
    edge_in_given_out: np.ndarray  # [k, j] = Q[k, j] / Q+_k
    edge_out_given_in: np.ndarray  # [j, k] = Q[k, j] / Q-_j


def _safe_rows(num: np.ndarray, denom: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num)
    mask = denom > 0
    out[mask] = num[mask] / denom[mask, None]
    out.setflags(write=False)
    return out


def conditional_dists(p: NodeTypeDist, q: EdgeTypeDist) -> Conditionals:
    return Conditionals(
        out_given_in=_safe_rows(p.matrix, p.in_marginal),
        in_given_out=_safe_rows(p.matrix.T, p.out_marginal),
        edge_in_given_out=_safe_rows(q.matrix, q.out_marginal),
        edge_out_given_in=_safe_rows(q.matrix.T, q.in_marginal),
    )


def self_loop_rate(p: NodeTypeDist, q: EdgeTypeDist) -> float:
    """Large-N rate of type-(j,k) self-loops per node, summed over types.

    Terms with a vanishing edge-type margin contribute zero.
    """
    if p.K != q.K:
        raise InvalidDistribution(f"degree cutoffs differ: node K={p.K}, edge K={q.K}")
    z = p.mean_degree
    degrees = np.arange(p.K + 1, dtype=float)
    jk = np.outer(degrees, degrees)  # [j, k]
    denom = np.outer(q.in_marginal, q.out_marginal)  # [j, k] -> Q-_j Q+_k
    num = jk * p.matrix * q.matrix.T  # Q[k, j] transposed onto (j, k)
    mask = denom > 0
    return float((num[mask] / denom[mask]).sum() / (z * z))


def self_loop_rate_exact(p_weights, q_weights) -> Fraction:
    """Rational-arithmetic twin of self_loop_rate for golden tests."""
    p = [[Fraction(x) for x in row] for row in p_weights]
    q = [[Fraction(x) for x in row] for row in q_weights]
    n = len(p)
    z = sum(k * p[j][k] for j in range(n) for k in range(n))
    q_out = [sum(q[k][j] for j in range(n)) for k in range(n)]
    q_in = [sum(q[k][j] for k in range(n)) for j in range(n)]
    total = Fraction(0)
    for j in range(n):
        for k in range(n):
            if q_in[j] > 0 and q_out[k] > 0:
                total += Fraction(j * k) * p[j][k] * q[k][j] / (q_out[k] * q_in[j])
    return total / (z * z)


def load_params(source) -> tuple[NodeTypeDist, EdgeTypeDist]:
    """Load a (P, Q) pair from a JSON file path, file object, or dict.

    Schema: {"K": int, "P": [[...]], "Q": [[...]] | "independent"}.
    """
    if isinstance(source, dict):
        raw = source
    elif hasattr(source, "read"):
        raw = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    try:
        k_cut = int(raw["K"])
        p_weights = raw["P"]
        q_spec = raw["Q"]
    except (KeyError, TypeError) as exc:
        raise InvalidDistribution(f"parameter object must define K, P and Q: {exc}") from exc
    p = NodeTypeDist.from_weights(p_weights)
    if p.K != k_cut:
        raise InvalidDistribution(f"P has shape for K={p.K} but K={k_cut} was declared")
    if isinstance(q_spec, str):
        if q_spec != "independent":
            raise InvalidDistribution(f"unknown edge-type spec {q_spec!r}")
        q = independent_edge_dist(p)
    else:
        q = EdgeTypeDist.from_weights(q_spec)
        if q.K != k_cut:
            raise InvalidDistribution(f"Q has shape for K={q.K} but K={k_cut} was declared")
    return p, q


def derived_summary(p: NodeTypeDist, q: EdgeTypeDist) -> dict:
    """JSON-ready summary of derived quantities for a (P, Q) pair."""
    report = validate_pair(p, q)
    return {
        "K": p.K,
        "mean_degree": p.mean_degree,
        "node_in_marginal": p.in_marginal.tolist(),
        "node_out_marginal": p.out_marginal.tolist(),
        "edge_out_marginal": q.out_marginal.tolist(),
        "edge_in_marginal": q.in_marginal.tolist(),
        "self_loop_rate": self_loop_rate(p, q),
        "is_consistent": bool(report.is_consistent),
        "max_violation": report.max_violation,
    }


def params_dict(p: NodeTypeDist, q: EdgeTypeDist, include_derived: bool = True) -> dict:
    """Serializable parameter object that load_params accepts back unchanged."""
    out = {"K": p.K, "P": p.matrix.tolist(), "Q": q.matrix.tolist()}
    if include_derived:
        out["derived"] = derived_summary(p, q)
    return out
