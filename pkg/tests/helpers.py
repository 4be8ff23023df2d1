"""Independent reference implementations used as test oracles."""

import numpy as np

from acg.degree_model import EdgeTypeDist, NodeTypeDist

# feasible node-type sequences with E <= 5 and degrees <= 2
ORACLE_SEQUENCES = [
    [(1, 1)],
    [(0, 1), (1, 0)],
    [(1, 1), (1, 1)],
    [(1, 2), (2, 1)],
    [(1, 1), (2, 2)],
    [(2, 2), (2, 2)],
    [(1, 1), (1, 2), (2, 1)],
    [(2, 2), (1, 1), (1, 1)],
    [(1, 1), (1, 1), (1, 1), (1, 1)],
    [(2, 2), (2, 2), (1, 1)],
    [(1, 2), (2, 1), (1, 1), (1, 1)],
    [(2, 1), (1, 2), (2, 2)],
]


def coordinate_descent_alpha(x, q, sweeps: int = 200000, tol: float = 5e-15) -> np.ndarray:
    """Minimize sum_kj exp(a-_j + a+_k) Q_kj - a.x by exact one-variable updates.

    Each coordinate update solves its scalar subproblem in closed form
    (A e^t - x t has its minimum at t = log(x / A)), then the iterate is
    projected back onto the plane orthogonal to (1, -1), along which the
    objective is flat.  Margins must be strictly positive.
    """
    qcore = np.asarray(q.matrix if isinstance(q, EdgeTypeDist) else q, dtype=float)[1:, 1:]
    size = qcore.shape[0]
    x = np.asarray(x, dtype=float)
    xm, xp = x[:size], x[size:]
    if xm.min() <= 0 or xp.min() <= 0:
        raise ValueError("coordinate descent expects strictly positive margins")
    am = np.zeros(size)
    ap = np.zeros(size)
    for _ in range(sweeps):
        move = 0.0
        for j in range(size):
            a = float(np.exp(ap) @ qcore[:, j])
            new = np.log(xm[j] / a)
            move = max(move, abs(new - am[j]))
            am[j] = new
        for k in range(size):
            b = float(qcore[k, :] @ np.exp(am))
            new = np.log(xp[k] / b)
            move = max(move, abs(new - ap[k]))
            ap[k] = new
        shift = (am.sum() - ap.sum()) / (2 * size)
        am -= shift
        ap += shift
        if move < tol:
            break
    return np.concatenate([am, ap])


def random_consistent_pair(rng, K: int = 2):
    """Random strictly positive node law with a matching random edge law.

    The node law is a mixture of two random tables chosen so mean in- and
    out-degree agree; the edge law is fitted to the implied stub marginals
    by iterative proportional scaling from a random positive start.
    """
    degs = np.arange(1, K + 1, dtype=float)
    while True:
        w1 = rng.uniform(0.05, 1.0, (K, K))
        w2 = rng.uniform(0.05, 1.0, (K, K))
        w1 /= w1.sum()
        w2 /= w2.sum()

        def imbalance(w):
            return float(degs @ w.sum(axis=1) - w.sum(axis=0) @ degs)

        f1, f2 = imbalance(w1), imbalance(w2)
        if f1 == f2:
            continue
        t = f2 / (f2 - f1)
        if not 0.0 <= t <= 1.0:
            continue
        core = t * w1 + (1.0 - t) * w2
        if core.min() > 1e-4:
            break
    p = np.zeros((K + 1, K + 1))
    p[1:, 1:] = core
    z = float(degs @ core.sum(axis=1))
    q_minus = degs * core.sum(axis=1) / z
    q_plus = degs * core.sum(axis=0) / z

    m = rng.uniform(0.1, 1.0, (K, K))
    for _ in range(20000):
        m *= (q_plus / m.sum(axis=1))[:, None]
        m *= q_minus / m.sum(axis=0)
        if np.abs(m.sum(axis=1) - q_plus).max() < 1e-14:
            break
    q = np.zeros((K + 1, K + 1))
    q[1:, 1:] = m
    return NodeTypeDist.from_weights(p), EdgeTypeDist.from_weights(q)
