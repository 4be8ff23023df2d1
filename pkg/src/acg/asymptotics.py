"""Saddlepoint analysis of the margin-constrained wiring sum.

The number of edges of each type in a wiring with stub margins e is
controlled by the convex function

    H(alpha; e) = sum_kj exp(alpha_j^- + alpha_k^+) Q[k, j] - alpha . e

over "double vectors" alpha = (alpha^-, alpha^+) of length 2K.  H is
invariant along the gauge direction (1, ..., 1, -1, ..., -1), so the
critical point is pinned to the subspace orthogonal to it.  The Laplace
approximation built at that critical point estimates the Fourier
integral whose exact value is (2 pi)^(2K) times the table partition sum.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from . import exact_kernel
from .errors import MarginMismatch, NoConvergence, SingularHessian, UnsupportedMargin

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100
ARMIJO_C = 1e-4
TWO_PI = 2.0 * math.pi


def double_vector(minus, plus):
    """Stack a minus part (indexed by j=1..K) and a plus part (k=1..K)."""
    minus = np.atleast_1d(np.asarray(minus))
    plus = np.atleast_1d(np.asarray(plus))
    if minus.shape != plus.shape or minus.ndim != 1:
        raise ValueError("minus and plus parts must be 1-d and equal length")
    return np.concatenate([minus, plus])


def split_parts(v):
    """Inverse of double_vector: return (minus, plus) views."""
    v = np.asarray(v)
    if v.ndim != 1 or v.shape[0] % 2:
        raise ValueError(f"double vectors have even length, got shape {v.shape}")
    half = v.shape[0] // 2
    return v[:half], v[half:]


def from_margins(e_minus, e_plus):
    """Build a double vector from margin arrays carrying the degree-0 slot."""
    em = np.asarray(e_minus)
    ep = np.asarray(e_plus)
    if em[0] != 0 or ep[0] != 0:
        raise MarginMismatch("degree-0 stubs cannot exist; margin entry 0 must be zero")
    return double_vector(em[1:], ep[1:])


def to_margins(v):
    """Double vector -> margin arrays with the degree-0 slot prepended."""
    minus, plus = split_parts(v)
    return np.concatenate([[0], minus]), np.concatenate([[0], plus])


def gauge_direction(size):
    """The direction 1~ = 1^- - 1^+ along which H is constant."""
    return double_vector(np.ones(size), -np.ones(size))


def unit_delta(size, j, k):
    """delta_jk = delta_j^- + delta_k^+, the stub increment of one (k, j) edge."""
    v = np.zeros(2 * size)
    v[j - 1] = 1.0
    v[size + k - 1] = 1.0
    return v


def _core(q):
    """Q as a K x K array over positive degrees, rows k and columns j."""
    m = getattr(q, "matrix", q)
    m = np.asarray(m, dtype=float)
    return m[1:, 1:]


def _weight_matrix(alpha, qcore):
    """W[k, j] = exp(alpha_j^- + alpha_k^+) Q[k, j], complex-safe.

    Entries off Q's support stay exactly 0 even when the exponential
    overflows there.
    """
    minus, plus = split_parts(alpha)
    with np.errstate(over="ignore", invalid="ignore"):
        w = qcore * np.exp(np.add.outer(plus, minus))
    return np.where(qcore != 0, w, 0)


def h_value(alpha, e, q):
    """H(alpha; e) = sum_kj exp(alpha . delta_jk) Q[k, j] - alpha . e."""
    alpha = np.asarray(alpha)
    e = np.asarray(e)
    qcore = _core(q)
    if alpha.shape != (2 * qcore.shape[0],) or e.shape != alpha.shape:
        raise ValueError("alpha and e must be double vectors matching Q")
    return _weight_matrix(alpha, qcore).sum() - np.dot(alpha, e)


def h_derivatives(alpha, e, q, order=1):
    """Gradient (order 1) or Hessian (order 2) of H in alpha.

    The gradient is sum_kj delta_jk exp(alpha . delta_jk) Q[k, j] - e.
    The Hessian does not involve e; its blocks are the diagonal stub
    intensities and the weight matrix W, and it annihilates the gauge
    direction.
    """
    alpha = np.asarray(alpha, dtype=float)
    e = np.asarray(e, dtype=float)
    qcore = _core(q)
    size = qcore.shape[0]
    if alpha.shape != (2 * size,) or e.shape != alpha.shape:
        raise ValueError("alpha and e must be double vectors matching Q")
    w = _weight_matrix(alpha, qcore)
    col = w.sum(axis=0)
    row = w.sum(axis=1)
    if order == 1:
        return double_vector(col, row) - e
    if order == 2:
        hess = np.zeros((2 * size, 2 * size))
        hess[:size, :size] = np.diag(col)
        hess[size:, size:] = np.diag(row)
        hess[:size, size:] = w.T
        hess[size:, :size] = w
        return hess
    raise ValueError(f"order must be 1 or 2, got {order}")


@dataclass(frozen=True)
class CriticalPointResult:
    """Gauge-fixed minimizer of H(.; x) and its local data."""

    alpha: np.ndarray
    gradient_norm: float
    iterations: int
    h_at_min: float
    hessian_projected_det: float


def _active_coordinates(x, qcore):
    """Indices (in double-vector layout) carried by Q's margins.

    Mass of x outside the margins of Q makes the minimization diverge,
    so that is rejected; coordinates where both vanish are frozen at 0.
    """
    size = qcore.shape[0]
    xm, xp = split_parts(x)
    col = qcore.sum(axis=0)
    row = qcore.sum(axis=1)
    if (xm[col == 0] > 0).any() or (xp[row == 0] > 0).any():
        raise UnsupportedMargin("margin puts mass on degrees that Q never produces")
    keep = np.concatenate([col > 0, row > 0])
    return np.flatnonzero(keep)


def solve_critical_point(x, q, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Newton's method for the critical point of H(.; x) with gauge 1~ . alpha = 0.

    x is a double vector of normalized margins (both parts sum to 1).
    Iterates live on an orthonormal basis of the subspace orthogonal to
    the gauge direction, with Armijo backtracking; the start is alpha=0.
    """
    x = np.asarray(x, dtype=float)
    qcore = _core(q)
    size = qcore.shape[0]
    if x.shape != (2 * size,):
        raise ValueError("x must be a double vector matching Q")
    xm, xp = split_parts(x)
    if (x < 0).any() or not math.isclose(xm.sum(), xp.sum(), rel_tol=0, abs_tol=1e-9):
        raise MarginMismatch("margins must be nonnegative with equal stub totals")
    idx = _active_coordinates(x, qcore)
    gauge = gauge_direction(size)[idx]
    basis = null_space(gauge[None, :])

    def embed(beta):
        alpha = np.zeros(2 * size)
        alpha[idx] = basis @ beta
        return alpha

    beta = np.zeros(basis.shape[1])
    alpha = embed(beta)
    for iteration in range(max_iter):
        grad = h_derivatives(alpha, x, q, order=1)
        grad_red = basis.T @ grad[idx]
        grad_norm = float(np.linalg.norm(grad_red))
        if grad_norm <= tol:
            hess_red = basis.T @ h_derivatives(alpha, x, q, order=2)[np.ix_(idx, idx)] @ basis
            sign, logdet = np.linalg.slogdet(hess_red)
            det = float(sign * math.exp(logdet)) if np.isfinite(logdet) else 0.0
            return CriticalPointResult(
                alpha=alpha,
                gradient_norm=grad_norm,
                iterations=iteration,
                h_at_min=float(h_value(alpha, x, q)),
                hessian_projected_det=det,
            )
        hess_red = basis.T @ h_derivatives(alpha, x, q, order=2)[np.ix_(idx, idx)] @ basis
        try:
            step = np.linalg.solve(hess_red, -grad_red)
        except np.linalg.LinAlgError:
            raise NoConvergence("projected Hessian is singular at an iterate") from None
        slope = float(grad_red @ step)
        if slope >= 0:
            step = -grad_red
            slope = -grad_norm**2
        value = float(h_value(alpha, x, q))
        # once the predicted decrease is below float resolution the
        # sufficient-decrease test is meaningless; take the plain Newton
        # step and let the gradient test decide
        if ARMIJO_C * abs(slope) < 8 * np.finfo(float).eps * max(1.0, abs(value)):
            beta = beta + step
            alpha = embed(beta)
            continue
        t = 1.0
        while t > 2.0**-60:
            candidate = beta + t * step
            if h_value(embed(candidate), x, q) <= value + ARMIJO_C * t * slope:
                break
            t *= 0.5
        else:
            raise NoConvergence("backtracking line search stalled")
        beta = beta + t * step
        alpha = embed(beta)
    raise NoConvergence(f"no critical point after {max_iter} Newton iterations")


def det0_hessian(alpha, q):
    """Determinant of the Hessian of H restricted to the orthocomplement of 1~.

    The restriction is taken on an orthonormal basis; the value does not
    depend on which one.  Strictly positive at interior critical points.
    """
    alpha = np.asarray(alpha, dtype=float)
    qcore = _core(q)
    size = qcore.shape[0]
    hess = h_derivatives(alpha, np.zeros(2 * size), q, order=2)
    basis = null_space(gauge_direction(size)[None, :])
    sign, logdet = np.linalg.slogdet(basis.T @ hess @ basis)
    if not np.isfinite(logdet) or sign <= 0:
        raise SingularHessian("projected Hessian is not positive definite")
    return float(math.exp(logdet))


def fourier_integrand(u, e, q):
    """Integrand exp(H(-iu; e)) of the margin-constraint integral."""
    u = np.asarray(u, dtype=float)
    return np.exp(h_value(-1j * u, np.asarray(e, dtype=float), q))


def log_exact_I(e, q, cap=exact_kernel.DEFAULT_TABLE_CAP):
    """log of the margin-constraint integral, (2K) log(2 pi) + log Z."""
    em, ep = to_margins(e)
    size = em.shape[0] - 1
    lp = exact_kernel.log_partition(em, ep, q, cap=cap)
    return 2 * size * math.log(TWO_PI) + lp


def exact_I(e, q, cap=exact_kernel.DEFAULT_TABLE_CAP):
    """The integral of exp(H(-iu; e)) over a period box, evaluated exactly.

    The integral picks out the tables with margins e, so it equals
    (2 pi)^(2K) times the partition sum Z(e) from the table enumeration.
    """
    lv = log_exact_I(e, q, cap=cap)
    return math.exp(lv) if lv > -math.inf else 0.0


def _edge_total(e):
    em, ep = split_parts(np.asarray(e, dtype=float))
    total_minus = float(em.sum())
    total_plus = float(ep.sum())
    if not math.isclose(total_minus, total_plus, rel_tol=0, abs_tol=1e-9):
        raise MarginMismatch(f"stub totals differ: {total_minus} vs {total_plus}")
    if total_minus <= 0:
        raise MarginMismatch("margins must carry at least one edge")
    return total_minus


def log_laplace_I_approx(e, q, tol=DEFAULT_TOL):
    """log of the saddlepoint estimate of the margin-constraint integral.

    With E edges, x = e/E, and alpha* the gauge-fixed critical point:

        (K + 1/2) log(2 pi) + (1/2 - K) log E - E log E
            + E H(alpha*; x) - (1/2) log det0

    Kept in the log domain: E log E leaves the float range quickly.
    """
    e = np.asarray(e, dtype=float)
    total = _edge_total(e)
    x = e / total
    result = solve_critical_point(x, q, tol=tol)
    qcore = _core(q)
    size = qcore.shape[0]
    det0 = det0_hessian(result.alpha, q)
    return (
        (size + 0.5) * math.log(TWO_PI)
        + (0.5 - size) * math.log(total)
        - total * math.log(total)
        + total * result.h_at_min
        - 0.5 * math.log(det0)
    )


def laplace_I_approx(e, q, tol=DEFAULT_TOL):
    """Linear-domain saddlepoint estimate; underflows to 0 for large E."""
    return math.exp(log_laplace_I_approx(e, q, tol=tol))


def asymptotic_edge_mean(x, q, k, j, tol=DEFAULT_TOL):
    """Limiting per-edge fraction of type (k, j) edges at margin profile x.

    Equals the tilted weight Q[k, j] exp(alpha* . delta_jk) at the
    critical point of H(.; x), which by the critical-point equation has
    margins x and total mass 1.  When x matches Q's own margins the
    critical point is 0 and this is Q[k, j] itself.
    """
    x = np.asarray(x, dtype=float)
    qcore = _core(q)
    if not (1 <= k <= qcore.shape[0] and 1 <= j <= qcore.shape[0]):
        raise ValueError(f"edge type ({k}, {j}) outside degree range")
    result = solve_critical_point(x, q, tol=tol)
    minus, plus = split_parts(result.alpha)
    return float(qcore[k - 1, j - 1] * math.exp(minus[j - 1] + plus[k - 1]))
