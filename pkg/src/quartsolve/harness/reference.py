"""Ground-truth and baseline solvers used by tests and bench.

reference_newton is the correctness oracle: the objective is smooth and
convex, so a damped Newton iteration with a Levenberg fallback and an
Armijo line search drives the dual gradient norm to tol. agd_baseline is a
backtracking accelerated gradient method in the B geometry, included as a
wall-clock comparator only.
"""

import time

import numpy as np
import scipy.linalg

from .. import quartic_core as qc
from ..errors import InvalidInputError, OracleFailureError

__all__ = ["reference_newton", "agd_baseline"]


def reference_newton(q, metric, x0=None, tol=1e-11, max_iters=500):
    """Minimize to dual gradient norm <= tol; returns (x_star, f_star).

    tol below 1e-13 is refused: round-off in the gradient makes smaller
    targets unreliable. Raises OracleFailureError if the line search
    stagnates or the iteration cap is hit first.
    """
    if tol < 1e-13:
        raise InvalidInputError(f"tol={tol} is below the 1e-13 trust floor")
    x = np.zeros(q.d) if x0 is None else np.asarray(x0, dtype=float).copy()
    f = qc.eval_f(q, x)
    for _ in range(max_iters):
        g = qc.grad_f(q, x)
        if metric.dual_norm(g) <= tol:
            return x, f
        H = qc.hess_matrix(q, x)
        shift = 0.0
        scale = max(abs(H.diagonal()).max(), 1.0)
        for _ in range(60):
            try:
                cho = scipy.linalg.cho_factor(
                    H + shift * np.eye(q.d), lower=True, check_finite=False
                )
                break
            except scipy.linalg.LinAlgError:
                shift = 1e-14 * scale if shift == 0.0 else 10.0 * shift
        else:
            raise OracleFailureError("hessian could not be regularized")
        p = -scipy.linalg.cho_solve(cho, g, check_finite=False)
        slope = float(g @ p)
        if slope >= 0:
            raise OracleFailureError("newton direction is not a descent direction")
        t = 1.0
        for _ in range(60):
            f_new = qc.eval_f(q, x + t * p)
            if f_new <= f + 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            raise OracleFailureError(
                f"line search stagnated at dual gradient norm {metric.dual_norm(g):.3e}"
            )
        x = x + t * p
        f = f_new
    raise OracleFailureError(
        f"newton did not reach tol={tol} in {max_iters} iterations "
        f"(dual gradient norm {metric.dual_norm(qc.grad_f(q, x)):.3e})"
    )


def agd_baseline(q, metric, x0=None, eps=1e-8, max_iters=5000):
    """Accelerated gradient descent with B-norm backtracking.

    Stops when the uniform-convexity gap certificate reaches eps or at the
    iteration cap. Returns a dict with x, f, iterations, wall_nanos.
    """
    t0 = time.perf_counter_ns()
    sc = qc.SmoothnessConstants.for_problem(q)
    x = np.zeros(q.d) if x0 is None else np.asarray(x0, dtype=float).copy()
    v = x.copy()
    f_x = qc.eval_f(q, x)
    L = 1.0
    theta = 1.0
    iterations = 0
    for iterations in range(1, max_iters + 1):
        y = x + theta * (v - x)
        g = qc.grad_f(q, y)
        dual = metric.dual_norm(g)
        cert = 0.75 * dual ** (4.0 / 3.0) / sc.mu4 ** (1.0 / 3.0)
        if cert <= eps:
            break
        f_y = qc.eval_f(q, y)
        step = metric.solve_b(g)
        for _ in range(80):
            x_new = y - step / L
            diff = x_new - y
            f_new = qc.eval_f(q, x_new)
            if f_new <= f_y + float(g @ diff) + 0.5 * L * metric.b_norm_sq(diff):
                break
            L *= 2.0
        v = v - (1.0 / (L * theta)) * step
        theta = 0.5 * (np.sqrt(theta**4 + 4 * theta**2) - theta**2)
        if f_new < f_x:
            x, f_x = x_new, f_new
        L = max(L * 0.5, 1e-12)
    return {
        "x": x,
        "f": f_x,
        "iterations": iterations,
        "wall_nanos": time.perf_counter_ns() - t0,
    }
