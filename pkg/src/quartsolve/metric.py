"""Linear algebra in the B = A'A geometry.

Provides the induced norm ||v||_B, its dual ||g||_{B^{-1}}, plain B-solves,
and shifted positive-definite solves (sqrt(2) lambda B + H)^{-1} rhs. B is
materialized densely and Cholesky-factored once; solve results are refined
until the residual contract (1e-10 relative) holds. A conjugate-gradient
path backs operator-only H.
"""

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import (
    DimensionMismatchError,
    NotPositiveDefiniteError,
    NumericalFailureError,
)

__all__ = ["Metric", "ShiftedSolver"]

_RESIDUAL_RTOL = 1e-10
_SQRT2 = np.sqrt(2.0)


def _refined_cho_solve(cho, M, rhs, rtol=_RESIDUAL_RTOL, max_refinements=3):
    """Cholesky solve with iterative refinement until ||Mx - rhs|| <= rtol ||rhs||."""
    x = scipy.linalg.cho_solve(cho, rhs, check_finite=False)
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0.0:
        return np.zeros_like(rhs), 0.0
    for _ in range(max_refinements):
        r = rhs - M @ x
        res = np.linalg.norm(r)
        if res <= rtol * rhs_norm:
            return x, res
        x = x + scipy.linalg.cho_solve(cho, r, check_finite=False)
    r = rhs - M @ x
    res = np.linalg.norm(r)
    if res <= rtol * rhs_norm:
        return x, res
    raise NumericalFailureError(
        f"linear solve residual {res:.3e} exceeds {rtol:.1e} * ||rhs||",
        residual=res,
    )


class ShiftedSolver:
    """Factorized (sqrt(2) lambda B + H) reusable within one inner-solver call."""

    def __init__(self, metric, H, lam):
        M = _SQRT2 * lam * metric.B + H
        M = 0.5 * (M + M.T)
        try:
            self._cho = scipy.linalg.cho_factor(M, lower=True, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError(
                f"shifted matrix with lambda={lam:.3e} is not positive definite"
            ) from exc
        self._M = M
        self._metric = metric

    def solve(self, rhs):
        rhs = np.asarray(rhs, dtype=float).ravel()
        x, _ = _refined_cho_solve(self._cho, self._M, rhs)
        self._metric.solve_count += 1
        return x


class Metric:
    """B-norm geometry with a cached Cholesky factorization of B.

    Immutable after construction apart from `solve_count`, a diagnostic
    tally of linear-system solves (approximate under concurrent use).
    """

    def __init__(self, B):
        B = np.asarray(B, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise DimensionMismatchError(f"B has shape {B.shape}, expected square")
        B = 0.5 * (B + B.T)
        try:
            self._cho = scipy.linalg.cho_factor(B, lower=True, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError("B is not positive definite") from exc
        self.B = B
        self.d = B.shape[0]
        self.solve_count = 0
        self._lambda_min = None
        self._lambda_max = None

    @classmethod
    def from_a(cls, A):
        if scipy.sparse.issparse(A):
            A = A.toarray()
        A = np.asarray(A, dtype=float)
        return cls(A.T @ A)

    @classmethod
    def for_problem(cls, q):
        return cls.from_a(q.A)

    @property
    def lambda_min_b(self):
        if self._lambda_min is None:
            w = np.linalg.eigvalsh(self.B)
            self._lambda_min, self._lambda_max = float(w[0]), float(w[-1])
        return self._lambda_min

    @property
    def lambda_max_b(self):
        if self._lambda_max is None:
            self.lambda_min_b
        return self._lambda_max

    def _check_dim(self, v, name):
        v = np.asarray(v, dtype=float).ravel()
        if v.size != self.d:
            raise DimensionMismatchError(f"{name} has length {v.size}, expected {self.d}")
        return v

    def b_norm_sq(self, v):
        v = self._check_dim(v, "v")
        return max(float(v @ (self.B @ v)), 0.0)

    def b_norm(self, v):
        return float(np.sqrt(self.b_norm_sq(v)))

    def dual_norm_sq(self, g):
        g = self._check_dim(g, "g")
        x = scipy.linalg.cho_solve(self._cho, g, check_finite=False)
        self.solve_count += 1
        return max(float(g @ x), 0.0)

    def dual_norm(self, g):
        return float(np.sqrt(self.dual_norm_sq(g)))

    def solve_b(self, rhs):
        """B^{-1} rhs with residual <= 1e-10 ||rhs|| (refined as needed)."""
        rhs = self._check_dim(rhs, "rhs")
        x, _ = _refined_cho_solve(self._cho, self.B, rhs)
        self.solve_count += 1
        return x

    def shifted_factor(self, H, lam):
        """Factor (sqrt(2) lambda B + H) once for repeated solves.

        lam must be positive; H must be a symmetric PSD dense matrix.
        """
        if lam <= 0:
            raise NumericalFailureError(f"shift lambda={lam} must be positive")
        H = np.asarray(H, dtype=float)
        if H.shape != (self.d, self.d):
            raise DimensionMismatchError(f"H has shape {H.shape}, expected {(self.d, self.d)}")
        return ShiftedSolver(self, H, lam)

    def solve_shifted(self, H, lam, rhs):
        """(sqrt(2) lambda B + H)^{-1} rhs, residual <= 1e-10 ||rhs||.

        Dense H goes through a Cholesky factorization; a LinearOperator H
        goes through preconditioned conjugate gradients with B^{-1} as the
        preconditioner.
        """
        rhs = self._check_dim(rhs, "rhs")
        if lam <= 0:
            raise NumericalFailureError(f"shift lambda={lam} must be positive")
        if isinstance(H, scipy.sparse.linalg.LinearOperator):
            return self._solve_shifted_operator(H, lam, rhs)
        return self.shifted_factor(H, lam).solve(rhs)

    def _solve_shifted_operator(self, H, lam, rhs):
        d = self.d
        shift = _SQRT2 * lam

        def matvec(v):
            return shift * (self.B @ v) + H.matvec(v)

        M_op = scipy.sparse.linalg.LinearOperator((d, d), matvec=matvec)
        precond = scipy.sparse.linalg.LinearOperator(
            (d, d),
            matvec=lambda v: scipy.linalg.cho_solve(self._cho, v, check_finite=False),
        )
        rhs_norm = np.linalg.norm(rhs)
        if rhs_norm == 0.0:
            return np.zeros(d)
        x, info = scipy.sparse.linalg.cg(
            M_op, rhs, rtol=1e-12, atol=0.0, maxiter=20 * d, M=precond
        )
        res = np.linalg.norm(matvec(x) - rhs)
        self.solve_count += 1
        if info != 0 or res > _RESIDUAL_RTOL * rhs_norm:
            raise NumericalFailureError(
                f"conjugate gradients stalled at residual {res:.3e}", residual=res
            )
        return x
