import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quartsolve import (
    DimensionMismatchError,
    Metric,
    NotPositiveDefiniteError,
    NumericalFailureError,
)


def make_metric(seed, d=5):
    rng = np.random.default_rng(seed)
    A = np.vstack([rng.normal(size=(2 * d, d)), 0.5 * np.eye(d)])
    return Metric.from_a(A), A


def test_b_norm_against_direct_quadratic_form():
    metric, A = make_metric(0)
    rng = np.random.default_rng(0)
    for _ in range(5):
        v = rng.normal(size=metric.d)
        assert metric.b_norm_sq(v) == pytest.approx(float(np.sum((A @ v) ** 2)), rel=1e-12)


def test_dual_norm_is_inverse_metric_norm():
    metric, _ = make_metric(1)
    rng = np.random.default_rng(1)
    Binv = np.linalg.inv(metric.B)
    for _ in range(5):
        g = rng.normal(size=metric.d)
        assert metric.dual_norm_sq(g) == pytest.approx(float(g @ Binv @ g), rel=1e-10)


@given(st.integers(0, 300))
def test_cauchy_schwarz_duality(seed):
    metric, _ = make_metric(seed % 7)
    rng = np.random.default_rng(seed)
    g = rng.normal(size=metric.d)
    v = rng.normal(size=metric.d)
    assert abs(float(g @ v)) <= metric.dual_norm(g) * metric.b_norm(v) * (1 + 1e-10)


def test_solve_b_residual_contract():
    metric, _ = make_metric(2)
    rng = np.random.default_rng(2)
    rhs = rng.normal(size=metric.d)
    x = metric.solve_b(rhs)
    assert np.linalg.norm(metric.B @ x - rhs) <= 1e-10 * np.linalg.norm(rhs)


def test_shifted_solver_matches_dense_solve():
    metric, _ = make_metric(3)
    rng = np.random.default_rng(3)
    M = rng.normal(size=(metric.d, metric.d))
    H = M @ M.T
    lam = 0.7
    rhs = rng.normal(size=metric.d)
    fac = metric.shifted_factor(H, lam)
    x = fac.solve(rhs)
    expected = np.linalg.solve(np.sqrt(2.0) * lam * metric.B + H, rhs)
    assert np.allclose(x, expected, rtol=1e-9, atol=1e-12)
    with pytest.raises(NumericalFailureError):
        metric.shifted_factor(H, 0.0)


def test_solve_shifted_operator_path_matches_dense():
    metric, _ = make_metric(4)
    rng = np.random.default_rng(4)
    M = rng.normal(size=(metric.d, metric.d))
    H = M @ M.T + 0.1 * np.eye(metric.d)
    rhs = rng.normal(size=metric.d)
    lam = 0.3
    import scipy.sparse.linalg as spla

    H_op = spla.LinearOperator((metric.d, metric.d), matvec=lambda v: H @ v)
    x_op = metric.solve_shifted(H_op, lam, rhs)
    x_dense = metric.solve_shifted(H, lam, rhs)
    assert np.allclose(x_op, x_dense, rtol=1e-8, atol=1e-10)


def test_solve_count_tallies_solves():
    metric, _ = make_metric(5)
    before = metric.solve_count
    metric.solve_b(np.ones(metric.d))
    metric.dual_norm(np.ones(metric.d))
    assert metric.solve_count == before + 2


def test_validation_errors():
    with pytest.raises(NotPositiveDefiniteError):
        Metric(np.zeros((3, 3)))
    with pytest.raises(DimensionMismatchError):
        Metric(np.zeros((3, 2)))
    metric, _ = make_metric(6)
    with pytest.raises(DimensionMismatchError):
        metric.b_norm(np.zeros(metric.d + 2))


def test_eigenvalue_bounds_cached():
    metric, _ = make_metric(7)
    w = np.linalg.eigvalsh(metric.B)
    assert metric.lambda_min_b == pytest.approx(w[0])
    assert metric.lambda_max_b == pytest.approx(w[-1])
    assert metric.lambda_min_b >= 0.25 - 1e-12  # 0.5 I block floors the spectrum
