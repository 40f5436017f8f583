import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quartsolve import Metric, SearchFailureError, StructuredQuartic
from quartsolve.rho_search import (
    ZetaEval,
    delta_tilde,
    recheck,
    rho_search,
    tau_of_rho,
    zeta_hat,
)

from .conftest import random_quartic


def test_tau_known_values():
    tau, a_hat = tau_of_rho(0.0, 1.0, 1.0)
    assert tau == pytest.approx(1.0)
    assert a_hat == pytest.approx(1.0)
    tau, a_hat = tau_of_rho(2.0, 1.0, 1.0)
    assert tau == pytest.approx(0.5)
    assert a_hat == pytest.approx(2.0)
    assert a_hat**2 == pytest.approx(4.0)
    with pytest.raises(ValueError):
        tau_of_rho(1.0, 1.0, 0.0)


@given(
    st.floats(0.0, 1e4),
    st.floats(1e-6, 1e4),
    st.floats(1e-3, 1e3),
)
def test_a_hat_solves_coupling_quadratic(A_k, rho, L3):
    tau, a_hat = tau_of_rho(A_k, L3, rho)
    assert a_hat**2 == pytest.approx((A_k + a_hat) / (L3 * rho), rel=1e-9)
    assert tau == pytest.approx(a_hat / (A_k + a_hat), rel=1e-9)
    assert 0.0 < tau <= 1.0


def test_tau_decreases_with_rho():
    rhos = np.logspace(-3, 3, 25)
    taus = [tau_of_rho(5.0, 1.0, r)[0] for r in rhos]
    assert all(b < a for a, b in zip(taus, taus[1:]))


def test_delta_tilde_formula():
    eps, p_hat = 1e-8, 2.5
    expected = 6.0 * eps**0.25 * np.sqrt(p_hat) + np.sqrt(12.0 * eps)
    assert delta_tilde(eps, p_hat) == pytest.approx(expected, rel=1e-12)
    # floors at the double-precision working tolerance
    assert delta_tilde(0.0, 1.0) == delta_tilde(1e-16, 1.0) > 0.0


def test_zeta_hat_zero_at_stationary_trial_point():
    q = StructuredQuartic(np.zeros(1), np.zeros((1, 1)), [], np.eye(1))
    metric = Metric.for_problem(q)
    # A_k = 0 forces tau = 1, so y = v_k = 0, already the minimizer
    ev = zeta_hat(q, metric, np.array([1.0]), np.array([0.0]), 0.0, 1.0, 1e-10)
    assert ev.tau == pytest.approx(1.0)
    assert ev.value <= 1e-12
    assert abs(ev.x_next[0]) <= 1e-6


def test_zeta_hat_candidates_are_consistent():
    q = random_quartic(11, d=4, n=12)
    metric = Metric.for_problem(q)
    rng = np.random.default_rng(11)
    x_k = rng.normal(size=q.d) * 0.3
    v_k = rng.normal(size=q.d) * 0.3
    ev = zeta_hat(q, metric, x_k, v_k, 3.0, 0.5, 1e-10)
    tau, a_hat = tau_of_rho(3.0, 1.0, 0.5)
    assert np.allclose(ev.y, (1 - tau) * x_k + tau * v_k)
    assert ev.a_next == pytest.approx(a_hat)
    assert ev.value == pytest.approx(metric.b_norm_sq(ev.x_next - ev.y))


def _mock_eval(metric, zeta_value):
    y = np.zeros(metric.d)
    x_next = np.zeros(metric.d)
    x_next[0] = np.sqrt(zeta_value / metric.B[0, 0])
    return ZetaEval(
        value=zeta_value, x_next=x_next, a_next=1.0, y=y, tau=0.5, aux_iterations=1
    )


def test_bisection_converges_on_constant_zeta():
    metric = Metric(np.eye(1))
    calls = []

    def zeta_fn(rho):
        calls.append(rho)
        return _mock_eval(metric, 0.37)

    res = rho_search(
        None, metric, None, None, 1.0, 1e-4, 1e2, 1e-3, 1e-12, zeta_fn=zeta_fn
    )
    assert res.rho_k == pytest.approx(0.37, rel=1e-3)
    assert res.evaluations == len(calls)
    ok, zeta = recheck(metric, res.rho_k, _mock_eval(metric, 0.37), 1e-3)
    assert ok and res.zeta_value == pytest.approx(zeta)
    assert res.log[-1][2] == "accept"


def test_midpoint_inside_band_accepts_immediately():
    metric = Metric(np.eye(1))
    res = rho_search(
        None,
        metric,
        None,
        None,
        1.0,
        0.36,
        0.38,
        1e-2,
        1e-12,
        zeta_fn=lambda rho: _mock_eval(metric, 0.37),
    )
    assert res.evaluations == 1
    assert res.rho_k == pytest.approx(0.37)


def test_returned_rho_passes_relative_band_on_real_instances():
    for seed in range(3):
        q = random_quartic(seed, d=4, n=12)
        metric = Metric.for_problem(q)
        rng = np.random.default_rng(seed)
        x_k = rng.normal(size=q.d) * 0.5
        v_k = x_k + rng.normal(size=q.d) * 0.2
        res = rho_search(
            q, metric, x_k, v_k, 2.0, 1e-10, 1e4, 1e-2, 1e-12, p_hat=4.0
        )
        zeta = metric.b_norm_sq(res.x_next - res.y)
        assert (1 - 1e-2) * zeta <= res.rho_k <= (1 + 1e-2) * zeta
        assert res.evaluations <= 128 + 1


def test_exhaustion_raises_with_log():
    metric = Metric(np.eye(1))
    with pytest.raises(SearchFailureError) as exc:
        rho_search(
            None,
            metric,
            None,
            None,
            1.0,
            1e-6,
            1e-3,
            1e-3,
            1e-12,
            max_bisections=8,
            zeta_fn=lambda rho: _mock_eval(metric, 100.0),
        )
    assert len(exc.value.bisection_log) == 8
    assert all(branch == "below" for _, _, branch in exc.value.bisection_log)


def test_invalid_bracket_rejected():
    metric = Metric(np.eye(1))
    with pytest.raises(SearchFailureError):
        rho_search(None, metric, None, None, 1.0, -1.0, 1.0, 1e-3, 1e-12)
    with pytest.raises(SearchFailureError):
        rho_search(None, metric, None, None, 1.0, 2.0, 1.0, 1e-3, 1e-12)


def test_check_bracket_detects_missing_sign_change():
    metric = Metric(np.eye(1))
    with pytest.raises(SearchFailureError, match="sign change"):
        rho_search(
            None,
            metric,
            None,
            None,
            1.0,
            10.0,
            20.0,
            1e-3,
            1e-12,
            zeta_fn=lambda rho: _mock_eval(metric, 1e-4),
            check_bracket=True,
        )


def test_search_is_deterministic():
    q = random_quartic(4, d=4, n=12)
    metric = Metric.for_problem(q)
    x_k = np.full(q.d, 0.3)
    v_k = np.full(q.d, -0.2)
    runs = [
        rho_search(q, metric, x_k, v_k, 1.0, 1e-10, 1e3, 1e-2, 1e-12, p_hat=2.0)
        for _ in range(2)
    ]
    assert runs[0].rho_k == runs[1].rho_k
    assert np.array_equal(runs[0].x_next, runs[1].x_next)
    assert runs[0].log == runs[1].log
