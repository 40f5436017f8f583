"""Bracketed binary search for the step-coupling fixed point rho.

The accelerated outer loop needs rho_k approximately equal to
zeta_hat(rho_k), the squared B-displacement of one model-minimization step
taken from y_k(rho). zeta decreases as rho grows (larger rho shifts y_k
toward x_k), so the fixed point is located by bisection with an absolute
accept band delta_tilde that accounts for inner-solver error, followed by a
mandatory relative recheck on the returned triple.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import quartic_core as qc
from .aux_min import EPS_AAM_FLOOR, approx_aux_min
from .errors import SearchFailureError

__all__ = [
    "ZetaEval",
    "RhoSearchResult",
    "tau_of_rho",
    "delta_tilde",
    "zeta_hat",
    "rho_search",
]

DEFAULT_MAX_BISECTIONS = 128


def tau_of_rho(A_k, L3, rho):
    """Mixing weight and trial step weight for a given rho.

    tau = 2 / (1 + sqrt(1 + 4 L3 A_k rho)) in (0, 1], and
    a_hat = (1 + sqrt(1 + 4 L3 A_k rho)) / (2 L3 rho), the positive root of
    L3 rho a^2 - a - A_k = 0, so a_hat^2 = (A_k + a_hat) / (L3 rho).
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    root = math.sqrt(1.0 + 4.0 * L3 * A_k * rho)
    tau = 2.0 / (1.0 + root)
    a_hat = (1.0 + root) / (2.0 * L3 * rho)
    return tau, a_hat


def delta_tilde(eps_aam, p_hat, L3=1.0):
    """Accept band: 6 (eps/L3)^(1/4) P^(1/2) + (12 eps/L3)^(1/2)."""
    eps_eff = max(float(eps_aam), EPS_AAM_FLOOR)
    return 6.0 * (eps_eff / L3) ** 0.25 * math.sqrt(p_hat) + math.sqrt(
        12.0 * eps_eff / L3
    )


@dataclass
class ZetaEval:
    """One evaluation of zeta_hat: the candidates belonging to a trial rho."""

    value: float
    x_next: np.ndarray
    a_next: float
    y: np.ndarray
    tau: float
    aux_iterations: int


@dataclass
class RhoSearchResult:
    rho_k: float
    x_next: np.ndarray
    a_next: float
    evaluations: int
    bracket_final: tuple
    y: np.ndarray
    zeta_value: float
    aux_iterations: int
    log: list = field(default_factory=list)


def zeta_hat(q, metric, x_k, v_k, A_k, rho, eps_aam, L3=1.0, max_aam_iters=200):
    """Form y_k(rho), take one certified model step, measure displacement."""
    tau, a_hat = tau_of_rho(A_k, L3, rho)
    y = (1.0 - tau) * x_k + tau * v_k
    aux = approx_aux_min(q, metric, y, eps_aam, max_iters=max_aam_iters, L3=L3)
    value = metric.b_norm_sq(aux.x_next - y)
    return ZetaEval(
        value=value,
        x_next=aux.x_next,
        a_next=a_hat,
        y=y,
        tau=tau,
        aux_iterations=aux.iterations,
    )


def _band_ok(rho, zeta, eps_rs):
    return (1.0 - eps_rs) * zeta <= rho <= (1.0 + eps_rs) * zeta


def recheck(metric, rho, ev, eps_rs):
    """Re-verify the relative band with zeta recomputed from the candidates."""
    zeta = metric.b_norm_sq(ev.x_next - ev.y)
    return _band_ok(rho, zeta, eps_rs), zeta


def rho_search(
    q,
    metric,
    x_k,
    v_k,
    A_k,
    rho_lo,
    rho_hi,
    eps_rs,
    eps_aam,
    max_bisections=DEFAULT_MAX_BISECTIONS,
    *,
    L3=1.0,
    p_hat=1.0,
    max_aam_iters=200,
    lo_eval=None,
    zeta_fn=None,
    check_bracket=False,
    on_evaluation=None,
):
    """Bisect for rho with rho close to zeta_hat(rho).

    The caller guarantees the bracket property rho_lo <= rho* <= rho_hi.
    Mid-loop exit requires both |rho - zeta_hat(rho)| <= delta_tilde and the
    relative band (1 - eps_rs) zeta <= rho <= (1 + eps_rs) zeta recomputed
    from the returned candidates; a midpoint inside the absolute band that
    fails the relative recheck keeps bisecting toward the fixed point.
    Bracket exhaustion returns rho_lo's side with its own candidates.

    Parameters
    ----------
    lo_eval : ZetaEval, optional
        A prior evaluation at rho_lo (the caller's probe), reused for the
        exhaustion return instead of re-solving.
    zeta_fn : callable, optional
        Replacement for the real evaluator (testing); called as
        zeta_fn(rho) -> ZetaEval.
    check_bracket : bool
        Evaluate both bracket ends first and fail loudly if the sign
        change of rho - zeta_hat(rho) is absent. Costs two extra
        evaluations, so it is off by default.
    on_evaluation : callable, optional
        Trace hook, called as on_evaluation(rho, zeta_value, branch).

    Raises
    ------
    SearchFailureError
        If the budget is exhausted without a triple passing the relative
        recheck (violated bracket precondition or too-loose eps_aam).
    """
    if not (0 < rho_lo <= rho_hi):
        raise SearchFailureError(f"invalid bracket [{rho_lo}, {rho_hi}]")

    if zeta_fn is None:

        def zeta_fn(rho):
            return zeta_hat(q, metric, x_k, v_k, A_k, rho, eps_aam, L3, max_aam_iters)

    delta = delta_tilde(eps_aam, p_hat, L3)
    rho_minus, rho_plus = float(rho_lo), float(rho_hi)
    minus_eval = lo_eval
    evaluations = 0
    aux_total = 0
    log = []

    if check_bracket:
        if minus_eval is None:
            minus_eval = zeta_fn(rho_minus)
            evaluations += 1
            aux_total += minus_eval.aux_iterations
        hi_eval = zeta_fn(rho_plus)
        evaluations += 1
        aux_total += hi_eval.aux_iterations
        lo_phi = rho_minus - minus_eval.value
        hi_phi = rho_plus - hi_eval.value
        if lo_phi > delta or hi_phi < -delta:
            raise SearchFailureError(
                f"no sign change of rho - zeta across [{rho_minus:.3e}, {rho_plus:.3e}]: "
                f"phi(lo)={lo_phi:.3e}, phi(hi)={hi_phi:.3e}",
                bisection_log=log,
            )

    for _ in range(max_bisections):
        rho_hat = 0.5 * (rho_minus + rho_plus)
        ev = zeta_fn(rho_hat)
        evaluations += 1
        aux_total += ev.aux_iterations
        zeta = ev.value
        if rho_hat > zeta + delta:
            branch = "above"
            rho_plus = rho_hat
        elif rho_hat < zeta - delta:
            branch = "below"
            rho_minus = rho_hat
            minus_eval = ev
        else:
            ok, zeta_re = recheck(metric, rho_hat, ev, eps_rs)
            if ok:
                branch = "accept"
                log.append((rho_hat, zeta, branch))
                if on_evaluation is not None:
                    on_evaluation(rho_hat, zeta, branch)
                return RhoSearchResult(
                    rho_k=rho_hat,
                    x_next=ev.x_next,
                    a_next=ev.a_next,
                    evaluations=evaluations,
                    bracket_final=(rho_minus, rho_plus),
                    y=ev.y,
                    zeta_value=zeta_re,
                    aux_iterations=aux_total,
                    log=log,
                )
            # Inside the absolute band but outside the relative one: keep
            # narrowing toward the fixed point on the measured side.
            if rho_hat > zeta:
                branch = "refine-above"
                rho_plus = rho_hat
            else:
                branch = "refine-below"
                rho_minus = rho_hat
                minus_eval = ev
        log.append((rho_hat, zeta, branch))
        if on_evaluation is not None:
            on_evaluation(rho_hat, zeta, branch)

    if minus_eval is None:
        minus_eval = zeta_fn(rho_minus)
        evaluations += 1
        aux_total += minus_eval.aux_iterations
    ok, zeta_re = recheck(metric, rho_minus, minus_eval, eps_rs)
    if not ok:
        raise SearchFailureError(
            f"bisection budget {max_bisections} exhausted; rho={rho_minus:.6e} "
            f"fails the relative band against zeta={zeta_re:.6e} (eps_rs={eps_rs:.3e})",
            bisection_log=log,
        )
    return RhoSearchResult(
        rho_k=rho_minus,
        x_next=minus_eval.x_next,
        a_next=minus_eval.a_next,
        evaluations=evaluations,
        bracket_final=(rho_minus, rho_plus),
        y=minus_eval.y,
        zeta_value=zeta_re,
        aux_iterations=aux_total,
        log=log,
    )
