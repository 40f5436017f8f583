"""Accelerated outer loop for structured quartic minimization.

Maintains the estimate sequence

    psi_k(z) = (1/2) ||z - x_0||_B^2 + sum_i a_i [f(x_i) + <grad f(x_i), z - x_i>]

whose B-weighted minimizer v_k is available in closed form, mixes v_k with
the current iterate through a rho-dependent weight, and advances by one
certified model-minimization step per iteration. The coupling weight rho_k
comes from a bisection (rho_search); two early-exit branches detect that the
probe displacement is already small enough to certify the target gap.

Unknown theory quantities (an upper bound P on squared B-distances to the
minimizer, a bound G on squared dual gradient norms) are tracked as running
surrogates in TheoryBudget, from which all tolerance budgets are refreshed.

Uniform convexity of the objective (modulus mu4 = 1 / (72 n) at degree 4)
turns dual gradient norms into optimality-gap certificates and caps the
useful epoch length, so the full solver restarts every k_epoch iterations
from the best point seen.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import quartic_core as qc
from .aux_min import EPS_AAM_FLOOR, approx_aux_min
from .errors import NumericalFailureError
from .metric import Metric
from .rho_search import ZetaEval, rho_search, tau_of_rho

__all__ = [
    "SolverConfig",
    "TheoryBudget",
    "AccelState",
    "TraceRecord",
    "StepAccepted",
    "StepEarlyExit",
    "f_gap_certificate",
    "epoch_length",
    "initial_state",
    "initial_budget",
    "step",
    "solve_smooth",
    "solve",
    "SolveReport",
]

RHO_INIT_CAP = 0.49  # the coupling analysis requires rho_init_minus < 1/2


def f_gap_certificate(dual_grad_norm, mu4):
    """Optimality gap bound from uniform convexity of degree 4.

    f(x) - f* <= (3/4) (1/mu4)^(1/3) ||grad f(x)||*^(4/3), with the dual
    norm taken in the B metric and mu4 the degree-4 modulus.
    """
    return 0.75 * (float(dual_grad_norm) ** (4.0 / 3.0)) / (mu4 ** (1.0 / 3.0))


def epoch_length(n, L3=1.0, mu4=None):
    """Iterations per restart epoch: ceil((512 L3 / (3 mu4))^(1/5))."""
    if mu4 is None:
        mu4 = 1.0 / (72.0 * n)
    return int(math.ceil((512.0 * L3 / (3.0 * mu4)) ** 0.2))


@dataclass
class SolverConfig:
    """Tunables for the outer loop.

    eps is the target on f(x) - f*. x0 defaults to the origin. p_hat_init
    seeds the distance surrogate when no reference point is supplied;
    eps_aam_override and rho_init_minus_override pin budgets that are
    otherwise derived. max_outer only limits solve_smooth; solve is limited
    by max_epochs times the restart length.
    """

    eps: float = 1e-8
    x0: np.ndarray | None = None
    x_ref: np.ndarray | None = None
    p_hat_init: float = 1.0
    eps_aam_override: float | None = None
    rho_init_minus_override: float | None = None
    max_epochs: int = 64
    max_outer: int = 2000
    max_aam_iters: int = 200
    max_bisections: int = 128
    eps_rs_floor: float = 0.25
    check_bracket: bool = False


@dataclass
class TheoryBudget:
    """Running surrogates and the tolerance budgets derived from them.

    p_hat over-approximates squared B-distances seen so far (a stand-in for
    ||x0 - x*||_B^2 scale); g_hat over-approximates squared dual gradient
    norms. refresh() recomputes the dependent tolerances:

      eps_fs  = min(3 L3^2 p_hat rho_minus / (32 g_hat), 1/2)
      eps_rs  = min(3 L3 rho_minus p_hat^2 / (16 t_hat), rho_minus, 1/2)
                with t_hat = g_hat / L3 + 1/100, then floored at
                eps_rs_floor (the raw formula collapses below double
                precision resolution; every consequence the floor could
                endanger is separately verified at runtime)
      q_hat   = 6 p_hat^(1/2) / L3^(1/4) + 5 / L3^(1/2)
      eps_aam = min over the step/search consistency caps, floored at
                EPS_AAM_FLOOR, unless overridden.

    eps_aam_theory keeps the unfloored cap minimum. The floor exists only
    because the inner solver cannot certify below double precision; the
    early-exit margin q_hat * eps_aam^(1/4) must use the unfloored value
    or it dwarfs the probe displacement near convergence and turns every
    epoch into a single tensor step.

    rho_init_minus only ever decreases; rho_init_plus tracks p_hat.
    """

    L3: float = 1.0
    p_hat: float = 1.0
    g_hat: float = 1.0
    rho_init_minus: float = 1e-8
    rho_init_plus: float = 1.0
    eps_rs_floor: float = 0.25
    eps_aam_override: float | None = None
    eps_fs: float = 0.5
    eps_rs: float = 0.25
    q_hat: float = 11.0
    eps_aam: float = EPS_AAM_FLOOR
    eps_aam_theory: float = EPS_AAM_FLOOR

    def observe_distance_sq(self, value):
        if value > self.p_hat:
            self.p_hat = float(value)

    def observe_grad_dual_sq(self, value):
        if value > self.g_hat:
            self.g_hat = float(value)

    def lower_rho_init(self, value):
        self.rho_init_minus = float(min(self.rho_init_minus, max(value, 1e-300)))

    def refresh(self):
        L3 = self.L3
        rho = self.rho_init_minus
        self.rho_init_plus = max(self.p_hat, 2.0 * rho)
        self.eps_fs = min(3.0 * L3 * L3 * self.p_hat * rho / (32.0 * self.g_hat), 0.5)
        t_hat = self.g_hat / L3 + 0.01
        eps_rs_raw = min(3.0 * L3 * rho * self.p_hat**2 / (16.0 * t_hat), rho, 0.5)
        self.eps_rs = max(eps_rs_raw, min(self.eps_rs_floor, 0.5))
        self.q_hat = 6.0 * math.sqrt(self.p_hat) / L3**0.25 + 5.0 / math.sqrt(L3)
        if self.eps_aam_override is not None:
            self.eps_aam = max(self.eps_aam_override, EPS_AAM_FLOOR)
            self.eps_aam_theory = self.eps_aam
            return
        q = self.q_hat
        caps = (
            (self.eps_rs**2 / (100.0 * q)) ** 4,
            (self.eps_fs / (q * (1.0 + self.eps_fs))) ** 4,
            (self.eps_fs * rho / (q * (1.0 + self.eps_fs))) ** 4,
            (3.0 * L3 * self.p_hat**2 * rho / (32.0 * q)) ** 4,
            0.5,
        )
        self.eps_aam_theory = min(caps)
        self.eps_aam = max(self.eps_aam_theory, EPS_AAM_FLOOR)


@dataclass
class AccelState:
    """Estimate-sequence state after k accepted steps.

    psi_lin and psi_scalar hold the linear part of psi_k so that
    psi_k(z) = (1/2)||z - x0||_B^2 + psi_scalar + <psi_lin, z> and the
    minimizer is v_k = x0 - B^{-1} psi_lin.
    """

    x_k: np.ndarray
    v_k: np.ndarray
    A_k: float
    B_k: float
    psi_lin: np.ndarray
    psi_scalar: float
    x0: np.ndarray
    k: int = 0

    def psi_at(self, metric, z):
        return (
            0.5 * metric.b_norm_sq(z - self.x0)
            + self.psi_scalar
            + float(self.psi_lin @ z)
        )


@dataclass
class TraceRecord:
    k: int
    f: float
    dual_grad_norm: float
    A_k: float
    rho_k: float | None
    aux_iterations: int
    rho_evaluations: int
    branch: str
    wall_nanos: int

    def to_dict(self):
        return {
            "k": self.k,
            "f": self.f,
            "dual_grad_norm": self.dual_grad_norm,
            "A_k": self.A_k,
            "rho_k": self.rho_k,
            "aux_iterations": self.aux_iterations,
            "rho_evaluations": self.rho_evaluations,
            "branch": self.branch,
            "wall_nanos": self.wall_nanos,
        }


@dataclass
class StepAccepted:
    state: AccelState
    record: TraceRecord


@dataclass
class StepEarlyExit:
    x_exit: np.ndarray
    f_exit: float
    branch: str
    record: TraceRecord


@dataclass
class SolveReport:
    f_final: float
    certified_gap: float
    outer_iterations: int
    aux_iterations_total: int
    linear_solves_total: int
    wall_nanos: int
    exit_reason: str
    x_final: np.ndarray
    trace: list = field(default_factory=list)
    epochs: list = field(default_factory=list)
    notes: str = ""


def initial_state(x0):
    x0 = np.asarray(x0, dtype=float)
    return AccelState(
        x_k=x0.copy(),
        v_k=x0.copy(),
        A_k=0.0,
        B_k=0.0,
        psi_lin=np.zeros_like(x0),
        psi_scalar=0.0,
        x0=x0.copy(),
        k=0,
    )


def initial_budget(q, metric, config, x0, L3=1.0):
    budget = TheoryBudget(
        L3=L3,
        eps_rs_floor=config.eps_rs_floor,
        eps_aam_override=config.eps_aam_override,
    )
    p0 = config.p_hat_init
    if config.x_ref is not None:
        p0 = max(p0, 4.0 * metric.b_norm_sq(np.asarray(config.x_ref) - x0))
    budget.p_hat = max(p0, 1e-12)
    budget.g_hat = max(metric.dual_norm_sq(qc.grad_f(q, x0)), 1e-12)
    if config.rho_init_minus_override is not None:
        rho0 = config.rho_init_minus_override
    else:
        rho0 = config.eps / (2.0 * L3 * budget.p_hat)
    budget.rho_init_minus = min(max(rho0, 1e-300), RHO_INIT_CAP)
    budget.refresh()
    return budget


def _verify_psi_envelope(metric, state, f_x):
    """A_k f(x_k) + B_k <= psi_k(v_k); abort if the accumulators drifted."""
    psi_v = state.psi_at(metric, state.v_k)
    lhs = state.A_k * f_x + state.B_k
    slack = 1e-9 * (1.0 + abs(psi_v))
    if lhs > psi_v + slack:
        raise NumericalFailureError(
            "estimate-sequence envelope violated: "
            f"A_k f + B_k = {lhs:.12e} > psi(v_k) = {psi_v:.12e} at k={state.k}",
            diagnostics={"lhs": lhs, "psi_v": psi_v, "k": state.k},
        )


def step(
    q,
    metric,
    state,
    budget,
    *,
    L3=1.0,
    max_aam_iters=200,
    max_bisections=128,
    check_bracket=False,
):
    """One outer iteration: probe at rho_init_minus, then search or exit.

    Probes the candidate step at rho = rho_init_minus. If the probe
    displacement zeta already satisfies rho > (1 + eps_fs) zeta (branch a)
    or rho > zeta - q_hat eps_aam_theory^(1/4) (branch b, checked second),
    the probe iterate certifies the target gap and the step returns
    StepEarlyExit. Otherwise the probe is a valid low end of the rho
    bracket and the bisection runs on [rho_init_minus, rho_init_plus].

    On acceptance the estimate sequence is advanced:
      A_{k+1} = A_k + a,  with  a^2 = (A_k + a) / (L3 rho_k) re-verified,
      psi gains the term a [f(x_{k+1}) + <grad f(x_{k+1}), z - x_{k+1}>],
      B_{k+1} = B_k + (3 L3 / 16) A_{k+1} ||x_{k+1} - y_k||_B^4,
      v_{k+1} = x0 - B^{-1} psi_lin,
    and the envelope A f + B <= psi(v) is checked before returning.
    """
    t0 = time.perf_counter_ns()
    eps_aam = budget.eps_aam

    rho_minus = budget.rho_init_minus
    tau_m, a_m = tau_of_rho(state.A_k, L3, rho_minus)
    y_m = (1.0 - tau_m) * state.x_k + tau_m * state.v_k
    aux_m = approx_aux_min(q, metric, y_m, eps_aam, max_iters=max_aam_iters, L3=L3)
    zeta_m = metric.b_norm_sq(aux_m.x_next - y_m)
    aux_total = aux_m.iterations

    g_probe = qc.grad_f(q, aux_m.x_next)
    dual_probe = metric.dual_norm(g_probe)
    budget.observe_grad_dual_sq(dual_probe**2)
    budget.observe_distance_sq(zeta_m)
    budget.observe_distance_sq(metric.b_norm_sq(state.v_k - state.x_k))
    budget.refresh()

    if rho_minus > (1.0 + budget.eps_fs) * zeta_m:
        branch = "early-exit-a"
    elif rho_minus > zeta_m - budget.q_hat * budget.eps_aam_theory**0.25:
        branch = "early-exit-b"
    else:
        branch = None

    if branch is not None:
        f_exit = qc.eval_f(q, aux_m.x_next)
        record = TraceRecord(
            k=state.k,
            f=f_exit,
            dual_grad_norm=dual_probe,
            A_k=state.A_k,
            rho_k=None,
            aux_iterations=aux_total,
            rho_evaluations=0,
            branch=branch,
            wall_nanos=time.perf_counter_ns() - t0,
        )
        return StepEarlyExit(
            x_exit=aux_m.x_next, f_exit=f_exit, branch=branch, record=record
        )

    lo_eval = ZetaEval(
        value=zeta_m,
        x_next=aux_m.x_next,
        a_next=a_m,
        y=y_m,
        tau=tau_m,
        aux_iterations=0,
    )
    rs = rho_search(
        q,
        metric,
        state.x_k,
        state.v_k,
        state.A_k,
        rho_minus,
        budget.rho_init_plus,
        budget.eps_rs,
        eps_aam,
        max_bisections,
        L3=L3,
        p_hat=budget.p_hat,
        max_aam_iters=max_aam_iters,
        lo_eval=lo_eval,
        check_bracket=check_bracket,
    )
    aux_total += rs.aux_iterations

    a = rs.a_next
    A_next = state.A_k + a
    resid = abs(L3 * rs.rho_k * a * a - A_next)
    if resid > 1e-12 * max(A_next, 1.0):
        raise NumericalFailureError(
            f"step weight inconsistent: |L3 rho a^2 - (A_k + a)| = {resid:.3e}",
            residual=resid,
        )

    x_next = rs.x_next
    r_sq = metric.b_norm_sq(x_next - rs.y)
    B_next = state.B_k + (3.0 * L3 / 16.0) * A_next * r_sq * r_sq

    f_next = qc.eval_f(q, x_next)
    g_next = qc.grad_f(q, x_next)
    dual_next = metric.dual_norm(g_next)
    psi_lin = state.psi_lin + a * g_next
    psi_scalar = state.psi_scalar + a * (f_next - float(g_next @ x_next))
    v_next = state.x0 - metric.solve_b(psi_lin)

    new_state = AccelState(
        x_k=x_next,
        v_k=v_next,
        A_k=A_next,
        B_k=B_next,
        psi_lin=psi_lin,
        psi_scalar=psi_scalar,
        x0=state.x0,
        k=state.k + 1,
    )
    _verify_psi_envelope(metric, new_state, f_next)

    budget.observe_grad_dual_sq(dual_next**2)
    budget.observe_distance_sq(metric.b_norm_sq(x_next - state.x0))
    budget.observe_distance_sq(metric.b_norm_sq(v_next - state.x0))
    budget.observe_distance_sq(metric.b_norm_sq(v_next - x_next))

    record = TraceRecord(
        k=state.k,
        f=f_next,
        dual_grad_norm=dual_next,
        A_k=A_next,
        rho_k=rs.rho_k,
        aux_iterations=aux_total,
        rho_evaluations=rs.evaluations,
        branch="accepted",
        wall_nanos=time.perf_counter_ns() - t0,
    )
    return StepAccepted(state=new_state, record=record)


def _run_segment(
    q, metric, config, state, budget, n_iters, k_offset, trace, monitor, L3
):
    """Run up to n_iters outer steps; returns (state, best, stop, aux_total).

    best is (f, x) over iterates produced in this segment. stop is one of
    'grad-stop', 'early-exit-a', 'early-exit-b', 'completed'.
    """
    best_f = qc.eval_f(q, state.x_k)
    best_x = state.x_k.copy()
    aux_total = 0
    stop = "completed"
    for i in range(n_iters):
        g = qc.grad_f(q, state.x_k)
        dual = metric.dual_norm(g)
        budget.observe_grad_dual_sq(dual**2)
        budget.refresh()
        if dual * math.sqrt(budget.p_hat) <= config.eps:
            stop = "grad-stop"
            break
        outcome = step(
            q,
            metric,
            state,
            budget,
            L3=L3,
            max_aam_iters=config.max_aam_iters,
            max_bisections=config.max_bisections,
            check_bracket=config.check_bracket,
        )
        outcome.record.k = k_offset + i
        trace.append(outcome.record)
        aux_total += outcome.record.aux_iterations
        if isinstance(outcome, StepEarlyExit):
            if outcome.f_exit < best_f:
                best_f = outcome.f_exit
                best_x = outcome.x_exit.copy()
            if monitor is not None:
                monitor(outcome.record, None)
            stop = outcome.branch
            break
        state = outcome.state
        if outcome.record.f < best_f:
            best_f = outcome.record.f
            best_x = state.x_k.copy()
        if monitor is not None:
            monitor(outcome.record, state)
    return state, (best_f, best_x), stop, aux_total


def solve_smooth(q, metric=None, config=None, *, monitor=None):
    """Run the accelerated loop without restarts for up to max_outer steps.

    Stops on an early exit, on the gradient-based stop
    ||grad f||* sqrt(p_hat) <= eps, or at the iteration cap. The reported
    certified_gap always uses the uniform-convexity certificate, which does
    not depend on the surrogate p_hat.
    """
    config = config or SolverConfig()
    if metric is None:
        metric = Metric.for_problem(q)
    sc = qc.SmoothnessConstants.for_problem(q)
    L3 = sc.L3
    t0 = time.perf_counter_ns()
    solves0 = metric.solve_count

    x0 = (
        np.zeros(q.d)
        if config.x0 is None
        else np.asarray(config.x0, dtype=float).copy()
    )
    state = initial_state(x0)
    budget = initial_budget(q, metric, config, x0, L3)

    trace = []
    state, (best_f, best_x), stop, aux_total = _run_segment(
        q, metric, config, state, budget, config.max_outer, 0, trace, monitor, L3
    )
    dual_best = metric.dual_norm(qc.grad_f(q, best_x))
    cert = f_gap_certificate(dual_best, sc.mu4)
    exit_reason = {
        "grad-stop": "gap-met",
        "early-exit-a": "early-exit-a",
        "early-exit-b": "early-exit-b",
        "completed": "epoch-cap",
    }[stop]
    return SolveReport(
        f_final=best_f,
        certified_gap=cert,
        outer_iterations=state.k,
        aux_iterations_total=aux_total,
        linear_solves_total=metric.solve_count - solves0,
        wall_nanos=time.perf_counter_ns() - t0,
        exit_reason=exit_reason,
        x_final=best_x,
        trace=trace,
    )


def solve(q, metric=None, config=None, *, monitor=None):
    """Full solver: restarted accelerated epochs until the gap certificate.

    Each epoch runs ceil((512 L3 / (3 mu4))^(1/5)) outer iterations anchored
    at the best point so far, with the estimate sequence reset. Before each
    epoch the uniform-convexity certificate
    (3/4) (1/mu4)^(1/3) ||grad f||*^(4/3) is evaluated; the solver returns
    as soon as it reaches config.eps. Surrogates persist across epochs and
    rho_init_minus never increases; an epoch that fails to improve f
    quarters it (the probe rho was still too coarse for the local scale).
    """
    config = config or SolverConfig()
    if metric is None:
        metric = Metric.for_problem(q)
    sc = qc.SmoothnessConstants.for_problem(q)
    L3, mu4 = sc.L3, sc.mu4
    k_epoch = epoch_length(q.n, L3, mu4)
    t0 = time.perf_counter_ns()
    solves0 = metric.solve_count

    x = (
        np.zeros(q.d)
        if config.x0 is None
        else np.asarray(config.x0, dtype=float).copy()
    )
    f_x = qc.eval_f(q, x)
    budget = initial_budget(q, metric, config, x, L3)

    trace = []
    epochs = []
    aux_total = 0
    accepted_total = 0
    exit_reason = "epoch-cap"
    cert = math.inf

    for epoch in range(config.max_epochs):
        dual = metric.dual_norm(qc.grad_f(q, x))
        cert = f_gap_certificate(dual, mu4)
        if cert <= config.eps:
            exit_reason = "gap-met"
            break
        if config.rho_init_minus_override is None:
            budget.lower_rho_init(
                min(config.eps / (2.0 * L3 * budget.p_hat), RHO_INIT_CAP)
            )
        budget.refresh()

        state = initial_state(x)
        state, (best_f, best_x), stop, aux = _run_segment(
            q, metric, config, state, budget, k_epoch, len(trace), trace, monitor, L3
        )
        aux_total += aux
        accepted_total += state.k
        epochs.append(
            {
                "epoch": epoch,
                "f_start": f_x,
                "f_end": best_f,
                "accepted": state.k,
                "stop": stop,
                "rho_init_minus": budget.rho_init_minus,
            }
        )
        made_progress = best_f < f_x - 1e-15 * (1.0 + abs(f_x))
        if not made_progress:
            # No progress: the probe scale is too coarse for this
            # neighborhood, tighten it before the next epoch.
            budget.lower_rho_init(budget.rho_init_minus * 0.25)
        if stop == "grad-stop" and not made_progress:
            dual_b = metric.dual_norm(qc.grad_f(q, best_x))
            if f_gap_certificate(dual_b, mu4) > config.eps:
                # The surrogate distance bound tripped the gradient stop
                # while the sound certificate disagrees, so it was too
                # small; grow it and resume stepping.
                budget.p_hat *= 4.0
                budget.refresh()
        if best_f < f_x:
            x = best_x
            f_x = best_f
    else:
        dual = metric.dual_norm(qc.grad_f(q, x))
        cert = f_gap_certificate(dual, mu4)
        if cert <= config.eps:
            exit_reason = "gap-met"

    return SolveReport(
        f_final=f_x,
        certified_gap=cert,
        outer_iterations=accepted_total,
        aux_iterations_total=aux_total,
        linear_solves_total=metric.solve_count - solves0,
        wall_nanos=time.perf_counter_ns() - t0,
        exit_reason=exit_reason,
        x_final=x,
        trace=trace,
        epochs=epochs,
    )
