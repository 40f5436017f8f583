"""Inequality suite: every proved bound re-verified on seeded instances.

Static properties (model upper bound, Taylor identity, uniform convexity,
norm modulus) are sampled at random pairs. Dynamic properties (relative
band on accepted rho, estimate-sequence envelope, growth of A_k, the rate
envelope) are verified by driving the accelerated stepper on planted
instances where the minimizer and value are known exactly.
"""

import math
from dataclasses import dataclass

import numpy as np

from .. import quartic_core as qc
from ..errors import QuartsolveError
from ..fast_quartic import (
    SolverConfig,
    StepEarlyExit,
    epoch_length,
    initial_budget,
    initial_state,
    step,
)
from ..metric import Metric
from ..rho_search import tau_of_rho
from .generators import build_instance
from .io import problem_from_dict

__all__ = ["PropertyResult", "run_propcheck", "solver_invariant_results"]


@dataclass
class PropertyResult:
    name: str
    ok: bool
    checked: int
    detail: str

    def line(self):
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name}: {self.detail} ({self.checked} checks)"


def _sample_pairs(rng, d, count, scale=1.5):
    for _ in range(count):
        yield rng.normal(scale=scale, size=d), rng.normal(scale=scale, size=d)


def check_model_upper_bound(q, metric, rng, pairs=200):
    """f(y) <= Omega_{x,B}(y) for random (x, y)."""
    worst = -math.inf
    for x, y in _sample_pairs(rng, q.d, pairs):
        gap = qc.eval_f(q, y) - qc.omega_eval(q, 1.0, metric, x, y)
        worst = max(worst, gap)
    ok = worst <= 1e-9
    return PropertyResult("model-upper-bound", ok, pairs, f"worst f - Omega = {worst:.3e}")


def check_taylor_identity(q, rng, pairs=200):
    """f(y) - Phi_x(y) equals the quartic tail to 1e-10 relative."""
    worst = 0.0
    for x, y in _sample_pairs(rng, q.d, pairs):
        lhs = qc.eval_f(q, y) - qc.taylor_phi(q, x, y)
        rhs = qc.fourth_form(q, y - x) / 24.0
        rel = abs(lhs - rhs) / max(1.0, abs(rhs))
        worst = max(worst, rel)
    ok = worst <= 1e-10
    return PropertyResult("taylor-identity", ok, pairs, f"worst rel err = {worst:.3e}")


def check_omega_uniform_convexity(q, metric, rng, pairs=200):
    """Omega_{z,B} is uniformly convex of degree 4 with modulus L3/12."""
    worst = -math.inf
    for x, y in _sample_pairs(rng, q.d, pairs):
        z = rng.normal(size=q.d)
        lhs = (
            qc.omega_eval(q, 1.0, metric, z, x)
            + float(qc.omega_grad(q, 1.0, metric, z, x) @ (y - x))
            + (1.0 / 12.0) * metric.b_norm_sq(y - x) ** 2
        )
        gap = lhs - qc.omega_eval(q, 1.0, metric, z, y)
        worst = max(worst, gap)
    ok = worst <= 1e-9
    return PropertyResult(
        "omega-uniform-convexity", ok, pairs, f"worst violation = {worst:.3e}"
    )


def check_f_uniform_convexity(q, metric, rng, pairs=200):
    """f grows at least (mu4/4) ||y - x||_B^4 above its linearization."""
    mu4 = qc.SmoothnessConstants.for_problem(q).mu4
    worst = -math.inf
    for x, y in _sample_pairs(rng, q.d, pairs):
        lhs = (
            qc.eval_f(q, x)
            + float(qc.grad_f(q, x) @ (y - x))
            + 0.25 * mu4 * metric.b_norm_sq(y - x) ** 2
        )
        gap = lhs - qc.eval_f(q, y)
        worst = max(worst, gap)
    ok = worst <= 1e-9
    return PropertyResult(
        "f-uniform-convexity", ok, pairs, f"worst violation = {worst:.3e}"
    )


def check_norm_modulus(rng, samples=500):
    """||v||_4^4 >= ||v||_2^4 / n holds; the inverted form has a witness.

    Two results: the corrected modulus sampled across dimensions, and the
    explicit counterexample v = e_1 in n = 2 where n ||v||_2^4 = 2 > 1
    falsifies ||v||_4^4 >= n ||v||_2^4.
    """
    worst = -math.inf
    count = 0
    for _ in range(samples):
        n = int(rng.integers(1, 40))
        v = rng.normal(size=n)
        lhs = float(np.sum(v**4))
        rhs = float(np.sum(v**2)) ** 2 / n
        worst = max(worst, rhs - lhs)
        count += 1
    corrected = PropertyResult(
        "norm-modulus-corrected", worst <= 1e-12, count, f"worst violation = {worst:.3e}"
    )
    v = np.array([1.0, 0.0])
    lhs = float(np.sum(v**4))
    rhs = 2.0 * float(np.sum(v**2)) ** 2
    witness_fails_inverted = lhs < rhs
    counterexample = PropertyResult(
        "norm-modulus-printed-counterexample",
        witness_fails_inverted,
        1,
        f"n=2, v=e1: ||v||_4^4 = {lhs:.1f} < n ||v||_2^4 = {rhs:.1f}",
    )
    return [corrected, counterexample]


def solver_invariant_results(q, metric, x_star, f_star, eps=1e-9, max_steps=None):
    """Drive accepted steps and verify the estimate-sequence bounds.

    Checks, for each accepted k (1e-9 absolute slack):
      rho-band           (1 - eps_rs) zeta <= rho_k <= (1 + eps_rs) zeta
      psi-envelope       A_k f(x_k) + B_k <= psi_k(v_k)
      gap-from-A         f(x_k) - f* <= D^2 / (2 A_k)
      A-growth           A_k >= (3 / (256 L3 D^2)) ((k+1)/2)^5
      rate-envelope      f(x_k) - f* <= (128 L3 D^4 / 3) (2/(k+1))^5
      A-from-rho         A_k >= (1/(4 L3)) (sum_i rho_i^(-1/2))^2
      B-bound            B_k <= D^2 / 2
    """
    L3 = 1.0
    config = SolverConfig(eps=eps)
    x0 = np.zeros(q.d)
    state = initial_state(x0)
    budget = initial_budget(q, metric, config, x0, L3)
    D = metric.b_norm(x0 - x_star)
    D2 = D * D
    if max_steps is None:
        max_steps = epoch_length(q.n, L3)

    slack = 1e-9
    failures = {}
    counts = {}
    names = [
        "rho-band",
        "psi-envelope",
        "gap-from-A",
        "A-growth",
        "rate-envelope",
        "A-from-rho",
        "B-bound",
    ]
    for name in names:
        failures[name] = 0.0
        counts[name] = 0

    def record_check(name, violation):
        counts[name] += 1
        failures[name] = max(failures[name], violation)

    rho_sum = 0.0
    prev = state
    for _ in range(max_steps):
        budget.refresh()
        outcome = step(q, metric, prev, budget)
        if isinstance(outcome, StepEarlyExit):
            break
        state = outcome.state
        rec = outcome.record
        k = state.k

        tau, _ = tau_of_rho(prev.A_k, L3, rec.rho_k)
        y = (1.0 - tau) * prev.x_k + tau * prev.v_k
        zeta = metric.b_norm_sq(state.x_k - y)
        lo = (1.0 - budget.eps_rs) * zeta - rec.rho_k
        hi = rec.rho_k - (1.0 + budget.eps_rs) * zeta
        record_check("rho-band", max(lo, hi))

        psi_v = state.psi_at(metric, state.v_k)
        record_check("psi-envelope", state.A_k * rec.f + state.B_k - psi_v - slack)

        gap = rec.f - f_star
        record_check("gap-from-A", gap - D2 / (2.0 * state.A_k) - slack)
        record_check(
            "A-growth",
            (3.0 / (256.0 * L3 * D2)) * ((k + 1) / 2.0) ** 5 - state.A_k - slack,
        )
        record_check(
            "rate-envelope",
            gap - (128.0 * L3 * D2 * D2 / 3.0) * (2.0 / (k + 1)) ** 5 - slack,
        )
        rho_sum += 1.0 / math.sqrt(rec.rho_k)
        record_check(
            "A-from-rho", rho_sum**2 / (4.0 * L3) - state.A_k - slack * state.A_k
        )
        record_check("B-bound", state.B_k - 0.5 * D2 - slack)
        prev = state

    return [
        PropertyResult(
            name,
            failures[name] <= 0.0,
            counts[name],
            f"worst violation = {failures[name]:.3e}",
        )
        for name in names
    ]


def run_propcheck(seeds=(0, 1, 2), d=6, n=24, eps=1e-9):
    """Full suite across seeded instances; returns (all_ok, lines)."""
    lines = []
    all_ok = True
    rng = np.random.default_rng(12345)
    for result in check_norm_modulus(rng):
        all_ok &= result.ok
        lines.append(result.line())
    for seed in seeds:
        obj = build_instance("planted", d, n, seed)
        q, meta = problem_from_dict(obj)
        metric = Metric.for_problem(q)
        rng = np.random.default_rng(seed + 1000)
        static = [
            check_model_upper_bound(q, metric, rng),
            check_taylor_identity(q, rng),
            check_omega_uniform_convexity(q, metric, rng),
            check_f_uniform_convexity(q, metric, rng),
        ]
        try:
            dynamic = solver_invariant_results(
                q, metric, np.asarray(meta["x_star"]), meta["f_star"], eps
            )
        except QuartsolveError as exc:
            dynamic = [
                PropertyResult("solver-invariants", False, 0, f"solver failed: {exc}")
            ]
        for result in static + dynamic:
            all_ok &= result.ok
            lines.append(f"seed={seed} {result.line()}")
    return all_ok, lines
