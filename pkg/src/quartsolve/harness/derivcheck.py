"""Finite-difference verification of the derivative oracles.

Each order is checked against one central difference of the oracle one
order below it, with step h = max(1e-5, 1e-5 ||x||_inf): gradient vs
eval_f, hessian vs grad_f, third vs hess_apply. The fourth derivative uses
a unit step with the five-point stencil, which is exact for quartics up to
round-off (a 1e-5 step at fourth order is pure cancellation noise).
Relative errors are measured against max(1, ||exact||).
"""

import numpy as np

from .. import quartic_core as qc

__all__ = ["DERIV_TOLERANCES", "check_instance", "run_derivcheck", "fd_step"]

DERIV_TOLERANCES = {"gradient": 1e-6, "hessian": 1e-6, "third": 1e-5, "fourth": 1e-3}


def fd_step(x):
    return max(1e-5, 1e-5 * float(np.abs(x).max()))


def _rel_err(approx, exact):
    diff = np.linalg.norm(np.asarray(approx) - np.asarray(exact))
    return float(diff / max(1.0, np.linalg.norm(exact)))


def _fd_gradient(q, x, h):
    g = np.empty(q.d)
    for i in range(q.d):
        e = np.zeros(q.d)
        e[i] = h
        g[i] = (qc.eval_f(q, x + e) - qc.eval_f(q, x - e)) / (2.0 * h)
    return g


def _fd_hessian(q, x, h):
    H = np.empty((q.d, q.d))
    for i in range(q.d):
        e = np.zeros(q.d)
        e[i] = h
        H[:, i] = (qc.grad_f(q, x + e) - qc.grad_f(q, x - e)) / (2.0 * h)
    return 0.5 * (H + H.T)


def _fd_third_apply(q, x, v, h):
    # Central difference of the Hessian-vector product along v gives
    # D^3 f(x)[v, v, .]; the Hessian is quadratic in x, so this is exact
    # up to round-off.
    return (qc.hess_apply(q, x + h * v, v) - qc.hess_apply(q, x - h * v, v)) / (2.0 * h)


def _fd_fourth_form(q, x, v):
    # Five-point stencil at unit step: exact for a quartic polynomial.
    vals = [qc.eval_f(q, x + t * v) for t in (-2.0, -1.0, 0.0, 1.0, 2.0)]
    return vals[0] - 4.0 * vals[1] + 6.0 * vals[2] - 4.0 * vals[3] + vals[4]


def check_instance(q, x, v):
    """All four oracle checks at (x, v); returns [(name, rel_err, tol), ...]."""
    h = fd_step(x)
    results = [
        ("gradient", _rel_err(_fd_gradient(q, x, h), qc.grad_f(q, x))),
        ("hessian", _rel_err(_fd_hessian(q, x, h), qc.hess_matrix(q, x))),
        ("third", _rel_err(_fd_third_apply(q, x, v, h), qc.third_apply(q, x, v))),
        ("fourth", _rel_err(_fd_fourth_form(q, x, v), qc.fourth_form(q, v))),
    ]
    return [(name, err, DERIV_TOLERANCES[name]) for name, err in results]


def run_derivcheck(problems, seed=0):
    """Check each (label, problem) pair at a seeded random point.

    Returns (all_ok, lines) where lines carry one PASS/FAIL entry per
    oracle per instance.
    """
    rng = np.random.default_rng(seed)
    lines = []
    all_ok = True
    for label, q in problems:
        x = rng.normal(size=q.d)
        v = rng.normal(size=q.d)
        for name, err, tol in check_instance(q, x, v):
            ok = err <= tol
            all_ok &= ok
            status = "PASS" if ok else "FAIL"
            lines.append(
                f"{status} derivcheck[{label}] {name}: rel_err={err:.3e} tol={tol:.0e}"
            )
    return all_ok, lines
