"""Accelerated minimization of structured convex quartics.

Objectives of the form

    f(x) = <c, x> + x^T G x + T[x, x, x] + (1/24) ||A x||_4^4

with A^T A positive definite are minimized by a three-level scheme: a
certified model-minimization inner solver (aux_min), a bisection for the
step-coupling weight (rho_search), and a restarted estimate-sequence outer
loop (fast_quartic). quartic_core holds the problem representation and
derivative oracles; metric holds the A^T A geometry; estimator wraps
fourth-power regression in a scikit-learn interface; harness provides file
formats, generators, baselines, and the command line.
"""

from .aux_min import AuxResult, approx_aux_min, solve_inner_step, subproblem_gradient
from .errors import (
    ConvergenceFailureError,
    DimensionMismatchError,
    InvalidInputError,
    NotPositiveDefiniteError,
    NumericalFailureError,
    OracleFailureError,
    QuartsolveError,
    SearchFailureError,
)
from .estimator import L4Regression
from .fast_quartic import (
    AccelState,
    SolveReport,
    SolverConfig,
    StepAccepted,
    StepEarlyExit,
    TheoryBudget,
    TraceRecord,
    epoch_length,
    f_gap_certificate,
    solve,
    solve_smooth,
    step,
)
from .metric import Metric
from .quartic_core import (
    SmoothnessConstants,
    StructuredQuartic,
    eval_f,
    fourth_form,
    from_l4_regression,
    grad_f,
    hess_apply,
    hess_matrix,
    omega_eval,
    omega_grad,
    taylor_phi,
    third_apply,
    third_form,
)
from .rho_search import RhoSearchResult, rho_search, tau_of_rho, zeta_hat

__version__ = "0.1.0"

__all__ = [
    "AccelState",
    "AuxResult",
    "ConvergenceFailureError",
    "DimensionMismatchError",
    "InvalidInputError",
    "L4Regression",
    "Metric",
    "NotPositiveDefiniteError",
    "NumericalFailureError",
    "OracleFailureError",
    "QuartsolveError",
    "RhoSearchResult",
    "SearchFailureError",
    "SmoothnessConstants",
    "SolveReport",
    "SolverConfig",
    "StepAccepted",
    "StepEarlyExit",
    "StructuredQuartic",
    "TheoryBudget",
    "TraceRecord",
    "approx_aux_min",
    "epoch_length",
    "eval_f",
    "f_gap_certificate",
    "fourth_form",
    "from_l4_regression",
    "grad_f",
    "hess_apply",
    "hess_matrix",
    "omega_eval",
    "omega_grad",
    "rho_search",
    "solve",
    "solve_inner_step",
    "solve_smooth",
    "step",
    "subproblem_gradient",
    "taylor_phi",
    "tau_of_rho",
    "third_apply",
    "third_form",
    "zeta_hat",
    "__version__",
]
