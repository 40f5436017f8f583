"""Benchmark orchestration: solve a grid of instances, fit the scaling.

One row per instance, a final summary with the fitted log-log slope of
accepted outer iterations against n. Failures mark their row and the run
continues.
"""

import numpy as np

from ..errors import QuartsolveError
from ..fast_quartic import SolverConfig, solve
from ..metric import Metric
from .generators import build_instance
from .io import problem_from_dict, report_to_dict
from .reference import agd_baseline, reference_newton

__all__ = ["bench", "fit_loglog_slope"]


def fit_loglog_slope(ns, iterations):
    """Least-squares slope of log(iterations) against log(n)."""
    ns = np.asarray(ns, dtype=float)
    iterations = np.maximum(np.asarray(iterations, dtype=float), 1.0)
    if ns.size < 2:
        return None
    slope = np.polyfit(np.log(ns), np.log(iterations), 1)[0]
    return float(slope)


def bench(
    n_grid,
    d=8,
    eps=1e-6,
    seed=0,
    kind="planted",
    baseline="none",
    max_epochs=64,
    timings=False,
    eps_aam_override=None,
    rho_min_override=None,
):
    """Run the grid; returns {"rows": [...], "summary": {...}}."""
    rows = []
    per_n = {}
    for n in n_grid:
        obj = build_instance(kind, d, n, seed)
        q, meta = problem_from_dict(obj)
        metric = Metric.for_problem(q)
        config = SolverConfig(
            eps=eps,
            max_epochs=max_epochs,
            eps_aam_override=eps_aam_override,
            rho_init_minus_override=rho_min_override,
        )
        row = {"n": int(n), "d": int(d), "seed": int(seed), "kind": kind}
        try:
            report = solve(q, metric, config)
        except QuartsolveError as exc:
            row["status"] = "failed"
            row["error"] = str(exc)
            rows.append(row)
            continue
        row["status"] = "ok"
        row.update(report_to_dict(report, timings=timings, include_x=False))
        per_n.setdefault(int(n), []).append(report.outer_iterations)
        if baseline == "newton":
            x_star, f_star = reference_newton(q, metric, tol=1e-11)
            row["baseline"] = {
                "kind": "newton",
                "f_star": f_star,
                "gap_vs_newton": report.f_final - f_star,
            }
        elif baseline == "agd":
            agd = agd_baseline(q, metric, eps=eps)
            row["baseline"] = {
                "kind": "agd",
                "f": agd["f"],
                "iterations": agd["iterations"],
                "wall_nanos": agd["wall_nanos"] if timings else 0,
            }
        rows.append(row)

    ns = sorted(per_n)
    means = [float(np.mean(per_n[n])) for n in ns]
    summary = {
        "slope": fit_loglog_slope(ns, means) if ns else None,
        "n_grid": [int(n) for n in n_grid],
        "rows_ok": sum(1 for r in rows if r.get("status") == "ok"),
        "rows_failed": sum(1 for r in rows if r.get("status") == "failed"),
    }
    return {"rows": rows, "summary": summary}
