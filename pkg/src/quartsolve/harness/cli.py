"""Command line: solve, bench, derivcheck, propcheck.

Exit codes: 0 success, 2 invalid input, 3 solver failure, 4 property-suite
failure. Output files are byte-stable across runs of the same seeded
configuration; pass --timings to keep real wall times in reports and
traces.
"""

import sys
from dataclasses import dataclass

import click

from ..errors import InvalidInputError, QuartsolveError
from ..fast_quartic import SolveReport, SolverConfig, solve
from ..metric import Metric
from .bench import bench as run_bench
from .derivcheck import run_derivcheck
from .generators import build_instance
from .io import (
    dump_canonical,
    load_problem,
    problem_from_dict,
    report_to_dict,
    write_report,
    write_trace,
)
from .propcheck import run_propcheck
from .reference import agd_baseline, reference_newton

EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_SOLVER_FAILURE = 3
EXIT_PROPERTY_FAILURE = 4


@dataclass
class RunConfig:
    """Validated CLI invocation; fields mirror the long-form flags."""

    command: str
    input_path: str | None = None
    output_path: str | None = None
    eps: float = 1e-8
    eps_aam_override: float | None = None
    rho_min_override: float | None = None
    max_epochs: int = 64
    seed: int = 0
    baseline: str = "none"
    trace: bool = False
    timings: bool = False

    def validate(self):
        if self.eps <= 0:
            raise InvalidInputError(f"--eps must be positive, got {self.eps}")
        if self.eps_aam_override is not None and self.eps_aam_override <= 0:
            raise InvalidInputError("--eps-aam must be positive")
        if self.rho_min_override is not None and not (0 < self.rho_min_override < 0.5):
            raise InvalidInputError("--rho-min must lie in (0, 1/2)")
        if self.max_epochs < 1:
            raise InvalidInputError("--max-epochs must be at least 1")
        if self.baseline not in ("none", "agd", "newton"):
            raise InvalidInputError(f"unknown baseline {self.baseline!r}")
        if self.trace and not self.output_path:
            raise InvalidInputError("--trace requires --out to name the trace file")
        return self


def _emit(obj, out_path):
    text = dump_canonical(obj)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


def _fail(message, code):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main():
    """Structured convex quartic minimization."""


@main.command(name="solve")
@click.argument("input_path", type=click.Path())
@click.option("--eps", type=float, default=1e-8, show_default=True)
@click.option("--eps-aam", "eps_aam", type=float, default=None)
@click.option("--rho-min", "rho_min", type=float, default=None)
@click.option("--max-epochs", type=int, default=64, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--baseline",
    type=click.Choice(["none", "agd", "newton"]),
    default="none",
    show_default=True,
)
@click.option("--trace", is_flag=True, help="Write <out>.trace (line-delimited).")
@click.option("--out", "out", type=click.Path(), default=None)
@click.option("--timings", is_flag=True, help="Keep wall times in output files.")
def solve_cmd(input_path, eps, eps_aam, rho_min, max_epochs, seed, baseline, trace, out, timings):
    """Minimize the problem in INPUT_PATH to certified gap --eps."""
    try:
        cfg = RunConfig(
            command="solve",
            input_path=input_path,
            output_path=out,
            eps=eps,
            eps_aam_override=eps_aam,
            rho_min_override=rho_min,
            max_epochs=max_epochs,
            seed=seed,
            baseline=baseline,
            trace=trace,
            timings=timings,
        ).validate()
        q, meta = load_problem(input_path)
    except (InvalidInputError, ValueError) as exc:
        _fail(str(exc), EXIT_INVALID_INPUT)

    metric = Metric.for_problem(q)
    config = SolverConfig(
        eps=cfg.eps,
        eps_aam_override=cfg.eps_aam_override,
        rho_init_minus_override=cfg.rho_min_override,
        max_epochs=cfg.max_epochs,
    )
    try:
        report = solve(q, metric, config)
    except QuartsolveError as exc:
        failure = SolveReport(
            f_final=float("nan"),
            certified_gap=float("inf"),
            outer_iterations=0,
            aux_iterations_total=0,
            linear_solves_total=0,
            wall_nanos=0,
            exit_reason="failure",
            x_final=None,
            notes=str(exc),
        )
        if cfg.output_path:
            write_report(failure, cfg.output_path, timings=cfg.timings, include_x=False)
        _fail(str(exc), EXIT_SOLVER_FAILURE)

    obj = report_to_dict(report, timings=cfg.timings, include_x=True)
    if cfg.baseline == "newton":
        x_star, f_star = reference_newton(q, metric, tol=1e-11)
        obj["baseline"] = {
            "kind": "newton",
            "f_star": f_star,
            "gap_vs_newton": report.f_final - f_star,
        }
    elif cfg.baseline == "agd":
        agd = agd_baseline(q, metric, eps=cfg.eps)
        obj["baseline"] = {
            "kind": "agd",
            "f": agd["f"],
            "iterations": agd["iterations"],
            "wall_nanos": agd["wall_nanos"] if cfg.timings else 0,
        }
    if cfg.trace:
        write_trace(report.trace, cfg.output_path + ".trace", timings=cfg.timings)
    _emit(obj, cfg.output_path)
    if report.exit_reason == "gap-met" or report.certified_gap <= cfg.eps:
        sys.exit(EXIT_OK)
    _fail(
        f"target gap {cfg.eps} not certified (reached {report.certified_gap:.3e}, "
        f"exit_reason={report.exit_reason})",
        EXIT_SOLVER_FAILURE,
    )


@main.command(name="bench")
@click.option("--grid", default="16,64,256,1024", show_default=True, help="Comma-separated n values.")
@click.option("--d", "d", type=int, default=8, show_default=True)
@click.option("--eps", type=float, default=1e-6, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--kind",
    type=click.Choice(["l4", "planted", "dense-quartic"]),
    default="planted",
    show_default=True,
)
@click.option(
    "--baseline",
    type=click.Choice(["none", "agd", "newton"]),
    default="none",
    show_default=True,
)
@click.option("--eps-aam", "eps_aam", type=float, default=None)
@click.option("--rho-min", "rho_min", type=float, default=None)
@click.option("--max-epochs", type=int, default=64, show_default=True)
@click.option("--out", "out", type=click.Path(), default=None)
@click.option("--timings", is_flag=True)
def bench_cmd(grid, d, eps, seed, kind, baseline, eps_aam, rho_min, max_epochs, out, timings):
    """Solve an n-grid and fit the iteration-scaling slope."""
    try:
        n_grid = [int(tok) for tok in grid.split(",") if tok.strip()]
        if eps <= 0:
            raise InvalidInputError(f"--eps must be positive, got {eps}")
        if any(n < d for n in n_grid):
            raise InvalidInputError(f"every n in the grid must be >= d={d}")
    except ValueError as exc:
        _fail(f"bad --grid value: {exc}", EXIT_INVALID_INPUT)
    except InvalidInputError as exc:
        _fail(str(exc), EXIT_INVALID_INPUT)

    table = run_bench(
        n_grid,
        d=d,
        eps=eps,
        seed=seed,
        kind=kind,
        baseline=baseline,
        max_epochs=max_epochs,
        timings=timings,
        eps_aam_override=eps_aam,
        rho_min_override=rho_min,
    )
    lines = [dump_canonical(row) for row in table["rows"]]
    lines.append(dump_canonical({"summary": table["summary"]}))
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        for line in lines:
            click.echo(line)
    if table["summary"]["rows_failed"]:
        sys.exit(EXIT_SOLVER_FAILURE)
    sys.exit(EXIT_OK)


def _default_derivcheck_problems(seed, count=10):
    problems = []
    kinds = ("l4", "planted", "dense-quartic")
    for i in range(count):
        kind = kinds[i % len(kinds)]
        d = 2 + (i % 7)
        n = d + 2 + i
        obj = build_instance(kind, d, n, seed + i)
        q, _ = problem_from_dict(obj)
        problems.append((f"{kind}-d{d}-n{n}-s{seed + i}", q))
    return problems


@main.command(name="derivcheck")
@click.argument("input_path", type=click.Path(), required=False)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--count", type=int, default=10, show_default=True, help="Generated instances when no input file is given.")
@click.option("--out", "out", type=click.Path(), default=None)
def derivcheck_cmd(input_path, seed, count, out):
    """Finite-difference check of all four derivative oracles."""
    try:
        if input_path:
            q, _ = load_problem(input_path)
            problems = [(input_path, q)]
        else:
            problems = _default_derivcheck_problems(seed, count)
    except (InvalidInputError, ValueError) as exc:
        _fail(str(exc), EXIT_INVALID_INPUT)
    ok, lines = run_derivcheck(problems, seed=seed)
    text = "\n".join(lines)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)
    sys.exit(EXIT_OK if ok else EXIT_PROPERTY_FAILURE)


@main.command(name="propcheck")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--count", type=int, default=3, show_default=True, help="Seeded instances to sweep.")
@click.option("--d", "d", type=int, default=6, show_default=True)
@click.option("--n", "n", type=int, default=24, show_default=True)
@click.option("--eps", type=float, default=1e-9, show_default=True)
@click.option("--out", "out", type=click.Path(), default=None)
def propcheck_cmd(seed, count, d, n, eps, out):
    """Run the proved-inequality suite on seeded instances."""
    if eps <= 0:
        _fail(f"--eps must be positive, got {eps}", EXIT_INVALID_INPUT)
    if not (n >= d >= 1):
        _fail(f"need n >= d >= 1, got n={n}, d={d}", EXIT_INVALID_INPUT)
    seeds = tuple(range(seed, seed + count))
    ok, lines = run_propcheck(seeds=seeds, d=d, n=n, eps=eps)
    text = "\n".join(lines)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)
    sys.exit(EXIT_OK if ok else EXIT_PROPERTY_FAILURE)


if __name__ == "__main__":
    main()
