"""Problem I/O, generators, reference oracles, checks, and the CLI."""

from .generators import gen_instance
from .io import (
    load_problem,
    problem_from_dict,
    problem_to_dict,
    report_to_dict,
    save_instance,
    write_report,
    write_trace,
)
from .reference import agd_baseline, reference_newton

__all__ = [
    "agd_baseline",
    "gen_instance",
    "load_problem",
    "problem_from_dict",
    "problem_to_dict",
    "reference_newton",
    "report_to_dict",
    "save_instance",
    "write_report",
    "write_trace",
]
