"""Problem files, trace files, and report files.

Two JSON forms are accepted. The structured form spells out every block:

    { "d": int, "n": int, "c": [...], "G": [[...]],
      "T": [[i, j, k, value], ...], "A": [[...]] }

with T holding 0-based canonical entries (i <= j <= k). The regression
form

    { "A": [[...]], "b": [...], "c": [...] }

denotes min_x <c, x> + ||A x - b||_4^4 (c optional) and is rewritten into
the structured class on load. Either form may carry optional sidecar keys
"x_star" and "f_star" (f_star in eval_f units, i.e. without the constant
||b||_4^4 for the regression form) plus freeform metadata like "kind" and
"seed"; these pass through in the returned meta dict.

All writers emit canonical JSON (sorted keys, fixed separators) so repeated
runs with the same seed produce byte-identical files.
"""

import json
import math

import numpy as np

from ..errors import InvalidInputError
from ..quartic_core import StructuredQuartic, from_l4_regression

__all__ = [
    "problem_to_dict",
    "problem_from_dict",
    "load_problem",
    "save_instance",
    "write_trace",
    "report_to_dict",
    "write_report",
    "dump_canonical",
]


def dump_canonical(obj):
    """Serialize with a stable layout; rejects NaN and infinities."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _finite_array(obj, name, ndim):
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"field {name!r} is not numeric") from exc
    if arr.ndim != ndim:
        raise InvalidInputError(f"field {name!r} must be {ndim}-dimensional")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"field {name!r} contains non-finite values")
    return arr


def problem_to_dict(q, meta=None):
    """Structured-form dict for a StructuredQuartic, plus optional meta."""
    obj = {
        "d": int(q.d),
        "n": int(q.n),
        "c": q.c.tolist(),
        "G": q.G.tolist(),
        "T": [[int(i), int(j), int(k), float(v)] for i, j, k, v in q.T_entries],
        "A": q.A.tolist(),
    }
    if meta:
        for key, value in meta.items():
            if key in obj:
                raise InvalidInputError(f"meta key {key!r} collides with a data field")
            obj[key] = value
    return obj


_META_KEYS = ("x_star", "f_star", "kind", "seed")


def _extract_meta(obj):
    meta = {}
    for key in _META_KEYS:
        if key in obj:
            meta[key] = obj[key]
    if "x_star" in meta:
        meta["x_star"] = _finite_array(meta["x_star"], "x_star", 1)
    if "f_star" in meta:
        f_star = meta["f_star"]
        if not isinstance(f_star, (int, float)) or not math.isfinite(f_star):
            raise InvalidInputError("field 'f_star' must be a finite number")
        meta["f_star"] = float(f_star)
    return meta


def problem_from_dict(obj):
    """Parse either accepted form; returns (problem, meta).

    Raises InvalidInputError on malformed input; dimension and positivity
    violations surface as the constructor's own error types.
    """
    if not isinstance(obj, dict):
        raise InvalidInputError("problem file must contain a JSON object")
    meta = _extract_meta(obj)

    if "b" in obj:
        if "A" not in obj:
            raise InvalidInputError("regression form requires fields 'A' and 'b'")
        A = _finite_array(obj["A"], "A", 2)
        b = _finite_array(obj["b"], "b", 1)
        if b.size != A.shape[0]:
            raise InvalidInputError(
                f"b has {b.size} entries but A has {A.shape[0]} rows"
            )
        c = None
        if obj.get("c") is not None:
            c = _finite_array(obj["c"], "c", 1)
        meta["form"] = "l4"
        meta["b_fourth_power"] = float(np.sum(b**4))
        return from_l4_regression(A, b, c), meta

    missing = [key for key in ("d", "n", "c", "G", "T", "A") if key not in obj]
    if missing:
        raise InvalidInputError(f"problem file missing fields: {missing}")
    d, n = obj["d"], obj["n"]
    if not isinstance(d, int) or not isinstance(n, int):
        raise InvalidInputError("fields 'd' and 'n' must be integers")
    c = _finite_array(obj["c"], "c", 1)
    G = _finite_array(obj["G"], "G", 2)
    A = _finite_array(obj["A"], "A", 2)
    if c.size != d:
        raise InvalidInputError(f"c has {c.size} entries, expected d={d}")
    if A.shape != (n, d):
        raise InvalidInputError(f"A has shape {A.shape}, expected ({n}, {d})")
    T = obj["T"]
    if not isinstance(T, list):
        raise InvalidInputError("field 'T' must be a list of [i, j, k, value] rows")
    for row in T:
        if not isinstance(row, list) or len(row) != 4:
            raise InvalidInputError(f"tensor row {row!r} is not [i, j, k, value]")
        if not math.isfinite(row[3]):
            raise InvalidInputError(f"tensor row {row!r} has a non-finite value")
    meta["form"] = "structured"
    return StructuredQuartic(c, G, T, A), meta


def load_problem(path):
    """Read a problem file; returns (problem, meta)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path} is not valid JSON: {exc}") from exc
    return problem_from_dict(obj)


def save_instance(obj, path):
    """Write an instance dict canonically; returns the byte count."""
    text = dump_canonical(obj) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return len(text)


def _record_dict(record, timings):
    row = record.to_dict()
    if not timings:
        row["wall_nanos"] = 0
    return row


def write_trace(records, path, timings=False):
    """Line-delimited JSON, one record per line.

    wall_nanos is zeroed unless timings is set, keeping output files
    byte-identical across runs of the same seeded configuration.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(dump_canonical(_record_dict(record, timings)) + "\n")


def report_to_dict(report, timings=False, include_x=False):
    obj = {
        "f_final": report.f_final,
        "certified_gap": report.certified_gap,
        "outer_iterations": report.outer_iterations,
        "aux_iterations_total": report.aux_iterations_total,
        "linear_solves_total": report.linear_solves_total,
        "wall_nanos": report.wall_nanos if timings else 0,
        "exit_reason": report.exit_reason,
    }
    if include_x:
        obj["x_final"] = np.asarray(report.x_final).tolist()
    if report.notes:
        obj["notes"] = report.notes
    return obj


def write_report(report, path, timings=False, include_x=True):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_canonical(report_to_dict(report, timings, include_x)) + "\n")
