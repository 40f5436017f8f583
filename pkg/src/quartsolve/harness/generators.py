"""Seeded instance generators.

Every kind shares the same design matrix construction: n - d rows of
N(0, 1) / sqrt(n) noise stacked on 0.5 I_d, which bounds the smallest
eigenvalue of A'A below by 0.25 regardless of the draw. Generation is a
pure function of (kind, d, n, seed), and files are written canonically, so
repeated calls are byte-identical.
"""

import numpy as np

from ..errors import InvalidInputError
from ..quartic_core import StructuredQuartic, eval_f, from_l4_regression
from .io import problem_to_dict, save_instance

__all__ = ["gen_instance", "make_design_matrix", "build_instance"]

KINDS = ("l4", "planted", "dense-quartic")


def make_design_matrix(rng, n, d):
    """Random rows over a 0.5-identity ridge block; A'A >= 0.25 I."""
    top = rng.normal(size=(n - d, d)) / np.sqrt(n)
    return np.vstack([top, 0.5 * np.eye(d)])


def _dense_quartic_dict(rng, n, d):
    """Structured instance whose minimizer is planted with a flat basin.

    With beta = A x_star, the choices G = (1/4) A' Diag(beta^2) A,
    T = -(1/6) sum_i beta_i a_i (x) a_i (x) a_i, c = -(1/6) A' beta^3 make
    the gradient, Hessian, and third derivative all vanish at x_star:
    the objective collapses to f(x_star) + (1/24)||A(x - x_star)||_4^4,
    the hardest local geometry the solver has to certify.
    """
    A = make_design_matrix(rng, n, d)
    x_star = rng.normal(size=d)
    beta = A @ x_star
    G = 0.25 * (A.T * beta**2) @ A
    S = -(1.0 / 6.0) * np.einsum("i,ij,ik,il->jkl", beta, A, A, A, optimize=True)
    c = -(1.0 / 6.0) * A.T @ (beta**3)
    q = StructuredQuartic.from_dense_tensor(c, G, S, A)
    meta = {
        "kind": "dense-quartic",
        "x_star": x_star.tolist(),
        "f_star": eval_f(q, x_star),
    }
    return problem_to_dict(q, meta)


def build_instance(kind, d, n, seed):
    """Instance dict for (kind, d, n, seed); see gen_instance."""
    if kind not in KINDS:
        raise InvalidInputError(f"unknown instance kind {kind!r}; choose from {KINDS}")
    if not (n >= d >= 1):
        raise InvalidInputError(f"need n >= d >= 1, got n={n}, d={d}")
    rng = np.random.default_rng(seed)

    if kind == "dense-quartic":
        if d == 1 and n == 1:
            # Degenerate corner: the canonical scalar instance x^4 / 24.
            q = StructuredQuartic([0.0], [[0.0]], [], [[1.0]])
            return problem_to_dict(
                q, {"kind": kind, "seed": seed, "x_star": [0.0], "f_star": 0.0}
            )
        obj = _dense_quartic_dict(rng, n, d)
        obj["seed"] = seed
        return obj

    A = make_design_matrix(rng, n, d)
    if kind == "l4":
        b = rng.normal(size=n)
        obj = {"A": A.tolist(), "b": b.tolist(), "kind": kind, "seed": seed}
        return obj
    # planted: b = A x_star makes x_star the exact regression minimizer.
    x_star = rng.normal(size=d)
    b = A @ x_star
    q = from_l4_regression(A, b)
    return {
        "A": A.tolist(),
        "b": b.tolist(),
        "kind": kind,
        "seed": seed,
        "x_star": x_star.tolist(),
        "f_star": eval_f(q, x_star),
    }


def gen_instance(kind, d, n, seed, out_path=None):
    """Generate a deterministic problem instance.

    kind 'l4' draws a random regression target; 'planted' places the
    target in the range of A so the minimizer and optimal value are known
    exactly; 'dense-quartic' builds a structured instance with explicit
    cubic tensor entries whose planted minimizer has a fully degenerate
    (quartic-flat) basin. Returns the instance dict; writes it to out_path
    when given.
    """
    obj = build_instance(kind, d, n, seed)
    if out_path is not None:
        save_instance(obj, out_path)
    return obj
