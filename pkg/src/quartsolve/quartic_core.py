"""Structured convex quartics and their exact derivative oracles.

The function class is

    f(x) = c'x + x'Gx + T[x,x,x] + (1/24) ||Ax||_4^4

with A'A positive definite. T is a symmetric order-3 tensor stored as
canonical (i <= j <= k) sparse triples and expanded over index permutations
on application. All operations here are pure functions of (q, x); nothing
x-dependent is cached inside the problem object, so values are safe to share
across concurrent solver runs.
"""

import itertools

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import DimensionMismatchError, InvalidInputError, NotPositiveDefiniteError

__all__ = [
    "StructuredQuartic",
    "SmoothnessConstants",
    "eval_f",
    "grad_f",
    "hess_apply",
    "hess_matrix",
    "third_apply",
    "third_form",
    "fourth_form",
    "taylor_phi",
    "omega_eval",
    "omega_grad",
    "from_l4_regression",
]


def _as_vector(x, d, name):
    x = np.asarray(x, dtype=float).ravel()
    if x.size != d:
        raise DimensionMismatchError(f"{name} has length {x.size}, expected {d}")
    return x


class StructuredQuartic:
    """Immutable problem data (c, G, T, A) with symmetrized T expansion.

    Parameters
    ----------
    c : array_like, shape (d,)
        Linear coefficients.
    G : array_like, shape (d, d)
        Quadratic slot; the objective uses x'Gx directly, so only the
        symmetric part of G matters.
    T : iterable of (i, j, k, value)
        Canonical entries of the symmetric cubic tensor, 0-based indices
        with i <= j <= k. The symmetric tensor takes `value` at every
        permutation of (i, j, k).
    A : array_like, shape (n, d)
        Rows a_i of the quartic term; A'A must be positive definite
        (checked at construction by factorization).
    """

    def __init__(self, c, G, T, A):
        c = np.asarray(c, dtype=float).ravel()
        d = c.size
        if d < 1:
            raise InvalidInputError("c must have at least one entry")
        G = np.asarray(G, dtype=float)
        if G.shape != (d, d):
            raise DimensionMismatchError(f"G has shape {G.shape}, expected {(d, d)}")
        if scipy.sparse.issparse(A):
            A = A.toarray()
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[1] != d:
            raise DimensionMismatchError(f"A has shape {A.shape}, expected (n, {d})")
        n = A.shape[0]

        self.c = c
        self.G = G
        self.A = A
        self.d = d
        self.n = n
        self.G_sym = G + G.T
        self.T_entries = self._canonicalize_triples(T, d)
        # Permutation-expanded symmetric tensor: one (p, q, r, v) row per
        # distinct permutation of each canonical triple.
        self._Tp, self._Tq, self._Tr, self._Tv = self._expand_triples(self.T_entries)

        B = A.T @ A
        try:
            scipy.linalg.cho_factor(B, lower=True, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError("A'A is not positive definite") from exc

    @staticmethod
    def _canonicalize_triples(T, d):
        entries = []
        seen = set()
        for row in T if T is not None else []:
            if len(row) != 4:
                raise InvalidInputError(f"tensor entry {row!r} is not (i, j, k, value)")
            i, j, k, v = int(row[0]), int(row[1]), int(row[2]), float(row[3])
            if not (0 <= i <= j <= k < d):
                raise InvalidInputError(
                    f"tensor indices ({i},{j},{k}) violate 0 <= i <= j <= k < {d}"
                )
            if (i, j, k) in seen:
                raise InvalidInputError(f"duplicate canonical tensor entry ({i},{j},{k})")
            seen.add((i, j, k))
            if v != 0.0:
                entries.append((i, j, k, v))
        return tuple(entries)

    @staticmethod
    def _expand_triples(entries):
        ps, qs, rs, vs = [], [], [], []
        for i, j, k, v in entries:
            for p, q, r in set(itertools.permutations((i, j, k))):
                ps.append(p)
                qs.append(q)
                rs.append(r)
                vs.append(v)
        return (
            np.asarray(ps, dtype=np.intp),
            np.asarray(qs, dtype=np.intp),
            np.asarray(rs, dtype=np.intp),
            np.asarray(vs, dtype=float),
        )

    @classmethod
    def from_dense_tensor(cls, c, G, S, A):
        """Build from a dense symmetric (d, d, d) tensor S (d <= 32)."""
        S = np.asarray(S, dtype=float)
        d = S.shape[0]
        if S.shape != (d, d, d):
            raise DimensionMismatchError(f"tensor has shape {S.shape}, expected cube")
        if d > 32:
            raise InvalidInputError("dense cubic tensors are limited to d <= 32")
        if not (
            np.allclose(S, S.transpose(1, 0, 2))
            and np.allclose(S, S.transpose(0, 2, 1))
        ):
            raise InvalidInputError("dense cubic tensor is not symmetric")
        triples = []
        for i in range(d):
            for j in range(i, d):
                for k in range(j, d):
                    v = S[i, j, k]
                    if v != 0.0:
                        triples.append((i, j, k, v))
        return cls(c, G, triples, A)

    # Cubic tensor contractions over the permutation-expanded entries.

    def t_xxx(self, x):
        """T[x,x,x]."""
        if self._Tv.size == 0:
            return 0.0
        return float(np.sum(self._Tv * x[self._Tp] * x[self._Tq] * x[self._Tr]))

    def t_xx(self, x, y=None):
        """T[x,y,.] as a vector (y defaults to x)."""
        if self._Tv.size == 0:
            return np.zeros(self.d)
        y = x if y is None else y
        return np.bincount(
            self._Tr, weights=self._Tv * x[self._Tp] * y[self._Tq], minlength=self.d
        )

    def t_x(self, x):
        """T[x,.,.] as a dense symmetric (d, d) matrix."""
        if self._Tv.size == 0:
            return np.zeros((self.d, self.d))
        flat = np.bincount(
            self._Tq * self.d + self._Tr,
            weights=self._Tv * x[self._Tp],
            minlength=self.d * self.d,
        )
        return flat.reshape(self.d, self.d)

    def t_trilinear(self, u, v, w):
        """T[u,v,w] for arbitrary arguments (used by symmetry checks)."""
        if self._Tv.size == 0:
            return 0.0
        return float(np.sum(self._Tv * u[self._Tp] * v[self._Tq] * w[self._Tr]))


class SmoothnessConstants:
    """Smoothness/convexity moduli of f in the A'A-induced norm.

    L3 is the Lipschitz constant of the third differential (exactly 1 for
    this class in the A'A metric). mu4 is the degree-4 uniform-convexity
    modulus 1/(72 n); the n/72 variant fails, see the counterexample test.
    """

    def __init__(self, n, L3=1.0):
        if n < 1:
            raise InvalidInputError("n must be positive")
        self.L3 = float(L3)
        self.mu4 = 1.0 / (72.0 * n)
        if self.L3 <= 0 or self.mu4 <= 0:
            raise InvalidInputError("moduli must be positive")
        self.kappa4 = self.L3 / self.mu4

    @classmethod
    def for_problem(cls, q):
        return cls(q.n)


def eval_f(q, x):
    """Objective value c'x + x'Gx + T[x,x,x] + (1/24)||Ax||_4^4."""
    x = _as_vector(x, q.d, "x")
    Ax = q.A @ x
    return float(q.c @ x + x @ (q.G @ x) + q.t_xxx(x) + np.sum(Ax**4) / 24.0)


def grad_f(q, x):
    """Gradient c + (G+G')x + 3 T[x,x,.] + (1/6) A'((Ax)^3)."""
    x = _as_vector(x, q.d, "x")
    Ax = q.A @ x
    return q.c + q.G_sym @ x + 3.0 * q.t_xx(x) + (q.A.T @ (Ax**3)) / 6.0


def hess_matrix(q, x):
    """Hessian (G+G') + 6 T[x,.,.] + (1/2) A'Diag((Ax)^2)A, symmetric."""
    x = _as_vector(x, q.d, "x")
    Ax = q.A @ x
    H = q.G_sym + 6.0 * q.t_x(x) + 0.5 * (q.A.T * (Ax**2)) @ q.A
    return 0.5 * (H + H.T)


def hess_apply(q, x, h):
    """Hessian-vector product without materializing the matrix."""
    x = _as_vector(x, q.d, "x")
    h = _as_vector(h, q.d, "h")
    Ax = q.A @ x
    return q.G_sym @ h + 6.0 * q.t_xx(x, h) + 0.5 * (q.A.T @ ((Ax**2) * (q.A @ h)))


def third_apply(q, x, h):
    """Third differential applied twice: 6 T[h,h,.] + A'((Ax)(Ah)^2)."""
    x = _as_vector(x, q.d, "x")
    h = _as_vector(h, q.d, "h")
    return 6.0 * q.t_xx(h) + q.A.T @ ((q.A @ x) * (q.A @ h) ** 2)


def third_form(q, x, h):
    """Third differential as a cubic form in h."""
    x = _as_vector(x, q.d, "x")
    h = _as_vector(h, q.d, "h")
    Ah = q.A @ h
    return float(6.0 * q.t_xxx(h) + np.sum((q.A @ x) * Ah**3))


def fourth_form(q, h):
    """Fourth differential as a quartic form: ||Ah||_4^4, independent of x."""
    h = _as_vector(h, q.d, "h")
    return float(np.sum((q.A @ h) ** 4))


def taylor_phi(q, x, y):
    """Third-order Taylor expansion of f around x, evaluated at y."""
    x = _as_vector(x, q.d, "x")
    y = _as_vector(y, q.d, "y")
    s = y - x
    return float(
        eval_f(q, x)
        + grad_f(q, x) @ s
        + 0.5 * (s @ hess_apply(q, x, s))
        + third_form(q, x, s) / 6.0
    )


def taylor_phi_grad(q, x, y):
    """Gradient in y of the third-order Taylor expansion around x."""
    s = _as_vector(y, q.d, "y") - _as_vector(x, q.d, "x")
    return grad_f(q, x) + hess_apply(q, x, s) + 0.5 * third_apply(q, x, s)


def omega_eval(q, L3, metric, x, y):
    """Upper model: Taylor expansion plus (L3/4)||y-x||_B^4.

    Dominates f everywhere when L3 >= 1 and B = A'A.
    """
    x = _as_vector(x, q.d, "x")
    y = _as_vector(y, q.d, "y")
    r2 = metric.b_norm_sq(y - x)
    return taylor_phi(q, x, y) + 0.25 * L3 * r2 * r2


def omega_grad(q, L3, metric, x, y):
    """Gradient in y of the upper model."""
    x = _as_vector(x, q.d, "x")
    y = _as_vector(y, q.d, "y")
    s = y - x
    return taylor_phi_grad(q, x, y) + L3 * metric.b_norm_sq(s) * (metric.B @ s)


def from_l4_regression(A, b, c=None):
    """Express c'x + ||Ax - b||_4^4 (minus its value at 0) in the quartic class.

    Expanding sum_i (a_i'x - b_i)^4 termwise gives

        c' = c - 4 A'(b^3)
        G' = 6 A'Diag(b^2)A
        T'_{jkl} = -4 sum_i b_i a_{ij} a_{ik} a_{il}
        A' = 24^(1/4) A    so that (1/24)||A'x||_4^4 = ||Ax||_4^4,

    dropping the constant ||b||_4^4. The bookkeeping is pinned by the
    identity eval_f(result, x) + ||b||_4^4 = c'x + ||Ax - b||_4^4.

    Returns
    -------
    StructuredQuartic
        The mapped problem. The dropped constant is available as
        ``float(np.sum(b**4))`` for callers that report absolute values.
    """
    if scipy.sparse.issparse(A):
        A = A.toarray()
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise DimensionMismatchError("A must be a 2-d matrix")
    n, d = A.shape
    b = _as_vector(b, n, "b")
    c = np.zeros(d) if c is None else _as_vector(c, d, "c")

    c_new = c - 4.0 * (A.T @ (b**3))
    G_new = 6.0 * (A.T * (b**2)) @ A
    # Symmetric cubic tensor S = -4 sum_i b_i a_i (x) a_i (x) a_i, stored
    # canonically; S is symmetric because each a_i^(x3) is.
    S = -4.0 * np.einsum("i,ij,ik,il->jkl", b, A, A, A, optimize=True)
    triples = []
    for j in range(d):
        for k in range(j, d):
            for l in range(k, d):
                v = S[j, k, l]
                if v != 0.0:
                    triples.append((j, k, l, v))
    A_new = (24.0**0.25) * A
    return StructuredQuartic(c_new, G_new, triples, A_new)
