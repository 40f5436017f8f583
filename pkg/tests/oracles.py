"""Independent reference implementations used to cross-check the package.

Everything here is written as plain loops against the defining formulas and
deliberately reuses no package contraction helpers, so agreement between the
two routes is evidence rather than tautology.
"""

import itertools

import numpy as np


def sym_tensor_from_triples(d, entries):
    """Dense symmetric (d, d, d) tensor from canonical (i, j, k, v) triples."""
    S = np.zeros((d, d, d))
    for i, j, k, v in entries:
        for p in set(itertools.permutations((int(i), int(j), int(k)))):
            S[p] = float(v)
    return S


def naive_eval(c, G, S, A, x):
    """c'x + x'Gx + S[x,x,x] + (1/24) sum_i (a_i'x)^4 with scalar loops."""
    d = len(c)
    val = 0.0
    for i in range(d):
        val += c[i] * x[i]
    for i in range(d):
        for j in range(d):
            val += x[i] * G[i][j] * x[j]
    for i in range(d):
        for j in range(d):
            for k in range(d):
                val += S[i][j][k] * x[i] * x[j] * x[k]
    for row in A:
        s = 0.0
        for j in range(d):
            s += row[j] * x[j]
        val += s**4 / 24.0
    return val


def naive_eval_q(q, x):
    """naive_eval against a StructuredQuartic's raw arrays."""
    S = sym_tensor_from_triples(q.d, q.T_entries)
    return naive_eval(q.c, q.G, S, q.A, np.asarray(x, dtype=float))


def fd_gradient(fn, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fn(x + e) - fn(x - e)) / (2.0 * h)
    return g


def fd_directional(fn, x, v, order, h=1.0):
    """Central-difference directional derivative of the given order.

    For a quartic objective a unit step with the exact stencil carries no
    truncation error at any order up to four.
    """
    stencils = {
        1: ((-1.0, -0.5), (1.0, 0.5)),
        2: ((-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)),
        3: ((-2.0, -0.5), (-1.0, 1.0), (1.0, -1.0), (2.0, 0.5)),
        4: ((-2.0, 1.0), (-1.0, -4.0), (0.0, 6.0), (1.0, -4.0), (2.0, 1.0)),
    }
    total = 0.0
    for t, w in stencils[order]:
        total += w * fn(x + (t * h) * v)
    return total / h**order


def quartic_line_coeffs(fn, x, v):
    """Exact coefficients of t -> fn(x + t v) for quartic fn via sampling.

    Fits the degree-4 polynomial through t in {-2,-1,0,1,2}; exact up to
    round-off for any quartic, giving an independent route to every
    directional derivative at once.
    """
    ts = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    vals = np.array([fn(x + t * v) for t in ts])
    V = np.vander(ts, 5, increasing=True)
    return np.linalg.solve(V, vals)  # [p0, p1, p2, p3, p4]
