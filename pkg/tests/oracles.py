"""Independent reference computations used by the test suite.

None of these share code with the package beyond the element type.
"""
import math
from fractions import Fraction
from itertools import product

import numpy as np


def brute_force_divides(f, g):
    """Decide ``g in Q[Z^d] f`` by solving for every quotient coefficient.

    The quotient's exponent range per coordinate is forced: the lowest and
    highest exponents in each coordinate add under multiplication. So the
    unknowns live on a known box and the question is a linear system over Q,
    solved here by exact Gaussian elimination.
    """
    if g.is_zero():
        return True
    lo = [a - b for a, b in zip(g.min_exponents(), f.min_exponents())]
    hi = [a - b for a, b in zip(g.max_exponents(), f.max_exponents())]
    if any(l > h for l, h in zip(lo, hi)):
        return False
    unknowns = list(product(*[range(l, h + 1) for l, h in zip(lo, hi)]))
    rows = {}
    for j, q in enumerate(unknowns):
        for m, c in f.items():
            key = tuple(a + b for a, b in zip(m, q))
            rows.setdefault(key, {})[j] = Fraction(c)
    for key in g.support():
        rows.setdefault(key, {})
    mat = [[r.get(j, Fraction(0)) for j in range(len(unknowns))] + [Fraction(g.coefficient(k))]
           for k, r in rows.items()]
    n = len(unknowns)
    piv_row = 0
    for col in range(n):
        pr = next((i for i in range(piv_row, len(mat)) if mat[i][col] != 0), None)
        if pr is None:
            continue
        mat[piv_row], mat[pr] = mat[pr], mat[piv_row]
        p = mat[piv_row][col]
        for i in range(len(mat)):
            if i != piv_row and mat[i][col] != 0:
                fct = mat[i][col] / p
                mat[i] = [a - fct * b for a, b in zip(mat[i], mat[piv_row])]
        piv_row += 1
    return all(any(v != 0 for v in row[:n]) or row[n] == 0 for row in mat)


def golden_inverse(n):
    """Coefficient of ``u^n`` in the l^1 inverse of ``u^2 - u - 1``, by partial fractions.

    With roots ``phi > 1`` and ``psi = -1/phi``, the part of ``1/(z - phi)``
    is a power series in ``z`` and the part of ``1/(z - psi)`` a series in
    ``1/z``.
    """
    phi = (1 + math.sqrt(5)) / 2
    psi = (1 - math.sqrt(5)) / 2
    if n >= 0:
        return -phi ** (-n - 1) / math.sqrt(5)
    return -psi ** (-n - 1) / math.sqrt(5)


def geometric_inverse(a, n):
    """Coefficient of ``u^n`` in the inverse of ``a - u`` for ``|a| > 1``."""
    return a ** (-n - 1) if n >= 0 else 0.0


def toeplitz_inverse(coeffs, radius, pad=200):
    """Central window of the inverse of a univariate Laurent polynomial.

    Solves the finite section ``T w = e_0`` of the bi-infinite Toeplitz
    operator on ``[-radius - pad, radius + pad]`` and keeps the middle. The
    sections converge only for symbols without zeros on the circle and with
    winding number zero; the error then decays geometrically in ``pad``.
    """
    M = radius + pad
    n = 2 * M + 1
    T = np.zeros((n, n))
    for k, c in coeffs.items():
        idx = np.arange(n)
        j = idx - k
        ok = (j >= 0) & (j < n)
        T[idx[ok], j[ok]] = c
    rhs = np.zeros(n)
    rhs[M] = 1.0
    w = np.linalg.solve(T, rhs)
    return w[pad:pad + 2 * radius + 1]
