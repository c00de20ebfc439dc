"""Exact reference computations in sympy, written without the package.

The product is evaluated straight from the column rule
mu(e2,e3) = column 1, mu(e3,e1) = column 2, mu(e1,e2) = column 3, and the
twisted Jacobi sum is expanded on all 27 basis triples.
"""

import itertools

import sympy as sp

TS = sp.Matrix(3, 3, lambda i, j: sp.Symbol(f"T{i + 1}{j + 1}"))


def product(M, x, y):
    M = sp.Matrix(M)
    cols = {(1, 2): M[:, 0], (2, 0): M[:, 1], (0, 1): M[:, 2]}
    out = sp.zeros(3, 1)
    for i, j in itertools.permutations(range(3), 2):
        if (i, j) in cols:
            out += x[i] * y[j] * cols[(i, j)]
        else:
            out -= x[i] * y[j] * cols[(j, i)]
    return out


def twisted_jacobi(M, T, x, y, z):
    return (product(M, T * x, product(M, y, z)) + product(M, T * y, product(M, z, x))
            + product(M, T * z, product(M, x, y)))


def constraint_rows(M, T=TS):
    e = [sp.Matrix([1 if k == i else 0 for k in range(3)]) for i in range(3)]
    eqs = []
    for i, j, k in itertools.product(range(3), repeat=3):
        eqs.extend(sp.expand(c) for c in twisted_jacobi(M, T, e[i], e[j], e[k]))
    return sp.Matrix([[sp.diff(q, s) for s in TS] for q in eqs if q != 0] or [[0] * 9])


def hl_dim(M):
    return 9 - constraint_rows(M).rank(simplify=True)


def in_hl(M, T):
    e = [sp.Matrix([1 if k == i else 0 for k in range(3)]) for i in range(3)]
    v = twisted_jacobi(M, sp.Matrix(T), *e)
    return all(sp.simplify(c) == 0 for c in v)
