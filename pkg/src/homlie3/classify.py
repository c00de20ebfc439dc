"""Orbit classification of products under g . M = (det g)^-1 g M g^T.

The symmetric part is first brought to diag(1,..,1,0,..) by congruence.
Then the transformed axial vector decides the class, and an explicit
group element (the witness) carries the input onto a fixed
representative.

Two of the classes carry a parameter, and both are defined up to sign:

* ND1, the representative [[1,0,0],[0,1,-a],[0,a,1]];
* D2_4, the representative [[1,-z,0],[z,1,0],[0,0,0]].  Once the
  symmetric part is fixed at diag(1,1,0), the stabiliser can only flip
  the sign of z.  The ratio of the eigenvalues -z +- i of ad(e3) on
  span(e1, e2) is an invariant of the bracket.  z = -1 gives the matrix
  [[1,1,0],[-1,1,0],[0,0,0]].
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .core import (
    DEFAULT_TOL,
    GroupElement,
    NotSymmetricProduct,
    Tolerance,
    UnknownClass,
    act_on_product,
    as_matrix,
    decompose,
    max_abs,
)

__all__ = [
    "CLASS_TAGS",
    "EXTRA_TAGS",
    "ALL_TAGS",
    "PARAMETRIC_TAGS",
    "CATALOG_PARAMETERS",
    "ProductClass",
    "canonical_matrix",
    "symmetric_normalize",
    "classify_product",
    "products_equivalent",
    "parameters_match",
]

CLASS_TAGS = ("ND1", "ND2", "ND3", "D2_1", "D2_2", "D2_3", "D2_4", "D1_1", "D1_2", "D1_3")
EXTRA_TAGS = ("X_PURE_SKEW", "X_ZERO")
ALL_TAGS = CLASS_TAGS + EXTRA_TAGS
PARAMETRIC_TAGS = ("ND1", "D2_4")

# representative parameter values used by the catalog and the tables
CATALOG_PARAMETERS = {"ND1": 2.0 + 0j, "D2_4": -1.0 + 0j}

_FIXED = {
    "ND2": np.eye(3),
    "ND3": [[0, 1, 0], [1, 0, -1], [0, 1, 1]],
    "D2_1": [[1, 0, 0], [0, 1, -1], [0, 1, 0]],
    "D2_2": np.diag([1, 1, 0]),
    "D2_3": [[0, 1, 0], [1, 0, -1], [0, 1, 0]],
    "D1_1": [[1, 0, 0], [0, 0, 1], [0, -1, 0]],
    "D1_2": np.diag([1, 0, 0]),
    "D1_3": [[1, 0, 1], [0, 0, 0], [-1, 0, 0]],
    "X_PURE_SKEW": [[0, 0, 0], [0, 0, -1], [0, 1, 0]],
    "X_ZERO": np.zeros((3, 3)),
}


def canonical_matrix(tag: str, parameter: complex | None = None) -> np.ndarray:
    if tag == "ND1":
        a = CATALOG_PARAMETERS["ND1"] if parameter is None else complex(parameter)
        # adding 0j turns the -0.0 produced by negation into +0.0
        return np.array([[1, 0, 0], [0, 1, -a], [0, a, 1]], dtype=complex) + 0j
    if tag == "D2_4":
        z = CATALOG_PARAMETERS["D2_4"] if parameter is None else complex(parameter)
        return np.array([[1, -z, 0], [z, 1, 0], [0, 0, 0]], dtype=complex) + 0j
    if tag not in _FIXED:
        raise UnknownClass(tag)
    return np.array(_FIXED[tag], dtype=complex)


@dataclass(frozen=True)
class ProductClass:
    tag: str
    parameter: complex | None
    canonical_matrix: np.ndarray
    witness: GroupElement
    diagnostics: dict = field(default_factory=dict)

    @property
    def outside_classification(self) -> bool:
        return self.tag in EXTRA_TAGS


def _bil(u, v) -> complex:
    return complex(np.dot(u, v))


def _normalize(S: np.ndarray, thr: float) -> tuple[np.ndarray, int, float]:
    """Congruence-pivoted elimination; returns (g, rank, smallest accepted pivot)."""
    W = np.array(S, dtype=complex)
    g = np.eye(3, dtype=complex)
    rank = 0
    smallest = np.inf
    for k in range(3):
        act = range(k, 3)
        i = max(act, key=lambda t: abs(W[t, t]))
        if abs(W[i, i]) < thr:
            pairs = [(p, q) for p in act for q in act if p < q]
            if not pairs:
                break
            p, q = max(pairs, key=lambda pq: abs(W[pq]))
            if abs(W[p, q]) < thr:
                break
            # isotropic pivot: e_p <- e_p + e_q makes the diagonal entry ~ 2 W_pq
            E = np.eye(3, dtype=complex)
            E[p, q] = 1
            W, g, i = E @ W @ E.T, E @ g, p
        if i != k:
            P = np.eye(3, dtype=complex)[[*_swap(k, i)]]
            W, g = P @ W @ P.T, P @ g
        piv = W[k, k]
        smallest = min(smallest, abs(piv))
        E = np.eye(3, dtype=complex)
        for r in range(k + 1, 3):
            E[r, k] = -W[r, k] / piv
        W, g = E @ W @ E.T, E @ g
        s = 1 / cmath.sqrt(piv)
        D = np.eye(3, dtype=complex)
        D[k, k] = s
        W, g = D @ W @ D.T, D @ g
        rank += 1
    return g, rank, smallest


def _swap(k, i):
    idx = [0, 1, 2]
    idx[k], idx[i] = idx[i], idx[k]
    return idx


def symmetric_normalize(S, tol: Tolerance = DEFAULT_TOL) -> tuple[GroupElement, int]:
    """g with g S g^T = diag(1,..,1,0,..); rank uses eps_rank relative to max|S|."""
    S = as_matrix(S)
    scale = max_abs(S)
    if max_abs(S - S.T) > tol.eps_zero * max(1.0, scale):
        raise NotSymmetricProduct("input is not symmetric")
    if scale == 0:
        return GroupElement.identity(), 0
    g, rank, _ = _normalize(S, tol.eps_rank * scale)
    return GroupElement(g), rank


def _orthonormal_frame(n: np.ndarray) -> np.ndarray:
    """Rows (n, m, n x m) of a complex special-orthogonal matrix; needs <n,n> = 1."""
    k = next(k for k in range(3) if abs(1 - n[k] ** 2) >= 0.5)
    m = np.eye(3, dtype=complex)[k] - n[k] * n
    m = m / cmath.sqrt(_bil(m, m))
    return np.array([n, m, np.cross(n, m)])


def _nd3_frame(a: np.ndarray) -> np.ndarray:
    """Hyperbolic-plane completion of an isotropic a != 0."""
    cands = [
        [1, 0, 0], [0, 1, 0], [0, 0, 1],
        [1, 1j, 0], [0, 1, 1j], [1, 0, 1j],
    ]
    top = max_abs(a)
    for b in cands:
        b = np.array(b, dtype=complex)
        if abs(_bil(a, b)) >= 0.5 * top * np.linalg.norm(b):
            break
    ab = _bil(a, b)
    b = b - _bil(b, b) / (2 * ab) * a
    b = -b / ab  # now <b,b> = 0 and <a,b> = -1
    return np.array([a, b, np.cross(a, b)])


class _Decider:
    """Records each thresholded comparison so near misses can be reported."""

    def __init__(self, eps: float):
        self.eps = eps
        self.closest = np.inf

    def small(self, value: float, scale: float) -> bool:
        if scale == 0:
            return True
        r = value / scale
        if r > self.eps:
            self.closest = min(self.closest, r / self.eps)
        return r <= self.eps


def classify_product(M, tol: Tolerance = DEFAULT_TOL) -> ProductClass:
    M = as_matrix(M)
    scale = max_abs(M)
    diag: dict = {}
    dec = _Decider(tol.eps_rank)
    if scale == 0:
        return _finish(M, "X_ZERO", None, np.eye(3), {"symmetric_rank": 0}, dec, tol)

    parts = decompose(M)
    S, A = np.array(parts.symmetric), np.array(parts.skew)
    skew_zero = dec.small(max_abs(A), scale)
    g1, rank, smallest = _normalize(S, tol.eps_rank * scale)
    diag["symmetric_rank"] = rank
    if rank:
        dec.closest = min(dec.closest, smallest / (tol.eps_rank * scale))
        g1 = g1 / np.linalg.det(g1)
    N = act_on_product(g1, M, tol) if rank else M
    a = np.array(decompose(N).axial)
    if skew_zero:
        a = np.zeros(3, dtype=complex)
    na = float(np.linalg.norm(a))

    if rank == 3:
        sigma = _bil(a, a)
        diag["sigma"] = sigma
        if skew_zero:
            return _finish(M, "ND2", None, g1, diag, dec, tol)
        if dec.small(abs(sigma), na * na):
            return _finish(M, "ND3", None, _nd3_frame(a) @ g1, diag, dec, tol)
        s = cmath.sqrt(sigma)
        if (a[0] / s).real < 0:
            s = -s
        return _finish(M, "ND1", s, _orthonormal_frame(a / s) @ g1, diag, dec, tol)

    if rank == 2:
        pi = a[:2]
        diag["projection"] = [complex(x) for x in pi]
        if skew_zero:
            return _finish(M, "D2_2", None, g1, diag, dec, tol)
        npi = float(np.linalg.norm(pi))
        if dec.small(npi, na):
            return _finish(M, "D2_4", complex(a[2]), g1, diag, dec, tol)
        x, y, z = a
        if dec.small(abs(_bil(pi, pi)), npi * npi):
            g = np.array([[x, y, z], [y, x, 0], [0, 0, y / x]])
            return _finish(M, "D2_3", None, g @ g1, diag, dec, tol)
        g = np.array([[x, y, z], [-y, x, 0], [0, 0, 1]])
        return _finish(M, "D2_1", None, g @ g1, diag, dec, tol)

    if rank == 1:
        diag["projection"] = [complex(a[0])]
        if skew_zero:
            return _finish(M, "D1_2", None, g1, diag, dec, tol)
        x, y, z = a
        if dec.small(abs(x), na):
            n = abs(y) ** 2 + abs(z) ** 2
            g = np.array([[1, 0, 0], [0, y, z], [0, -np.conj(z) / n, np.conj(y) / n]])
            return _finish(M, "D1_3", None, g @ g1, diag, dec, tol)
        g = np.array([[-x, -y, -z], [0, -x, 0], [0, 0, 1]])
        return _finish(M, "D1_1", None, g @ g1, diag, dec, tol)

    if skew_zero:
        return _finish(M, "X_ZERO", None, np.eye(3), diag, dec, tol)
    i = int(np.argmax(np.abs(a)))
    j, k = (i + 1) % 3, (i + 2) % 3
    g = np.zeros((3, 3), dtype=complex)
    g[0] = a
    g[1, j] = 1
    g[2, k] = 1
    return _finish(M, "X_PURE_SKEW", None, g, diag, dec, tol)


def _finish(M, tag, param, g, diag, dec: _Decider, tol: Tolerance) -> ProductClass:
    C = canonical_matrix(tag, param)
    scale = max(1.0, max_abs(M))
    if max_abs(M - C) <= tol.eps_zero * scale:
        g = np.eye(3)
    w = GroupElement.of(g, tol)
    got = act_on_product(w, M, tol)
    diag = dict(diag)
    diag["witness_residual"] = max_abs(got - C) / max(1.0, max_abs(C))
    warnings = []
    if dec.closest <= 10.0:
        warnings.append("near-degenerate: a rank or zero decision was within 10x of its threshold")
    if tag in EXTRA_TAGS:
        diag["outside_classification"] = True
    diag["warnings"] = warnings
    return ProductClass(tag, param, C, w, diag)


def parameters_match(tag: str, p1, p2, eps: float) -> bool:
    if tag not in PARAMETRIC_TAGS:
        return True
    p1, p2 = complex(p1), complex(p2)
    return min(abs(p1 - p2), abs(p1 + p2)) <= eps * (1 + max(abs(p1), abs(p2)))


def products_equivalent(M1, M2, tol: Tolerance = DEFAULT_TOL) -> bool:
    c1, c2 = classify_product(M1, tol), classify_product(M2, tol)
    if c1.tag != c2.tag:
        return False
    return parameters_match(c1.tag, c1.parameter, c2.parameter, tol.eps_zero)

