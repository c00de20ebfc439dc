"""Small-matrix primitives for skew-symmetric products on C^3.

A product mu is stored as a 3x3 complex matrix M whose columns are
mu(e2, e3), mu(e3, e1), mu(e1, e2).  With that convention
mu(x, y) = M @ (x cross y), and the change of basis by g acts as

    g . M = (det g)^-1  g M g^T.

Everything here is a pure function of numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "HomLieError",
    "SingularGroupElement",
    "NotSymmetricProduct",
    "NotInHL",
    "UnknownClass",
    "TagMismatch",
    "NonFiniteInput",
    "GroupElement",
    "Decomposition",
    "as_matrix",
    "as_vector",
    "max_abs",
    "skew_from_axial",
    "axial_from_skew",
    "evaluate_product",
    "decompose",
    "act_on_product",
    "act_on_axial",
    "conjugate",
    "jacobiator",
    "hom_jacobiator",
    "hl_constraint_matrix",
    "vec",
    "unvec",
    "default_T",
    "b_mu",
    "is_lie_bracket",
    "hom_compatible_via_b",
]


@dataclass(frozen=True)
class Tolerance:
    """Zero and rank thresholds used by every tolerance-gated decision."""

    eps_zero: float = 1e-9
    eps_rank: float = 1e-8

    def __post_init__(self):
        for name in ("eps_zero", "eps_rank"):
            v = getattr(self, name)
            if not (0.0 < v <= 1e-4):
                raise ValueError(f"{name} must lie in (0, 1e-4], got {v!r}")


DEFAULT_TOL = Tolerance()


class HomLieError(Exception):
    pass


class SingularGroupElement(HomLieError):
    pass


class NotSymmetricProduct(HomLieError):
    pass


class NotInHL(HomLieError):
    pass


class UnknownClass(HomLieError):
    pass


class TagMismatch(HomLieError):
    pass


class NonFiniteInput(HomLieError, ValueError):
    pass


def as_matrix(m) -> np.ndarray:
    a = np.array(m, dtype=complex)
    if a.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteInput("matrix has non-finite entries")
    return a


def as_vector(v) -> np.ndarray:
    a = np.array(v, dtype=complex)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteInput("vector has non-finite entries")
    return a


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GroupElement:
    """An invertible 3x3 matrix together with its determinant."""

    matrix: np.ndarray
    det: complex = field(default=None)

    def __post_init__(self):
        m = _frozen(as_matrix(self.matrix))
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "det", complex(np.linalg.det(m)))

    @classmethod
    def of(cls, g, tol: Tolerance = DEFAULT_TOL) -> "GroupElement":
        ge = g if isinstance(g, GroupElement) else cls(g)
        if abs(ge.det) <= tol.eps_zero:
            raise SingularGroupElement(f"|det g| = {abs(ge.det):.3e} is below eps_zero")
        return ge

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(np.eye(3))

    def inverse(self) -> "GroupElement":
        return GroupElement(np.linalg.inv(self.matrix))

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.matrix @ other.matrix)


def _gmat(g, tol: Tolerance) -> tuple[np.ndarray, complex]:
    ge = GroupElement.of(g, tol)
    return ge.matrix, ge.det


@dataclass(frozen=True)
class Decomposition:
    symmetric: np.ndarray
    skew: np.ndarray
    axial: np.ndarray


def skew_from_axial(a) -> np.ndarray:
    a1, a2, a3 = as_vector(a)
    return np.array([[0, -a3, a2], [a3, 0, -a1], [-a2, a1, 0]], dtype=complex)


def axial_from_skew(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    return np.array([A[2, 1], A[0, 2], A[1, 0]], dtype=complex)


def evaluate_product(M, x, y) -> np.ndarray:
    """mu(x, y) = M (x cross y)."""
    return as_matrix(M) @ np.cross(as_vector(x), as_vector(y))


def decompose(M) -> Decomposition:
    M = as_matrix(M)
    S = (M + M.T) / 2
    A = (M - M.T) / 2
    return Decomposition(_frozen(S), _frozen(A), _frozen(axial_from_skew(A)))


def act_on_product(g, M, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    g, d = _gmat(g, tol)
    return g @ as_matrix(M) @ g.T / d


def act_on_axial(g, a, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    g, d = _gmat(g, tol)
    a = as_vector(a)
    r1, r2, r3 = g
    return np.array(
        [
            np.dot(np.cross(a, r2), r3),
            np.dot(np.cross(a, r3), r1),
            np.dot(np.cross(a, r1), r2),
        ]
    ) / d


def conjugate(g, T, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """g T g^-1, the induced action on endomorphisms."""
    g, _ = _gmat(g, tol)
    return g @ as_matrix(T) @ np.linalg.inv(g)


def jacobiator(M, x, y, z) -> np.ndarray:
    mu = lambda u, v: evaluate_product(M, u, v)
    return mu(x, mu(y, z)) + mu(y, mu(z, x)) + mu(z, mu(x, y))


def hom_jacobiator(M, T, x, y, z) -> np.ndarray:
    T = as_matrix(T)
    mu = lambda u, v: evaluate_product(M, u, v)
    return mu(T @ x, mu(y, z)) + mu(T @ y, mu(z, x)) + mu(T @ z, mu(x, y))


def vec(T) -> np.ndarray:
    """Column-major flattening; the only vec convention used in the package."""
    return as_matrix(T).reshape(9, order="F")


def unvec(v) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape((3, 3), order="F")


def hl_constraint_matrix(M) -> np.ndarray:
    """The 3x9 matrix L with L @ vec(T) = hom_jacobiator(M, T, e1, e2, e3).

    On the basis triple the cyclic sum collapses to sum_j mu(T e_j, M e_j),
    so the column belonging to the elementary matrix E_ij is M (e_i x M e_j).
    """
    M = as_matrix(M)
    eye = np.eye(3, dtype=complex)
    L = np.empty((3, 9), dtype=complex)
    for j in range(3):
        for i in range(3):
            L[:, 3 * j + i] = M @ np.cross(eye[i], M[:, j])
    return L


def default_T(M) -> np.ndarray:
    return as_matrix(M).copy()


_UV = ((1, 2), (2, 0), (0, 1))


def b_mu(M) -> np.ndarray:
    M = as_matrix(M)
    B = np.empty((3, 3), dtype=complex)
    for i, (ui, vi) in enumerate(_UV):
        for j, (uj, vj) in enumerate(_UV):
            B[i, j] = M[ui, uj] * M[vi, vj] - M[ui, vj] * M[vi, uj]
    return B


def _scale(M) -> float:
    return max(1.0, max_abs(M))


def is_lie_bracket(M, tol: Tolerance = DEFAULT_TOL) -> bool:
    B = b_mu(M)
    return max_abs(B - B.T) <= tol.eps_zero * _scale(M) ** 2


def hom_compatible_via_b(M, T, tol: Tolerance = DEFAULT_TOL) -> bool:
    """For symmetric M: T is HL-compatible iff B_mu T is symmetric."""
    M = as_matrix(M)
    if max_abs(M - M.T) > tol.eps_zero * _scale(M):
        raise NotSymmetricProduct("criterion only applies to symmetric product matrices")
    BT = b_mu(M) @ as_matrix(T)
    return max_abs(BT - BT.T) <= tol.eps_zero * _scale(M) ** 2 * _scale(T)
