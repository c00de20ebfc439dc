"""Cross-checks against exact sympy computations."""

import numpy as np
import pytest
import sympy as sp

import oracle
from homlie3.core import hl_constraint_matrix
from homlie3.hl import hl_basis

I = sp.I
CANON = {
    "ND1": [[1, 0, 0], [0, 1, -2], [0, 2, 1]],
    "ND1@i": [[1, 0, 0], [0, 1, -I], [0, I, 1]],
    "ND2": sp.eye(3),
    "ND3": [[0, 1, 0], [1, 0, -1], [0, 1, 1]],
    "D2_1": [[1, 0, 0], [0, 1, -1], [0, 1, 0]],
    "D2_2": sp.diag(1, 1, 0),
    "D2_3": [[0, 1, 0], [1, 0, -1], [0, 1, 0]],
    "D2_4": [[1, 1, 0], [-1, 1, 0], [0, 0, 0]],
    "D1_1": [[1, 0, 0], [0, 0, 1], [0, -1, 0]],
    "D1_2": sp.diag(1, 0, 0),
    "D1_3": [[1, 0, 1], [0, 0, 0], [-1, 0, 0]],
}


@pytest.mark.parametrize("name", list(CANON))
def test_dimension_matches_exact_oracle(name):
    M = sp.Matrix(CANON[name])
    numeric = np.array(M.evalf(), dtype=complex)
    assert hl_basis(numeric).dim == oracle.hl_dim(M)


@pytest.mark.parametrize("name", ["ND2", "D2_1", "D1_3", "ND1"])
def test_constraint_matrix_matches_exact_rows(name):
    M = sp.Matrix(CANON[name])
    L = hl_constraint_matrix(np.array(M.evalf(), dtype=complex))
    # row space of the numeric 3x9 map (column-major vec) equals the exact one
    exact = oracle.constraint_rows(M)
    perm = [3 * j + i for i in range(3) for j in range(3)]  # row-major symbols -> column-major vec
    ex = np.array(exact.evalf(), dtype=complex)[:, perm]
    r = np.linalg.matrix_rank
    assert r(np.vstack([L, ex]), 1e-9) == r(L, 1e-9) == r(ex, 1e-9)


T = oracle.TS
t = {f"T{i}{j}": T[i - 1, j - 1] for i in range(1, 4) for j in range(1, 4)}


def _form(subs):
    return T.subs(subs, simultaneous=True)


WORKING_FORMS = {
    # (working product, relations that cut out HL, expected dimension)
    "ND1 a=2": ([[1, 0, 0], [0, 1, -2], [0, 2, 1]],
                {t["T21"]: t["T12"] - 2 * t["T13"], t["T31"]: 2 * t["T12"] + t["T13"],
                 t["T33"]: (t["T32"] - t["T23"] - 2 * t["T22"]) / 2}, 6),
    "ND1 a=i": ([[1, 0, 0], [0, 0, 1], [0, 0, 0]], {t["T33"]: 0, t["T13"]: t["T21"]}, 7),
    "ND2 HEF": ([[1, 0, 0], [0, 0, 2], [0, 2, 0]],
                {t["T21"]: 2 * t["T13"], t["T31"]: 2 * t["T12"], t["T22"]: t["T33"]}, 6),
    "ND3": ([[1, 0, 0], [-1, 0, 2], [0, 2, 0]],
            {t["T21"]: -t["T11"] + 2 * t["T13"], t["T31"]: 2 * t["T12"], t["T33"]: t["T12"] + t["T22"]}, 6),
    "D2_1": (CANON["D2_1"], {t["T21"]: t["T12"] - t["T13"], t["T31"]: t["T12"], t["T32"]: t["T22"] + t["T33"]}, 6),
    "D2_2": (CANON["D2_2"], {t["T31"]: 0, t["T32"]: 0}, 7),
    "D2_3": ([[0, 0, 0], [-2, 0, 1], [0, 1, 0]],
             {t["T12"]: 0, t["T33"]: (2 * t["T11"] - t["T13"] + 2 * t["T22"] + 4 * t["T31"]) / 2}, 7),
    "D2_4 z=-1": ([[0, 0, 0], [0, 0, 1], [0, I, 0]], {t["T12"]: 0, t["T13"]: 0}, 7),
    "D1_1": (CANON["D1_1"], {t["T21"]: t["T13"], t["T31"]: -t["T12"], t["T33"]: -t["T22"]}, 6),
    "D1_2": (CANON["D1_2"], {}, 9),
    "D1_3": (CANON["D1_3"], {t["T21"]: 0, t["T23"]: 0}, 7),
}


@pytest.mark.parametrize("name", list(WORKING_FORMS))
def test_displayed_forms_are_exactly_hl(name):
    M, subs, dim = WORKING_FORMS[name]
    M = sp.Matrix(M)
    assert oracle.hl_dim(M) == dim
    assert oracle.in_hl(M, _form(subs))
    assert 9 - len(subs) == dim


def test_printed_relation_for_d2_3_has_a_sign_slip():
    M = sp.Matrix([[0, 0, 0], [-2, 0, 1], [0, 1, 0]])
    printed = {t["T12"]: 0, t["T33"]: -(2 * t["T11"] - t["T13"] + 2 * t["T22"] + 4 * t["T31"]) / 2}
    assert not oracle.in_hl(M, _form(printed))
