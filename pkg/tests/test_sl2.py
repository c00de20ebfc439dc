import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import close, scalars
from homlie3.core import act_on_product
from homlie3.endo import isotropy_contains
from homlie3.hl import hl_contains
from homlie3.sl2 import (
    HEF,
    canonicalize_sl2,
    exp_E,
    exp_F,
    exp_mixed,
    quartic,
    reduce_stage_one,
    shl_coords,
    shl_matrix,
    torus,
)

coords = st.lists(scalars, min_size=5, max_size=5).map(lambda v: np.array(v))


def test_generators_are_automorphisms():
    for g in (exp_E(1), exp_E(0.3 - 2j), exp_F(1.5j), exp_mixed(0.7, 2 - 1j), torus(3j)):
        assert close(act_on_product(g, HEF), HEF)
    assert close(exp_E(1), [[1, 0, 1], [-2, 1, -1], [0, 0, 1]])


@given(coords)
def test_shl_matrix_lies_in_hl(c):
    T = shl_matrix(c)
    assert hl_contains(HEF, T) and abs(np.trace(T)) < 1e-12
    assert close(shl_coords(T), c)


@given(coords, scalars)
def test_exp_f_translates_the_quartic(c, a):
    g = exp_F(a)
    c2 = shl_coords(g @ shl_matrix(c) @ np.linalg.inv(g))
    x = 0.37 - 0.21j
    assert close(np.polyval(quartic(c2), x), np.polyval(quartic(c), x + a), rel=1e-8)


def test_j_moves():
    g = exp_mixed(1, 1)
    out = shl_coords(g @ shl_matrix([0, 0, 0, 0, 1]) @ np.linalg.inv(g))
    assert close(out, [0, 0, 0, 1, 0])
    c = 1.3 - 0.4j
    g = exp_mixed(1, c)
    out = shl_coords(g @ shl_matrix([0, 2, 0, 0, 0]) @ np.linalg.inv(g))
    assert close(out, [0, 0, 2 * c * c, 16 * c ** 3, 0])


def test_stage_one_kills_t11_and_t32(rng):
    for _ in range(300):
        c = rng.normal(size=5) + 1j * rng.normal(size=5)
        st1 = reduce_stage_one(shl_matrix(c), 1e-8)
        assert abs(st1.coords[0]) <= 1e-8 and abs(st1.coords[4]) <= 1e-8
        assert isotropy_contains("ND2", st1.matrix)


SPECIAL = {
    (0, 0, 0, 1, 0): "ND2/rank1",
    (0, 0, 0, 0, 1): "ND2/rank1",
    (0, 0, 1, 0, 0): "ND2/rank2/caseA",
    (0, 1, 0, 0, 0): "ND2/rank2/caseA",
    (0, 1, 2, 0, 0): "ND2/rank2/caseB",
    (0, 1, 0, 3, 0): "ND2/rank3/caseA",
    (0, 1, 2, 3, 0): "ND2/rank3/caseB",
    (1, 0, 0, 0, 0): "ND2/rank3/semisimple",
}


@pytest.mark.parametrize("c,branch", list(SPECIAL.items()))
def test_special_orbits(c, branch, rng):
    base = None
    for k in range(10):
        T = shl_matrix(c)
        if k:
            g = exp_E(rng.normal() * 0.5) @ exp_F(rng.normal() * 0.5) @ torus(np.exp(rng.normal() * 0.3))
            T = g @ T @ np.linalg.inv(g)
        b, out, g, _ = canonicalize_sl2(T, 1e-8)
        assert b == branch
        assert close(g @ T @ np.linalg.inv(g), shl_matrix(out), rel=1e-6)
        base = out if base is None else base
        assert close(out, base, rel=1e-6)


def test_semisimple_orbit_is_not_the_rank3_nilpotent_one():
    # both have characteristic polynomial x^3 - 3x - 2
    A = shl_matrix([1, 0, 0, 0, 0])
    B = shl_matrix([0, 1, 0.75, 1, 0])
    assert close(np.poly(A), np.poly(B), rel=1e-12)
    assert np.linalg.matrix_rank(A + np.eye(3), 1e-9) == 1
    assert np.linalg.matrix_rank(B + np.eye(3), 1e-9) == 2
    assert canonicalize_sl2(A, 1e-8)[0] != canonicalize_sl2(B, 1e-8)[0]
