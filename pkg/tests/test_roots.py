import numpy as np
from hypothesis import given, strategies as st

from conftest import scalars
from homlie3.roots import cluster_roots, pick_root, poly_roots


def _match(got, want, tol):
    got = list(got)
    for w in want:
        k = min(range(len(got)), key=lambda i: abs(got[i] - w))
        assert abs(got[k] - w) <= tol
        got.pop(k)


@given(st.lists(scalars, min_size=1, max_size=4))
def test_roots_reconstruct_polynomial(rs):
    coeffs = np.poly(rs)
    got = poly_roots(coeffs)
    assert len(got) == len(rs)
    # backward error: each root solves the polynomial up to rounding in its terms
    for z in got:
        size = np.sum(np.abs(coeffs)) * max(1.0, abs(z)) ** len(rs)
        assert abs(np.polyval(coeffs, z)) <= 1e-10 * size


def test_quartic_against_numpy(rng):
    for _ in range(300):
        c = rng.normal(size=5) + 1j * rng.normal(size=5)
        got = poly_roots(c)
        assert len(got) == 4
        assert max(abs(np.polyval(c, z)) for z in got) <= 1e-9 * np.max(np.abs(c)) * 10
        _match(got, np.roots(c), 1e-6)


def test_biquadratic_and_degenerate_inputs():
    _match(poly_roots([1, 0, -5, 0, 4]), [1, -1, 2, -2], 1e-12)
    assert poly_roots([0, 0, 0]) == []
    assert poly_roots([0, 0, 2, -4]) == [2]
    _match(poly_roots([1, 0, 0, 0, 0]), [0, 0, 0, 0], 1e-12)


def test_pick_root_is_deterministic():
    assert pick_root([2, -1, 1, 3j]) == -1
    assert pick_root([1j, -1j]) == -1j
    assert pick_root([]) is None
    assert pick_root([1, 2], accept=lambda z: abs(z) > 1.5) == 2


def test_cluster_roots():
    groups = dict(cluster_roots([1.0, 1.0 + 1e-9, 2.0]))
    assert sorted(groups.values()) == [1, 2]
