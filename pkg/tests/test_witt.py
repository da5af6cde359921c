from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perfectoid_tc.base_rings import FiniteField, IntegersMod, PerfRing
from perfectoid_tc.witt import (
    POLY_CACHE,
    GhostVec,
    frobenius_F,
    ghost,
    has_ghost_path,
    random_witt,
    teichmuller,
    verschiebung_V,
    witt_add,
    witt_from_int,
    witt_map,
    witt_mul,
    witt_scalar,
    witt_sub,
    witt_zero,
)
from perfectoid_tc.errors import ProfileError


def test_second_sum_polynomial_closed_form():
    # S_1 = a1 + b1 - sum_{0<i<p} binom(p, i)/p a0^i b0^(p-i)
    from perfectoid_tc.witt import _A, _B

    for p in (2, 3, 5):
        s1 = POLY_CACHE.sympy_polys(p, "add", 2)[1]
        want = _A[1] + _B[1] - sum(comb(p, i) // p * _A[0] ** i * _B[0] ** (p - i) for i in range(1, p))
        assert s1 == want


def test_first_product_polynomials():
    from perfectoid_tc.witt import _A, _B

    p0, p1 = POLY_CACHE.sympy_polys(2, "mul", 2)
    assert p0 == _A[0] * _B[0]
    assert p1 == _A[0] ** 2 * _B[1] + _A[1] * _B[0] ** 2 + 2 * _A[1] * _B[1]


@pytest.mark.parametrize("p", [2, 3])
def test_integer_witt_vectors_of_fp_are_z_mod_p_power(p):
    """W_L(F_p) = Z/p^L: the image of n + m is the Witt sum of the images."""
    L = 3
    Fp = IntegersMod(p)
    for n in range(0, p**L, 3):
        for m in range(0, p**L, 5):
            s = witt_add(witt_from_int(Fp, p, n, L), witt_from_int(Fp, p, m, L), "poly")
            prod = witt_mul(witt_from_int(Fp, p, n, L), witt_from_int(Fp, p, m, L), "poly")
            assert s == witt_from_int(Fp, p, (n + m) % p**L, L)
            assert prod == witt_from_int(Fp, p, n * m % p**L, L)


@settings(max_examples=60, deadline=None)
@given(p=st.sampled_from([2, 3, 5]), n=st.integers(-10**6, 10**6), m=st.integers(-10**6, 10**6))
def test_integer_images_respect_ring_operations(p, n, m):
    R = IntegersMod(p**5)
    w = lambda x: witt_from_int(R, p, x, 3)
    assert witt_add(w(n), w(m), "ghost") == w(n + m)
    assert witt_mul(w(n), w(m), "ghost") == w(n * m)
    assert witt_sub(w(n), w(m), "poly") == w(n - m)


@pytest.mark.parametrize("p,L", [(2, 4), (3, 3), (5, 2)])
def test_ghost_map_is_additive_and_multiplicative(p, L):
    R = IntegersMod(p**8)
    rng = np.random.default_rng(0)
    for _ in range(30):
        a, b = random_witt(R, p, L, rng), random_witt(R, p, L, rng)
        ga, gb = ghost(a).components, ghost(b).components
        assert ghost(a + b).components == tuple(R.add(x, y) for x, y in zip(ga, gb))
        assert ghost(a * b).components == tuple(R.mul(x, y) for x, y in zip(ga, gb))
    assert isinstance(ghost(a), GhostVec)


@pytest.mark.parametrize("p", [2, 3])
def test_poly_and_ghost_paths_agree(p):
    R = IntegersMod(p**6)
    rng = np.random.default_rng(p)
    for _ in range(40):
        a, b = random_witt(R, p, 4, rng), random_witt(R, p, 4, rng)
        assert witt_add(a, b, "poly") == witt_add(a, b, "ghost")
        assert witt_sub(a, b, "poly") == witt_sub(a, b, "ghost")
        assert witt_mul(a, b, "poly") == witt_mul(a, b, "ghost")
        assert frobenius_F(a, "poly") == frobenius_F(a, "ghost")


def test_ring_axioms_over_finite_field():
    F = FiniteField(3, 2)
    rng = np.random.default_rng(5)
    zero = witt_zero(F, 3, 3)
    for _ in range(20):
        a, b, c = (random_witt(F, 3, 3, rng) for _ in range(3))
        assert (a + b) + c == a + (b + c)
        assert a * (b + c) == a * b + a * c
        assert a - a == zero
        assert -a + a == zero


def test_characteristic_p_frobenius_matches_polynomials():
    ring = PerfRing(2, 1, 2, 2)
    rng = np.random.default_rng(6)
    assert has_ghost_path(ring)
    for _ in range(10):
        a = random_witt(ring, 2, 3, rng)
        assert frobenius_F(a) == frobenius_F(a, "poly")


@pytest.mark.parametrize("p", [2, 3])
def test_fv_teichmuller_and_vv_identities(p):
    R = IntegersMod(p**6)
    rng = np.random.default_rng(7)
    for _ in range(25):
        a, b = random_witt(R, p, 3, rng), random_witt(R, p, 3, rng)
        assert frobenius_F(verschiebung_V(a)) == witt_scalar(p, a)
        x, y = R.random(rng), R.random(rng)
        assert frobenius_F(teichmuller(R, p, x, 4)) == teichmuller(R, p, R.pow(x, p), 3)
        assert teichmuller(R, p, x, 3) * teichmuller(R, p, y, 3) == teichmuller(R, p, R.mul(x, y), 3)
        assert verschiebung_V(a) * verschiebung_V(b) == verschiebung_V(witt_scalar(p, a * b))


def test_functoriality_along_reduction():
    big, small = IntegersMod(3**5), IntegersMod(3**2)
    rng = np.random.default_rng(8)
    for _ in range(10):
        a, b = random_witt(big, 3, 3, rng), random_witt(big, 3, 3, rng)
        red = lambda v: witt_map(lambda x: x % 9, v, small)
        assert red(a * b) == red(a) * red(b)
        assert red(a + b) == red(a) + red(b)


def test_scalar_and_truncation():
    R = IntegersMod(2**6)
    one = witt_from_int(R, 2, 1, 4)
    assert witt_scalar(5, one) == witt_from_int(R, 2, 5, 4)
    assert witt_scalar(-3, one) == witt_from_int(R, 2, -3, 4)
    assert witt_from_int(R, 2, 6, 4).truncate(2) == witt_from_int(R, 2, 6, 2)


def test_length_limit_and_mismatch():
    R = IntegersMod(8)
    with pytest.raises(ProfileError):
        POLY_CACHE.get(2, "mul", 7)
    with pytest.raises(ProfileError):
        witt_zero(R, 2, 2) + witt_zero(R, 2, 3)
