from fractions import Fraction

import numpy as np
import pytest
import sympy
from sympy import GF, Poly, symbols

from perfectoid_tc.base_rings import (
    CycRing,
    FiniteField,
    IntegersMod,
    PerfRing,
    PrecisionProfile,
    conway_like_modulus,
    convolve_mod,
    is_prime,
    p_adic_valuation,
)
from perfectoid_tc.errors import DenominatorOverflow, NotDivisible, ProfileError

X = symbols("x")


def test_is_prime_matches_sympy():
    assert [n for n in range(200) if is_prime(n)] == list(sympy.primerange(0, 200))


def test_p_adic_valuation():
    assert p_adic_valuation(48, 2) == 4
    assert p_adic_valuation(7, 3) == 0
    assert p_adic_valuation(0, 5) == float("inf")


@pytest.mark.parametrize("modulus", [7, 2**20, 3**40])
def test_convolve_mod_against_object_convolution(modulus):
    rng = np.random.default_rng(0)
    a = rng.integers(0, min(modulus, 2**62), 40).astype(object) % modulus
    b = rng.integers(0, min(modulus, 2**62), 33).astype(object) % modulus
    want = np.convolve(a, b) % modulus
    got = convolve_mod(a.astype(np.int64) if modulus < 2**62 else a, b.astype(np.int64) if modulus < 2**62 else b, modulus)
    assert [int(x) for x in got] == [int(x) for x in want]


def test_profile_validation():
    with pytest.raises(ProfileError):
        PrecisionProfile(4)
    with pytest.raises(ProfileError):
        PrecisionProfile(2, N=2, k=3)
    with pytest.raises(ProfileError):
        PrecisionProfile(3, N=1, h=Fraction(1, 9), k=1)
    prof = PrecisionProfile(3, f=2, N=2, h=Fraction(5, 9), L=2, k=2)
    assert prof.q == 9
    assert prof.to_json()["h"] == "5/9"


@pytest.mark.parametrize("p,f", [(2, 1), (2, 3), (3, 2), (5, 2), (2, 4)])
def test_modulus_irreducible(p, f):
    assert Poly(list(reversed(conway_like_modulus(p, f))), X, domain=GF(p)).is_irreducible


@pytest.mark.parametrize("p,f", [(2, 2), (3, 2), (2, 3)])
def test_finite_field_matches_sympy_polynomial_arithmetic(p, f):
    F = FiniteField(p, f)
    mod = Poly(list(reversed(conway_like_modulus(p, f))), X, domain=GF(p))

    def poly(code):
        return Poly(list(reversed([int(c) for c in F.vec(code)])), X, domain=GF(p))

    for a in F.elements():
        for b in F.elements():
            want = (poly(a) * poly(b)).rem(mod)
            assert poly(F.mul(a, b)) == want
            assert poly(F.add(a, b)) == (poly(a) + poly(b)).rem(mod)
        if a:
            assert F.mul(a, F.inv(a)) == 1


def test_frobenius_generates_galois_group():
    F = FiniteField(3, 2)
    for a in F.elements():
        assert F.frobenius(F.frobenius(a)) == a
        assert F.frobenius(a) == F.pow(a, 3)


def test_field_embedding_is_ring_map():
    small, big = FiniteField(2, 2), FiniteField(2, 4)
    ring_small = PerfRing(2, 2, 1, 1)
    ring_big = PerfRing(2, 4, 1, 1)
    for a in small.elements():
        for b in small.elements():
            ea, eb = ring_small.constant(a).embed(ring_big), ring_small.constant(b).embed(ring_big)
            assert (ring_small.constant(small.mul(a, b))).embed(ring_big) == ea * eb
    assert big.q == 16


def _naive_mul(x, y, ring):
    """Term-by-term product, an oracle independent of the FFT path."""
    F, out = ring.field, {}
    for n1, c1 in x.terms():
        for n2, c2 in y.terms():
            n = n1 + n2
            if n < ring.slots:
                out[n] = F.add(out.get(n, 0), F.mul(c1, c2))
    return ring.from_terms({Fraction(n, ring.den): c for n, c in out.items() if c})


@pytest.mark.parametrize("p,f,N,h", [(2, 1, 3, 2), (3, 1, 2, 3), (3, 2, 2, 2), (5, 1, 1, 4)])
def test_perf_mul_against_naive_product(p, f, N, h):
    ring = PerfRing(p, f, N, h)
    rng = np.random.default_rng(1)
    for _ in range(20):
        x, y = ring.random(rng, density=0.4), ring.random(rng, density=0.4)
        assert x * y == _naive_mul(x, y, ring)


@pytest.mark.parametrize("p,f", [(2, 1), (3, 2)])
def test_perf_ring_axioms(p, f):
    ring = PerfRing(p, f, 2, 3)
    rng = np.random.default_rng(2)
    for _ in range(100):
        a, b, c = (ring.random(rng) for _ in range(3))
        assert (a * b) * c == a * (b * c)
        assert a * b == b * a
        assert a * (b + c) == a * b + a * c


def test_frobenius_is_ring_map_and_root_inverts_it():
    ring = PerfRing(3, 2, 3, 2)
    rng = np.random.default_rng(3)
    for _ in range(30):
        a, b = ring.random(rng), ring.random(rng)
        assert (a * b).frobenius() == a.frobenius() * b.frobenius()
        assert (a + b).frobenius() == a.frobenius() + b.frobenius()
        assert a.frobenius() == a**3
        assert a.frobenius().p_th_root() == a.truncate(ring.cutoff / 3)


def test_p_th_root_denominator_overflow():
    ring = PerfRing(2, 1, 2, 1)
    with pytest.raises(DenominatorOverflow):
        ring.monomial(Fraction(1, 4)).p_th_root()
    assert ring.monomial(Fraction(1, 2)).p_th_root() == ring.monomial(Fraction(1, 4))


def test_valuation_shift_and_inverse():
    ring = PerfRing(2, 1, 2, 3)
    x = ring.from_terms({Fraction(3, 4): 1, 2: 1})
    assert x.t_valuation() == Fraction(3, 4)
    assert x.shift(Fraction(-3, 4)).shift(Fraction(3, 4)) == x
    with pytest.raises(NotDivisible):
        x.shift(-1)
    u = ring.one() + ring.monomial(Fraction(1, 4))
    assert u * u.inverse() == ring.one()
    assert ring.zero().t_valuation() == float("inf")


def test_integers_mod():
    R = IntegersMod(27)
    assert R.mul(5, 11) == 55 % 27
    assert R.pow(2, 10) == 1024 % 27
    assert list(R.elements())[-1] == 26


@pytest.mark.parametrize("p,level", [(2, 3), (3, 2), (5, 1)])
def test_cyclotomic_relations(p, level):
    ring = CycRing(p, level, 4)
    z = ring.zeta()
    assert z ** (p**level) == ring.one()
    assert z ** (p ** (level - 1)) != ring.one()
    # sum of the p-th roots of unity vanishes
    zp = ring.zeta(p ** (level - 1))
    assert sum((zp**j for j in range(1, p)), ring.one()) == ring.zero()


def test_cyclotomic_reduction_against_sympy():
    p, level, k = 3, 2, 3
    ring = CycRing(p, level, k)
    phi = Poly(sympy.cyclotomic_poly(p**level, X), X)
    rng = np.random.default_rng(4)
    for _ in range(10):
        coeffs = [int(c) for c in rng.integers(-50, 50, 25)]
        got = ring.reduce(coeffs)
        want = Poly(list(reversed(coeffs)), X).rem(phi).all_coeffs()[::-1]
        want = [int(c) % p**k for c in want] + [0] * (ring.degree - len(want))
        assert [int(c) for c in got] == want


def test_cyclotomic_valuation_and_division():
    ring = CycRing(3, 2, 4)
    x = ring.from_int(9) * ring.zeta()
    assert x.valuation() == 2
    assert x.div_p_power(2).eq_mod(ring.zeta(), 2)
    assert ring.zeta().embed(CycRing(3, 3, 4)) == CycRing(3, 3, 4).zeta(3)
