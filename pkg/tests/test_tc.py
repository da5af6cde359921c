from fractions import Fraction
from itertools import product
from math import prod

import numpy as np
import pytest

from perfectoid_tc.ainf import PerfectoidModel
from perfectoid_tc.base_rings import PerfRing, PrecisionProfile
from perfectoid_tc.errors import ModelClosureError, ProfileError, ResidueExtensionNeeded
from perfectoid_tc.tc import (
    GaloisRing,
    equalizer_matrix,
    kernel_cokernel_invariants,
    kernel_solutions,
    mu_divisibility_check,
    negative_degree_rank_deficiency,
    presentation_for,
    solve_frobenius_twisted,
    solve_negative_degree,
    solve_with_extension,
    tc_groups,
    truncated_kernel_dimension,
    xi_bar,
)


def perfect(p, f, k):
    return PerfectoidModel("perfect", PrecisionProfile(p, f, k, Fraction(1), 2, k))


def test_galois_ring_frobenius():
    gr = GaloisRing(3, 2, 3)
    rng = np.random.default_rng(0)
    for _ in range(10):
        a = np.array([int(x) for x in rng.integers(0, 27, 2)], dtype=object)
        b = np.array([int(x) for x in rng.integers(0, 27, 2)], dtype=object)
        assert list(gr.phi(gr.mul(a, b))) == list(gr.mul(gr.phi(a), gr.phi(b)))
        assert [int(x) % 3 for x in gr.phi(a)] == [int(x) % 3 for x in gr.pow(a, 3)]
        assert list(gr.phi(gr.phi(a))) == [int(x) % 27 for x in a]


@pytest.mark.parametrize("p,f,k", [(2, 2, 2), (3, 1, 3), (2, 1, 4), (3, 2, 2)])
@pytest.mark.parametrize("m", [-1, 0, 1, 2])
def test_smith_form_against_brute_force_kernel(p, f, k, m):
    """|ker| of phi - can on (Z/p^k)^f by enumeration equals the SNF group order."""
    pres = presentation_for(perfect(p, f, k))
    fn = pres.phi_minus_can(m)
    zero = pres.A.zero()
    count = 0
    for vec in product(range(p**k), repeat=f):
        if pres.A.eq(fn(np.array(vec, dtype=object)), zero):
            count += 1
    inv = kernel_cokernel_invariants(equalizer_matrix(m, pres), p, k)
    assert count == prod(inv)


def test_presentation_relations():
    pres = presentation_for(perfect(3, 2, 3))
    A = pres.A
    one = A.one()
    u, v = {1: one}, {-1: one}
    assert pres.equal(pres.multiply(u, v), {0: pres.xi})
    assert pres.equal(pres.tp_multiply(pres.can(u), pres.can(v)), {0: pres.xi})
    assert pres.equal(pres.tp_multiply(pres.phi(u), pres.phi(v)), {0: pres.phi_xi})
    a = np.array([4, 7], dtype=object)
    # phi is semilinear over the Frobenius of the coefficients
    x = {2: a, -1: one}
    ax = pres.multiply({0: a}, x)
    assert pres.equal(pres.phi(ax), pres.tp_multiply({0: A.phi(a)}, pres.phi(x)))


def test_degree_two_map_on_integers():
    # on Z/p^k with xi = p: phi(a) - p a = (1 - p) a
    pres = presentation_for(perfect(5, 1, 3))
    fn = pres.phi_minus_can(1)
    for n in range(0, 125, 7):
        got = fn(pres.A.from_int(n))
        assert pres.A.eq(got, pres.A.from_int((1 - 5) * n))


@pytest.mark.parametrize("p", [2, 3, 5])
def test_perfect_field_groups(p):
    res = tc_groups(perfect(p, 1, 4), range(-4, 9))
    for g in res.groups:
        assert g.invariant_factors == ([p**4] if g.degree in (0, -1) else [])
    assert len(res.flags) == 1 and "degree-0" in res.flags[0]
    with pytest.raises(ProfileError):
        tc_groups(perfect(p, 1, 2), [0], coefficients="Z/p")


def test_xi_bar_is_a_monomial():
    for p in (2, 3):
        xb = xi_bar(p, 1, 3, 3)
        assert xb == xb.ring.monomial(Fraction(p - 1, p))


@pytest.mark.parametrize("p", [2, 3])
def test_kernel_in_positive_even_degrees(p):
    ring = PerfRing(p, 1, 3, Fraction(6))
    for m in range(4):
        sols = kernel_solutions(m, ring)
        assert len(sols) == p
        assert sum(1 for a in sols if a.is_zero()) == 1
        for a in sols:
            if not a.is_zero():
                assert a.t_valuation() == Fraction(m, p)
                assert mu_divisibility_check(m, a)
        assert truncated_kernel_dimension(m, p, 3, 2) == 1
    # a random element is not a kernel generator
    assert not mu_divisibility_check(1, ring.random(np.random.default_rng(1), min_valuation=Fraction(1, p)))


def test_kernel_is_closed_under_products():
    p = 3
    ring = PerfRing(p, 1, 3, Fraction(6))
    xb = xi_bar(p, 1, 3, ring.cutoff)
    for a in kernel_solutions(1, ring):
        for b in kernel_solutions(2, ring):
            c = a * b
            assert c**p - xb**3 * c == ring.zero()


@pytest.mark.parametrize("p", [2, 3])
def test_odd_degree_solutions(p):
    ring = PerfRing(p, 1, 3, Fraction(6))
    xb = xi_bar(p, 1, 3, ring.cutoff)
    rng = np.random.default_rng(2)
    for m in (1, 2):
        for _ in range(10):
            c = ring.random(rng, min_valuation=m)
            a = solve_with_extension(m, c)
            assert a**p - (xb**m).embed(a.ring) * a == c.embed(a.ring)


def test_residue_extension_and_closure_errors():
    ring = PerfRing(2, 1, 3, Fraction(6))
    c = ring.monomial(1)
    # x^2 + x = 1 needs F_4
    with pytest.raises(ResidueExtensionNeeded):
        solve_frobenius_twisted(1, c)
    assert solve_with_extension(1, c).ring.f == 2
    with pytest.raises(ModelClosureError):
        solve_frobenius_twisted(2, c)
    ring3 = PerfRing(3, 1, 2, Fraction(4))
    assert solve_with_extension(1, ring3.monomial(1)).ring.f == 3


def test_negative_degrees():
    for p in (2, 3):
        ring = PerfRing(p, 1, 3, Fraction(4))
        rng = np.random.default_rng(3)
        for m in (1, 2):
            assert negative_degree_rank_deficiency(m, ring) == 0
            c = ring.random(rng)
            a = solve_negative_degree(m, c)
            w = xi_bar(p, 1, 3, ring.cutoff).frobenius() ** m
            assert w * a**p - a == c


def test_oc_groups():
    model = PerfectoidModel("oc", PrecisionProfile(2, 1, 3, Fraction(6), 3, 1))
    res = tc_groups(model, range(-3, 7), samples=5, seed=4)
    for g in res.groups:
        assert g.invariant_factors == ([2] if g.degree >= 0 and g.degree % 2 == 0 else [])
    assert res.group(1).samples == 5
    assert res.coefficients == "Z/2"
