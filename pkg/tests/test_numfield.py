from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from galmax import nt
from galmax import numfield as nf
from galmax.errors import BadReductionError, InvalidInputError

CUBIC = nf.MonogenicField([1, 1, 0, 1])  # x^3 + x + 1, disc -31
EISENSTEIN = nf.MonogenicField([1, 1, 1])  # x^2 + x + 1 = Q(mu_3)


def test_field_validation():
    assert CUBIC.disc_f == -31
    with pytest.raises(InvalidInputError):
        nf.MonogenicField([2, 0, 2])  # not monic
    with pytest.raises(InvalidInputError):
        nf.MonogenicField([-1, 0, 1])  # x^2 - 1 reducible
    with pytest.raises(InvalidInputError):
        nf.MonogenicField([5])  # constant


def test_field_arithmetic():
    a = CUBIC.alpha()
    assert (a * a * a).coeffs == (-1, -1, 0)  # alpha^3 = -alpha - 1
    x = CUBIC.elem([Fraction(1, 2), 3, Fraction(-2, 5)])
    assert (x - x).is_zero()
    assert (x * x.inverse()).as_rational() == 1
    assert x.norm() != 0
    assert CUBIC.elem([7]).norm() == 343  # N of a rational is its cube


def test_norm_of_alpha():
    assert CUBIC.alpha().norm() == -1  # (-1)^3 * f(0)
    assert EISENSTEIN.alpha().norm() == 1


def test_degree_one_primes_examples():
    primes = nf.degree_one_primes(CUBIC, 50)
    assert nf.DegreeOnePrime(3, 1) in primes  # f(1) = 3
    assert all(p != 2 for p, _ in primes)  # f has no root mod 2
    # at most deg f primes over any p
    from collections import Counter

    by_p = Counter(p for p, _ in primes)
    assert max(by_p.values()) <= 3
    # every pair is verified: f(c) = 0 mod p
    for p, c in primes:
        assert (c**3 + c + 1) % p == 0


def test_degree_one_primes_congruence_filter():
    primes = nf.degree_one_primes(CUBIC, 200, congruence_filter=(1, 3))
    assert primes and all(p % 3 == 1 for p, _ in primes)


def test_degree_one_prime_density_chebotarev_band():
    """Soft sanity: total root count over p <= 10^4 tracks pi(10^4) within 10%."""
    primes = nf.degree_one_primes(CUBIC, 10**4)
    n_primes = len(nt.primes_up_to(10**4))
    assert abs(len(primes) - n_primes) / n_primes < 0.10


def test_reduce_elem_examples():
    P = nf.DegreeOnePrime(3, 1)
    a = CUBIC.alpha()
    assert nf.reduce_elem(a, P) == 1
    assert nf.reduce_elem(a * a + 1, P) == 2
    assert nf.reduce_elem(CUBIC.elem([Fraction(2, 5)]), nf.DegreeOnePrime(3, 1)) == (2 * pow(5, -1, 3)) % 3
    with pytest.raises(BadReductionError):
        nf.reduce_elem(CUBIC.elem([Fraction(1, 3)]), P)


@settings(max_examples=60, deadline=None)
@given(
    xs=st.lists(st.integers(-20, 20), min_size=3, max_size=3),
    ys=st.lists(st.integers(-20, 20), min_size=3, max_size=3),
    dens=st.sampled_from([1, 2, 5, 7]),
)
def test_reduce_elem_is_ring_homomorphism(xs, ys, dens):
    P = nf.DegreeOnePrime(11, 2)  # f(2) = 11
    x = CUBIC.elem([Fraction(v, dens) for v in xs])
    y = CUBIC.elem(ys)
    assert nf.reduce_elem(x + y, P) == (nf.reduce_elem(x, P) + nf.reduce_elem(y, P)) % 11
    assert nf.reduce_elem(x * y, P) == (nf.reduce_elem(x, P) * nf.reduce_elem(y, P)) % 11


# ---------------------------------------------------------------------------
# certificates


def test_sqrt_certificate_never_certifies_rational_square_classes():
    a = CUBIC.alpha()
    for delta in [
        CUBIC.elem([9]),
        CUBIC.elem([5]),  # sqrt(5) lies in Q^cyc
        CUBIC.elem([-7]),
        (a * a + 1) * (a * a + 1) * 7,
        a * a * CUBIC.elem([-3]),
    ]:
        v = nf.sqrt_cyclotomic_certificate(delta, CUBIC, prime_budget=1500)
        assert not v.is_certified, delta


def test_sqrt_certificate_certifies_cubic_field_curve_discriminant():
    a = CUBIC.alpha()
    delta = CUBIC.elem([64]) + 91 * a + 27 * a * a  # = -64 a^3 - 27 a^4
    v = nf.sqrt_cyclotomic_certificate(delta, CUBIC, prime_budget=2000)
    assert v.is_certified
    assert v.witnesses


def test_sqrt_certificate_monotone_in_budget():
    a = CUBIC.alpha()
    delta = CUBIC.elem([64]) + 91 * a + 27 * a * a
    small = nf.sqrt_cyclotomic_certificate(delta, CUBIC, prime_budget=2000)
    big = nf.sqrt_cyclotomic_certificate(delta, CUBIC, prime_budget=4000)
    assert small.is_certified and big.is_certified


def test_sqrt_certificate_rejects_zero():
    with pytest.raises(InvalidInputError):
        nf.sqrt_cyclotomic_certificate(CUBIC.zero(), CUBIC)


def test_cbrt_certificate_odd_degree_short_circuit():
    v = nf.cbrt_cyclotomic_certificate(CUBIC.elem([2]), CUBIC)
    assert v.is_certified
    assert v.witnesses[0]["kind"] == "degree parity"


def test_cbrt_certificate_over_eisenstein_field():
    # cbrt(2) is genuinely not cyclotomic over Q(mu_3): cube-ness of 2 at
    # p = 1 mod 3 is governed by p = x^2 + 27 y^2, not by any congruence
    v = nf.cbrt_cyclotomic_certificate(EISENSTEIN.elem([2]), EISENSTEIN, prime_budget=500)
    assert v.is_certified
    # a perfect cube stays inconclusive
    v = nf.cbrt_cyclotomic_certificate(EISENSTEIN.elem([8]), EISENSTEIN, prime_budget=500)
    assert v.is_inconclusive
    a = EISENSTEIN.alpha()
    v = nf.cbrt_cyclotomic_certificate(a * a * a, EISENSTEIN, prime_budget=500)
    assert v.is_inconclusive


def test_mu_n_membership():
    v = nf.mu_n_membership(CUBIC, 3)
    assert v.is_certified and v.witnesses[0]["kind"] == "degree argument"
    qi = nf.MonogenicField([1, 0, 1])
    assert nf.mu_n_membership(qi, 4, prime_budget=500).is_inconclusive  # consistent presence
    sqrt2 = nf.MonogenicField([-2, 0, 1])
    v = nf.mu_n_membership(sqrt2, 3)
    assert v.is_certified and v.witnesses[0]["p"] == 17
    with pytest.raises(InvalidInputError):
        nf.mu_n_membership(CUBIC, 1)


def test_cyclotomic_intersection_certificate():
    assert nf.cyclotomic_intersection_certificate(CUBIC).is_certified
    assert nf.cyclotomic_intersection_certificate(nf.MonogenicField([-5, 0, 1])).is_inconclusive
    cyclic_cubic = nf.MonogenicField([-1, -3, 0, 1])  # x^3 - 3x - 1, disc 81, inside Q(mu_9)
    assert nf.cyclotomic_intersection_certificate(cyclic_cubic).is_inconclusive


def test_cyclotomic_intersection_pattern_witness():
    # x^5 - x - 1: disc is not a square and degree 5 is prime -> certified
    K5 = nf.MonogenicField([-1, -1, 0, 0, 0, 1])
    v = nf.cyclotomic_intersection_certificate(K5)
    assert v.is_certified
