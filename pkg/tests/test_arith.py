import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aperylab.arith import (
    Limits,
    ModulusPE,
    congruent,
    ext_gcd,
    format_rational,
    is_prime,
    mod_inverse,
    parse_rational,
    reduce_mod,
    valuation,
)
from aperylab.errors import LimitExceeded, NegativeValuation, NotInvertible, NotPrime

SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 97]


def trial_division_is_prime(n):
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def brute_residue(q, n):
    """The unique r in [0, n) with r * den == num (mod n), by search."""
    hits = [r for r in range(n) if (r * q.denominator - q.numerator) % n == 0]
    assert len(hits) == 1
    return hits[0]


def test_valuation_examples():
    assert valuation(0, 7) == math.inf
    assert valuation(Fraction(1, 5), 5) == -1
    assert valuation(Fraction(25, 12), 5) == 2
    assert valuation(Fraction(25, 12), 2) == -2
    assert valuation(-250, 5) == 3


def test_reduce_mod_examples():
    assert reduce_mod(0, ModulusPE(5, 4)).value == 0
    assert reduce_mod(Fraction(1, 6), ModulusPE(5, 1)).value == 1
    assert reduce_mod(Fraction(125, 9), ModulusPE(5, 4)).value == 500
    assert reduce_mod(-1, ModulusPE(7, 2)).value == 48


def test_reduce_mod_rejects_non_integral():
    with pytest.raises(NegativeValuation):
        reduce_mod(Fraction(1, 5), ModulusPE(5, 2))


@pytest.mark.parametrize("q", [Fraction(7, 3), Fraction(-11, 8), Fraction(250, 7), Fraction(3, 1)])
def test_reduce_mod_matches_brute_force(q):
    for p, e in [(5, 2), (7, 3), (11, 2)]:
        if valuation(q, p) >= 0:
            assert reduce_mod(q, ModulusPE(p, e)).value == brute_residue(q, p**e)


def test_mod_inverse_examples():
    assert mod_inverse(1, ModulusPE(7, 3)) == 1
    assert mod_inverse(9, ModulusPE(5, 4)) == 139
    assert mod_inverse(3, ModulusPE(7, 1)) == 5
    with pytest.raises(NotInvertible):
        mod_inverse(10, ModulusPE(5, 2))


@pytest.mark.parametrize("p,e", [(2, 10), (3, 7), (5, 4), (7, 5), (97, 5), (1009, 3)])
def test_mod_inverse_random(p, e):
    m = ModulusPE(p, e)
    rng = random.Random(p * 31 + e)
    n = p**e
    done = 0
    while done < 1000:
        a = rng.randrange(-10 * n, 10 * n)
        if a % p == 0:
            continue
        x = mod_inverse(a, m)
        assert 0 <= x < n
        assert a * x % n == 1
        assert x == pow(a, -1, n)
        done += 1


def test_ext_gcd_bezout():
    for a, b in [(240, 46), (17, 5), (0, 9), (9, 0), (12, 18)]:
        g, x, y = ext_gcd(a, b)
        assert g == math.gcd(a, b)
        assert a * x + b * y == g


def test_congruent_examples():
    m = ModulusPE(5, 4)
    q = Fraction(22, 7)
    assert congruent(q, q, m)
    assert congruent(33001, 1 + Fraction(2, 3) * 125 * Fraction(1, 6), m)
    assert not congruent(1, 2, ModulusPE(5, 1))


def test_congruent_with_non_integral_sides():
    # both sides carry 1/p but their difference is divisible by p^2
    m = ModulusPE(7, 2)
    assert congruent(Fraction(1, 7) + 49, Fraction(1, 7), m)
    assert not congruent(Fraction(1, 7) + 7, Fraction(1, 7), m)


def test_is_prime_against_trial_division():
    for n in range(-5, 5000):
        assert is_prime(n) == trial_division_is_prime(n), n


def test_is_prime_large():
    assert is_prime(2**61 - 1)
    assert not is_prime((2**31 - 1) * (2**61 - 1))
    assert not is_prime(3215031751)  # strong pseudoprime to bases 2, 3, 5, 7


def test_modulus_validation():
    with pytest.raises(NotPrime):
        ModulusPE(9, 2)
    with pytest.raises(ValueError):
        ModulusPE(5, 0)
    with pytest.raises(LimitExceeded):
        ModulusPE(5, 13)
    with pytest.raises(LimitExceeded):
        ModulusPE(1_000_003, 1)
    assert ModulusPE(5, 20, Limits(max_exponent=20)).value == 5**20


def test_format_and_parse_rational():
    for q in [Fraction(0), Fraction(-5, 66), Fraction(33001)]:
        assert parse_rational(format_rational(q)) == q
    assert format_rational(Fraction(5, 66)) == "5/66"
    assert format_rational(7) == "7"


# --- properties ---------------------------------------------------------------

primes = st.sampled_from(SMALL_PRIMES)
exponents = st.integers(min_value=1, max_value=6)
rationals = st.fractions(max_denominator=10**6).filter(lambda q: abs(q.numerator) < 10**12)


def p_integral(p):
    return rationals.filter(lambda q: q.denominator % p != 0)


@given(st.data(), primes, exponents)
def test_reduce_is_ring_homomorphism(data, p, e):
    q = data.draw(p_integral(p))
    r = data.draw(p_integral(p))
    m = ModulusPE(p, e)
    n = m.value
    red = lambda x: reduce_mod(x, m).value
    assert red(q + r) == (red(q) + red(r)) % n
    assert red(q * r) == red(q) * red(r) % n


@given(rationals, rationals, primes)
def test_valuation_laws(q, r, p):
    if q and r:
        assert valuation(q * r, p) == valuation(q, p) + valuation(r, p)
    vq, vr = valuation(q, p), valuation(r, p)
    assert valuation(q + r, p) >= min(vq, vr)
    if vq != vr:
        assert valuation(q + r, p) == min(vq, vr)


@given(st.data(), primes, exponents)
def test_congruent_iff_difference_reduces_to_zero(data, p, e):
    q = data.draw(p_integral(p))
    r = data.draw(p_integral(p))
    m = ModulusPE(p, e)
    assert congruent(q, r, m) == (reduce_mod(q - r, m).value == 0)
    assert congruent(q, q + p**e * r, m)


@settings(max_examples=50)
@given(rationals, rationals)
def test_canonical_form(q, r):
    for x in (q + r, q - r, q * r) + ((q / r,) if r else ()):
        assert x.denominator > 0
        assert math.gcd(x.numerator, x.denominator) == 1
