"""Exact rational arithmetic helpers: p-adic valuation and reduction mod p^e.

Rationals are :class:`fractions.Fraction`, which already keeps a canonical
form (positive denominator, coprime numerator/denominator, zero as 0/1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Union

from .errors import LimitExceeded, NegativeValuation, NotInvertible, NotPrime

Rational = Fraction
RationalLike = Union[int, Fraction]

INFINITY = math.inf

# Deterministic for n < 3.3 * 10**24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test."""
    if n < 2:
        return False
    for q in _MR_WITNESSES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_between(lo: int, hi: int) -> list[int]:
    return [n for n in range(max(lo, 2), hi + 1) if is_prime(n)]


@dataclass(frozen=True)
class Limits:
    max_exponent: int = 12
    max_prime: int = 10**6


DEFAULT_LIMITS = Limits()


@dataclass(frozen=True)
class ModulusPE:
    """The modulus p**e for a prime p and exponent e >= 1."""

    p: int
    e: int
    limits: Limits = field(default=DEFAULT_LIMITS, compare=False, repr=False)

    def __post_init__(self):
        if not is_prime(self.p):
            raise NotPrime(f"{self.p} is not prime")
        if self.e < 1:
            raise ValueError(f"exponent must be >= 1, got {self.e}")
        if self.e > self.limits.max_exponent:
            raise LimitExceeded(f"exponent {self.e} > {self.limits.max_exponent}")
        if self.p > self.limits.max_prime:
            raise LimitExceeded(f"prime {self.p} > {self.limits.max_prime}")

    @property
    def value(self) -> int:
        return self.p**self.e

    def __str__(self):
        return f"{self.p}^{self.e}"


@dataclass(frozen=True)
class Residue:
    modulus: ModulusPE
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.modulus.value:
            raise ValueError(f"{self.value} not in [0, {self.modulus.value})")

    def __int__(self):
        return self.value

    def __str__(self):
        return str(self.value)


def _as_fraction(q: RationalLike) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, (int, _RationalABC)):
        return Fraction(q)
    raise TypeError(f"expected an exact rational, got {type(q).__name__}")


def _strip(n: int, p: int) -> tuple[int, int]:
    """Return (v, m) with n = p**v * m and p not dividing m (n != 0)."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def valuation(q: RationalLike, p: int) -> int | float:
    """p-adic valuation of q; ``math.inf`` for zero."""
    q = _as_fraction(q)
    if q == 0:
        return INFINITY
    vn, _ = _strip(q.numerator, p)
    vd, _ = _strip(q.denominator, p)
    return vn - vd


def ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b)."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def mod_inverse(a: int, m: ModulusPE) -> int:
    if a % m.p == 0:
        raise NotInvertible(f"{a} is divisible by {m.p}")
    n = m.value
    g, x, _ = ext_gcd(a % n, n)
    assert g == 1
    return x % n


def reduce_mod(q: RationalLike, m: ModulusPE) -> Residue:
    """Map a p-integral rational to its canonical residue in [0, p**e)."""
    q = _as_fraction(q)
    if q == 0:
        return Residue(m, 0)
    vd, den = _strip(q.denominator, m.p)
    if vd:
        raise NegativeValuation(f"{q} has negative {m.p}-adic valuation")
    n = m.value
    return Residue(m, q.numerator * mod_inverse(den, m) % n)


def congruent(lhs: RationalLike, rhs: RationalLike, m: ModulusPE) -> bool:
    """True iff v_p(lhs - rhs) >= e; defined even when a side is not p-integral."""
    return valuation(_as_fraction(lhs) - _as_fraction(rhs), m.p) >= m.e


def format_rational(q: RationalLike) -> str:
    q = _as_fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    num, sep, den = text.strip().partition("/")
    if not sep:
        return Fraction(int(num))
    return Fraction(int(num), int(den))
