"""Exact checks of the combinatorial identities behind the A'_{p-1} proof.

Every checker has a ``*_sides`` companion returning the two exact values
being compared, so window runs can report the offending pair.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

from .arith import RationalLike
from .errors import PoleAtX, UnknownIdentity
from .sequences import binomial, harmonic_prefix, rising_factorial

Sides = tuple[Fraction, Fraction]


@lru_cache(maxsize=None)
def lw1_sum(n: int) -> Fraction:
    """sum_{k=1}^{2n} (-1)^k/k C(2n,k) C(2n+1+k,k)."""
    m = 2 * n
    s = Fraction(0)
    for k in range(1, m + 1):
        s += Fraction((-1) ** k * binomial(m, k) * binomial(m + 1 + k, k), k)
    return s


@lru_cache(maxsize=None)
def wz1_sum(n: int) -> Fraction:
    """sum_{k=1}^{n} (-1)^k/k C(n,k) C(n+1+k,k) H_k."""
    h = harmonic_prefix(n)
    s = Fraction(0)
    for k in range(1, n + 1):
        s += Fraction((-1) ** k * binomial(n, k) * binomial(n + 1 + k, k), k) * h[k]
    return s


def lw1_sides(n: int) -> Sides:
    return lw1_sum(n), -2 * harmonic_prefix(2 * n)[2 * n]


def wz1_sides(n: int) -> Sides:
    alt = sum((Fraction((-1) ** k, k * k) for k in range(1, n + 1)), Fraction(0))
    rhs = 2 * (alt + Fraction((-1) ** n, n + 1) * harmonic_prefix(n)[n])
    return wz1_sum(n), rhs


def lw1_recurrence_sides(n: int) -> Sides:
    s = lw1_sum
    lhs = (-1 - 2 * n) * s(n) + 2 * (3 + 2 * n) * s(n + 1) + (-5 - 2 * n) * s(n + 2)
    rhs = Fraction(17 + 24 * n + 8 * n * n, (1 + n) * (2 + n) * (3 + 2 * n))
    return lhs, rhs


def wz1_recurrence_sides(n: int) -> Sides:
    s = wz1_sum
    lhs = (
        (1 + n) * (2 + n) ** 2 * (7 + 2 * n) * s(n)
        + (2 + n) * (7 + 2 * n) * (7 + 6 * n + n * n) * s(n + 1)
        - (3 + n) * (3 + 2 * n) * (2 + 4 * n + n * n) * s(n + 2)
        - (3 + n) ** 2 * (4 + n) * (3 + 2 * n) * s(n + 3)
    )
    return lhs, Fraction(0)


def partial_fraction_sides(n: int, x: RationalLike) -> Sides:
    """sum_{k=0}^n (-1)^k/(x+k) C(n,k)  versus  n!/(x)_{n+1}."""
    x = Fraction(x)
    if x.denominator == 1 and -n <= x <= 0:
        raise PoleAtX(f"x={x} is a pole for n={n}")
    lhs = sum((Fraction((-1) ** k * binomial(n, k)) / (x + k) for k in range(n + 1)),
              Fraction(0))
    fact = 1
    for i in range(2, n + 1):
        fact *= i
    return lhs, fact / rising_factorial(x, n + 1)


def shift_binomial_sides(n: int, k: int) -> Sides:
    """C(n-1+k, k) versus n/(n+k) C(n+k, k)."""
    if n < 1 or k < 0:
        raise ValueError(f"shift binomial needs n >= 1, k >= 0; got n={n}, k={k}")
    return Fraction(binomial(n - 1 + k, k)), Fraction(n, n + k) * binomial(n + k, k)


def check_lw1(n: int) -> bool:
    lhs, rhs = lw1_sides(n)
    return lhs == rhs


def check_wz1(n: int) -> bool:
    lhs, rhs = wz1_sides(n)
    return lhs == rhs


def check_lw1_recurrence(n: int) -> bool:
    lhs, rhs = lw1_recurrence_sides(n)
    return lhs == rhs


def check_wz1_recurrence(n: int) -> bool:
    lhs, rhs = wz1_recurrence_sides(n)
    return lhs == rhs


def check_partial_fraction(n: int, x: RationalLike) -> bool:
    lhs, rhs = partial_fraction_sides(n, x)
    return lhs == rhs


def check_shift_binomial(n: int, k: int) -> bool:
    lhs, rhs = shift_binomial_sides(n, k)
    return lhs == rhs


# Window runs: each identity maps n to the list of (lhs, rhs) pairs tested at n.

PARTIAL_FRACTION_SAMPLES = 4
SHIFT_BINOMIAL_K_MAX = 60


def random_nonpole(rng: random.Random, n: int) -> Fraction:
    while True:
        x = Fraction(rng.randint(-3 * n - 10, 3 * n + 10), rng.randint(1, 12))
        if not (x.denominator == 1 and -n <= x <= 0):
            return x


def _partial_fraction_at(n: int) -> list[Sides]:
    rng = random.Random(1_000_003 * n + 17)
    return [partial_fraction_sides(n, random_nonpole(rng, n))
            for _ in range(PARTIAL_FRACTION_SAMPLES)]


def _shift_binomial_at(n: int) -> list[Sides]:
    if n < 1:
        return []
    return [shift_binomial_sides(n, k) for k in range(SHIFT_BINOMIAL_K_MAX + 1)]


IDENTITIES: dict[str, Callable[[int], list[Sides]]] = {
    "lw1": lambda n: [lw1_sides(n)],
    "wz1": lambda n: [wz1_sides(n)],
    "lw1-rec": lambda n: [lw1_recurrence_sides(n)],
    "wz1-rec": lambda n: [wz1_recurrence_sides(n)],
    "partial-fraction": _partial_fraction_at,
    "shift-binomial": _shift_binomial_at,
}

DEFAULT_WINDOWS = [(name, 0, 60) for name in IDENTITIES]


@dataclass
class IdentityReport:
    identity_id: str
    n_lo: int
    n_hi: int
    failures: list[tuple[int, Fraction, Fraction]] = field(default_factory=list)
    note: str | None = None

    @property
    def holds(self) -> bool:
        return not self.failures


def run_identity_window(identity_id: str, n_lo: int, n_hi: int,
                        stop_on_failure: bool = False) -> IdentityReport:
    try:
        fn = IDENTITIES[identity_id]
    except KeyError:
        raise UnknownIdentity(identity_id) from None
    if n_lo > n_hi:
        raise ValueError(f"empty window {n_lo}..{n_hi}")
    if n_lo < 0:
        raise ValueError("identity windows start at n >= 0")
    report = IdentityReport(identity_id, n_lo, n_hi)
    for n in range(n_lo, n_hi + 1):
        for lhs, rhs in fn(n):
            if lhs != rhs:
                report.failures.append((n, lhs, rhs))
        if report.failures and stop_on_failure:
            break
    if identity_id == "wz1-rec" and report.failures:
        direct = run_identity_window("wz1", n_lo, n_hi + 3)
        if direct.holds:
            report.note = ("stated recurrence fails although the direct identity "
                           "holds: likely erratum in the recurrence coefficients")
    return report
