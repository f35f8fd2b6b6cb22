"""Exact sequences: binomials, Apery numbers, Bernoulli and harmonic numbers."""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator

from .arith import RationalLike, format_rational, parse_rational
from .errors import BernoulliCacheError


def binomial(n: int, k: int) -> int:
    if n < 0:
        raise ValueError(f"binomial: n must be >= 0, got {n}")
    if k < 0 or k > n:
        return 0
    k = min(k, n - k)
    c = 1
    for i in range(k):
        c = c * (n - i) // (i + 1)
    return c


def _apery_terms(n: int) -> Iterator[tuple[int, int]]:
    """Yield (C(n,k), C(n,k)*C(n+k,k)) for k = 0..n by term ratios."""
    c, u = 1, 1
    for k in range(n + 1):
        yield c, u
        # u_{k+1}/u_k = (n+k+1)(n-k)/(k+1)^2
        c = c * (n - k) // (k + 1)
        u = u * (n + k + 1) * (n - k) // ((k + 1) * (k + 1))


def apery_a(n: int) -> int:
    if n < 0:
        raise ValueError("apery_a: n must be >= 0")
    return sum(u * u for _, u in _apery_terms(n))


def apery_a_prime(n: int) -> int:
    if n < 0:
        raise ValueError("apery_a_prime: n must be >= 0")
    return sum(c * u for c, u in _apery_terms(n))


def apery_a_naive(n: int) -> int:
    """Factorial-based reference summation, kept as a test oracle."""
    f = math.factorial
    return sum(
        (f(n) // (f(k) * f(n - k))) ** 2 * (f(n + k) // (f(n) * f(k))) ** 2
        for k in range(n + 1)
    )


def apery_a_prime_naive(n: int) -> int:
    f = math.factorial
    return sum(
        (f(n) // (f(k) * f(n - k))) ** 2 * (f(n + k) // (f(n) * f(k)))
        for k in range(n + 1)
    )


def weighted_apery_sum(p: int) -> int:
    """sum_{k=0}^{p-1} (2k+1) A_k."""
    if p < 2:
        raise ValueError("weighted_apery_sum: p must be >= 2")
    return sum((2 * k + 1) * apery_a(k) for k in range(p))


class BernoulliCache:
    """Append-only table of Bernoulli numbers B_0, B_1, ... (B_1 = -1/2).

    Filling is single-writer; once warmed to the largest index a run
    needs, concurrent readers only ever hit stored entries.
    """

    def __init__(self, table: Iterable[Fraction] = (), *, validate: bool = True):
        self._table: list[Fraction] = [Fraction(1), Fraction(-1, 2)]
        self._lock = threading.Lock()
        extra = [Fraction(b) for b in table]
        if extra:
            if validate:
                validate_bernoulli_table(extra)
            self._table = extra

    def __len__(self):
        return len(self._table)

    def table(self) -> list[Fraction]:
        return list(self._table)

    def get(self, n: int) -> Fraction:
        if n < 0:
            raise ValueError("bernoulli index must be >= 0")
        if n >= len(self._table):
            self.warm(n)
        return self._table[n]

    def warm(self, n: int) -> None:
        with self._lock:
            table = self._table
            while len(table) <= n:
                table.append(_next_bernoulli(table))

    def save(self, path: str | Path) -> None:
        lines = [f"{n}\t{format_rational(b)}" for n, b in enumerate(self._table)]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "BernoulliCache":
        entries: dict[int, Fraction] = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            if not line.strip():
                continue
            try:
                idx, value = line.split("\t")
                entries[int(idx)] = parse_rational(value)
            except (ValueError, ZeroDivisionError) as exc:
                raise BernoulliCacheError(f"{path}:{lineno}: bad line {line!r}") from exc
        if sorted(entries) != list(range(len(entries))):
            raise BernoulliCacheError(f"{path}: indices are not contiguous from 0")
        return cls(entries[i] for i in range(len(entries)))


def _next_bernoulli(table: list[Fraction]) -> Fraction:
    n = len(table)
    if n >= 3 and n % 2:
        return Fraction(0)
    # B_n = -1/(n+1) * sum_{j<n} C(n+1, j) B_j; odd j >= 3 contribute nothing.
    c = 1
    s = Fraction(0)
    for j in range(n):
        if j < 2 or j % 2 == 0:
            s += c * table[j]
        c = c * (n + 1 - j) // (j + 1)
    return -s / (n + 1)


def bernoulli_recurrence_residual(table: list[Fraction], n: int) -> Fraction:
    """sum_{j=0}^{n} C(n+1, j) B_j, which vanishes for every n >= 1."""
    c = 1
    s = Fraction(0)
    for j in range(n + 1):
        if table[j]:
            s += c * table[j]
        c = c * (n + 1 - j) // (j + 1)
    return s


def validate_bernoulli_table(table: list[Fraction]) -> None:
    if not table or table[0] != 1:
        raise BernoulliCacheError("B_0 must be 1")
    if len(table) > 1 and table[1] != Fraction(-1, 2):
        raise BernoulliCacheError("B_1 must be -1/2")
    for n in range(1, len(table)):
        if n >= 3 and n % 2 and table[n] != 0:
            raise BernoulliCacheError(f"B_{n} must vanish")
        if bernoulli_recurrence_residual(table, n) != 0:
            raise BernoulliCacheError(f"B_{n} fails the defining recurrence")


DEFAULT_BERNOULLI = BernoulliCache()


def bernoulli(n: int, cache: BernoulliCache | None = None) -> Fraction:
    return (cache or DEFAULT_BERNOULLI).get(n)


def harmonic(n: int, r: int = 1) -> Fraction:
    """Generalized harmonic number H_n^(r) = sum_{k=1}^n 1/k^r."""
    if n < 0 or r < 1:
        raise ValueError(f"harmonic: need n >= 0 and r >= 1, got n={n}, r={r}")
    return harmonic_prefix(n, r)[n]


def harmonic_prefix(n: int, r: int = 1) -> list[Fraction]:
    """[H_0^(r), H_1^(r), ..., H_n^(r)]."""
    out = [Fraction(0)]
    s = Fraction(0)
    for k in range(1, n + 1):
        s += Fraction(1, k**r)
        out.append(s)
    return out


def rising_factorial(x: RationalLike, m: int) -> Fraction:
    if m < 0:
        raise ValueError("rising_factorial: m must be >= 0")
    x = Fraction(x)
    out = Fraction(1)
    for i in range(m):
        out *= x + i
    return out
