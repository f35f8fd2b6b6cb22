"""Registry of congruences for A_{p-1}, A'_{p-1} and their proof steps.

Each check evaluates exact rational sides for a prime p and compares them
with the valuation of the difference, so sides that are individually not
p-integral (e.g. H_{p-1}/p^2) still compare correctly.

Coefficients that appear in a right-hand side are stored as data on the
descriptor. ``overrides`` lets a caller perturb them, which is how the
negative-control runs show that a check is not vacuously true.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence, Union

from .arith import ModulusPE, Residue, congruent, is_prime, primes_between, reduce_mod, valuation
from .errors import (
    ChainConsistencyError,
    CostGated,
    LimitExceeded,
    NegativeValuation,
    PreconditionViolated,
    UnknownCheck,
)
from .sequences import (
    DEFAULT_BERNOULLI,
    BernoulliCache,
    apery_a,
    apery_a_prime,
    binomial,
    harmonic,
    harmonic_prefix,
    weighted_apery_sum,
)

log = logging.getLogger(__name__)

F = Fraction
Params = Mapping[str, int]
Coeffs = Mapping[str, Fraction]
Overrides = Mapping[str, Mapping[str, Fraction]]


@dataclass(frozen=True)
class Caps:
    sunzw_max_p: int = 47
    beukers_max_index: int = 2000


DEFAULT_CAPS = Caps()


class PrimeContext:
    """Per-prime memo of the sums shared between checks."""

    def __init__(self, p: int, bern: BernoulliCache | None = None):
        self.p = p
        self.bern = bern or DEFAULT_BERNOULLI

    def B(self, n: int) -> Fraction:
        return self.bern.get(n)

    @cached_property
    def h1(self) -> list[Fraction]:
        return harmonic_prefix(self.p - 1, 1)

    @cached_property
    def h2(self) -> list[Fraction]:
        return harmonic_prefix(self.p - 1, 2)

    @property
    def H1(self) -> Fraction:
        return self.h1[-1]

    @property
    def H2(self) -> Fraction:
        return self.h2[-1]

    @cached_property
    def H3(self) -> Fraction:
        return harmonic(self.p - 1, 3)

    @cached_property
    def H4(self) -> Fraction:
        return harmonic(self.p - 1, 4)

    @property
    def half(self) -> int:
        return (self.p - 1) // 2

    @cached_property
    def H2_half(self) -> Fraction:
        return self.h2[self.half]

    @cached_property
    def H4_half(self) -> Fraction:
        return harmonic(self.half, 4)

    @cached_property
    def binom_row(self) -> list[int]:
        """C(p-1, k) for k = 0..p-1."""
        row = [1]
        n = self.p - 1
        for k in range(n):
            row.append(row[-1] * (n - k) // (k + 1))
        return row

    @cached_property
    def apery(self) -> int:
        return apery_a(self.p - 1)

    @cached_property
    def apery_prime(self) -> int:
        return apery_a_prime(self.p - 1)

    def _sum(self, term: Callable[[int], Fraction]) -> Fraction:
        s = F(0)
        for k in range(1, self.p):
            s += term(k)
        return s

    @cached_property
    def alt(self) -> Fraction:
        """sum_{k=1}^{p-1} (-1)^k C(p-1,k) / (p+k)."""
        p, row = self.p, self.binom_row
        return self._sum(lambda k: F((-1) ** k * row[k], p + k))

    @cached_property
    def alt_h2(self) -> Fraction:
        """sum_{k=1}^{p-1} (-1)^k C(p-1,k) H_k^(2) / (p+k)."""
        p, row, h2 = self.p, self.binom_row, self.h2
        return self._sum(lambda k: F((-1) ** k * row[k], p + k) * h2[k])

    @cached_property
    def h2_over_k2(self) -> Fraction:
        h2 = self.h2
        return self._sum(lambda k: h2[k] / (k * k))

    @cached_property
    def h2_over_k(self) -> Fraction:
        h2 = self.h2
        return self._sum(lambda k: h2[k] / k)

    @cached_property
    def h2_over_pk(self) -> Fraction:
        p, h2 = self.p, self.h2
        return self._sum(lambda k: h2[k] / (p + k))

    @cached_property
    def hh2_over_k(self) -> Fraction:
        h1, h2 = self.h1, self.h2
        return self._sum(lambda k: h1[k] * h2[k] / k)

    @cached_property
    def hh2_over_pk(self) -> Fraction:
        p, h1, h2 = self.p, self.h1, self.h2
        return self._sum(lambda k: h1[k] * h2[k] / (p + k))


@dataclass(frozen=True)
class Leg:
    """One comparison inside a check; ``exact`` legs require equality."""

    label: str
    lhs: Fraction
    rhs: Fraction
    exact: bool = False


LegFn = Callable[[PrimeContext, Coeffs, Params], list[Leg]]


@dataclass(frozen=True, eq=False)
class CheckDescriptor:
    id: str
    anchor: str
    min_p: int
    exponent: Union[int, Callable[[int, Params], int]]
    legs: LegFn
    coeffs: Coeffs = field(default_factory=dict)
    defaults: Callable[[int], dict] | None = None
    validate: Callable[[int, Params], None] | None = None
    cost_ok: Callable[[int, Params, Caps], bool] | None = None
    bernoulli_index: Callable[[int, Params], int] = lambda p, params: 0

    def exponent_for(self, p: int, params: Params) -> int:
        if callable(self.exponent):
            return self.exponent(p, params)
        return self.exponent

    def params_for(self, p: int, params: Params | None) -> dict:
        out = dict(self.defaults(p)) if self.defaults else {}
        if params:
            unknown = set(params) - set(out)
            if unknown:
                raise PreconditionViolated(f"{self.id}: unknown parameters {sorted(unknown)}")
            out.update(params)
        return out


@dataclass
class CheckResult:
    id: str
    p: int
    e: int | None
    status: str  # "pass" | "fail" | "skip"
    lhs_residue: Residue | None = None
    rhs_residue: Residue | None = None
    elapsed: float = 0.0
    params: dict = field(default_factory=dict)
    detail: str = ""

    @property
    def holds(self) -> bool:
        return self.status == "pass"

    def key(self) -> tuple:
        """Everything except timing; used to compare runs."""
        return (self.p, self.id, tuple(sorted(self.params.items())), self.e,
                self.status, self.lhs_residue, self.rhs_residue, self.detail)


# --- leg builders -------------------------------------------------------------

def _single(label: str = "main"):
    def wrap(fn: Callable[[PrimeContext, Coeffs, Params], tuple]) -> LegFn:
        def legs(ctx, c, params):
            lhs, rhs = fn(ctx, c, params)
            return [Leg(label, F(lhs), F(rhs))]
        return legs
    return wrap


@_single()
def _a1(x, c, _):
    p = x.p
    return x.apery, c["const"] + c["p3_B"] * p**3 * x.B(p - 3)


@_single()
def _a2(x, c, _):
    p = x.p
    return x.apery_prime, c["const"] + c["p3_B"] * p**3 * x.B(p - 3)


def _theorem_rhs(x: PrimeContext, c: Coeffs) -> Fraction:
    p, b, b2 = x.p, x.B(x.p - 3), x.B(2 * x.p - 4)
    return c["const"] + p**3 * (c["p3_B"] * b + c["p3_B2"] * b2) + c["p4_B"] * p**4 * b


@_single()
def _a3(x, c, _):
    return x.apery, _theorem_rhs(x, c)


@_single()
def _a5(x, c, _):
    return x.apery_prime, _theorem_rhs(x, c)


@_single()
def _kummer(x, c, params):
    k, b = params["k"], params["b"]
    n = k * (x.p - 1) + b
    return x.B(n) / n, x.B(b) / b


def _kummer_validate(p: int, params: Params) -> None:
    k, b = params["k"], params["b"]
    if k < 1:
        raise PreconditionViolated(f"kummer: k must be >= 1, got {k}")
    if b < 2 or b % 2:
        raise PreconditionViolated(f"kummer: b must be even and >= 2, got {b}")
    if b % (p - 1) == 0:
        raise PreconditionViolated(f"kummer: (p-1) divides b={b}")


@_single()
def _a4(x, c, _):
    return x.B(2 * x.p - 4), c["B"] * x.B(x.p - 3)


def _beukers(seq: Callable[[int], int]) -> LegFn:
    @_single()
    def legs(x, c, params):
        p, m, r = x.p, params["m"], params["r"]
        return seq(m * p**r - 1), seq(m * p ** (r - 1) - 1)
    return legs


def _beukers_validate(p: int, params: Params) -> None:
    if params["m"] < 1 or params["r"] < 1:
        raise PreconditionViolated(f"beukers: need m >= 1 and r >= 1, got {dict(params)}")


def _beukers_cost(p: int, params: Params, caps: Caps) -> bool:
    return params["m"] * p ** params["r"] <= caps.beukers_max_index


@_single()
def _sunzw(x, c, _):
    p = x.p
    return weighted_apery_sum(p), c["p"] * p + c["p4_B"] * p**4 * x.B(p - 3)


def _b2(x, c, _):
    p, row, h2 = x.p, x.binom_row, x.h2
    legs = []
    for k in range(1, p):
        lhs = row[k] * binomial(p + k, k)
        rhs = (-1) ** k * (c["const"] + c["p2_H2"] * p * p * h2[k])
        legs.append(Leg(f"k={k}", F(lhs), rhs))
    return legs


def _binom_pm(x, c, _):
    p, row, h1 = x.p, x.binom_row, x.h1
    return [Leg(f"k={k}", F(row[k]), (-1) ** k * (c["const"] + c["p_H"] * p * h1[k]))
            for k in range(1, p)]


@_single()
def _b5(x, c, _):
    p = x.p
    rhs = (c["const"] + c["p2_H2"] * p**2 * x.H2 + c["p3_H3"] * p**3 * x.H3
           + c["p4_H4"] * p**4 * x.H4 + c["p4_S"] * p**4 * x.h2_over_k2)
    return x.apery, rhs


@_single()
def _b6(x, c, _):
    return x.h2_over_k2, 0


@_single()
def _b7(x, c, _):
    return x.H3, 0


@_single()
def _b8(x, c, _):
    return x.H4, 0


@_single()
def _new1(x, c, _):
    return x.h2_over_k2, x.H4_half


@_single()
def _new2(x, c, _):
    return x.H4_half, 0


@_single()
def _b9(x, c, _):
    return x.apery, c["const"] + c["p2_H2"] * x.p**2 * x.H2


@_single()
def _b10(x, c, _):
    p, b, b2 = x.p, x.B(x.p - 3), x.B(2 * x.p - 4)
    rhs = (c["p_B"] * b + c["p_B2"] * b2) * p + (c["p2_B"] * b + c["p2_B2"] * b2) * p**2
    return x.H2, rhs


@_single()
def _b11(x, c, _):
    p, b, b2 = x.p, x.B(x.p - 3), x.B(2 * x.p - 4)
    return x.H2, (c["p_B"] * b + c["p_B2"] * b2) * p + c["p2_B"] * p**2 * b


def _mcintosh(x, c, _):
    p = x.p
    central = binomial(2 * p - 1, p - 1)
    return [
        # partial fractions at n = p-1, x = p
        Leg("c4", p * x.alt, F(1, central) - 1, exact=True),
        Leg("c5", F(central), c["const"] + c["p2_H2"] * p**2 * x.H2),
    ]


@_single()
def _c6(x, c, _):
    return x.p * x.alt, c["p2_H2"] * x.p**2 * x.H2


@_single()
def _c3(x, c, _):
    p, row, h2 = x.p, x.binom_row, x.h2
    s = x._sum(lambda k: F((-1) ** k * row[k], p + k) * (1 + c["p2_H2"] * p * p * h2[k]))
    return x.apery_prime, c["const"] + p * s


@_single()
def _new4(x, c, _):
    p = x.p
    return p**3 * x.alt_h2, c["p3_S"] * p**3 * x.h2_over_pk + c["p4_T"] * p**4 * x.hh2_over_pk


def _new5(x, c, _):
    return [Leg("over p+k", x.hh2_over_pk, F(0)), Leg("over k", x.hh2_over_k, F(0))]


@_single()
def _wz2(x, c, _):
    return x.p**2 * x.hh2_over_k, c["H2"] * x.H2 + c["H2_half"] * x.H2_half


@_single()
def _wz3(x, c, _):
    p, b, b2 = x.p, x.B(x.p - 3), x.B(2 * x.p - 4)
    rhs = (c["p_B"] * b + c["p_B2"] * b2) * p + (c["p2_B"] * b + c["p2_B2"] * b2) * p**2
    return x.H2_half, rhs


@_single()
def _new6(x, c, _):
    return x.h2_over_pk, c["S"] * x.h2_over_k


@_single()
def _new7(x, c, _):
    return x.p**3 * x.alt_h2, c["p3_S"] * x.p**3 * x.h2_over_k


@_single()
def _lw2(x, c, _):
    return x.h2_over_k, c["H_over_p2"] * x.H1 / x.p**2


@_single()
def _new9(x, c, _):
    return x.p**3 * x.alt_h2, c["pH"] * x.p * x.H1


@_single()
def _lw3(x, c, _):
    return x.p * x.H1, c["p2_H2"] * x.p**2 * x.H2


@_single()
def _new10(x, c, _):
    return x.apery_prime, c["const"] + c["p2_H2"] * x.p**2 * x.H2


@_single()
def _wolstenholme(x, c, _):
    return x.H1, 0


@_single()
def _hp2(x, c, _):
    return x.H2, 0


@_single()
def _mestrovic(x, c, _):
    return x.H1 / x.p, c["H2"] * x.H2


def _bern_small(p, params):
    return p - 3


def _bern_pair(p, params):
    return 2 * p - 4


def _cost_sunzw(p, params, caps):
    return p <= caps.sunzw_max_p


def _build_registry() -> list[CheckDescriptor]:
    D = CheckDescriptor
    return [
        D("a1", "A_{p-1} = 1 + 2/3 p^3 B_{p-3} mod p^4", 5, 4, _a1,
          {"const": F(1), "p3_B": F(2, 3)}, bernoulli_index=_bern_small),
        D("a2", "A'_{p-1} = 1 + 5/3 p^3 B_{p-3} mod p^4", 5, 4, _a2,
          {"const": F(1), "p3_B": F(5, 3)}, bernoulli_index=_bern_small),
        D("a3", "A_{p-1} = 1 + p^3(4/3 B_{p-3} - 1/2 B_{2p-4}) + 1/9 p^4 B_{p-3} mod p^5",
          7, 5, _a3, {"const": F(1), "p3_B": F(4, 3), "p3_B2": F(-1, 2), "p4_B": F(1, 9)},
          bernoulli_index=_bern_pair),
        D("a5", "A'_{p-1} = 1 + p^3(10/3 B_{p-3} - 5/4 B_{2p-4}) + 5/18 p^4 B_{p-3} mod p^5",
          7, 5, _a5, {"const": F(1), "p3_B": F(10, 3), "p3_B2": F(-5, 4), "p4_B": F(5, 18)},
          bernoulli_index=_bern_pair),
        D("kummer", "B_{k(p-1)+b}/(k(p-1)+b) = B_b/b mod p", 5, 1, _kummer,
          defaults=lambda p: {"k": 1, "b": p - 3}, validate=_kummer_validate,
          bernoulli_index=lambda p, q: q["k"] * (p - 1) + q["b"]),
        D("a4", "B_{2p-4} = 4/3 B_{p-3} mod p", 7, 1, _a4, {"B": F(4, 3)},
          bernoulli_index=_bern_pair),
        D("beukers-a", "A_{mp^r-1} = A_{mp^{r-1}-1} mod p^{3r}", 5,
          lambda p, q: 3 * q["r"], _beukers(apery_a),
          defaults=lambda p: {"m": 1, "r": 1}, validate=_beukers_validate,
          cost_ok=_beukers_cost),
        D("beukers-a-prime", "A'_{mp^r-1} = A'_{mp^{r-1}-1} mod p^{3r}", 5,
          lambda p, q: 3 * q["r"], _beukers(apery_a_prime),
          defaults=lambda p: {"m": 1, "r": 1}, validate=_beukers_validate,
          cost_ok=_beukers_cost),
        D("sunzw-sum", "sum_{k<p} (2k+1) A_k = p + 7/6 p^4 B_{p-3} mod p^5", 5, 5, _sunzw,
          {"p": F(1), "p4_B": F(7, 6)}, cost_ok=_cost_sunzw, bernoulli_index=_bern_small),
        D("b2", "C(p-1,k) C(p+k,k) = (-1)^k (1 - p^2 H_k^(2)) mod p^4, all 1<=k<p",
          5, 4, _b2, {"const": F(1), "p2_H2": F(-1)}),
        D("binom-pm", "C(p-1,k) = (-1)^k (1 - p H_k) mod p^2, all 1<=k<p", 5, 2, _binom_pm,
          {"const": F(1), "p_H": F(-1)}),
        D("b5", "A_{p-1} = 1 + p^2 H2 - 2p^3 H3 + 3p^4 H4 - 2p^4 sum H_k^(2)/k^2 mod p^5",
          7, 5, _b5, {"const": F(1), "p2_H2": F(1), "p3_H3": F(-2), "p4_H4": F(3),
                      "p4_S": F(-2)}),
        D("b6", "sum_{k<p} H_k^(2)/k^2 = 0 mod p", 7, 1, _b6),
        D("b7", "H_{p-1}^(3) = 0 mod p^2", 7, 2, _b7),
        D("b8", "H_{p-1}^(4) = 0 mod p", 7, 1, _b8),
        D("new1", "sum_{k<p} H_k^(2)/k^2 = sum_{k<=(p-1)/2} 1/k^4 mod p", 7, 1, _new1),
        D("new2", "sum_{k<=(p-1)/2} 1/k^4 = 0 mod p", 7, 1, _new2),
        D("b9", "A_{p-1} = 1 + p^2 H_{p-1}^(2) mod p^5", 7, 5, _b9,
          {"const": F(1), "p2_H2": F(1)}),
        D("b10", "H_{p-1}^(2) = (4/3 B_{p-3} - 1/2 B_{2p-4}) p"
          " + (4/9 B_{p-3} - 1/4 B_{2p-4}) p^2 mod p^3", 7, 3, _b10,
          {"p_B": F(4, 3), "p_B2": F(-1, 2), "p2_B": F(4, 9), "p2_B2": F(-1, 4)},
          bernoulli_index=_bern_pair),
        D("b11", "H_{p-1}^(2) = (4/3 B_{p-3} - 1/2 B_{2p-4}) p + 1/9 p^2 B_{p-3} mod p^3",
          7, 3, _b11, {"p_B": F(4, 3), "p_B2": F(-1, 2), "p2_B": F(1, 9)},
          bernoulli_index=_bern_pair),
        D("c3", "A'_{p-1} = 1 + p sum (-1)^k/(p+k) C(p-1,k)(1 - p^2 H_k^(2)) mod p^5",
          7, 5, _c3, {"const": F(1), "p2_H2": F(-1)}),
        D("c4c5-mcintosh", "exact partial fractions at n=p-1, x=p; C(2p-1,p-1) = 1 - p^2 H2 mod p^5",
          7, 5, _mcintosh, {"const": F(1), "p2_H2": F(-1)}),
        D("c6", "p sum (-1)^k/(p+k) C(p-1,k) = p^2 H_{p-1}^(2) mod p^5", 7, 5, _c6,
          {"p2_H2": F(1)}),
        D("new4", "p^3 sum (-1)^k/(p+k) C(p-1,k) H_k^(2)"
          " = p^3 sum H_k^(2)/(p+k) - p^4 sum H_k H_k^(2)/(p+k) mod p^5", 7, 5, _new4,
          {"p3_S": F(1), "p4_T": F(-1)}),
        D("new5", "sum H_k H_k^(2)/(p+k) = sum H_k H_k^(2)/k = 0 mod p", 7, 1, _new5),
        D("wz2", "p^2 sum H_k H_k^(2)/k = 7/2 H_{p-1}^(2) - H_{(p-1)/2}^(2) mod p^3",
          7, 3, _wz2, {"H2": F(7, 2), "H2_half": F(-1)}),
        D("wz3", "H_{(p-1)/2}^(2) = (14/3 B_{p-3} - 7/4 B_{2p-4}) p"
          " + (14/9 B_{p-3} - 7/8 B_{2p-4}) p^2 mod p^3", 7, 3, _wz3,
          {"p_B": F(14, 3), "p_B2": F(-7, 4), "p2_B": F(14, 9), "p2_B2": F(-7, 8)},
          bernoulli_index=_bern_pair),
        D("new6", "sum H_k^(2)/(p+k) = sum H_k^(2)/k mod p^2", 7, 2, _new6,
          {"S": F(1)}),
        D("new7", "p^3 sum (-1)^k/(p+k) C(p-1,k) H_k^(2) = p^3 sum H_k^(2)/k mod p^5",
          7, 5, _new7, {"p3_S": F(1)}),
        D("lw2", "sum H_k^(2)/k = 3/p^2 H_{p-1} mod p^2", 7, 2, _lw2,
          {"H_over_p2": F(3)}),
        D("new9", "p^3 sum (-1)^k/(p+k) C(p-1,k) H_k^(2) = 3p H_{p-1} mod p^5",
          7, 5, _new9, {"pH": F(3)}),
        D("lw3", "p H_{p-1} = -p^2/2 H_{p-1}^(2) mod p^5", 7, 5, _lw3,
          {"p2_H2": F(-1, 2)}),
        D("new10", "A'_{p-1} = 1 + 5/2 p^2 H_{p-1}^(2) mod p^5", 7, 5, _new10,
          {"const": F(1), "p2_H2": F(5, 2)}),
        D("wolstenholme", "H_{p-1} = 0 mod p^2", 5, 2, _wolstenholme),
        D("hp2", "H_{p-1}^(2) = 0 mod p", 5, 1, _hp2),
        D("mestrovic67", "H_{p-1}/p = -1/2 H_{p-1}^(2) mod p^3", 7, 3, _mestrovic,
          {"H2": F(-1, 2)}),
    ]


REGISTRY: tuple[CheckDescriptor, ...] = tuple(_build_registry())
_BY_ID = {d.id: d for d in REGISTRY}
assert len(_BY_ID) == len(REGISTRY), "duplicate check ids"


def registry() -> list[CheckDescriptor]:
    return list(REGISTRY)


def get_check(check_id: str) -> CheckDescriptor:
    try:
        return _BY_ID[check_id]
    except KeyError:
        raise UnknownCheck(check_id) from None


def _residue(q: Fraction, m: ModulusPE) -> Residue | None:
    try:
        return reduce_mod(q, m)
    except NegativeValuation:
        return None


def _prepare(desc: CheckDescriptor, p: int, params: Params | None, force: bool,
             caps: Caps) -> tuple[dict, int]:
    if not is_prime(p):
        raise PreconditionViolated(f"{p} is not prime")
    if p < desc.min_p:
        raise PreconditionViolated(f"{desc.id} requires p >= {desc.min_p}, got {p}")
    full = desc.params_for(p, params)
    if desc.validate:
        desc.validate(p, full)
    if desc.cost_ok and not force and not desc.cost_ok(p, full, caps):
        where = f"p={p}" + (f" {full}" if full else "")
        raise CostGated(f"{desc.id} at {where} exceeds the cost cap; use force")
    e = desc.exponent_for(p, full)
    try:
        ModulusPE(p, e)
    except LimitExceeded as exc:
        raise PreconditionViolated(f"{desc.id}: {exc}") from None
    return full, e


def run_check(check_id: str, p: int, params: Params | None = None, *,
              force: bool = False, cache: BernoulliCache | None = None,
              overrides: Overrides | None = None, caps: Caps = DEFAULT_CAPS) -> CheckResult:
    """Evaluate one check at one prime.

    Raises PreconditionViolated (or its subclass CostGated) when the
    instance is not admissible, UnknownCheck for an unregistered id.
    """
    desc = get_check(check_id)
    full, e = _prepare(desc, p, params, force, caps)
    coeffs = dict(desc.coeffs)
    if overrides and check_id in overrides:
        unknown = set(overrides[check_id]) - set(coeffs)
        if unknown:
            raise PreconditionViolated(f"{check_id}: no coefficients {sorted(unknown)}")
        coeffs.update({k: F(v) for k, v in overrides[check_id].items()})

    m = ModulusPE(p, e)
    t0 = time.perf_counter()
    legs = desc.legs(PrimeContext(p, cache), coeffs, full)
    failed = [leg for leg in legs
              if not (leg.lhs == leg.rhs if leg.exact else congruent(leg.lhs, leg.rhs, m))]
    elapsed = time.perf_counter() - t0

    shown = failed[0] if failed else legs[-1]
    detail = ""
    if failed:
        detail = f"failing leg {shown.label}: v_p(lhs - rhs) = {valuation(shown.lhs - shown.rhs, p)}"
        if len(failed) > 1:
            detail += f" ({len(failed)} of {len(legs)} legs fail)"
    return CheckResult(
        id=check_id, p=p, e=e, status="fail" if failed else "pass",
        lhs_residue=_residue(shown.lhs, m), rhs_residue=_residue(shown.rhs, m),
        elapsed=elapsed, params=full, detail=detail,
    )


def _skip(desc: CheckDescriptor, p: int, params: Params | None, reason: str) -> CheckResult:
    try:
        full = desc.params_for(p, params)
        e = desc.exponent_for(p, full)
    except (PreconditionViolated, KeyError):
        full, e = dict(params or {}), None
    return CheckResult(id=desc.id, p=p, e=e, status="skip", params=full, detail=reason)


_WORKER_CACHE: BernoulliCache | None = None


def _init_worker(table: list[Fraction]) -> None:
    global _WORKER_CACHE
    # the parent computed or validated this table already
    _WORKER_CACHE = BernoulliCache(table, validate=False)


def _task(args) -> CheckResult:
    check_id, p, params, force, overrides, caps = args
    return _run_or_skip(check_id, p, params, force, overrides, caps, _WORKER_CACHE)


def _run_or_skip(check_id, p, params, force, overrides, caps, cache) -> CheckResult:
    desc = get_check(check_id)
    try:
        return run_check(check_id, p, params, force=force, cache=cache,
                         overrides=overrides, caps=caps)
    except PreconditionViolated as exc:
        return _skip(desc, p, params, str(exc))


def resolve_check_ids(check_ids: str | Iterable[str]) -> list[str]:
    if check_ids == "all" or check_ids is None:
        return [d.id for d in REGISTRY]
    ids = [check_ids] if isinstance(check_ids, str) else list(check_ids)
    if "all" in ids:
        return [d.id for d in REGISTRY]
    for cid in ids:
        get_check(cid)
    return ids


def default_parallelism() -> int:
    env = os.environ.get("APERY_LAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def warm_bernoulli(cache: BernoulliCache, ids: Sequence[str], primes: Sequence[int],
                   params: Mapping[str, Params] | None = None) -> int:
    """Fill the cache up to the largest index any (check, prime) pair needs."""
    top = 0
    for cid in ids:
        desc = get_check(cid)
        for p in primes:
            if p < desc.min_p:
                continue
            try:
                full = desc.params_for(p, (params or {}).get(cid))
                top = max(top, desc.bernoulli_index(p, full))
            except (PreconditionViolated, KeyError):
                continue
    cache.warm(top)
    return top


def run_suite(prime_lo: int, prime_hi: int, check_ids: str | Iterable[str] = "all",
              parallelism: int = 1, *, params: Mapping[str, Params] | None = None,
              force_expensive: bool = False, overrides: Overrides | None = None,
              cache: BernoulliCache | None = None, caps: Caps = DEFAULT_CAPS,
              chain_check: bool = True) -> list[CheckResult]:
    """Run every admissible (check, prime) pair for primes in [prime_lo, prime_hi].

    Inadmissible pairs come back as ``skip`` rows. Results are sorted by
    (p, id) whatever the execution order.
    """
    if prime_lo < 2 or prime_hi < 2:
        raise ValueError("prime range endpoints must be >= 2")
    if prime_lo > prime_hi:
        raise ValueError(f"empty prime range {prime_lo}..{prime_hi}")
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    ids = resolve_check_ids(check_ids)
    primes = primes_between(prime_lo, prime_hi)
    cache = cache or DEFAULT_BERNOULLI
    params = params or {}
    top = warm_bernoulli(cache, ids, primes, params)
    log.debug("bernoulli cache warmed to index %d", top)

    tasks = [(cid, p, params.get(cid), force_expensive, overrides, caps)
             for p in primes for cid in ids]
    if parallelism == 1 or len(tasks) < 2:
        results = [_run_or_skip(*t, cache) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=parallelism, initializer=_init_worker,
                                 initargs=(cache.table(),)) as pool:
            results = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * parallelism))))
    results.sort(key=lambda r: (r.p, r.id))
    if chain_check:
        violations = chain_violations(results)
        if violations:
            raise ChainConsistencyError("; ".join(violations))
    return results


CHAINS = (
    (("b9", "b11"), "a3"),
    (("new10", "b11"), "a5"),
)


def chain_violations(results: Iterable[CheckResult]) -> list[str]:
    """Premises that pass while their conclusion fails, per prime."""
    by_p: dict[int, dict[str, str]] = {}
    for r in results:
        by_p.setdefault(r.p, {})[r.id] = r.status
    out = []
    for p, status in sorted(by_p.items()):
        for premises, conclusion in CHAINS:
            if all(status.get(x) == "pass" for x in premises) and status.get(conclusion) == "fail":
                out.append(f"p={p}: {' and '.join(premises)} pass but {conclusion} fails")
    return out
