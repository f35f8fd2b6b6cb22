"""Exit criteria. Every comparison is exact equality of residues."""

import random
import time
from fractions import Fraction

import pytest

from aperylab.arith import is_prime, primes_between
from aperylab.cli import main
from aperylab.congruences import chain_violations, registry, run_check, run_suite
from aperylab.identities import (
    check_partial_fraction,
    lw1_sides,
    random_nonpole,
    run_identity_window,
    wz1_sides,
)
from aperylab.sequences import (
    apery_a,
    apery_a_naive,
    apery_a_prime,
    apery_a_prime_naive,
    bernoulli,
)

criterion = pytest.mark.criterion

PROOF_STEPS = [
    "b2", "binom-pm", "b5", "b6", "b7", "b8", "b9", "b10", "b11", "new1", "new2",
    "c3", "c4c5-mcintosh", "c6", "new4", "new5", "new6", "new7", "wz2", "wz3", "lw2",
    "new9", "lw3", "new10", "mestrovic67", "hp2", "wolstenholme", "a4",
]


def assert_all_pass(results):
    bad = [(r.id, r.p, r.detail) for r in results if r.status != "pass"]
    assert not bad, bad


@criterion(1, "a3, a5 pass for all primes 7..97 in under 10 s")
def test_main_theorems():
    t0 = time.perf_counter()
    res = run_suite(7, 97, ["a3", "a5"], 1)
    elapsed = time.perf_counter() - t0
    assert len(res) == 2 * len(primes_between(7, 97))
    assert_all_pass(res)
    assert elapsed < 10


@criterion(2, "a1, a2 pass for 5..97; p=5 residues 501/501 and 1/1 mod 625")
def test_conjectures():
    res = run_suite(5, 97, ["a1", "a2"], 1)
    assert len(res) == 2 * len(primes_between(5, 97))
    assert_all_pass(res)
    a1, a2 = res[0], res[1]
    assert (a1.id, a1.p, a1.e) == ("a1", 5, 4) and (a2.id, a2.p) == ("a2", 5)
    assert a1.lhs_residue.modulus.value == 625
    assert a1.lhs_residue.value == a1.rhs_residue.value == 501
    assert a2.lhs_residue.value == a2.rhs_residue.value == 1


@criterion(3, "every proof-step check passes for 7..97 in under 2 min at parallelism 4")
def test_proof_steps():
    t0 = time.perf_counter()
    res = run_suite(7, 97, PROOF_STEPS, 4)
    elapsed = time.perf_counter() - t0
    assert len(res) == len(PROOF_STEPS) * len(primes_between(7, 97))
    assert_all_pass(res)
    assert elapsed < 120


@criterion(4, "chain consistency b9 & b11 => a3, new10 & b11 => a5 on 7..97")
def test_chain_consistency():
    res = run_suite(7, 97, ["a3", "a5", "b9", "b11", "new10"], 4, chain_check=True)
    assert chain_violations(res) == []
    by = {(r.id, r.p): r.status for r in res}
    for p in primes_between(7, 97):
        assert by[("b9", p)] == by[("b11", p)] == by[("a3", p)] == "pass"
        assert by[("new10", p)] == by[("a5", p)] == "pass"


@criterion(5, "lemma identities, recurrences, shift-binomial exact on 0..60; 200 partial fractions")
def test_identities():
    assert lw1_sides(1) == (-3, -3)
    assert wz1_sides(1) == (-3, -3)
    for name in ("lw1", "wz1", "lw1-rec", "wz1-rec", "shift-binomial", "partial-fraction"):
        rep = run_identity_window(name, 0, 60)
        assert rep.holds, (name, rep.failures[:3])
    rng = random.Random(5)
    for _ in range(200):
        n = rng.randint(0, 60)
        assert check_partial_fraction(n, random_nonpole(rng, n))


@criterion(6, "Beukers congruences for the five (p, m, r) triples in under 1 min")
def test_beukers():
    t0 = time.perf_counter()
    for p, m, r in [(5, 1, 2), (7, 1, 2), (5, 2, 1), (7, 2, 1), (11, 1, 2)]:
        for cid in ("beukers-a", "beukers-a-prime"):
            res = run_check(cid, p, {"m": m, "r": r})
            assert res.holds and res.e == 3 * r, (cid, p, m, r)
    assert time.perf_counter() - t0 < 60


@criterion(7, "Z.-W. Sun weighted sum passes for 5..47 in under 1 min")
def test_sunzw_sum():
    t0 = time.perf_counter()
    res = run_suite(5, 47, ["sunzw-sum"], 1)
    assert len(res) == len(primes_between(5, 47))
    assert_all_pass(res)
    assert time.perf_counter() - t0 < 60


@criterion(8, "50 random Kummer instances (p <= 200, k <= 3) pass mod p")
def test_kummer_random():
    rng = random.Random(8)
    primes = primes_between(7, 200)
    for _ in range(50):
        p = rng.choice(primes)
        k = rng.randint(1, 3)
        b = rng.randrange(2, p - 2, 2)
        assert b % (p - 1)
        res = run_check("kummer", p, {"k": k, "b": b})
        assert res.holds and res.e == 1, (p, k, b)


@criterion(9, "incremental Apery sums match naive for n <= 100; von Staudt-Clausen to 200")
def test_oracle_equivalence():
    for n in range(101):
        assert apery_a(n) == apery_a_naive(n)
        assert apery_a_prime(n) == apery_a_prime_naive(n)
    for n in range(2, 201, 2):
        expected = 1
        for q in range(2, n + 2):
            if is_prime(q) and n % (q - 1) == 0:
                expected *= q
        assert bernoulli(n).denominator == expected


# Terms that vanish mod p^5 by another verified check, so their coefficient
# cannot be observed: each entry names the check that explains it.
INSENSITIVE = {
    ("b5", "p3_H3"): "b7",
    ("b5", "p4_H4"): "b8",
    ("b5", "p4_S"): "b6",
    ("new4", "p4_T"): "new5",
}


@criterion(10, "mutating a registry coefficient causes a failure on 7..97 and exit code 1")
def test_negative_control(capsys):
    res = run_suite(7, 97, ["a1"], 1, overrides={"a1": {"p3_B": Fraction(1, 3)}})
    assert any(r.status == "fail" for r in res)
    assert main(["verify", "--primes", "7..97", "--checks", "a1",
                 "--mutate", "a1:p3_B=1/3", "--threads", "1"]) == 1
    capsys.readouterr()

    insensitive = set()
    for desc in registry():
        hi = 47 if desc.id == "sunzw-sum" else 97
        for name, value in desc.coeffs.items():
            mutated = run_suite(7, hi, [desc.id], 1, chain_check=False,
                                overrides={desc.id: {name: value + 1}})
            if not any(r.status == "fail" for r in mutated):
                insensitive.add((desc.id, name))
    assert insensitive == set(INSENSITIVE)
    for why in set(INSENSITIVE.values()):
        assert_all_pass(run_suite(7, 97, [why], 1))
