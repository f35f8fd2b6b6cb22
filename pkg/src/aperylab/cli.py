"""Command-line interface: ``verify``, ``identities`` and ``compute``.

Exit codes: 0 when everything passes, 1 on any failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .arith import ModulusPE, format_rational, parse_rational, reduce_mod
from .congruences import (
    chain_violations,
    default_parallelism,
    get_check,
    registry,
    resolve_check_ids,
    run_suite,
)
from .errors import AperyLabError, BernoulliCacheError, NegativeValuation, UnknownCheck
from .identities import DEFAULT_WINDOWS, IDENTITIES, run_identity_window
from .report import FORMATS, Report, render
from .sequences import (
    DEFAULT_BERNOULLI,
    BernoulliCache,
    apery_a,
    apery_a_prime,
    bernoulli,
    harmonic,
)

log = logging.getLogger("aperylab")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_RANGE = re.compile(r"^\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    prime_lo: int = 5
    prime_hi: int = 97
    check_ids: list[str] | str = "all"
    identity_windows: list[tuple[str, int, int]] = field(default_factory=list)
    parallelism: int = 1
    format: str = "json"
    output_path: str | None = None
    force_expensive: bool = False
    bernoulli_cache_path: str | None = None
    params: dict[str, dict[str, int]] = field(default_factory=dict)
    overrides: dict[str, dict] = field(default_factory=dict)

    def __post_init__(self):
        if self.prime_lo > self.prime_hi:
            raise UsageError(f"empty prime range {self.prime_lo}..{self.prime_hi}")
        if self.prime_lo < 2:
            raise UsageError("primes must be >= 2")
        if self.parallelism < 1:
            raise UsageError("--threads must be >= 1")
        if self.format not in FORMATS:
            raise UsageError(f"--format must be one of {', '.join(FORMATS)}")

    def echo(self) -> dict[str, str]:
        checks = self.check_ids if isinstance(self.check_ids, str) else ",".join(self.check_ids)
        out = {
            "primes": f"{self.prime_lo}..{self.prime_hi}",
            "checks": checks,
            "threads": str(self.parallelism),
            "format": self.format,
            "force_expensive": str(self.force_expensive).lower(),
            "bernoulli_cache": self.bernoulli_cache_path or "",
        }
        if self.identity_windows:
            out["windows"] = ",".join(f"{i}:{lo}..{hi}" for i, lo, hi in self.identity_windows)
        if self.params:
            out["params"] = ";".join(f"{cid}:" + ",".join(f"{k}={v}" for k, v in p.items())
                                     for cid, p in self.params.items())
        if self.overrides:
            out["mutations"] = ";".join(f"{cid}:{k}={format_rational(v)}"
                                        for cid, m in self.overrides.items() for k, v in m.items())
        return out


def parse_range(text: str) -> tuple[int, int]:
    m = _RANGE.match(text)
    if not m:
        raise UsageError(f"expected LO..HI, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def parse_window(text: str) -> tuple[str, int, int]:
    name, sep, rng = text.partition(":")
    if not sep:
        raise UsageError(f"expected id:lo..hi, got {text!r}")
    if name not in IDENTITIES:
        raise UsageError(f"unknown identity {name!r}; known: {', '.join(IDENTITIES)}")
    lo, hi = parse_range(rng)
    if lo < 0 or lo > hi:
        raise UsageError(f"bad window {rng!r}")
    return name, lo, hi


def parse_modulus(text: str) -> ModulusPE:
    base, sep, exp = text.partition("^")
    try:
        return ModulusPE(int(base), int(exp) if sep else 1)
    except (ValueError, AperyLabError) as exc:
        raise UsageError(f"bad modulus {text!r}: {exc}") from None


def parse_param(text: str) -> tuple[str, dict[str, int]]:
    """``kummer:k=2,b=4`` -> ("kummer", {"k": 2, "b": 4})."""
    cid, sep, rest = text.partition(":")
    if not sep:
        raise UsageError(f"expected id:name=value,..., got {text!r}")
    out = {}
    for item in rest.split(","):
        k, eq, v = item.partition("=")
        if not eq:
            raise UsageError(f"bad parameter {item!r}")
        try:
            out[k.strip()] = int(v)
        except ValueError:
            raise UsageError(f"parameter {k!r} must be an integer") from None
    return cid, out


def parse_mutation(text: str) -> tuple[str, str, object]:
    """``a1:p3_B=1/3`` -> ("a1", "p3_B", Fraction(1, 3))."""
    cid, sep, rest = text.partition(":")
    name, eq, value = rest.partition("=")
    if not (sep and eq):
        raise UsageError(f"expected id:coefficient=value, got {text!r}")
    try:
        return cid, name, parse_rational(value)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad rational {value!r}") from None


def _load_cache(path: str | None) -> BernoulliCache:
    if not path:
        return DEFAULT_BERNOULLI
    if Path(path).exists():
        try:
            return BernoulliCache.load(path)
        except BernoulliCacheError as exc:
            raise UsageError(str(exc)) from None
    return BernoulliCache()


def _emit(report: Report, config: RunConfig) -> None:
    text = render(report, config.format)
    if config.output_path:
        Path(config.output_path).write_text(text)
    else:
        sys.stdout.write(text)
    s = report.summary()
    print(f"{s['pass']} pass, {s['fail']} fail, {s['skip']} skip; identities "
          f"{s['identities_pass']} pass, {s['identities_fail']} fail", file=sys.stderr)
    for v in report.chain_violations:
        print(f"chain violation: {v}", file=sys.stderr)


def cmd_verify(config: RunConfig) -> int:
    try:
        ids = resolve_check_ids(config.check_ids)
        for cid, names in config.overrides.items():
            missing = set(names) - set(get_check(cid).coeffs)
            if missing:
                raise UsageError(f"check {cid!r} has no coefficient {sorted(missing)}")
        for cid, names in config.params.items():
            desc = get_check(cid)
            known = set(desc.defaults(2) if desc.defaults else ())
            if set(names) - known:
                raise UsageError(f"check {cid!r} takes parameters {sorted(known) or 'none'}")
    except UnknownCheck as exc:
        raise UsageError(f"unknown check {exc.args[0]!r}") from None
    cache = _load_cache(config.bernoulli_cache_path)
    t0 = time.perf_counter()
    results = run_suite(config.prime_lo, config.prime_hi, ids, config.parallelism,
                        params=config.params, force_expensive=config.force_expensive,
                        overrides=config.overrides, cache=cache, chain_check=False)
    report = Report(config=config.echo(), results=results,
                    chain_violations=chain_violations(results))
    report.wall_time = time.perf_counter() - t0
    if config.bernoulli_cache_path:
        cache.save(config.bernoulli_cache_path)
    _emit(report, config)
    return EXIT_FAIL if report.failures else EXIT_OK


def cmd_identities(config: RunConfig) -> int:
    windows = config.identity_windows or list(DEFAULT_WINDOWS)
    t0 = time.perf_counter()
    reports = [run_identity_window(i, lo, hi) for i, lo, hi in windows]
    report = Report(config=config.echo() | {"windows": ",".join(
        f"{i}:{lo}..{hi}" for i, lo, hi in windows)}, identity_reports=reports)
    for key in ("primes", "checks", "force_expensive", "bernoulli_cache"):
        report.config.pop(key, None)
    report.wall_time = time.perf_counter() - t0
    _emit(report, config)
    return EXIT_FAIL if report.failures else EXIT_OK


SEQUENCES = ("apery", "apery-prime", "bernoulli", "harmonic")


def cmd_compute(what: str, n: int, order: int = 1, mod: str | None = None) -> int:
    if n < 0:
        raise UsageError("n must be >= 0")
    if order < 1:
        raise UsageError("--order must be >= 1")
    if what == "apery":
        value = apery_a(n)
    elif what == "apery-prime":
        value = apery_a_prime(n)
    elif what == "bernoulli":
        value = bernoulli(n)
    elif what == "harmonic":
        value = harmonic(n, order)
    else:
        raise UsageError(f"unknown sequence {what!r}")
    if mod is None:
        print(format_rational(value))
        return EXIT_OK
    m = parse_modulus(mod)
    try:
        print(reduce_mod(value, m).value)
    except NegativeValuation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aperylab",
        description="Exact verification of Apery-number supercongruences.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_output(p):
        p.add_argument("--format", default="json", choices=FORMATS)
        p.add_argument("--out", help="write the report here instead of stdout")

    v = sub.add_parser("verify", help="run congruence checks over a prime range")
    v.add_argument("--primes", default="5..97", help="inclusive range LO..HI")
    v.add_argument("--checks", default="all", help="comma-separated ids, or 'all'")
    add_output(v)
    v.add_argument("--threads", type=int, default=None)
    v.add_argument("--force-expensive", action="store_true")
    v.add_argument("--bernoulli-cache", metavar="PATH")
    v.add_argument("--param", action="append", default=[], metavar="ID:NAME=INT,...",
                   help="parameters for a family check, e.g. kummer:k=2,b=4")
    v.add_argument("--mutate", action="append", default=[], metavar="ID:COEFF=Q",
                   help="replace a registry coefficient (negative control)")
    v.add_argument("--list", action="store_true", help="list check ids and exit")

    i = sub.add_parser("identities", help="verify the combinatorial identities exactly")
    i.add_argument("--window", action="append", default=[], metavar="ID:LO..HI")
    add_output(i)

    c = sub.add_parser("compute", help="print an exact sequence value")
    c.add_argument("sequence", choices=SEQUENCES)
    c.add_argument("n", type=int)
    c.add_argument("--order", type=int, default=1, help="harmonic order r")
    c.add_argument("--mod", metavar="P^E", help="reduce modulo a prime power")
    return parser


def _threads(arg: int | None) -> int:
    env = os.environ.get("APERY_LAB_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"APERY_LAB_THREADS must be an integer, got {env!r}") from None
    return arg if arg is not None else default_parallelism()


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "compute":
            return cmd_compute(args.sequence, args.n, args.order, args.mod)
        if args.command == "identities":
            config = RunConfig(identity_windows=[parse_window(w) for w in args.window],
                               format=args.format, output_path=args.out)
            return cmd_identities(config)
        if args.list:
            for d in registry():
                print(f"{d.id}\tmin_p={d.min_p}\t{d.anchor}")
            return EXIT_OK
        lo, hi = parse_range(args.primes)
        checks = "all" if args.checks.strip() == "all" else [
            c.strip() for c in args.checks.split(",") if c.strip()]
        params = dict(parse_param(t) for t in args.param)
        overrides: dict[str, dict] = {}
        for t in args.mutate:
            cid, name, value = parse_mutation(t)
            overrides.setdefault(cid, {})[name] = value
        config = RunConfig(prime_lo=lo, prime_hi=hi, check_ids=checks,
                           parallelism=_threads(args.threads), format=args.format,
                           output_path=args.out, force_expensive=args.force_expensive,
                           bernoulli_cache_path=args.bernoulli_cache, params=params,
                           overrides=overrides)
        return cmd_verify(config)
    except UsageError as exc:
        print(f"aperylab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
