"""Report assembly and serialization.

Every numeric field is emitted as a decimal string; residues and rationals
routinely exceed fixed-width number types.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any

from . import __version__
from .arith import format_rational
from .congruences import CheckResult
from .identities import IdentityReport

FORMATS = ("json", "csv", "md")
RESULT_FIELDS = ("id", "p", "e", "status", "lhs", "rhs", "elapsed_ms", "params", "detail")


def _params_str(params: dict) -> str:
    return ",".join(f"{k}={v}" for k, v in params.items())


def result_row(r: CheckResult) -> dict[str, str]:
    return {
        "id": r.id,
        "p": str(r.p),
        "e": "" if r.e is None else str(r.e),
        "status": r.status,
        "lhs": "" if r.lhs_residue is None else str(r.lhs_residue.value),
        "rhs": "" if r.rhs_residue is None else str(r.rhs_residue.value),
        "elapsed_ms": f"{r.elapsed * 1000:.3f}",
        "params": _params_str(r.params),
        "detail": r.detail,
    }


def identity_row(rep: IdentityReport) -> dict[str, Any]:
    return {
        "id": rep.identity_id,
        "n_lo": str(rep.n_lo),
        "n_hi": str(rep.n_hi),
        "status": "pass" if rep.holds else "fail",
        "failures": [
            {"n": str(n), "lhs": format_rational(lhs), "rhs": format_rational(rhs)}
            for n, lhs, rhs in rep.failures
        ],
        "note": rep.note or "",
    }


@dataclass
class Report:
    config: dict[str, str]
    results: list[CheckResult] = field(default_factory=list)
    identity_reports: list[IdentityReport] = field(default_factory=list)
    chain_violations: list[str] = field(default_factory=list)
    wall_time: float = 0.0
    tool_version: str = __version__

    def summary(self) -> dict[str, int]:
        counts = {"pass": 0, "fail": 0, "skip": 0}
        for r in self.results:
            counts[r.status] += 1
        counts["identities_pass"] = sum(rep.holds for rep in self.identity_reports)
        counts["identities_fail"] = sum(not rep.holds for rep in self.identity_reports)
        return counts

    @property
    def failures(self) -> int:
        s = self.summary()
        return s["fail"] + s["identities_fail"] + len(self.chain_violations)

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": self.tool_version,
            "config": dict(self.config),
            "results": [result_row(r) for r in self.results],
            "identities": [identity_row(rep) for rep in self.identity_reports],
            "chain_violations": list(self.chain_violations),
            "summary": {k: str(v) for k, v in self.summary().items()},
            "wall_time": f"{self.wall_time:.3f}",
        }


def to_json(report: Report) -> str:
    return canonical_json(report.to_dict())


def canonical_json(data: Any) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def to_csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow((*RESULT_FIELDS, "kind"))
    for r in report.results:
        row = result_row(r)
        writer.writerow((*(row[f] for f in RESULT_FIELDS), "check"))
    for rep in report.identity_reports:
        row = identity_row(rep)
        first = row["failures"][0] if row["failures"] else {"lhs": "", "rhs": ""}
        writer.writerow((row["id"], "", "", row["status"], first["lhs"], first["rhs"], "",
                         f"n={row['n_lo']}..{row['n_hi']}", row["note"], "identity"))
    return buf.getvalue()


def to_markdown(report: Report) -> str:
    lines = [f"# aperylab report (version {report.tool_version})", ""]
    lines += [f"- {k}: `{v}`" for k, v in report.config.items()]
    lines.append("")
    if report.results:
        lines += ["| id | p | e | status | lhs | rhs | elapsed_ms | detail |",
                  "|---|---|---|---|---|---|---|---|"]
        for r in report.results:
            row = result_row(r)
            lines.append("| " + " | ".join(row[f] for f in
                         ("id", "p", "e", "status", "lhs", "rhs", "elapsed_ms", "detail")) + " |")
        lines.append("")
    if report.identity_reports:
        lines += ["| identity | window | status | failures | note |", "|---|---|---|---|---|"]
        for rep in report.identity_reports:
            lines.append(f"| {rep.identity_id} | {rep.n_lo}..{rep.n_hi} | "
                         f"{'pass' if rep.holds else 'fail'} | {len(rep.failures)} | {rep.note or ''} |")
        lines.append("")
    for v in report.chain_violations:
        lines.append(f"- chain violation: {v}")
    s = report.summary()
    lines.append(f"**summary**: {s['pass']} pass, {s['fail']} fail, {s['skip']} skip; "
                 f"identities {s['identities_pass']} pass, {s['identities_fail']} fail; "
                 f"wall time {report.wall_time:.3f}s")
    return "\n".join(lines) + "\n"


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return to_json(report)
    if fmt == "csv":
        return to_csv(report)
    if fmt == "md":
        return to_markdown(report)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
