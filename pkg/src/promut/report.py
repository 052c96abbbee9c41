"""Rendering of campaign, coverage and comparison reports as tables or JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, Iterable, Optional

from .coverage import ROW_COLUMNS, ComparisonRow, CoverageReport
from .operators import ALL_OPERATORS, OperatorId
from .runner import CampaignReport, Tally

SCHEMA_VERSION = "1.0.0"


@dataclass(frozen=True)
class RenderedReport:
    format: str
    body: str
    schema_version: str = SCHEMA_VERSION

    def __str__(self) -> str:
        return self.body


def format_percent(value: Optional[float]) -> str:
    return "undefined" if value is None else f"{value:.2f}%"


def _score_percent(score: Optional[float]) -> Optional[float]:
    return None if score is None else 100.0 * score


def _dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _pred_fields(key) -> dict:
    return {"predicate": key[0], "arity": key[1]}


# --- campaign -------------------------------------------------------------------


def campaign_json(report: CampaignReport, matrix: bool = False) -> dict:
    """Everything in a campaign report that does not depend on the clock."""
    per_operator = [
        {"operator": op.cli_name, "label": op.label, "alive": t.alive, "dead": t.dead, "timeout": t.timeout}
        for op, t in report.per_operator.items()
    ]
    totals = report.totals
    mutants = []
    for r in report.results:
        site = r.site
        entry = {
            "id": site.id,
            "operator": site.operator.cli_name,
            **_pred_fields(site.predicate),
            "clause": site.clause,
            "path": None if site.path is None else list(site.path),
            "status": r.status.value,
            "first_killing_test": r.first_killing_test,
            "steps_used": r.steps_used,
        }
        if matrix:
            entry["verdicts"] = [{"test": name, "verdict": v.value} for name, v in r.verdicts]
        mutants.append(entry)
    cfg = report.config
    return {
        "schema_version": SCHEMA_VERSION,
        "per_operator": per_operator,
        "totals": {"alive": totals.alive, "dead": totals.dead, "timeout": totals.timeout},
        "mutation_score": report.mutation_score,
        "mutants": mutants,
        "baseline": {
            "tests": [
                {"suite": o.case.suite, "name": o.case.name, "verdict": o.verdict.value, "steps": o.steps_used}
                for o in report.baseline.outcomes
            ],
            "total_steps": report.baseline.total_steps,
        },
        "config": {
            "ops": [op.cli_name for op in cfg.ops],
            "step_budget": cfg.step_budget,
            "step_constant": cfg.step_constant,
            "timeout_constant_millis": cfg.timeout_constant_millis,
            "fail_fast_per_mutant": cfg.fail_fast_per_mutant,
        },
    }


def _matrix_lines(rows: Iterable, totals: Tally, score: Optional[float]) -> list:
    width = max(len(op.label) for op in ALL_OPERATORS) + 2
    lines = [f"{'operator':<{width}}{'alive/dead':<12}timeouts"]
    for label, t in rows:
        lines.append(f"{label:<{width}}{f'{t.alive}/{t.dead}':<12}(timeouts: {t.timeout})")
    lines.append(f"{'total':<{width}}{f'{totals.alive}/{totals.dead}':<12}(timeouts: {totals.timeout})")
    lines.append(f"score: {format_percent(_score_percent(score))}")
    return lines


def render_operator_matrix(report: CampaignReport, fmt: str = "table", matrix: bool = False) -> RenderedReport:
    """Per-operator alive/dead counts in catalogue order, then totals and score."""
    if fmt == "json":
        return RenderedReport("json", _dumps(campaign_json(report, matrix)))
    if fmt != "table":
        raise ValueError(f"unknown format {fmt!r}")
    rows = [(op.label, t) for op, t in report.per_operator.items()]
    lines = _matrix_lines(rows, report.totals, report.mutation_score)
    if matrix:
        lines.append("")
        for r in report.results:
            cells = " ".join(f"{name}={v.value}" for name, v in r.verdicts)
            lines.append(f"#{r.site.id} {r.site.describe()} -> {r.status.value}: {cells}")
    return RenderedReport("table", "\n".join(lines) + "\n")


def tallies_from_json(text: str) -> Dict[OperatorId, Tally]:
    """Read per-operator counts back from rendered campaign JSON."""
    data = json.loads(text)
    out = {}
    for row in data["per_operator"]:
        out[OperatorId.parse(row["operator"])] = Tally(row["alive"], row["dead"], row["timeout"])
    return out


# --- coverage -------------------------------------------------------------------


def coverage_json(cov: CoverageReport) -> dict:
    def tier(covered, total, pct):
        return {"covered": covered, "total": total, "pct": pct}

    return {
        "schema_version": SCHEMA_VERSION,
        "subgoal": tier(cov.subgoal_covered, cov.subgoal_total, cov.subgoal_pct),
        "clause": tier(cov.clause_covered, cov.clause_total, cov.clause_pct),
        "predicate": tier(cov.predicate_covered, cov.predicate_total, cov.predicate_pct),
        "uncovered": [
            {**_pred_fields(key), "clause": clause, "path": list(path)} for key, clause, path in cov.uncovered
        ],
    }


def render_coverage(cov: CoverageReport, fmt: str = "table") -> RenderedReport:
    if fmt == "json":
        return RenderedReport("json", _dumps(coverage_json(cov)))
    lines = [
        f"sub-goal coverage   {cov.subgoal_covered}/{cov.subgoal_total}  {format_percent(cov.subgoal_pct)}",
        f"clause coverage     {cov.clause_covered}/{cov.clause_total}  {format_percent(cov.clause_pct)}",
        f"predicate coverage  {cov.predicate_covered}/{cov.predicate_total}  {format_percent(cov.predicate_pct)}",
    ]
    if cov.uncovered:
        lines.append("uncovered sub-goals:")
        for (name, arity), clause, path in cov.uncovered:
            lines.append(f"  {name}/{arity} clause {clause} at {list(path)}")
    return RenderedReport("table", "\n".join(lines) + "\n")


# --- comparison rows ------------------------------------------------------------

_HEADERS = {
    "loc": "LoC",
    "predicates": "Predicates",
    "clauses": "Clauses",
    "clause_coverage": "Clause Coverage",
    "predicate_coverage": "Predicate Coverage",
    "subgoal_coverage": "Sub-Goal Coverage",
    "mutation_coverage": "Mutation Coverage",
}


def render_comparison(rows: Iterable[ComparisonRow], fmt: str = "table") -> RenderedReport:
    rows = list(rows)
    if fmt == "json":
        return RenderedReport(
            "json", _dumps({"schema_version": SCHEMA_VERSION, "rows": {r.file: r.columns() for r in rows}})
        )
    header = ["Prolog File"] + [_HEADERS[c] for c in ROW_COLUMNS]
    table = [header]
    for r in rows:
        cells = [r.file]
        for name, value in r.columns().items():
            cells.append(format_percent(value) if name.endswith("_coverage") else str(value))
        table.append(cells)
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = [" | ".join(cell.ljust(w) if i == 0 else cell.rjust(w) for i, (cell, w) in enumerate(zip(row, widths)))
             for row in table]
    lines.insert(1, "-+-".join("-" * w for w in widths))
    return RenderedReport("table", "\n".join(lines) + "\n")
