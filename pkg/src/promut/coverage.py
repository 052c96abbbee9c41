"""Sub-goal, clause and predicate coverage from trace events."""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, Optional, Sequence, Tuple

from .engine import Budget, Engine, TraceEvent
from .harness import TestCase, run_case
from .operators import subgoals
from .runner import CampaignReport
from .terms import PredKey, Program, TermPath

Subject = Tuple[PredKey, int, TermPath]

ROW_COLUMNS = (
    "loc",
    "predicates",
    "clauses",
    "clause_coverage",
    "predicate_coverage",
    "subgoal_coverage",
    "mutation_coverage",
)


def percent(covered: int, total: int) -> Optional[float]:
    return None if total == 0 else 100.0 * covered / total


@dataclass(frozen=True)
class CoverageReport:
    subgoal_total: int
    subgoal_covered: int
    clause_total: int
    clause_covered: int
    predicate_total: int
    predicate_covered: int
    uncovered: Tuple[Subject, ...] = ()
    covered_subjects: FrozenSet[Subject] = frozenset()

    @property
    def subgoal_pct(self) -> Optional[float]:
        return percent(self.subgoal_covered, self.subgoal_total)

    @property
    def clause_pct(self) -> Optional[float]:
        return percent(self.clause_covered, self.clause_total)

    @property
    def predicate_pct(self) -> Optional[float]:
        return percent(self.predicate_covered, self.predicate_total)


def inventory(program: Program) -> Tuple[Subject, ...]:
    """Every sub-goal of the program. A fact contributes its implicit ``true``."""
    return tuple((c.key, c.index, p) for c in program.clauses for p in subgoals(c))


def from_exits(program: Program, exited: FrozenSet[Subject]) -> CoverageReport:
    """Derive the three tiers from the set of sub-goals that exited."""
    subjects = inventory(program)
    covered_clauses = set()
    clause_total = 0
    for clause in program.clauses:
        clause_total += 1
        if all((clause.key, clause.index, p) in exited for p in subgoals(clause)):
            covered_clauses.add((clause.key, clause.index))
    covered_preds = [
        key
        for key in program.predicates
        if all((key, c.index) in covered_clauses for c in program.clauses_for(key))
    ]
    hit = [s for s in subjects if s in exited]
    return CoverageReport(
        subgoal_total=len(subjects),
        subgoal_covered=len(hit),
        clause_total=clause_total,
        clause_covered=len(covered_clauses),
        predicate_total=len(program.predicates),
        predicate_covered=len(covered_preds),
        uncovered=tuple(s for s in subjects if s not in exited),
        covered_subjects=frozenset(hit),
    )


def exits_for_case(engine: Engine, case: TestCase, budget: Budget, forward=None) -> FrozenSet[Subject]:
    """Sub-goals that exited while running one case; ``forward`` sees every event."""
    exited = set()

    def sink(event: TraceEvent) -> None:
        if forward is not None:
            forward(event)
        if event.port == "exit" and event.pred is not None:
            exited.add((event.pred, event.clause, event.path))

    run_case(engine, case, budget, sink)
    return frozenset(exited)


def measure(program: Program, cases: Sequence[TestCase], budget: Optional[Budget] = None) -> CoverageReport:
    """Run every case with tracing and report what the suite exercised.

    Exits count whatever the verdict of the test that produced them.
    """
    budget = budget or Budget()
    engine = Engine(program)
    exited: set = set()
    for case in cases:
        exited |= exits_for_case(engine, case, budget)
    return from_exits(program, frozenset(exited))


@dataclass(frozen=True)
class ComparisonRow:
    file: str
    loc: int
    predicates: int
    clauses: int
    clause_coverage: Optional[float]
    predicate_coverage: Optional[float]
    subgoal_coverage: Optional[float]
    mutation_coverage: Optional[float]

    def columns(self) -> dict:
        """The seven data columns, keyed by name; the file name is the row key."""
        return {name: getattr(self, name) for name in ROW_COLUMNS}


def compare(coverage: CoverageReport, campaign: CampaignReport, program: Program, file: str = "") -> ComparisonRow:
    score = campaign.mutation_score
    return ComparisonRow(
        file=file,
        loc=program.loc,
        predicates=len(program.predicates),
        clauses=len(program.clauses),
        clause_coverage=coverage.clause_pct,
        predicate_coverage=coverage.predicate_pct,
        subgoal_coverage=coverage.subgoal_pct,
        mutation_coverage=None if score is None else 100.0 * score,
    )
