"""PlUnit-style test suites: parsing and execution."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .engine import Budget, BudgetExhausted, Engine, Error, Failure, SolveOutcome, Success
from .errors import DuplicateTestName, ParseError, UnsupportedOption
from .reader import Source, read_items
from .terms import NIL, TRUE, Atom, Compound, Program, Span, Term, list_items
from .writer import format_term


class Expectation(str, enum.Enum):
    SUCCEED = "succeed"
    FAIL = "fail"


class Verdict(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    ERROR = "error"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class TestCase:
    suite: str
    name: str
    goal: Term
    expectation: Expectation = Expectation.SUCCEED
    span: Span = field(default=None, compare=False)

    __test__ = False  # keep pytest from collecting this class

    @property
    def qualified_name(self) -> str:
        return f"{self.suite}:{self.name}"


@dataclass(frozen=True)
class TestOutcome:
    case: TestCase
    verdict: Verdict
    steps_used: int
    wall_millis: float = field(default=0.0, compare=False)
    outcome: Optional[SolveOutcome] = field(default=None, compare=False)

    __test__ = False

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS


@dataclass(frozen=True)
class SuiteRunResult:
    outcomes: Tuple[TestOutcome, ...] = ()

    @property
    def all_green(self) -> bool:
        return all(o.verdict is Verdict.PASS for o in self.outcomes)

    @property
    def total_steps(self) -> int:
        return sum(o.steps_used for o in self.outcomes)

    @property
    def total_wall_millis(self) -> float:
        return sum(o.wall_millis for o in self.outcomes)

    @property
    def failing(self) -> List[str]:
        return [o.case.name for o in self.outcomes if o.verdict is not Verdict.PASS]


def verdict_for(expectation: Expectation, outcome: SolveOutcome) -> Verdict:
    if isinstance(outcome, Error):
        return Verdict.ERROR
    if isinstance(outcome, BudgetExhausted):
        return Verdict.TIMEOUT
    expected = Success if expectation is Expectation.SUCCEED else Failure
    return Verdict.PASS if isinstance(outcome, expected) else Verdict.FAIL


# --- parsing ------------------------------------------------------------------


def _block_name(term: Term, directive: str) -> Optional[str]:
    if type(term) is Compound and term.name == directive and len(term.args) == 1:
        return format_term(term.args[0])
    return None


def _options(term: Term, src: Source, span) -> Expectation:
    items, tail = list_items(term)
    if tail != NIL:
        raise src.error(span[0], "test options must be a proper list")
    expectation = Expectation.SUCCEED
    for opt in items:
        if opt == Atom("fail"):
            expectation = Expectation.FAIL
        else:
            raise src.error(
                span[0], f"unsupported test option {format_term(opt)}", {"fail"}, cls=UnsupportedOption
            )
    return expectation


def parse_suite(source: str) -> List[TestCase]:
    """Test cases from ``begin_tests``/``end_tests`` blocks, in source order.

    Outside blocks only ``use_module`` directives are tolerated, so files that
    load plunit for another Prolog system still read.
    """
    src = Source(source)
    cases: List[TestCase] = []
    suite: Optional[str] = None
    seen: set = set()
    for kind, term, span in read_items(source):
        if kind == "directive":
            begin = _block_name(term, "begin_tests")
            end = _block_name(term, "end_tests")
            if begin is not None:
                if suite is not None:
                    raise src.error(span[0], f"nested begin_tests({begin}) inside {suite}")
                suite = begin
            elif end is not None:
                if end != suite:
                    raise src.error(span[0], f"end_tests({end}) does not close an open block")
                suite = None
            elif type(term) is Compound and term.name == "use_module" and suite is None:
                continue
            else:
                raise src.error(span[0], f"unexpected directive {format_term(term)}", {"begin_tests", "end_tests"})
            continue
        if suite is None:
            raise src.error(span[0], "clauses outside a begin_tests/end_tests block", {"begin_tests"})
        if type(term) is Compound and term.name == ":-" and len(term.args) == 2:
            head, body = term.args
        else:
            head, body = term, TRUE
        if not (type(head) is Compound and head.name == "test" and len(head.args) in (1, 2)):
            raise src.error(span[0], "test blocks may only contain test/1 and test/2 clauses", {"test"})
        name = format_term(head.args[0])
        expectation = _options(head.args[1], src, span) if len(head.args) == 2 else Expectation.SUCCEED
        if (suite, name) in seen:
            raise src.error(span[0], f"duplicate test name {name} in suite {suite}", cls=DuplicateTestName)
        seen.add((suite, name))
        cases.append(TestCase(suite, name, body, expectation, span))
    if suite is not None:
        raise ParseError(f"begin_tests({suite}) is never closed", *src.linecol(len(source)), {"end_tests"})
    return cases


# --- running ------------------------------------------------------------------


def run_case(engine: Engine, case: TestCase, budget: Budget, trace_sink=None) -> TestOutcome:
    start = time.perf_counter()
    outcome = engine.solve(case.goal, budget, trace_sink)
    wall = (time.perf_counter() - start) * 1000.0
    return TestOutcome(case, verdict_for(case.expectation, outcome), outcome.steps, wall, outcome)


def run_suite(program: Program, cases: Sequence[TestCase], budget: Optional[Budget] = None) -> SuiteRunResult:
    """Run every case in order, each with a fresh copy of ``budget``."""
    budget = budget or Budget()
    engine = Engine(program)
    return SuiteRunResult(tuple(run_case(engine, c, budget) for c in cases))
