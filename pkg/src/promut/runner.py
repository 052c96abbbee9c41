"""Mutation campaigns: baseline run, mutant execution and scoring."""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .engine import Budget, Engine
from .errors import BaselineRejected, EmptySuite
from .harness import SuiteRunResult, TestCase, Verdict, run_case
from .operators import ALL_OPERATORS, MutationSite, OperatorId, apply, enumerate_sites
from .terms import Program


class Status(str, enum.Enum):
    DEAD = "dead"
    ALIVE = "alive"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class RunnerConfig:
    ops: Tuple[OperatorId, ...] = ALL_OPERATORS
    timeout_constant_millis: float = 1000.0
    step_budget: int = 1_000_000
    jobs: int = 1
    fail_fast_per_mutant: bool = True
    # steps granted to a mutant test on top of twice its baseline cost
    step_constant: int = 10_000

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(op for op in ALL_OPERATORS if op in set(self.ops)))
        if self.timeout_constant_millis < 0:
            raise ValueError("timeout_constant_millis must not be negative")
        if self.step_budget < 1:
            raise ValueError("step_budget must be at least 1")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")
        if self.step_constant < 0:
            raise ValueError("step_constant must not be negative")


@dataclass(frozen=True)
class MutantResult:
    site: MutationSite
    status: Status
    first_killing_test: Optional[str] = None
    steps_used: int = 0
    verdicts: Tuple[Tuple[str, Verdict], ...] = ()
    diff: str = field(default="", compare=False)


@dataclass(frozen=True)
class Tally:
    alive: int = 0
    dead: int = 0
    timeout: int = 0

    def __add__(self, other: "Tally") -> "Tally":
        return Tally(self.alive + other.alive, self.dead + other.dead, self.timeout + other.timeout)

    @property
    def score(self) -> Optional[float]:
        return score_from_counts(self.dead, self.alive)


def score_from_counts(dead: int, alive: int) -> Optional[float]:
    """dead / (dead + alive); None stands for an undefined score."""
    if dead + alive == 0:
        return None
    return dead / (dead + alive)


@dataclass(frozen=True)
class CampaignReport:
    results: Tuple[MutantResult, ...]
    baseline: SuiteRunResult
    config: RunnerConfig

    @property
    def per_operator(self) -> Dict[OperatorId, Tally]:
        table = {op: Tally() for op in self.config.ops}
        for r in self.results:
            op = r.site.operator
            table[op] = table.get(op, Tally()) + _tally_of(r.status)
        return {op: table[op] for op in ALL_OPERATORS if op in table}

    @property
    def totals(self) -> Tally:
        out = Tally()
        for r in self.results:
            out = out + _tally_of(r.status)
        return out

    @property
    def mutation_score(self) -> Optional[float]:
        return self.totals.score


def _tally_of(status: Status) -> Tally:
    if status is Status.DEAD:
        return Tally(dead=1)
    if status is Status.ALIVE:
        return Tally(alive=1)
    return Tally(timeout=1)


def score(report: CampaignReport) -> Optional[float]:
    return report.mutation_score


def baseline(program: Program, cases: Sequence[TestCase], config: Optional[RunnerConfig] = None) -> SuiteRunResult:
    """Run the suite on the original program; every test has to pass."""
    config = config or RunnerConfig()
    if not cases:
        raise EmptySuite()
    engine = Engine(program)
    budget = Budget(config.step_budget)
    result = SuiteRunResult(tuple(run_case(engine, c, budget) for c in cases))
    if not result.all_green:
        raise BaselineRejected(result.failing)
    return result


def mutant_budgets(base: SuiteRunResult, config: RunnerConfig) -> List[Budget]:
    """Per-test budgets for mutants, derived from the baseline cost of each test."""
    budgets = []
    for o in base.outcomes:
        steps = min(config.step_budget, config.step_constant + 2 * o.steps_used)
        wall = config.timeout_constant_millis + 2 * base.total_wall_millis
        budgets.append(Budget(max(1, steps), wall))
    return budgets


def classify(verdicts: Iterable[Verdict]) -> Status:
    verdicts = list(verdicts)
    if any(v in (Verdict.FAIL, Verdict.ERROR) for v in verdicts):
        return Status.DEAD
    if any(v is Verdict.TIMEOUT for v in verdicts):
        return Status.TIMEOUT
    return Status.ALIVE


def run_mutant(
    program: Program,
    site: MutationSite,
    cases: Sequence[TestCase],
    budgets: Sequence[Budget],
    fail_fast: bool = True,
) -> MutantResult:
    mutant = apply(program, site)
    engine = Engine(mutant.program)
    verdicts: List[Tuple[str, Verdict]] = []
    steps = 0
    killer = None
    for case, budget in zip(cases, budgets):
        outcome = run_case(engine, case, budget)
        steps += outcome.steps_used
        verdicts.append((case.name, outcome.verdict))
        if outcome.verdict in (Verdict.FAIL, Verdict.ERROR):
            if killer is None:
                killer = case.name
            if fail_fast:
                break
    status = classify(v for _, v in verdicts)
    return MutantResult(site, status, killer, steps, tuple(verdicts), mutant.diff)


# worker state for process pools: the campaign inputs are shipped once per worker
_WORKER: dict = {}


def _init_worker(program, cases, budgets, fail_fast):
    _WORKER.update(program=program, cases=cases, budgets=budgets, fail_fast=fail_fast)


def _work(site: MutationSite) -> MutantResult:
    w = _WORKER
    return run_mutant(w["program"], site, w["cases"], w["budgets"], w["fail_fast"])


def run_campaign(
    program: Program,
    cases: Sequence[TestCase],
    config: Optional[RunnerConfig] = None,
    sites: Optional[Sequence[MutationSite]] = None,
) -> CampaignReport:
    """Generate, run and classify every mutant for the configured operators.

    ``sites`` overrides enumeration (in any order); results always come back
    sorted by site id.
    """
    config = config or RunnerConfig()
    cases = tuple(cases)
    base = baseline(program, cases, config)
    if sites is None:
        sites = enumerate_sites(program, config.ops)
    budgets = mutant_budgets(base, config)
    fail_fast = config.fail_fast_per_mutant
    if config.jobs > 1 and len(sites) > 1:
        with ProcessPoolExecutor(
            max_workers=min(config.jobs, len(sites)),
            initializer=_init_worker,
            initargs=(program, cases, budgets, fail_fast),
        ) as pool:
            chunk = max(1, len(sites) // (config.jobs * 4))
            results = list(pool.map(_work, sites, chunksize=chunk))
    else:
        results = [run_mutant(program, s, cases, budgets, fail_fast) for s in sites]
    results.sort(key=lambda r: r.site.id)
    return CampaignReport(tuple(results), base, config)
