"""Campaigns: classification, budgets, scoring and parallel runs."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load_oracle
from promut import corpus
from promut.errors import BaselineRejected
from promut.harness import Expectation, Verdict, parse_suite
from promut.operators import OperatorId, enumerate_sites
from promut.reader import parse_program
from promut.report import campaign_json
from promut.runner import (
    RunnerConfig,
    Status,
    Tally,
    baseline,
    classify,
    mutant_budgets,
    run_campaign,
    score_from_counts,
)

REFERENCE = load_oracle("mutant_verdicts.json")


def _reference_verdict(answer, expectation):
    if answer == "e":
        return Verdict.ERROR
    succeeded = answer == "s"
    return Verdict.PASS if succeeded == (expectation is Expectation.SUCCEED) else Verdict.FAIL


@pytest.mark.parametrize("name", corpus.NAMES)
def test_mutant_verdicts_match_reference_system(name):
    program, cases = corpus.load(name)
    expectations = {c.name: c.expectation for c in cases}
    report = run_campaign(program, cases, RunnerConfig(fail_fast_per_mutant=False))
    for result in report.results:
        expected = REFERENCE[name][str(result.site.id)]
        for test, verdict in result.verdicts:
            if verdict is Verdict.TIMEOUT:
                assert test not in expected
                continue
            assert verdict is _reference_verdict(expected[test], expectations[test]), (result.site.describe(), test)


class TestClassify:
    def test_any_failure_or_error_kills(self):
        assert classify([Verdict.PASS, Verdict.FAIL]) is Status.DEAD
        assert classify([Verdict.TIMEOUT, Verdict.ERROR]) is Status.DEAD

    def test_timeout_without_kill(self):
        assert classify([Verdict.PASS, Verdict.TIMEOUT]) is Status.TIMEOUT

    def test_all_pass(self):
        assert classify([Verdict.PASS, Verdict.PASS]) is Status.ALIVE


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_timeouts_never_enter_the_score(alive, dead, timeout):
    score = Tally(alive, dead, timeout).score
    assert score == Tally(alive, dead, 0).score == score_from_counts(dead, alive)
    if alive + dead == 0:
        assert score is None
    else:
        assert score == dead / (dead + alive)
        assert 0.0 <= score <= 1.0


def test_tally_addition():
    assert Tally(1, 2, 3) + Tally(4, 5, 6) == Tally(5, 7, 9)


class TestBudgets:
    def test_budget_tracks_baseline_cost(self):
        program, cases = corpus.load("min")
        base = baseline(program, cases)
        config = RunnerConfig(step_budget=1_000_000, step_constant=100, timeout_constant_millis=50)
        budgets = mutant_budgets(base, config)
        for outcome, budget in zip(base.outcomes, budgets):
            assert budget.max_steps == 100 + 2 * outcome.steps_used
            assert budget.wall_millis == pytest.approx(50 + 2 * base.total_wall_millis)

    def test_budget_never_exceeds_the_cap(self):
        program, cases = corpus.load("min")
        base = baseline(program, cases)
        budgets = mutant_budgets(base, RunnerConfig(step_budget=5))
        assert all(b.max_steps == 5 for b in budgets)

    @pytest.mark.parametrize(
        "kwargs", [{"step_budget": 0}, {"jobs": 0}, {"timeout_constant_millis": -1}, {"step_constant": -1}]
    )
    def test_config_validation(self, kwargs):
        with pytest.raises(ValueError):
            RunnerConfig(**kwargs)

    def test_ops_are_kept_in_catalogue_order(self):
        config = RunnerConfig(ops=(OperatorId.REVERSE_PREDICATE, OperatorId.LT_TO_GE))
        assert config.ops == (OperatorId.LT_TO_GE, OperatorId.REVERSE_PREDICATE)


class TestCampaign:
    def test_min_relational_mutant_is_killed(self):
        program, cases = corpus.load("min")
        report = run_campaign(program, cases, RunnerConfig(ops=(OperatorId.LT_TO_GE,)))
        (result,) = report.results
        assert result.status is Status.DEAD
        assert result.first_killing_test == "min_left"
        assert report.mutation_score == 1.0

    def test_per_operator_lists_every_configured_operator(self):
        program, cases = corpus.load("min")
        report = run_campaign(program, cases, RunnerConfig(ops=(OperatorId.LT_TO_GE, OperatorId.TRUE_TO_FALSE)))
        assert list(report.per_operator) == [OperatorId.LT_TO_GE, OperatorId.TRUE_TO_FALSE]
        assert report.per_operator[OperatorId.TRUE_TO_FALSE] == Tally()

    def test_baseline_failure_stops_the_campaign(self):
        program = parse_program("min(A, B, A) :- A < B, !.\nmin(A, B, B).\n")
        cases = parse_suite(":- begin_tests(m).\ntest(bad) :- min(2, 1, 2).\n:- end_tests(m).\n")
        with pytest.raises(BaselineRejected):
            run_campaign(program, cases)

    def test_undefined_score_when_everything_times_out(self):
        program, cases = corpus.load("add_to_list")
        report = run_campaign(program, cases, RunnerConfig(ops=(OperatorId.REVERSE_PREDICATE,)))
        assert report.totals == Tally(0, 0, 1)
        assert report.mutation_score is None


@pytest.mark.parametrize("name", ["flatten", "remove_dups", "add_to_list"])
def test_fail_fast_agrees_with_full_matrix(name):
    program, cases = corpus.load(name)
    fast = run_campaign(program, cases)
    full = run_campaign(program, cases, RunnerConfig(fail_fast_per_mutant=False))
    for a, b in zip(fast.results, full.results):
        assert a.site == b.site
        assert a.status == b.status
        assert a.first_killing_test == b.first_killing_test
        assert len(b.verdicts) == len(cases)
        assert a.verdicts == b.verdicts[: len(a.verdicts)]


@settings(max_examples=10, deadline=None)
@given(st.randoms(use_true_random=False))
def test_site_order_does_not_matter(rnd):
    program, cases = corpus.load("wrapped_sort")
    sites = enumerate_sites(program)
    shuffled = list(sites)
    rnd.shuffle(shuffled)
    a = run_campaign(program, cases, sites=sites)
    b = run_campaign(program, cases, sites=shuffled)
    assert campaign_json(a) == campaign_json(b)


def test_parallel_run_matches_serial():
    program, cases = corpus.load("remove_dups")
    serial = run_campaign(program, cases, RunnerConfig(jobs=1))
    parallel = run_campaign(program, cases, RunnerConfig(jobs=3))
    assert campaign_json(serial) == campaign_json(parallel)


def test_shuffled_suite_gives_same_statuses():
    program, cases = corpus.load("flatten")
    rnd = random.Random(7)
    shuffled = list(cases)
    rnd.shuffle(shuffled)
    a = run_campaign(program, cases, RunnerConfig(fail_fast_per_mutant=False))
    b = run_campaign(program, shuffled, RunnerConfig(fail_fast_per_mutant=False))
    assert [r.status for r in a.results] == [r.status for r in b.results]


def test_wrapped_sort_equality_mutants():
    """The guard mutant survives an empty-list-only suite; the two-element test kills it."""
    program, _ = corpus.load("wrapped_sort")
    ops = RunnerConfig(ops=(OperatorId.EQ_TO_NEQ,), fail_fast_per_mutant=False)
    only_empty = parse_suite(":- begin_tests(w).\ntest(empty) :- wrapped_sort([], []).\n:- end_tests(w).\n")
    report = run_campaign(program, only_empty, ops)
    assert [(r.site.path, r.status) for r in report.results] == [((1, 0), Status.ALIVE), ((1, 1, 1), Status.DEAD)]
    _, cases = corpus.load("wrapped_sort")
    report = run_campaign(program, cases, ops)
    assert [(r.site.path, r.status, r.first_killing_test) for r in report.results] == [
        ((1, 0), Status.DEAD, "two"), ((1, 1, 1), Status.DEAD, "empty")
    ]
