"""Resolution, control, arithmetic, budgets and trace ports."""

import re
import time

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import first_solution, load_oracle, normalise_fresh
from promut.engine import (
    Budget,
    BudgetExhausted,
    Engine,
    Error,
    Failure,
    Success,
    arith_eval,
    compare_terms,
    solve,
    unify,
)
from promut.reader import parse_program, parse_term
from promut.terms import Atom, Compound, Float, Int, Var
from strategies import fact_programs

QUERIES = {q["id"]: q for q in load_oracle("engine_queries.json")}
GOLDEN = load_oracle("engine_golden.json")


def run(src, query, steps=1_000_000, sink=None):
    return solve(parse_program(src), parse_term(query), Budget(steps), sink)


@pytest.mark.parametrize("expected", GOLDEN, ids=[g["id"] for g in GOLDEN])
def test_first_solution_matches_reference_system(expected):
    q = QUERIES[expected["id"]]
    status, detail = first_solution(q["program"], q["query"])
    assert status == expected["status"]
    assert normalise_fresh(detail) == normalise_fresh(expected["detail"])


class TestUnify:
    def test_structures(self):
        b = unify(parse_term("f(X, b)"), parse_term("f(a, Y)"))
        assert b["X"] == Atom("a") and b["Y"] == Atom("b")

    def test_clash(self):
        assert unify(parse_term("f(a)"), parse_term("f(b)")) is None
        assert unify(parse_term("f(a)"), parse_term("g(a)")) is None
        assert unify(Int(1), Float(1.0)) is None

    def test_shared_variables(self):
        b = unify(parse_term("p(X, X)"), parse_term("p(Y, 3)"))
        assert b.resolve(Var("X")) == Int(3)
        assert b.resolve(Var("Y")) == Int(3)


class TestArithmetic:
    @pytest.mark.parametrize(
        "expr, value",
        [("2 + 3 * 4", 14), ("7 / 2", 3.5), ("6 / 2", 3), ("-7 mod 3", 2), ("10 - 2 - 3", 5), ("1.5 * 2", 3.0)],
    )
    def test_values(self, expr, value):
        result = arith_eval(parse_term(expr))
        assert result == value and type(result) is type(value)

    def test_errors(self):
        out = run("", "X is Y + 1")
        assert isinstance(out, Error) and out.kind == Atom("instantiation_error")
        out = run("", "X is a")
        assert out.kind == parse_term("type_error(evaluable, a/0)")
        out = run("", "X is 3 mod 0")
        assert out.kind == parse_term("evaluation_error(zero_divisor)")

    def test_comparison_is_numeric(self):
        assert isinstance(run("", "1 =:= 1.0"), Success)
        assert isinstance(run("", "1 == 1.0"), Failure)


class TestStandardOrder:
    def test_classes(self):
        terms = [parse_term(t) for t in ["f(a)", "b", "1", "1.0", "X", "g(a, b)", "a"]]
        ordered = sorted(terms, key=lambda t: [sum(compare_terms(t, u) > 0 for u in terms)])
        assert [repr(t) for t in ordered] == [
            "<Var X>", "<Float 1.0>", "<Int 1>", "<Atom a>", "<Atom b>", "<Compound f(a)>", "<Compound g(a,b)>"
        ]

    def test_sort_dedupes(self):
        out = run("", "sort([c, a, b, a, 2, 1.0], L)")
        assert out.bindings["L"] == parse_term("[1.0, 2, a, b, c]")


class TestControl:
    def test_cut_is_local_to_its_clause(self):
        src = "a(X) :- b(X). a(9).\nb(X) :- member(X, [1, 2]), !."
        assert isinstance(run(src, "a(X), X > 1"), Success)

    def test_if_then_else_condition_is_opaque_to_cut(self):
        src = "t(X) :- ((X = 1 ; X = 2), ! -> true ; true).\nt(5)."
        out = run(src, "t(X), X > 1")
        assert isinstance(out, Success) and out.bindings["X"] == Int(5)

    def test_negation_has_no_bindings(self):
        out = run("", "\\+ X = 1, X = 2")
        assert isinstance(out, Failure)

    def test_variable_goal_in_body_is_called(self):
        out = run("p(G) :- G.", "p(X = 3)")
        assert isinstance(out, Success)

    def test_call_with_extra_arguments(self):
        out = run("add(X, Y, Z) :- Z is X + Y.", "call(add(1), 2, Z)")
        assert out.bindings["Z"] == Int(3)

    def test_callable_errors(self):
        assert run("", "call(1)").kind == parse_term("type_error(callable, 1)")
        assert run("", "call(X)").kind == Atom("instantiation_error")

    def test_prelude_is_shadowed_by_program(self):
        out = run("member(mine, _).", "member(X, [a])")
        assert out.bindings["X"] == Atom("mine")

    def test_prelude_predicates(self):
        out = run("", "length([a, b], N), reverse([1, 2, 3], R), append(R, [x], A)")
        assert out.bindings["N"] == Int(2)
        assert out.bindings["A"] == parse_term("[3, 2, 1, x]")

    def test_existence_error_reports_indicator(self):
        out = run("p :- q(1, 2).", "p")
        assert isinstance(out, Error)
        assert out.kind == parse_term("existence_error(procedure, q/2)")

    def test_anonymous_query_variables_are_not_reported(self):
        out = run("", "X = f(_)")
        assert out.bindings.variables() == [Var("X")]


class TestBudget:
    def test_infinite_recursion_is_cut_off(self):
        out = run("loop :- loop.", "loop", steps=5000)
        assert isinstance(out, BudgetExhausted)
        assert out.reason == "steps" and out.steps_used == 5000

    def test_wall_clock_guard(self):
        prog = parse_program("loop :- loop.")
        out = solve(prog, parse_term("loop"), Budget(10**9, wall_millis=20))
        assert isinstance(out, BudgetExhausted) and out.reason == "time"

    def test_step_costs(self):
        assert run("", "true").steps == 1
        assert run("min(A, B, A) :- A < B, !.\nmin(A, B, B).", "min(1, 2, R)").steps == 4

    def test_million_steps_are_affordable(self):
        start = time.perf_counter()
        out = run("loop(N) :- M is N + 1, loop(M).", "loop(0)", steps=200_000)
        assert isinstance(out, BudgetExhausted)
        assert time.perf_counter() - start < 5


def _outcome_key(out):
    if isinstance(out, Success):
        return ("success", normalise_fresh(repr(out.bindings)))
    if isinstance(out, Error):
        return ("error", repr(out.kind))
    return (type(out).__name__,)


@settings(max_examples=60, deadline=None)
@given(fact_programs(), st.integers(min_value=1, max_value=200))
def test_more_budget_never_changes_a_finished_answer(program, extra):
    goal = parse_term("r(X)")
    full = solve(program, goal, Budget(10_000))
    assume(not isinstance(full, BudgetExhausted))
    assert _outcome_key(solve(program, goal, Budget(full.steps + extra))) == _outcome_key(full)
    assert _outcome_key(solve(program, goal, Budget(full.steps))) == _outcome_key(full)
    if full.steps > 1:
        assert isinstance(solve(program, goal, Budget(full.steps - 1)), BudgetExhausted)


# --- an independent model of r/1 from fact_programs, used for cut semantics ---------


class _Cut(Exception):
    pass


def _model_solutions(program):
    facts = {"p": [], "q": []}
    rule = None
    for c in program.clauses:
        if c.key == ("r", 1):
            rule = c
        else:
            facts[c.head.name].append(c.head.args[0])
    goals = []
    body = rule.body
    while isinstance(body, Compound) and body.name == ",":
        goals.append(body.args[0])
        body = body.args[1]
    goals.append(body)

    def conj(i, x):
        if i == len(goals):
            yield x
            return
        g = goals[i]
        if g == Atom("!"):
            yield from conj(i + 1, x)
            raise _Cut
        if g.name == "\\+":
            q_holds = bool(facts["q"]) if x is None else x in facts["q"]
            if not q_holds:
                yield from conj(i + 1, x)
            return
        for t in facts[g.name]:
            if x is None or x == t:
                yield from conj(i + 1, t)

    out = []
    try:
        for x in conj(0, None):
            out.append(x)
    except _Cut:
        pass
    return out


@settings(max_examples=150, deadline=None)
@given(fact_programs())
def test_cut_and_negation_agree_with_model(program):
    solutions = _model_solutions(program)
    first = solve(program, parse_term("r(X)"))
    if not solutions:
        assert isinstance(first, Failure)
        return
    assert isinstance(first, Success)
    if solutions[0] is None:
        assert isinstance(first.bindings["X"], Var)
        return
    assert first.bindings["X"] == solutions[0]
    for candidate in [Atom("a"), Atom("b"), Int(1), Int(2), Atom("[]"), Atom("zz")]:
        out = solve(program, Compound(",", (parse_term("r(X)"), Compound("==", (Var("X"), candidate)))))
        assert isinstance(out, Success) == (candidate in solutions)


# --- ports --------------------------------------------------------------------------

_PORT_SEQUENCE = re.compile(r"call(,exit,redo)*,(exit|fail)")


def _ports_by_invocation(events):
    seqs = {}
    for e in events:
        seqs.setdefault(e.invocation, []).append(e.port)
    return seqs


@settings(max_examples=100, deadline=None)
@given(fact_programs())
def test_every_invocation_follows_the_port_automaton(program):
    events = []
    out = solve(program, parse_term("r(X)"), Budget(10_000), events.append)
    assert not isinstance(out, BudgetExhausted)
    for ports in _ports_by_invocation(events).values():
        assert _PORT_SEQUENCE.fullmatch(",".join(ports)), ports
    steps = [e.step for e in events]
    assert steps == sorted(steps)


def test_trace_subjects_point_at_sub_goals():
    events = []
    run("min(A, B, A) :- A < B, !.\nmin(A, B, B).", "min(1, 2, R)", sink=events.append)
    exits = [(e.pred, e.clause, e.path) for e in events if e.port == "exit" and e.pred]
    assert exits == [(("min", 3), 1, (1, 0)), (("min", 3), 1, (1, 1))]
    assert events[0].port == "call" and events[0].pred is None


def test_backtracking_emits_redo_and_fail():
    events = []
    run("p(1). p(2).\nq(X) :- p(X), X > 1.", "q(X)", sink=events.append)
    ports = [(e.port, e.path) for e in events if e.pred == ("q", 1)]
    assert ports == [
        ("call", (1, 0)), ("exit", (1, 0)), ("call", (1, 1)), ("fail", (1, 1)),
        ("redo", (1, 0)), ("exit", (1, 0)), ("call", (1, 1)), ("exit", (1, 1)),
    ]


def test_trace_event_json_shape():
    events = []
    run("p.", "p", sink=events.append)
    assert set(events[-1].to_json()) == {"port", "pred", "arity", "clause", "path", "step"}


def test_engine_is_reusable_across_queries():
    engine = Engine(parse_program("p(1). p(2)."))
    assert engine.solve(parse_term("p(2)")).steps == engine.solve(parse_term("p(2)")).steps
