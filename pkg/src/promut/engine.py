"""SLD resolution engine with cut, negation as failure and a step budget.

The machine is iterative. Goals waiting to run form a linked list of frames
(plain tuples), alternatives live on a choicepoint stack and every variable
binding is recorded on a trail so backtracking can undo it. Nothing recurses
on program depth, so a runaway recursion ends in ``BudgetExhausted`` rather
than a Python ``RecursionError``.

Clauses are compiled once per engine into templates: variables become slots
in a per-call frame and ground subterms are shared as they are.
"""

from __future__ import annotations

import functools
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Union

from .terms import (
    NIL,
    Atom,
    Clause,
    Compound,
    Float,
    Int,
    PredKey,
    Program,
    Ref,
    Span,
    Term,
    TermPath,
    Var,
    is_callable,
    make_list,
)

Number = Union[int, float]


# --- bindings and unification --------------------------------------------------


class Bindings:
    """A substitution from variables to terms.

    ``generation`` counts clause renamings performed while the substitution was
    built (zero for substitutions made by :func:`unify` alone).
    """

    __slots__ = ("_map", "generation")

    def __init__(self, mapping=None, generation: int = 0):
        self._map = dict(mapping or {})
        self.generation = generation

    def __len__(self):
        return len(self._map)

    def __contains__(self, key):
        return self._key(key) in self._map

    def __getitem__(self, key) -> Term:
        k = self._key(key)
        if k not in self._map:
            raise KeyError(key)
        return self.resolve(k)

    def __eq__(self, other):
        if not isinstance(other, Bindings):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __repr__(self):
        from .writer import format_term

        inner = ", ".join(f"{k.name}={format_term(v)}" for k, v in self.as_dict().items())
        return f"Bindings({inner})"

    def _key(self, key):
        if isinstance(key, str):
            for k in self._map:
                if k.name == key:
                    return k
            return None
        return key

    def variables(self) -> list:
        return list(self._map)

    def as_dict(self) -> dict:
        """Every bound variable mapped to its fully resolved value."""
        return {k: self.resolve(k) for k in self._map}

    def deref(self, term: Term) -> Term:
        return _deref(term, self._map)

    def resolve(self, term: Term) -> Term:
        return resolve(term, self._map)


def _deref(t: Term, store: dict) -> Term:
    while isinstance(t, Var):
        v = store.get(t)
        if v is None:
            return t
        t = v
    return t


def resolve(term: Term, store: dict) -> Term:
    """Apply a substitution completely.

    Cyclic bindings (possible without the occurs check) are cut at the point
    where a variable would be expanded inside its own value; that variable is
    left in place.
    """
    out: list = []
    active: set = set()
    stack: list = [(0, term)]
    while stack:
        op, x = stack.pop()
        if op == 1:
            node, n = x
            args = tuple(out[len(out) - n:])
            del out[len(out) - n:]
            out.append(Compound(node.name, args, node.span))
            continue
        if op == 2:
            active.difference_update(x)
            continue
        t = x
        chain = []
        while isinstance(t, Var) and t not in active:
            v = store.get(t)
            if v is None:
                break
            chain.append(t)
            t = v
        if type(t) is not Compound:
            out.append(t)
            continue
        if chain:
            active.update(chain)
            stack.append((2, chain))
        stack.append((1, (t, len(t.args))))
        for a in reversed(t.args):
            stack.append((0, a))
    return out[0]


def _unify(a: Term, b: Term, store: dict, trail: list) -> bool:
    todo = None
    while True:
        while isinstance(a, Var):
            v = store.get(a)
            if v is None:
                break
            a = v
        while isinstance(b, Var):
            v = store.get(b)
            if v is None:
                break
            b = v
        if a is not b:
            if isinstance(a, Var):
                if not (isinstance(b, Var) and a == b):
                    store[a] = b
                    trail.append(a)
            elif isinstance(b, Var):
                store[b] = a
                trail.append(b)
            elif type(a) is Compound:
                if type(b) is not Compound or a.name != b.name or len(a.args) != len(b.args):
                    return False
                if len(a.args) > 1:
                    if todo is None:
                        todo = []
                    todo.extend(zip(a.args[1:], b.args[1:]))
                a, b = a.args[0], b.args[0]
                continue
            elif a != b:
                return False
        if not todo:
            return True
        a, b = todo.pop()


def unify(a: Term, b: Term, bindings: Optional[Bindings] = None) -> Optional[Bindings]:
    """Most general unifier extending ``bindings``, or None.

    The input substitution is never modified.
    """
    bindings = bindings if bindings is not None else Bindings()
    store = dict(bindings._map)
    if not _unify(a, b, store, []):
        return None
    return Bindings(store, bindings.generation)


# --- outcomes, budgets, trace events ---------------------------------------------


@dataclass(frozen=True)
class Budget:
    max_steps: int = 1_000_000
    wall_millis: Optional[float] = None

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.wall_millis is not None and self.wall_millis < 0:
            raise ValueError("wall_millis must not be negative")


@dataclass(frozen=True)
class Success:
    bindings: Bindings
    steps: int


@dataclass(frozen=True)
class Failure:
    steps: int


@dataclass(frozen=True)
class Error:
    kind: Term
    span: Span
    steps: int
    goal: Optional[Term] = field(default=None, compare=False)


@dataclass(frozen=True)
class BudgetExhausted:
    steps_used: int
    reason: str = "steps"

    @property
    def steps(self) -> int:
        return self.steps_used


SolveOutcome = Union[Success, Failure, Error, BudgetExhausted]


class TraceEvent(NamedTuple):
    """One port crossing. ``invocation`` identifies the goal instance."""

    port: str
    pred: Optional[PredKey]
    clause: Optional[int]
    path: TermPath
    step: int
    invocation: int = 0

    @property
    def subject(self):
        return (self.pred, self.clause, self.path)

    def to_json(self) -> dict:
        name, arity = self.pred if self.pred else (None, None)
        return {
            "port": self.port,
            "pred": name,
            "arity": arity,
            "clause": self.clause,
            "path": list(self.path),
            "step": self.step,
        }


class PrologError(Exception):
    """Raised inside the machine; surfaces as an :class:`Error` outcome."""

    def __init__(self, term: Term, goal: Optional[Term] = None):
        super().__init__(term)
        self.term = term
        self.goal = goal


def _pi(name: str, arity: int) -> Term:
    return Compound("/", (Atom(name), Int(arity)))


def existence_error(name: str, arity: int) -> Term:
    return Compound("existence_error", (Atom("procedure"), _pi(name, arity)))


def type_error(expected: str, culprit: Term) -> Term:
    return Compound("type_error", (Atom(expected), culprit))


INSTANTIATION_ERROR = Atom("instantiation_error")
ZERO_DIVISOR = Compound("evaluation_error", (Atom("zero_divisor"),))


# --- arithmetic -----------------------------------------------------------------


def _div(x, y):
    if y == 0:
        raise PrologError(ZERO_DIVISOR)
    if type(x) is int and type(y) is int:
        q, r = divmod(x, y)
        return q if r == 0 else x / y
    return x / y


def _mod(x, y):
    if type(x) is not int or type(y) is not int:
        culprit = x if type(x) is not int else y
        raise PrologError(type_error("integer", Float(culprit)))
    if y == 0:
        raise PrologError(ZERO_DIVISOR)
    return x % y


_BINARY: dict = {
    "+": lambda x, y: x + y,
    "-": lambda x, y: x - y,
    "*": lambda x, y: x * y,
    "/": _div,
    "mod": _mod,
}


def _eval(expr: Term, store: dict) -> Number:
    t = _deref(expr, store)
    tt = type(t)
    if tt is Int or tt is Float:
        return t.value
    if isinstance(t, Var):
        raise PrologError(INSTANTIATION_ERROR)
    if tt is Compound:
        args = t.args
        if len(args) == 2:
            fn = _BINARY.get(t.name)
            if fn is not None:
                return fn(_eval(args[0], store), _eval(args[1], store))
        elif len(args) == 1 and t.name == "-":
            return -_eval(args[0], store)
        elif len(args) == 1 and t.name == "+":
            return _eval(args[0], store)
        raise PrologError(type_error("evaluable", _pi(t.name, len(args))))
    raise PrologError(type_error("evaluable", _pi(t.name, 0)))


def _number_term(value: Number) -> Term:
    return Int(value) if type(value) is int else Float(value)


def arith_eval(expr: Term, bindings: Optional[Bindings] = None) -> Number:
    """Evaluate an arithmetic expression. Raises :class:`PrologError`."""
    store = bindings._map if bindings is not None else {}
    return _eval(expr, store)


# --- standard order of terms ----------------------------------------------------


def _order_class(t: Term) -> int:
    if isinstance(t, Var):
        return 0
    tt = type(t)
    if tt is Float:
        return 1
    if tt is Int:
        return 2
    if tt is Atom:
        return 3
    return 4


def _var_rank(v: Var):
    return (0, v.id) if type(v) is Ref else (1, v.name)


def compare_terms(a: Term, b: Term, store: Optional[dict] = None) -> int:
    """Standard order: Var < Float < Int < Atom < Compound; returns -1, 0 or 1."""
    store = store or {}
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = _deref(x, store)
        y = _deref(y, store)
        if x is y:
            continue
        cx, cy = _order_class(x), _order_class(y)
        if cx != cy:
            return -1 if cx < cy else 1
        if cx == 0:
            kx, ky = _var_rank(x), _var_rank(y)
        elif cx in (1, 2):
            kx, ky = x.value, y.value
        elif cx == 3:
            kx, ky = x.name, y.name
        else:
            kx, ky = (len(x.args), x.name), (len(y.args), y.name)
            if kx == ky:
                stack.extend(reversed(list(zip(x.args, y.args))))
                continue
        if kx != ky:
            return -1 if kx < ky else 1
    return 0


# --- clause templates -------------------------------------------------------------


class _Slot:
    __slots__ = ("i",)

    def __init__(self, i: int):
        self.i = i


class _Tpl:
    __slots__ = ("name", "args", "span")

    def __init__(self, name, args, span):
        self.name = name
        self.args = args
        self.span = span


def _template(term: Term, slots: dict):
    if isinstance(term, Var):
        if term not in slots:
            slots[term] = _Slot(len(slots))
        return slots[term]
    if type(term) is not Compound:
        return term
    args = tuple(_template(a, slots) for a in term.args)
    if any(type(a) is _Slot or type(a) is _Tpl for a in args):
        return _Tpl(term.name, args, term.span)
    return term


_CONTROL = {(",", 2), (";", 2), ("->", 2)}


def _wrap_var_goals(body: Term) -> Term:
    # a variable in goal position behaves as call/1, which makes cut opaque
    if isinstance(body, Var):
        return Compound("call", (body,), body.span)
    if type(body) is Compound and (body.name, len(body.args)) in _CONTROL:
        a, b = body.args
        return Compound(body.name, (_wrap_var_goals(a), _wrap_var_goals(b)), body.span)
    return body


def _first_key(t) -> Optional[tuple]:
    tt = type(t)
    if tt is Atom:
        return ("a", t.name)
    if tt is Int:
        return ("i", t.value)
    if tt is Float:
        return ("f", t.value)
    if tt is Compound or tt is _Tpl:
        return ("c", t.name, len(t.args))
    return None


class _Compiled:
    __slots__ = ("head", "body", "nvars", "fkey", "loc")

    def __init__(self, clause: Clause, loc):
        slots: dict = {}
        head = clause.head
        args = head.args if type(head) is Compound else ()
        self.head = tuple(_template(a, slots) for a in args)
        self.body = _template(_wrap_var_goals(clause.body), slots)
        self.nvars = len(slots)
        self.fkey = _first_key(self.head[0]) if self.head else None
        self.loc = loc


def _build(tpl, frame: list):
    tt = type(tpl)
    if tt is _Slot:
        v = frame[tpl.i]
        if v is None:
            v = frame[tpl.i] = Ref()
        return v
    if tt is not _Tpl:
        return tpl
    # walk the rightmost spine iteratively: long conjunctions and lists
    spine = []
    while type(tpl) is _Tpl:
        args = tpl.args
        spine.append((tpl, [_build(a, frame) for a in args[:-1]]))
        tpl = args[-1]
    out = _build(tpl, frame)
    for node, built in reversed(spine):
        built.append(out)
        out = Compound(node.name, built, node.span)
    return out


PRELUDE_SOURCE = """
append([], L, L).
append([H|T], L, [H|R]) :- append(T, L, R).
member(X, [X|_]).
member(X, [_|T]) :- member(X, T).
length(L, N) :- '$length'(L, 0, N).
'$length'([], N, N).
'$length'([_|T], N0, N) :- N1 is N0 + 1, '$length'(T, N1, N).
reverse(L, R) :- '$reverse'(L, [], R).
'$reverse'([], R, R).
'$reverse'([H|T], Acc, R) :- '$reverse'(T, [H|Acc], R).
"""


@functools.lru_cache(maxsize=None)
def _prelude() -> dict:
    from .reader import parse_program

    program = parse_program(PRELUDE_SOURCE)
    return {key: [_Compiled(c, None) for c in program.clauses_for(key)] for key in program.predicates}


BUILTINS = frozenset(
    {
        ("true", 0),
        ("fail", 0),
        ("false", 0),
        ("!", 0),
        (",", 2),
        (";", 2),
        ("->", 2),
        ("\\+", 1),
        ("call", 1),
        ("call", 2),
        ("call", 3),
        ("call", 4),
        ("=", 2),
        ("\\=", 2),
        ("==", 2),
        ("\\==", 2),
        ("=:=", 2),
        ("=\\=", 2),
        ("<", 2),
        (">", 2),
        ("=<", 2),
        (">=", 2),
        ("is", 2),
        ("sort", 2),
        ("var", 1),
        ("nonvar", 1),
    }
)

_ARITH_CMP = {
    "=:=": lambda x, y: x == y,
    "=\\=": lambda x, y: x != y,
    "<": lambda x, y: x < y,
    ">": lambda x, y: x > y,
    "=<": lambda x, y: x <= y,
    ">=": lambda x, y: x >= y,
}

# frame kinds
_GOAL, _EXIT, _CUT_TO, _NAF_FAIL = 0, 1, 2, 3
# choicepoint kinds
_CP_GOAL, _CP_CLAUSES = 0, 1

_WALL_CHECK_MASK = 4095
_FAIL = ("fail",)


def _fresh(env: list, i: int) -> Ref:
    v = env[i] = Ref()
    return v


def _enter(clause: _Compiled, args, cutb: int, cont, tracing: bool, store: dict, trail: list):
    """Unify the head with the call arguments; frames for the body or _FAIL."""
    frame = [None] * clause.nvars
    for tpl, arg in zip(clause.head, args):
        if not _unify_head(tpl, arg, frame, store, trail):
            return _FAIL
    return (_GOAL, clause.body, frame, cutb, clause.loc if tracing else None, cont)


def _ite_parts(a, env, store: dict):
    """(condition, then, env) when ``a`` is an if-then, else None."""
    if env is not None and type(a) is _Tpl:
        if a.name == "->" and len(a.args) == 2:
            return a.args[0], a.args[1], env
        return None
    if env is not None and type(a) is _Slot:
        return None
    a = _deref(a, store)
    if type(a) is Compound and a.name == "->" and len(a.args) == 2:
        return a.args[0], a.args[1], env
    return None


class Engine:
    """Runs goals against one immutable program.

    Builtins take priority over user clauses. Prelude predicates are used only
    when the program defines no clauses with the same name and arity.
    """

    def __init__(self, program: Program):
        self.program = program
        preds = dict(_prelude())
        for key in program.predicates:
            if key in BUILTINS:
                continue
            preds[key] = [_Compiled(c, (key, c.index, (1,))) for c in program.clauses_for(key)]
        self._preds = preds

    def solve(
        self,
        goal: Term,
        budget: Optional[Budget] = None,
        trace_sink: Optional[Callable[[TraceEvent], None]] = None,
    ) -> SolveOutcome:
        if not is_callable(goal):
            raise TypeError(f"goal must be an atom or compound term, got {goal!r}")
        budget = budget or Budget()
        run = _Run(self._preds, budget, trace_sink)
        return run.execute(goal)


def solve(
    program: Program,
    goal: Term,
    budget: Optional[Budget] = None,
    trace_sink: Optional[Callable[[TraceEvent], None]] = None,
) -> SolveOutcome:
    """First solution of ``goal`` against ``program``."""
    return Engine(program).solve(goal, budget, trace_sink)


class _Exhausted(Exception):
    def __init__(self, reason: str):
        self.reason = reason


class _Run:
    """State of a single query. Discarded after ``execute`` returns."""

    def __init__(self, preds: dict, budget: Budget, sink):
        self.preds = preds
        self.max_steps = budget.max_steps
        self.deadline = None
        if budget.wall_millis is not None:
            self.deadline = time.perf_counter() + budget.wall_millis / 1000.0
        self.sink = sink
        self.steps = 0
        self.store: dict = {}
        self.trail: list = []
        self.cps: list = []
        self.live: list = []
        self.exits: list = []
        self.serial = 0
        self.renamings = 0
        self.culprit = None

    # -- tracing --
    # An invocation is [serial, (pred, clause, path), exited, live position].

    def _emit(self, port: str, inv, step: int) -> None:
        pred, clause, path = inv[1]
        self.sink(TraceEvent(port, pred, clause, path, step, inv[0]))

    def _open(self, loc, step: int):
        self.serial += 1
        inv = [self.serial, loc, False, len(self.live)]
        self.live.append(inv)
        self._emit("call", inv, step)
        return inv

    def _exit(self, inv, step: int) -> None:
        inv[2] = True
        self.exits.append(inv)
        self._emit("exit", inv, step)

    def _rewind_trace(self, live_len: int, exit_len: int, step: int) -> None:
        # discarded invocations that never exited fail, innermost first; exited
        # invocations that stay live are re-entered, outermost first
        live, exits = self.live, self.exits
        for inv in reversed(live[live_len:]):
            if not inv[2]:
                self._emit("fail", inv, step)
        del live[live_len:]
        for inv in reversed(exits[exit_len:]):
            if inv[2] and inv[3] < live_len:
                inv[2] = False
                self._emit("redo", inv, step)
        del exits[exit_len:]

    # -- machine --

    def execute(self, goal: Term) -> SolveOutcome:
        # query variables become fresh runtime variables
        slots: dict = {}
        tpl = _template(goal, slots)
        frame = [None] * len(slots)
        query = _build(tpl, frame)
        for i in range(len(frame)):
            if frame[i] is None:
                frame[i] = Ref()
        qloc = (None, None, ()) if self.sink is not None else None
        self.culprit = (goal, None)
        try:
            found = self._loop((_GOAL, query, None, 0, qloc, None))
        except _Exhausted as stop:
            return BudgetExhausted(min(self.steps, self.max_steps), stop.reason)
        except PrologError as err:
            g, env = self.culprit
            if env is not None:
                g = _build(g, env)
            g = resolve(g, self.store)
            return Error(err.term, getattr(g, "span", None), self.steps, g)
        if not found:
            return Failure(self.steps)
        answer = {}
        for var, slot in slots.items():
            if not var.anonymous:
                answer[var] = resolve(frame[slot.i], self.store)
        return Success(Bindings(answer, self.renamings), self.steps)

    def _loop(self, frames) -> bool:
        store, trail, cps = self.store, self.trail, self.cps
        preds = self.preds
        tracing = self.sink is not None
        max_steps, deadline = self.max_steps, self.deadline
        live, exits = self.live, self.exits
        steps = 0
        try:
            while True:
                if frames is None:
                    return True

                if frames is _FAIL:
                    if not cps:
                        if tracing:
                            self._rewind_trace(0, 0, steps)
                        return False
                    cp = cps[-1]
                    mark = cp[1]
                    while len(trail) > mark:
                        del store[trail.pop()]
                    if tracing:
                        self._rewind_trace(cp[2], cp[3], steps)
                    if cp[0] == _CP_GOAL:
                        cps.pop()
                        frames = cp[4]
                        continue
                    _, tl, ll, el, args, clauses, i, fk, cont = cp
                    steps += 1
                    if steps > max_steps:
                        raise _Exhausted("steps")
                    if deadline is not None and not steps & _WALL_CHECK_MASK and time.perf_counter() > deadline:
                        raise _Exhausted("time")
                    pos = len(cps) - 1
                    j = _next_clause(clauses, i + 1, fk)
                    if j < 0:
                        cps.pop()
                    else:
                        cps[-1] = (_CP_CLAUSES, tl, ll, el, args, clauses, j, fk, cont)
                    self.renamings += 1
                    frames = _enter(clauses[i], args, pos, cont, tracing, store, trail)
                    continue

                kind = frames[0]
                if kind == _EXIT:
                    self._exit(frames[1], steps)
                    frames = frames[2]
                    continue
                if kind == _CUT_TO:
                    del cps[frames[1]:]
                    frames = frames[2]
                    continue
                if kind == _NAF_FAIL:
                    del cps[frames[1]:]
                    frames = _FAIL
                    continue

                _, goal, env, cutb, loc, rest = frames
                steps += 1
                if steps > max_steps:
                    raise _Exhausted("steps")
                if deadline is not None and not steps & _WALL_CHECK_MASK and time.perf_counter() > deadline:
                    raise _Exhausted("time")

                # a goal is either a template over env or, with env None, a term
                if env is not None:
                    tg = type(goal)
                    if tg is _Tpl:
                        name, targs = goal.name, goal.args
                        key = (name, len(targs))
                        if key in _CONTROL:
                            frames = self._control(name, targs, env, cutb, loc, rest)
                            continue
                        args = tuple(
                            [
                                (env[a.i] or _fresh(env, a.i)) if type(a) is _Slot
                                else (_build(a, env) if type(a) is _Tpl else a)
                                for a in targs
                            ]
                        )
                    elif tg is _Slot:
                        goal = env[goal.i]
                        if goal is None:
                            self.culprit = (Atom("call"), None)
                            raise PrologError(INSTANTIATION_ERROR)
                        env = None
                    else:
                        env = None
                if env is None:
                    while isinstance(goal, Var):
                        v = store.get(goal)
                        if v is None:
                            self.culprit = (goal, None)
                            raise PrologError(INSTANTIATION_ERROR)
                        goal = v
                    tg = type(goal)
                    if tg is Compound:
                        name, args = goal.name, goal.args
                    elif tg is Atom:
                        name, args = goal.name, ()
                    else:
                        self.culprit = (goal, None)
                        raise PrologError(type_error("callable", goal))
                    key = (name, len(args))
                    if key in _CONTROL:
                        frames = self._control(name, args, None, cutb, loc, rest)
                        continue

                self.culprit = (goal, env)
                inv = None
                if loc is not None:
                    inv = self._open(loc, steps)

                if key in BUILTINS:
                    if name == "!":
                        del cps[cutb:]
                        ok = True
                    elif name == "true":
                        ok = True
                    elif name == "fail" or name == "false":
                        ok = False
                    elif name == "\\+":
                        h = len(cps)
                        resume = (_EXIT, inv, rest) if inv is not None else rest
                        cps.append((_CP_GOAL, len(trail), len(live), len(exits), resume))
                        frames = (_GOAL, args[0], None, h + 1, None, (_NAF_FAIL, h, None))
                        continue
                    elif name == "call":
                        after = (_EXIT, inv, rest) if inv is not None else rest
                        frames = (_GOAL, self._call_target(args, goal), None, len(cps), None, after)
                        continue
                    else:
                        ok = self._builtin(name, args)
                    if ok:
                        if inv is not None:
                            self._exit(inv, steps)
                        frames = rest
                    else:
                        frames = _FAIL
                    continue

                clauses = preds.get(key)
                if clauses is None:
                    raise PrologError(existence_error(name, len(args)))
                fk = None
                if args:
                    first = args[0]
                    while isinstance(first, Var):
                        v = store.get(first)
                        if v is None:
                            break
                        first = v
                    fk = _first_key(first)
                cont = (_EXIT, inv, rest) if inv is not None else rest
                i = _next_clause(clauses, 0, fk)
                if i < 0:
                    frames = _FAIL
                    continue
                j = _next_clause(clauses, i + 1, fk)
                cutb = len(cps)
                if j >= 0:
                    cps.append((_CP_CLAUSES, len(trail), len(live), len(exits), args, clauses, j, fk, cont))
                self.renamings += 1
                frames = _enter(clauses[i], args, cutb, cont, tracing, store, trail)
        finally:
            self.steps = steps

    def _control(self, name: str, args, env, cutb: int, loc, rest):
        a, b = args
        la = lb = None
        if loc is not None:
            la = (loc[0], loc[1], loc[2] + (0,))
            lb = (loc[0], loc[1], loc[2] + (1,))
        if name == ",":
            return (_GOAL, a, env, cutb, la, (_GOAL, b, env, cutb, lb, rest))
        cps = self.cps
        h = len(cps)
        if name == "->":
            then = (_GOAL, b, env, cutb, lb, rest)
            return (_GOAL, a, env, h, la, (_CUT_TO, h, then))
        cond = _ite_parts(a, env, self.store)
        else_ = (_CP_GOAL, len(self.trail), len(self.live), len(self.exits), (_GOAL, b, env, cutb, lb, rest))
        cps.append(else_)
        if cond is None:
            return (_GOAL, a, env, cutb, la, rest)
        c, t, cenv = cond
        lc = lt = None
        if la is not None:
            lc = (la[0], la[1], la[2] + (0,))
            lt = (la[0], la[1], la[2] + (1,))
        then = (_GOAL, t, cenv, cutb, lt, rest)
        return (_GOAL, c, cenv, h + 1, lc, (_CUT_TO, h, then))

    def _call_target(self, args, goal) -> Term:
        store = self.store
        target = _deref(args[0], store)
        if isinstance(target, Var):
            raise PrologError(INSTANTIATION_ERROR)
        if len(args) > 1:
            extra = args[1:]
            span = getattr(goal, "span", None)
            if type(target) is Atom:
                return Compound(target.name, extra, span)
            if type(target) is Compound:
                return Compound(target.name, target.args + extra, span)
            raise PrologError(type_error("callable", target))
        if not is_callable(target):
            raise PrologError(type_error("callable", target))
        return target

    def _undo(self, mark: int) -> None:
        trail, store = self.trail, self.store
        while len(trail) > mark:
            del store[trail.pop()]

    def _builtin(self, name: str, args) -> bool:
        store, trail = self.store, self.trail
        if name == "=":
            return _unify(args[0], args[1], store, trail)
        if name == "\\=":
            mark = len(trail)
            ok = _unify(args[0], args[1], store, trail)
            self._undo(mark)
            return not ok
        if name == "==":
            return compare_terms(args[0], args[1], store) == 0
        if name == "\\==":
            return compare_terms(args[0], args[1], store) != 0
        if name == "is":
            value = _number_term(_eval(args[1], store))
            return _unify(args[0], value, store, trail)
        cmp = _ARITH_CMP.get(name)
        if cmp is not None:
            return cmp(_eval(args[0], store), _eval(args[1], store))
        if name == "var":
            return isinstance(_deref(args[0], store), Var)
        if name == "nonvar":
            return not isinstance(_deref(args[0], store), Var)
        if name == "sort":
            return _unify(args[1], self._sort(args[0]), store, trail)
        raise AssertionError(f"unhandled builtin {name}")

    def _sort(self, lst: Term) -> Term:
        store = self.store
        items = []
        t = _deref(lst, store)
        while type(t) is Compound and t.name == "." and len(t.args) == 2:
            items.append(t.args[0])
            t = _deref(t.args[1], store)
        if isinstance(t, Var):
            raise PrologError(INSTANTIATION_ERROR)
        if t != NIL:
            raise PrologError(type_error("list", lst))
        ordered = sorted(items, key=functools.cmp_to_key(lambda a, b: compare_terms(a, b, store)))
        unique: list = []
        for item in ordered:
            if not unique or compare_terms(unique[-1], item, store) != 0:
                unique.append(item)
        return make_list(unique)


def _next_clause(clauses: list, i: int, fk) -> int:
    n = len(clauses)
    while i < n:
        ck = clauses[i].fkey
        if fk is None or ck is None or ck == fk:
            return i
        i += 1
    return -1


def _unify_head(tpl, term: Term, frame: list, store: dict, trail: list) -> bool:
    tt = type(tpl)
    if tt is _Slot:
        cur = frame[tpl.i]
        if cur is None:
            frame[tpl.i] = term
            return True
        return _unify(cur, term, store, trail)
    if tt is _Tpl:
        while isinstance(term, Var):
            v = store.get(term)
            if v is None:
                store[term] = _build(tpl, frame)
                trail.append(term)
                return True
            term = v
        if type(term) is not Compound or term.name != tpl.name or len(term.args) != len(tpl.args):
            return False
        for sub, arg in zip(tpl.args, term.args):
            if not _unify_head(sub, arg, frame, store, trail):
                return False
        return True
    return _unify(tpl, term, store, trail)

