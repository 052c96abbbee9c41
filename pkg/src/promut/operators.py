"""Mutation operators: site enumeration and single-site application."""

from __future__ import annotations

import difflib
import enum
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Tuple

from .errors import InvalidPath, StaleSite
from .terms import (
    NIL,
    Atom,
    Clause,
    Compound,
    Float,
    Int,
    PredKey,
    Program,
    Term,
    TermPath,
    Var,
    replace_at,
    resolve_path,
)
from .writer import format_clause


class OperatorId(enum.Enum):
    """The catalogue, in report order. Values are (label, sensible)."""

    REMOVE_PREDICATE = ("remove predicate", True)
    SEMI_TO_COMMA = ("; to ,", True)
    COMMA_TO_SEMI = (", to ;", True)
    EQ_TO_NEQ = ("= to \\=", True)
    NEQ_TO_EQ = ("\\= to =", True)
    ARITH_EQ_TO_NEQ = ("=:= to =\\=", True)
    ARITH_NEQ_TO_EQ = ("=\\= to =:=", True)
    STRUCT_EQ_TO_NEQ = ("== to \\==", True)
    STRUCT_NEQ_TO_EQ = ("\\== to ==", True)
    GT_TO_LE = ("> to =<", True)
    GE_TO_LT = (">= to <", True)
    LT_TO_GE = ("< to >=", True)
    LE_TO_GT = ("=< to >", True)
    PLUS_TO_MINUS = ("+ to -", True)
    MINUS_TO_PLUS = ("- to +", True)
    TIMES_TO_PLUS = ("* to +", True)
    DIV_TO_MINUS = ("/ to -", True)
    INC_NUMBER = ("increase number", True)
    DEC_NUMBER = ("decrease number", True)
    NEGATE_GOAL = ("negate expression", True)
    TRUE_TO_FALSE = ("true to false", True)
    FALSE_TO_TRUE = ("false to true", True)
    VAR_TO_ANON = ("var to _", True)
    ATOM_TO_ANON = ("atom to _", True)
    NIL_TO_ANON = ("[] to _", True)
    PERMUTE_CUT = ("permute cut", False)
    REVERSE_PREDICATE = ("reverse predicate", False)

    @property
    def label(self) -> str:
        return self.value[0]

    @property
    def sensible(self) -> bool:
        return self.value[1]

    @property
    def cli_name(self) -> str:
        return self.name.lower()

    @property
    def order(self) -> int:
        return _ORDER[self]

    @classmethod
    def parse(cls, text: str) -> "OperatorId":
        key = text.strip().upper().replace("-", "_")
        try:
            return cls[key]
        except KeyError:
            raise ValueError(f"unknown mutation operator {text!r}") from None


ALL_OPERATORS: Tuple[OperatorId, ...] = tuple(OperatorId)
_ORDER = {op: i for i, op in enumerate(ALL_OPERATORS)}

_SWAPS = {
    OperatorId.EQ_TO_NEQ: ("=", "\\="),
    OperatorId.NEQ_TO_EQ: ("\\=", "="),
    OperatorId.ARITH_EQ_TO_NEQ: ("=:=", "=\\="),
    OperatorId.ARITH_NEQ_TO_EQ: ("=\\=", "=:="),
    OperatorId.STRUCT_EQ_TO_NEQ: ("==", "\\=="),
    OperatorId.STRUCT_NEQ_TO_EQ: ("\\==", "=="),
    OperatorId.GT_TO_LE: (">", "=<"),
    OperatorId.GE_TO_LT: (">=", "<"),
    OperatorId.LT_TO_GE: ("<", ">="),
    OperatorId.LE_TO_GT: ("=<", ">"),
    OperatorId.PLUS_TO_MINUS: ("+", "-"),
    OperatorId.MINUS_TO_PLUS: ("-", "+"),
    OperatorId.TIMES_TO_PLUS: ("*", "+"),
    OperatorId.DIV_TO_MINUS: ("/", "-"),
}

_CONTROL = (",", ";", "->")
# the only node operators that also look inside clause heads
_HEAD_OPERATORS = frozenset(
    {
        OperatorId.INC_NUMBER,
        OperatorId.DEC_NUMBER,
        OperatorId.VAR_TO_ANON,
        OperatorId.ATOM_TO_ANON,
        OperatorId.NIL_TO_ANON,
    }
)
PREDICATE_LEVEL = frozenset({OperatorId.REMOVE_PREDICATE, OperatorId.REVERSE_PREDICATE})


def select_operators(spec: str) -> Tuple[OperatorId, ...]:
    """Operators named by ``all``, ``sensible``, ``foolish`` or a comma list."""
    spec = spec.strip().lower()
    if spec == "all":
        return ALL_OPERATORS
    if spec == "sensible":
        return tuple(op for op in ALL_OPERATORS if op.sensible)
    if spec == "foolish":
        return tuple(op for op in ALL_OPERATORS if not op.sensible)
    chosen = {OperatorId.parse(part) for part in spec.split(",") if part.strip()}
    return tuple(op for op in ALL_OPERATORS if op in chosen)


@dataclass(frozen=True)
class MutationSite:
    operator: OperatorId
    predicate: PredKey
    clause: Optional[int] = None  # 1-based ordinal within the predicate
    path: Optional[TermPath] = None
    id: int = 0

    @property
    def sort_key(self):
        return self.id

    def describe(self) -> str:
        name, arity = self.predicate
        where = f"{name}/{arity}"
        if self.clause is not None:
            where += f" clause {self.clause} at {list(self.path)}"
        return f"{self.operator.label}: {where}"


@dataclass(frozen=True)
class Mutant:
    site: MutationSite
    program: Program
    diff: str


# --- node classification --------------------------------------------------------


def _is_op(t: Term, name: str, arity: int) -> bool:
    return type(t) is Compound and t.name == name and len(t.args) == arity


def _goal_nodes(body: Term, path: TermPath = (1,)) -> Iterator[Tuple[TermPath, Term]]:
    """Nodes in goal position: the body and everything reached through control."""
    stack = [(path, body)]
    while stack:
        p, g = stack.pop()
        yield p, g
        if type(g) is Compound and g.name in _CONTROL and len(g.args) == 2:
            stack.append((p + (1,), g.args[1]))
            stack.append((p + (0,), g.args[0]))


def _goal_leaves(clause: Clause) -> Iterator[Tuple[TermPath, Term]]:
    for p, g in _goal_nodes(clause.body):
        if not (type(g) is Compound and g.name in _CONTROL and len(g.args) == 2):
            yield p, g


def subgoals(clause: Clause) -> List[TermPath]:
    """Paths of the sub-goals of a clause (goal-position leaves, in order)."""
    return sorted(p for p, _ in _goal_leaves(clause))


def _walk(clause: Clause) -> Iterator[Tuple[TermPath, Term, bool]]:
    """Every node with a flag telling whether it sits in argument position.

    Argument position means a child of a compound, excluding goals, the goal
    under ``\\+`` and the goal passed to ``call/N``.
    """
    goals = {p for p, _ in _goal_nodes(clause.body)} if not clause.is_fact else set()
    roots = [((0,), clause.head)]
    if not clause.is_fact:
        roots.append(((1,), clause.body))
    for root_path, root in roots:
        stack = [(root_path, root, False)]
        while stack:
            path, node, in_arg = stack.pop()
            yield path, node, in_arg
            if type(node) is Compound:
                for i in range(len(node.args) - 1, -1, -1):
                    child_path = path + (i,)
                    goal_like = (
                        child_path in goals
                        or (node.name == "\\+" and len(node.args) == 1)
                        or (node.name == "call" and i == 0)
                    )
                    stack.append((child_path, node.args[i], not goal_like))


def _conjunct_chain(node: Term, path: TermPath, out: list) -> None:
    if _is_op(node, ",", 2):
        _conjunct_chain(node.args[0], path + (0,), out)
        _conjunct_chain(node.args[1], path + (1,), out)
    else:
        out.append((path, node))


def _cut_swaps(clause: Clause) -> Iterator[Tuple[TermPath, TermPath]]:
    """(cut path, preceding conjunct path) for every permutable cut."""
    for path, node in _goal_nodes(clause.body):
        parent_is_conj = len(path) > 1 and _is_op(resolve_path(clause, path[:-1]), ",", 2)
        if not _is_op(node, ",", 2) or parent_is_conj:
            continue
        chain: list = []
        _conjunct_chain(node, path, chain)
        for k in range(1, len(chain)):
            p, g = chain[k]
            prev_path, prev = chain[k - 1]
            if g == Atom("!") and prev != Atom("!"):
                yield p, prev_path


def _node_sites(op: OperatorId, clause: Clause) -> Iterator[TermPath]:
    if clause.is_fact and op not in _HEAD_OPERATORS:
        return
    if op in _SWAPS:
        name = _SWAPS[op][0]
        for path, node, _ in _walk(clause):
            if path[0] == 1 and _is_op(node, name, 2):
                yield path
    elif op is OperatorId.SEMI_TO_COMMA:
        for path, node in _goal_nodes(clause.body):
            if _is_op(node, ";", 2) and not _is_op(node.args[0], "->", 2):
                yield path
    elif op is OperatorId.COMMA_TO_SEMI:
        for path, node in _goal_nodes(clause.body):
            if _is_op(node, ",", 2):
                yield path
    elif op in (OperatorId.INC_NUMBER, OperatorId.DEC_NUMBER):
        for path, node, _ in _walk(clause):
            if type(node) is Int or type(node) is Float:
                yield path
    elif op is OperatorId.NEGATE_GOAL:
        for path, node in _goal_leaves(clause):
            callable_ = type(node) is Atom or type(node) is Compound
            if callable_ and node != Atom("!") and not _is_op(node, "\\+", 1):
                yield path
    elif op is OperatorId.TRUE_TO_FALSE:
        for path, node in _goal_leaves(clause):
            if node == Atom("true"):
                yield path
    elif op is OperatorId.FALSE_TO_TRUE:
        for path, node in _goal_leaves(clause):
            if node == Atom("fail") or node == Atom("false"):
                yield path
    elif op is OperatorId.VAR_TO_ANON:
        for path, node, _ in _walk(clause):
            if isinstance(node, Var) and not node.anonymous:
                yield path
    elif op is OperatorId.ATOM_TO_ANON:
        for path, node, in_arg in _walk(clause):
            if in_arg and type(node) is Atom and node != NIL:
                yield path
    elif op is OperatorId.NIL_TO_ANON:
        for path, node, in_arg in _walk(clause):
            if in_arg and node == NIL:
                yield path
    elif op is OperatorId.PERMUTE_CUT:
        for cut_path, _ in _cut_swaps(clause):
            yield cut_path


def enumerate_sites(program: Program, ops: Optional[Iterable[OperatorId]] = None) -> List[MutationSite]:
    """All sites for ``ops`` in canonical order; ids count from 1."""
    chosen = set(ALL_OPERATORS if ops is None else ops)
    found: list = []
    for op in ALL_OPERATORS:
        if op not in chosen:
            continue
        if op is OperatorId.REMOVE_PREDICATE:
            found.extend(MutationSite(op, key) for key in program.predicates)
        elif op is OperatorId.REVERSE_PREDICATE:
            for key in program.predicates:
                clauses = program.clauses_for(key)
                if len(clauses) >= 2 and not _palindrome(clauses):
                    found.append(MutationSite(op, key))
        else:
            for clause in program.clauses:
                paths = sorted(set(_node_sites(op, clause)))
                found.extend(MutationSite(op, clause.key, clause.index, p) for p in paths)
    return [
        MutationSite(s.operator, s.predicate, s.clause, s.path, i)
        for i, s in enumerate(found, start=1)
    ]


def _palindrome(clauses) -> bool:
    # reversing such a predicate would reproduce the original program
    pairs = [(c.head, c.body) for c in clauses]
    return pairs == pairs[::-1]


# --- application ------------------------------------------------------------------


def _fresh_anon(clause: Clause) -> Var:
    used = {t.name for _, t, _ in _walk(clause) if isinstance(t, Var)}
    k = 0
    while f"_#m{k}" in used:
        k += 1
    return Var(f"_#m{k}", anonymous=True)


def _mutate_node(op: OperatorId, node: Term, clause: Clause) -> Term:
    if op in _SWAPS:
        return Compound(_SWAPS[op][1], node.args, node.span)
    if op is OperatorId.SEMI_TO_COMMA:
        return Compound(",", node.args, node.span)
    if op is OperatorId.COMMA_TO_SEMI:
        return Compound(";", node.args, node.span)
    if op in (OperatorId.INC_NUMBER, OperatorId.DEC_NUMBER):
        delta = 1 if op is OperatorId.INC_NUMBER else -1
        if type(node) is Int:
            return Int(node.value + delta, node.span)
        return Float(node.value + float(delta), node.span)
    if op is OperatorId.NEGATE_GOAL:
        return Compound("\\+", (node,), getattr(node, "span", None))
    if op is OperatorId.TRUE_TO_FALSE:
        return Atom("fail", node.span)
    if op is OperatorId.FALSE_TO_TRUE:
        return Atom("true", node.span)
    if op in (OperatorId.VAR_TO_ANON, OperatorId.ATOM_TO_ANON, OperatorId.NIL_TO_ANON):
        return _fresh_anon(clause)
    raise AssertionError(op)


def _predicate_lines(program: Program, key: PredKey) -> List[str]:
    return [format_clause(c) for c in program.clauses_for(key)]


def _diff(before: Program, after: Program, key: PredKey) -> str:
    lines = difflib.unified_diff(
        _predicate_lines(before, key),
        _predicate_lines(after, key),
        "original",
        "mutant",
        lineterm="",
    )
    return "\n".join(lines)


def apply(program: Program, site: MutationSite) -> Mutant:
    """Build the mutant for one site. The input program is left untouched."""
    op, key = site.operator, site.predicate
    positions = program.index.get(key)
    if not positions:
        raise StaleSite(f"predicate {key[0]}/{key[1]} does not exist")

    if op is OperatorId.REMOVE_PREDICATE:
        kept = tuple(c for c in program.clauses if c.key != key)
        mutated = Program(kept, program.directives, program.loc)
    elif op is OperatorId.REVERSE_PREDICATE:
        clauses = list(program.clauses)
        originals = [clauses[i] for i in positions]
        if len(originals) < 2 or _palindrome(originals):
            raise StaleSite(f"{key[0]}/{key[1]} has no distinct clause order to reverse")
        for pos, clause in zip(positions, reversed(originals)):
            clauses[pos] = clause
        mutated = Program(tuple(clauses), program.directives, program.loc)
    else:
        if site.clause is None or site.path is None or not 1 <= site.clause <= len(positions):
            raise StaleSite(f"site {site.describe()} does not address a clause")
        pos = positions[site.clause - 1]
        clause = program.clauses[pos]
        if site.path not in set(_node_sites(op, clause)):
            raise StaleSite(f"site {site.describe()} does not match the program")
        try:
            if op is OperatorId.PERMUTE_CUT:
                prev_path = dict(_cut_swaps(clause))[site.path]
                prev = resolve_path(clause, prev_path)
                cut = resolve_path(clause, site.path)
                new_clause = replace_at(replace_at(clause, prev_path, cut), site.path, prev)
            else:
                node = resolve_path(clause, site.path)
                new_clause = replace_at(clause, site.path, _mutate_node(op, node, clause))
        except InvalidPath as exc:
            raise StaleSite(str(exc)) from exc
        mutated = program.replace_clause(pos, new_clause)
    return Mutant(site, mutated, _diff(program, mutated, key))
