"""Prolog terms, clauses, programs and term paths.

Terms are immutable values. Equality and hashing are structural and ignore
source spans. Lists are stored desugared: ``[H|T]`` is ``'.'(H, T)`` and the
empty list is the atom ``[]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Tuple

from .errors import InvalidPath

Span = Optional[Tuple[int, int]]
TermPath = Tuple[int, ...]
PredKey = Tuple[str, int]


class Term:
    __slots__ = ()

    def __repr__(self) -> str:
        from .writer import format_term

        return f"<{type(self).__name__} {format_term(self)}>"

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")


class Var(Term):
    """A logic variable.

    Source variables are identified by name. Every ``_`` in the source becomes
    its own anonymous variable with a clause-unique name such as ``_#3``.
    """

    __slots__ = ("name", "anonymous", "span", "_hash")

    def __init__(self, name: str, anonymous: bool = False, span: Span = None):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "anonymous", anonymous)
        object.__setattr__(self, "span", span)
        object.__setattr__(self, "_hash", hash(("var", name, anonymous)))

    def __eq__(self, other):
        return self is other or (
            type(other) is Var and other.name == self.name and other.anonymous == self.anonymous
        )

    def __hash__(self):
        return self._hash

    def __reduce__(self):
        return (Var, (self.name, self.anonymous, self.span))


class Ref(Var):
    """A fresh runtime variable. Identity is object identity."""

    __slots__ = ("id",)
    _ids = itertools.count()

    def __init__(self):
        object.__setattr__(self, "id", next(Ref._ids))

    @property
    def name(self) -> str:  # type: ignore[override]
        return f"_G{self.id}"

    @property
    def anonymous(self) -> bool:  # type: ignore[override]
        return False

    @property
    def span(self):  # type: ignore[override]
        return None

    __eq__ = object.__eq__
    __hash__ = object.__hash__

    def __reduce__(self):
        return (Ref, ())


class Atom(Term):
    __slots__ = ("name", "span")

    def __init__(self, name: str, span: Span = None):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "span", span)

    def __eq__(self, other):
        return self is other or (type(other) is Atom and other.name == self.name)

    def __hash__(self):
        return hash(("atom", self.name))

    def __reduce__(self):
        return (Atom, (self.name, self.span))


class Int(Term):
    __slots__ = ("value", "span")

    def __init__(self, value: int, span: Span = None):
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "span", span)

    def __eq__(self, other):
        return self is other or (type(other) is Int and other.value == self.value)

    def __hash__(self):
        return hash(("int", self.value))

    def __reduce__(self):
        return (Int, (self.value, self.span))


class Float(Term):
    __slots__ = ("value", "span")

    def __init__(self, value: float, span: Span = None):
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "span", span)

    def __eq__(self, other):
        return self is other or (type(other) is Float and other.value == self.value)

    def __hash__(self):
        return hash(("float", self.value))

    def __reduce__(self):
        return (Float, (self.value, self.span))


class Compound(Term):
    __slots__ = ("name", "args", "span")

    def __init__(self, name: str, args: tuple, span: Span = None):
        if not args:
            raise ValueError("compound terms need at least one argument; use Atom")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "args", tuple(args))
        object.__setattr__(self, "span", span)

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def indicator(self) -> PredKey:
        return (self.name, len(self.args))

    def __eq__(self, other):
        if self is other:
            return True
        if type(other) is not Compound:
            return False
        # iterative so long lists do not exhaust the recursion limit
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if type(a) is Compound:
                if type(b) is not Compound or a.name != b.name or len(a.args) != len(b.args):
                    return False
                stack.extend(zip(a.args, b.args))
            elif a != b:
                return False
        return True

    def __hash__(self):
        h = hash(("compound", self.name, len(self.args)))
        for t in iter_subterms(self):
            if type(t) is not Compound:
                h = hash((h, t))
            else:
                h = hash((h, t.name, len(t.args)))
        return h

    def __reduce__(self):
        return (Compound, (self.name, self.args, self.span))


NIL = Atom("[]")
TRUE = Atom("true")


def iter_subterms(term: Term) -> Iterator[Term]:
    """Pre-order walk over a term and all of its subterms."""
    stack = [term]
    while stack:
        t = stack.pop()
        yield t
        if type(t) is Compound:
            stack.extend(reversed(t.args))


def make_list(items, tail: Term = NIL) -> Term:
    out = tail
    for item in reversed(list(items)):
        out = Compound(".", (item, out))
    return out


def list_items(term: Term) -> Tuple[list, Term]:
    """Split a (possibly partial) list into its elements and its tail."""
    items = []
    while type(term) is Compound and term.name == "." and len(term.args) == 2:
        items.append(term.args[0])
        term = term.args[1]
    return items, term


def is_callable(term: Term) -> bool:
    return type(term) is Atom or type(term) is Compound


def indicator(term: Term) -> PredKey:
    if type(term) is Atom:
        return (term.name, 0)
    if type(term) is Compound:
        return (term.name, len(term.args))
    raise TypeError(f"not callable: {term!r}")


def term_variables(term: Term) -> list:
    """Distinct variables of a term in depth-first, left-to-right order."""
    seen = []
    found = set()
    for t in iter_subterms(term):
        if isinstance(t, Var) and t not in found:
            found.add(t)
            seen.append(t)
    return seen


@dataclass(frozen=True)
class Clause:
    head: Term
    body: Term = TRUE
    index: int = 1  # 1-based ordinal within its predicate
    span: Span = field(default=None, compare=False)

    def __post_init__(self):
        if not is_callable(self.head):
            raise TypeError(f"clause head must be an atom or compound, got {self.head!r}")

    @property
    def key(self) -> PredKey:
        return indicator(self.head)

    @property
    def is_fact(self) -> bool:
        return self.body == TRUE


@dataclass(frozen=True)
class Program:
    """Ordered clauses plus directives; the predicate index is derived."""

    clauses: Tuple[Clause, ...] = ()
    directives: Tuple[Term, ...] = ()
    loc: int = field(default=0, compare=False)

    def __post_init__(self):
        counters: dict = {}
        fixed = []
        for c in self.clauses:
            n = counters.get(c.key, 0) + 1
            counters[c.key] = n
            fixed.append(c if c.index == n else Clause(c.head, c.body, n, c.span))
        object.__setattr__(self, "clauses", tuple(fixed))
        object.__setattr__(self, "directives", tuple(self.directives))
        index: dict = {}
        for pos, c in enumerate(self.clauses):
            index.setdefault(c.key, []).append(pos)
        object.__setattr__(self, "_index", {k: tuple(v) for k, v in index.items()})

    @property
    def index(self) -> dict:
        """(name, arity) -> positions in ``clauses``, in source order."""
        return dict(self._index)

    @property
    def predicates(self) -> list:
        return list(self._index)

    def clauses_for(self, key: PredKey) -> Tuple[Clause, ...]:
        return tuple(self.clauses[i] for i in self._index.get(key, ()))

    def position(self, key: PredKey, ordinal: int) -> int:
        """Global position of the ``ordinal``-th (1-based) clause of ``key``."""
        return self._index[key][ordinal - 1]

    def replace_clause(self, position: int, clause: Clause) -> "Program":
        clauses = list(self.clauses)
        clauses[position] = clause
        return Program(tuple(clauses), self.directives, self.loc)


# --- term paths ---------------------------------------------------------------


def _child(node: Term, step: int, path) -> Term:
    if type(node) is not Compound or not 0 <= step < len(node.args):
        raise InvalidPath(path)
    return node.args[step]


def resolve_path(clause: Clause, path) -> Term:
    """Return the node addressed by ``path``: head is step 0, body is step 1."""
    path = tuple(path)
    if not path or path[0] not in (0, 1):
        raise InvalidPath(path)
    node = clause.head if path[0] == 0 else clause.body
    for step in path[1:]:
        node = _child(node, step, path)
    return node


def _replace(node: Term, steps, replacement: Term, path) -> Term:
    if not steps:
        return replacement
    child = _child(node, steps[0], path)
    args = list(node.args)
    args[steps[0]] = _replace(child, steps[1:], replacement, path)
    return Compound(node.name, tuple(args), node.span)


def replace_at(clause: Clause, path, replacement: Term) -> Clause:
    """Return a new clause with the node at ``path`` replaced."""
    path = tuple(path)
    if not path or path[0] not in (0, 1):
        raise InvalidPath(path)
    if path[0] == 0:
        head = _replace(clause.head, path[1:], replacement, path)
        return Clause(head, clause.body, clause.index, clause.span)
    body = _replace(clause.body, path[1:], replacement, path)
    return Clause(clause.head, body, clause.index, clause.span)


def iter_paths(clause: Clause) -> Iterator[Tuple[TermPath, Term]]:
    """All (path, node) pairs of a clause in pre-order: head first, then body."""
    stack = [((1,), clause.body), ((0,), clause.head)]
    while stack:
        path, node = stack.pop()
        yield path, node
        if type(node) is Compound:
            for i in range(len(node.args) - 1, -1, -1):
                stack.append((path + (i,), node.args[i]))
