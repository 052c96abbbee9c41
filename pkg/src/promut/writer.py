"""Render terms and programs back to source text."""

from __future__ import annotations

import re

from . import optable
from .terms import Atom, Compound, Float, Int, Term, Var

MAX_DEPTH = 400

_PLAIN = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
_SYMBOLIC = re.compile(r"[+\-*/\\^<>=~:.?@#&$]+\Z")
_SOLO = {"[]", "!", ";"}
_ESC = {"\\": "\\\\", "'": "\\'", "\n": "\\n", "\t": "\\t", "\r": "\\r", "\0": "\\0"}


def format_atom(name: str) -> str:
    if _PLAIN.match(name) or name in _SOLO:
        return name
    if _SYMBOLIC.match(name) and not name.startswith("/*") and name != ".":
        return name
    return "'" + "".join(_ESC.get(c, c) for c in name) + "'"


def _functor(name: str) -> str:
    # solo characters need quotes when written in functional notation
    if name in (",", "|", "[]", "{}"):
        return "'" + name + "'"
    return format_atom(name)


def format_float(value: float) -> str:
    text = repr(value)
    if "e" in text and "." not in text.split("e")[0]:
        mantissa, exp = text.split("e")
        text = f"{mantissa}.0e{exp}"
    return text


def _is_list_cell(t: Term) -> bool:
    return type(t) is Compound and t.name == "." and len(t.args) == 2


def format_term(term: Term, max_prec: int = 1200, depth: int = MAX_DEPTH) -> str:
    """Operator-aware rendering that re-reads to the same term."""
    out: list = []
    _write(term, max_prec, depth, out)
    return "".join(out)


def _write(t: Term, prec: int, depth: int, out: list) -> None:
    if depth <= 0:
        out.append("...")
        return
    tt = type(t)
    if tt is Int:
        out.append(str(t.value))
        return
    if tt is Float:
        out.append(format_float(t.value))
        return
    if isinstance(t, Var):
        out.append("_" if t.anonymous else t.name)
        return
    if tt is Atom:
        text = format_atom(t.name)
        if optable.is_operator(t.name) and prec < 1200:
            text = f"({text})"
        out.append(text)
        return
    name, args = t.name, t.args
    if name == "." and len(args) == 2:
        _write_list(t, depth, out)
        return
    if len(args) == 2 and name in optable.INFIX:
        p, lmax, rmax = optable.infix_args(name)
        open_paren = p > prec
        if open_paren:
            out.append("(")
        _write(args[0], lmax, depth - 1, out)
        if name == ",":
            out.append(", ")
        else:
            out.append(f" {format_atom(name)} ")
        _write_right(args[1], rmax, depth - 1, out)
        if open_paren:
            out.append(")")
        return
    if len(args) == 1 and name in optable.PREFIX:
        arg = args[0]
        if (name == "-" and type(arg) in (Int, Float)) or _starts_with_operator(arg):
            # "- 1" would read back as the integer -1, "- *(a)" as (-) * a
            out.append(format_atom(name) + "(")
            _write_arg(arg, depth - 1, out)
            out.append(")")
            return
        p, amax = optable.prefix_arg(name)
        open_paren = p > prec
        if open_paren:
            out.append("(")
        out.append(format_atom(name))
        out.append(" ")
        _write(arg, amax, depth - 1, out)
        if open_paren:
            out.append(")")
        return
    out.append(_functor(name))
    out.append("(")
    for i, a in enumerate(args):
        if i:
            out.append(",")
        _write_arg(a, depth - 1, out)
    out.append(")")


def _starts_with_operator(t: Term) -> bool:
    if type(t) is Atom:
        return optable.is_operator(t.name)
    if type(t) is not Compound or t.name == "." and len(t.args) == 2:
        return False
    return optable.is_operator(t.name) and not (len(t.args) == 2 and t.name in optable.INFIX)


def _write_arg(t: Term, depth: int, out: list) -> None:
    # operator atoms need no parentheses as plain arguments or list elements
    if type(t) is Atom:
        out.append(format_atom(t.name))
    else:
        _write(t, 999, depth, out)


def _write_right(t: Term, prec: int, depth: int, out: list) -> None:
    # loop on right-nested operator chains (conjunctions, long sums) to bound recursion
    while (
        type(t) is Compound
        and len(t.args) == 2
        and t.name in optable.INFIX
        and optable.INFIX[t.name][0] <= prec
        and optable.INFIX[t.name][1] == "xfy"
        and depth > 0
    ):
        p, lmax, rmax = optable.infix_args(t.name)
        _write(t.args[0], lmax, depth - 1, out)
        out.append(", " if t.name == "," else f" {format_atom(t.name)} ")
        t, prec, depth = t.args[1], rmax, depth - 1
    _write(t, prec, depth, out)


def _write_list(t: Term, depth: int, out: list) -> None:
    out.append("[")
    _write_arg(t.args[0], depth - 1, out)
    t = t.args[1]
    count = 0
    while _is_list_cell(t):
        count += 1
        if count > 100_000:
            out.append("|...]")
            return
        out.append(",")
        _write_arg(t.args[0], depth - 1, out)
        t = t.args[1]
    if not (type(t) is Atom and t.name == "[]"):
        out.append("|")
        _write_arg(t, depth - 1, out)
    out.append("]")


def format_canonical(term: Term, depth: int = MAX_DEPTH) -> str:
    """Functional notation for every compound, lists included (like write_canonical)."""
    out: list = []
    stack = [(term, depth)]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        t, d = item
        if d <= 0:
            out.append("...")
        elif type(t) is Int:
            out.append(str(t.value))
        elif type(t) is Float:
            out.append(format_float(t.value))
        elif isinstance(t, Var):
            out.append("_" if t.anonymous else t.name)
        elif type(t) is Atom:
            out.append(format_atom(t.name))
        else:
            name = "'.'" if t.name == "." else _functor(t.name)
            out.append(name + "(")
            stack.append(")")
            for i in range(len(t.args) - 1, -1, -1):
                stack.append((t.args[i], d - 1))
                if i:
                    stack.append(",")
    return "".join(out)


def format_clause(clause: Clause) -> str:
    head = format_term(clause.head, 1199)
    if clause.is_fact:
        return f"{head}."
    return f"{head} :- {format_term(clause.body, 1199)}."


def pretty_print(program: Program) -> str:
    """Source text for a program: directives first, then one clause per line."""
    lines = [f":- {format_term(d, 1199)}." for d in program.directives]
    lines.extend(format_clause(c) for c in program.clauses)
    return "\n".join(lines) + ("\n" if lines else "")
