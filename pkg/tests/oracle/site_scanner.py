"""Brute-force site counter, written apart from promut.operators.

It walks each clause once, recursively, carrying the syntactic context of
the node, and counts candidate sites per operator name. Running this file
rewrites site_counts.json for the bundled corpus.
"""

import json
from collections import Counter
from pathlib import Path

from promut import corpus
from promut.terms import Atom, Compound, Float, Int, Var

SWAPS = {
    "eq_to_neq": "=", "neq_to_eq": "\\=", "arith_eq_to_neq": "=:=", "arith_neq_to_eq": "=\\=",
    "struct_eq_to_neq": "==", "struct_neq_to_eq": "\\==", "gt_to_le": ">", "ge_to_lt": ">=",
    "lt_to_ge": "<", "le_to_gt": "=<", "plus_to_minus": "+", "minus_to_plus": "-",
    "times_to_plus": "*", "div_to_minus": "/",
}
OPERATORS = [
    "remove_predicate", "semi_to_comma", "comma_to_semi", *SWAPS, "inc_number", "dec_number",
    "negate_goal", "true_to_false", "false_to_true", "var_to_anon", "atom_to_anon", "nil_to_anon",
    "permute_cut", "reverse_predicate",
]

# contexts: "goal" (reached from the body through , ; ->), "arg" (argument
# position), "plain" (neither: a head, or the goal handed to \+ or call/N)


def is_control(t):
    return isinstance(t, Compound) and len(t.args) == 2 and t.name in (",", ";", "->")


def conj_items(t):
    if isinstance(t, Compound) and t.name == "," and len(t.args) == 2:
        return conj_items(t.args[0]) + conj_items(t.args[1])
    return [t]


def scan(t, ctx, in_body, counts):
    if isinstance(t, Var):
        if not t.anonymous:
            counts["var_to_anon"] += 1
        return
    if isinstance(t, (Int, Float)):
        counts["inc_number"] += 1
        counts["dec_number"] += 1
        return
    if isinstance(t, Atom):
        if ctx == "arg":
            counts["nil_to_anon" if t.name == "[]" else "atom_to_anon"] += 1
        if ctx == "goal":
            if t.name == "true":
                counts["true_to_false"] += 1
            if t.name in ("fail", "false"):
                counts["false_to_true"] += 1
            if t.name != "!":
                counts["negate_goal"] += 1
        return
    # compound
    if in_body:
        for op, name in SWAPS.items():
            if t.name == name and len(t.args) == 2:
                counts[op] += 1
    if ctx == "goal" and is_control(t):
        if t.name == ";" and not (isinstance(t.args[0], Compound) and t.args[0].name == "->"
                                  and len(t.args[0].args) == 2):
            counts["semi_to_comma"] += 1
        if t.name == ",":
            counts["comma_to_semi"] += 1
        for child in t.args:
            scan(child, "goal", in_body, counts)
        return
    if ctx == "goal" and not (t.name == "\\+" and len(t.args) == 1):
        counts["negate_goal"] += 1
    for i, child in enumerate(t.args):
        goal_like = (t.name == "\\+" and len(t.args) == 1) or (t.name == "call" and i == 0)
        scan(child, "plain" if goal_like else "arg", in_body, counts)


def count_cut_swaps(body):
    """Cuts preceded in their conjunction by something other than a cut."""
    total = 0
    todo = [body]
    while todo:
        g = todo.pop()
        if isinstance(g, Compound) and g.name == "," and len(g.args) == 2:
            items = conj_items(g)
            total += sum(1 for a, b in zip(items, items[1:]) if b == Atom("!") and a != Atom("!"))
            todo.extend(items)
        elif is_control(g):
            todo.extend(g.args)
    return total


def count_sites(program):
    counts = Counter({op: 0 for op in OPERATORS})
    by_pred = {}
    for clause in program.clauses:
        by_pred.setdefault(clause.key, []).append(clause)
        scan(clause.head, "plain", False, counts)
        if not clause.is_fact:
            scan(clause.body, "goal", True, counts)
            counts["permute_cut"] += count_cut_swaps(clause.body)
    counts["remove_predicate"] = len(by_pred)
    for clauses in by_pred.values():
        order = [(c.head, c.body) for c in clauses]
        if len(order) >= 2 and order != order[::-1]:
            counts["reverse_predicate"] += 1
    return {op: counts[op] for op in OPERATORS}


def main():
    data = {}
    for name in corpus.NAMES:
        program, _ = corpus.load(name)
        data[name] = count_sites(program)
    out = Path(__file__).with_name("site_counts.json")
    out.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
