"""Hypothesis strategies for terms, clauses and small runnable programs."""

from hypothesis import strategies as st

from promut.optable import INFIX, PREFIX
from promut.terms import NIL, Atom, Clause, Compound, Float, Int, Program, Var, make_list

ATOM_NAMES = ["a", "b", "foo", "x_1", "[]", "hello world", "don't", "!", ";", ",", "|", "+", "-", "\\+",
              "is", "mod", "=..", "{}", "", "Caps", "ünï", "\\"]
OPERATOR_NAMES = sorted(set(INFIX) | set(PREFIX))

atoms = st.sampled_from(ATOM_NAMES).map(Atom)
ints = st.integers(min_value=-10**12, max_value=10**12).map(Int)
floats = st.floats(allow_nan=False, allow_infinity=False, width=64).map(Float)
named_vars = st.sampled_from(["X", "Y", "Zs", "_Tail", "A1"]).map(Var)
leaves = st.one_of(atoms, ints, floats, named_vars)


def _compound(children):
    functor = st.one_of(st.sampled_from(OPERATOR_NAMES), st.sampled_from(ATOM_NAMES))
    return st.one_of(
        st.tuples(functor, st.lists(children, min_size=1, max_size=3)).map(
            lambda p: Compound(p[0], tuple(p[1]))
        ),
        st.tuples(st.lists(children, max_size=3), st.one_of(st.just(NIL), named_vars)).map(
            lambda p: make_list(p[0], p[1])
        ),
    )


terms = st.recursive(leaves, _compound, max_leaves=12)

# small terminating programs over a fixed vocabulary, for engine properties
_GROUND = st.sampled_from([Atom("a"), Atom("b"), Int(1), Int(2), NIL])
_X = Var("X")


@st.composite
def fact_programs(draw):
    """Facts for p/1 and q/1 plus a rule r/1 built from them."""
    p_facts = draw(st.lists(_GROUND, max_size=4))
    q_facts = draw(st.lists(_GROUND, max_size=4))
    clauses = [Clause(Compound("p", (t,))) for t in p_facts]
    clauses += [Clause(Compound("q", (t,))) for t in q_facts]
    body_parts = draw(st.lists(st.sampled_from(["p", "q", "!", "nq"]), min_size=1, max_size=4))
    goals = []
    for part in body_parts:
        if part == "!":
            goals.append(Atom("!"))
        elif part == "nq":
            goals.append(Compound("\\+", (Compound("q", (_X,)),)))
        else:
            goals.append(Compound(part, (_X,)))
    body = goals[-1]
    for g in reversed(goals[:-1]):
        body = Compound(",", (g, body))
    clauses.append(Clause(Compound("r", (_X,)), body))
    # an undefined predicate reference would make r/1 raise; keep p and q defined
    if not p_facts:
        clauses.append(Clause(Compound("p", (Atom("zz"),))))
    if not q_facts:
        clauses.append(Clause(Compound("q", (Atom("zz"),))))
    return Program(tuple(clauses))
