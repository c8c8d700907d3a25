from itertools import product

import pytest
from hypothesis import given, strategies as st

from fmrec.formula import And, Iff, Implies, Lit, Not, Or, describe, evaluate, to_clauses, variables

VARS = ("a", "b", "c")


def formulas(depth=3):
    leaves = st.builds(Lit, st.sampled_from(VARS), st.booleans())
    return st.recursive(
        leaves,
        lambda inner: st.one_of(
            st.builds(Not, inner),
            st.builds(lambda parts: And(tuple(parts)), st.lists(inner, min_size=1, max_size=3)),
            st.builds(lambda parts: Or(tuple(parts)), st.lists(inner, min_size=1, max_size=3)),
            st.builds(Implies, inner, inner),
            st.builds(Iff, inner, inner),
        ),
        max_leaves=8,
    )


def all_assignments():
    return [dict(zip(VARS, bits)) for bits in product((0, 1), repeat=len(VARS))]


def clauses_satisfied(clauses, assignment, index):
    names = {code: name for name, code in index.items()}
    for clause in clauses:
        if not clause:
            return False
        if not any(
            (assignment[names[abs(lit)]] == 1) == (lit > 0) for lit in clause
        ):
            return False
    return True


def test_connective_semantics():
    a, b = Lit("a"), Lit("b")
    rows = all_assignments()
    for row in rows:
        assert evaluate(Implies(a, b), row) == ((not row["a"]) or bool(row["b"]))
        assert evaluate(Iff(a, b), row) == (bool(row["a"]) == bool(row["b"]))
        assert evaluate(Not(a), row) == (not row["a"])
        assert evaluate(Lit("a", False), row) == (row["a"] == 0)


@given(formulas())
def test_clause_compilation_preserves_semantics(formula):
    index = {name: i + 1 for i, name in enumerate(VARS)}
    clauses = to_clauses(formula, index)
    for assignment in all_assignments():
        assert clauses_satisfied(clauses, assignment, index) == evaluate(formula, assignment)


def test_tautologies_compile_away():
    assert to_clauses(Or((Lit("a"), Lit("a", False))), {"a": 1}) == []


def test_contradiction_compiles_to_empty_clause():
    clauses = to_clauses(And((Lit("a"), Lit("a", False))), {"a": 1})
    assert [*map(len, clauses)] == [1, 1]
    assert to_clauses(Or(()), {"a": 1}) == [()]


def test_variables_and_describe():
    f = Iff(Lit("a"), And((Lit("b", False), Not(Lit("c")))))
    assert variables(f) == {"a", "b", "c"}
    assert describe(f) == "(a <-> (!b & !c))"


def test_evaluate_rejects_non_formula():
    with pytest.raises(TypeError):
        evaluate("a", {"a": 1})
