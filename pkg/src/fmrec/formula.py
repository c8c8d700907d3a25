"""Propositional formulas over Boolean feature variables.

Formulas are immutable expression trees. Two independent consumers exist:
the solver compiles them to clauses, while :func:`evaluate` interprets
them directly against an assignment. Keeping both routes separate lets
tests cross-check solver output without going through the compiler.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

__all__ = [
    "Lit",
    "Not",
    "And",
    "Or",
    "Implies",
    "Iff",
    "Formula",
    "all_of",
    "any_of",
    "evaluate",
    "variables",
    "to_clauses",
    "describe",
]


@dataclass(frozen=True, slots=True)
class Lit:
    """Atomic constraint ``var = value`` (value True means the feature is in)."""

    var: str
    value: bool = True


@dataclass(frozen=True, slots=True)
class Not:
    child: "Formula"


@dataclass(frozen=True, slots=True)
class And:
    parts: tuple["Formula", ...]


@dataclass(frozen=True, slots=True)
class Or:
    parts: tuple["Formula", ...]


@dataclass(frozen=True, slots=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Iff:
    left: "Formula"
    right: "Formula"


Formula = Union[Lit, Not, And, Or, Implies, Iff]


def all_of(*parts: Formula) -> Formula:
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def any_of(*parts: Formula) -> Formula:
    return parts[0] if len(parts) == 1 else Or(tuple(parts))


def evaluate(formula: Formula, assignment: Mapping[str, int]) -> bool:
    """Interpret ``formula`` under a 0/1 assignment covering its variables."""
    if isinstance(formula, Lit):
        return bool(assignment[formula.var]) == formula.value
    if isinstance(formula, Not):
        return not evaluate(formula.child, assignment)
    if isinstance(formula, And):
        return all(evaluate(p, assignment) for p in formula.parts)
    if isinstance(formula, Or):
        return any(evaluate(p, assignment) for p in formula.parts)
    if isinstance(formula, Implies):
        return not evaluate(formula.left, assignment) or evaluate(formula.right, assignment)
    if isinstance(formula, Iff):
        return evaluate(formula.left, assignment) == evaluate(formula.right, assignment)
    raise TypeError(f"not a formula: {formula!r}")


def variables(formula: Formula) -> set[str]:
    """All variable names referenced by ``formula``."""
    out: set[str] = set()
    _collect(formula, out)
    return out


def _collect(formula: Formula, out: set[str]) -> None:
    if isinstance(formula, Lit):
        out.add(formula.var)
    elif isinstance(formula, Not):
        _collect(formula.child, out)
    elif isinstance(formula, (And, Or)):
        for part in formula.parts:
            _collect(part, out)
    elif isinstance(formula, (Implies, Iff)):
        _collect(formula.left, out)
        _collect(formula.right, out)
    else:
        raise TypeError(f"not a formula: {formula!r}")


def to_clauses(formula: Formula, index: Mapping[str, int]) -> list[tuple[int, ...]]:
    """Compile to CNF clauses over 1-based variable codes (negative = excluded).

    Tautological clauses are dropped; an unsatisfiable formula may yield an
    empty clause. The expansion is plain NNF + distribution, which stays small
    for the constraint shapes produced by feature-model translation.
    """
    clauses: list[tuple[int, ...]] = []
    seen: set[frozenset[int]] = set()
    for clause in _cnf(_nnf(formula, False), index):
        if any(-lit in clause for lit in clause):
            continue
        if clause not in seen:
            seen.add(clause)
            clauses.append(tuple(sorted(clause, key=abs)))
    return clauses


def _nnf(formula: Formula, negate: bool) -> Formula:
    if isinstance(formula, Lit):
        return Lit(formula.var, formula.value != negate)
    if isinstance(formula, Not):
        return _nnf(formula.child, not negate)
    if isinstance(formula, And):
        parts = tuple(_nnf(p, negate) for p in formula.parts)
        return Or(parts) if negate else And(parts)
    if isinstance(formula, Or):
        parts = tuple(_nnf(p, negate) for p in formula.parts)
        return And(parts) if negate else Or(parts)
    if isinstance(formula, Implies):
        return _nnf(Or((Not(formula.left), formula.right)), negate)
    if isinstance(formula, Iff):
        forward = Or((Not(formula.left), formula.right))
        backward = Or((Not(formula.right), formula.left))
        return _nnf(And((forward, backward)), negate)
    raise TypeError(f"not a formula: {formula!r}")


def _cnf(formula: Formula, index: Mapping[str, int]) -> list[frozenset[int]]:
    # formula is in NNF: only Lit / And / Or remain
    if isinstance(formula, Lit):
        code = index[formula.var]
        return [frozenset({code if formula.value else -code})]
    if isinstance(formula, And):
        out: list[frozenset[int]] = []
        for part in formula.parts:
            out.extend(_cnf(part, index))
        return out
    if isinstance(formula, Or):
        acc: list[frozenset[int]] = [frozenset()]
        for part in formula.parts:
            acc = [left | right for left in acc for right in _cnf(part, index)]
        return acc
    raise TypeError(f"formula not in NNF: {formula!r}")


def describe(formula: Formula) -> str:
    """Readable infix rendering, used by the CLI and error messages."""
    if isinstance(formula, Lit):
        return formula.var if formula.value else f"!{formula.var}"
    if isinstance(formula, Not):
        inner = describe(formula.child)
        return f"!{inner}" if isinstance(formula.child, Lit) else f"!({inner})"
    if isinstance(formula, And):
        return "(" + " & ".join(describe(p) for p in formula.parts) + ")"
    if isinstance(formula, Or):
        return "(" + " | ".join(describe(p) for p in formula.parts) + ")"
    if isinstance(formula, Implies):
        return f"({describe(formula.left)} -> {describe(formula.right)})"
    if isinstance(formula, Iff):
        return f"({describe(formula.left)} <-> {describe(formula.right)})"
    raise TypeError(f"not a formula: {formula!r}")
