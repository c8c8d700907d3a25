"""Complete Boolean search over configuration tasks.

The engine is DPLL with unit propagation over clauses compiled from the
task's formula trees. Branching follows the task variable order and tries
each variable's preferred value first, which makes enumeration order a
stable part of the contract: solutions come out in lexicographic order of
the variable sequence with the preferred value sorting first.

No clause learning, no restarts; feature models at interactive scale are
small and determinism matters more than raw speed here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .formula import Formula, to_clauses
from .formula import variables as formula_variables
from .task import ConfigurationTask

__all__ = [
    "DEFAULT_ENUMERATION_CAP",
    "UnknownVariableError",
    "EnumerationLimitError",
    "ValueOrdering",
    "ClauseEngine",
    "propagate",
    "solve",
    "is_consistent",
    "enumerate_configurations",
    "consistent_completion",
]

DEFAULT_ENUMERATION_CAP = 10_000

# Preference scores at or above this point map to "try 1 first".
SCORE_THRESHOLD = 0.5


class UnknownVariableError(ValueError):
    """An assignment or score references a variable outside the task."""


class EnumerationLimitError(RuntimeError):
    """Unbounded enumeration hit the safety cap; pass an explicit limit or cap."""


@dataclass(frozen=True)
class ValueOrdering:
    """Preferred first branch value per variable; unlisted variables try 1 first."""

    preferred: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for name, value in self.preferred.items():
            if value not in (0, 1):
                raise ValueError(f"preferred value for {name!r} must be 0 or 1")

    def first(self, name: str) -> int:
        return self.preferred.get(name, 1)

    @classmethod
    def from_scores(cls, scores: Mapping[str, float]) -> "ValueOrdering":
        """Map preference scores in [0, 1] to branch values: prefer inclusion
        at or above 0.5 (ties toward inclusion), exclusion below."""
        for name, score in scores.items():
            if not 0.0 <= score <= 1.0:
                raise ValueError(f"score for {name!r} must be within [0, 1], got {score}")
        return cls({name: 1 if score >= SCORE_THRESHOLD else 0 for name, score in scores.items()})


class ClauseEngine:
    """Clause store over a fixed variable universe, answering satisfiability,
    propagation, and enumeration queries with per-call assumption units."""

    def __init__(self, variables: Sequence[str], formulas: Iterable[Formula]):
        self.names: tuple[str, ...] = tuple(variables)
        self.index: dict[str, int] = {name: i + 1 for i, name in enumerate(self.names)}
        if len(self.index) != len(self.names):
            raise ValueError("variables must be unique")
        clauses: list[tuple[int, ...]] = []
        for f in formulas:
            unknown = formula_variables(f) - self.index.keys()
            if unknown:
                raise UnknownVariableError(f"unknown variables in constraint: {sorted(unknown)}")
            clauses.extend(to_clauses(f, self.index))
        self.clauses: tuple[tuple[int, ...], ...] = tuple(clauses)

    # -- assignment plumbing -------------------------------------------------

    def seed(self, assignment: Mapping[str, int] | None) -> list[int] | None:
        """Initial value array from a named partial assignment; None on an
        internally contradictory seed (cannot happen via a mapping)."""
        vals = [-1] * (len(self.names) + 1)
        for name, value in (assignment or {}).items():
            code = self.index.get(name)
            if code is None:
                raise UnknownVariableError(f"unknown variable: {name!r}")
            if value not in (0, 1):
                raise ValueError(f"value for {name!r} must be 0 or 1, got {value!r}")
            if vals[code] >= 0 and vals[code] != value:
                return None
            vals[code] = value
        return vals

    def named(self, row: Sequence[int]) -> dict[str, int]:
        return {name: row[i] for i, name in enumerate(self.names)}

    # -- inference -----------------------------------------------------------

    def propagate_units(self, vals: list[int], trail: list[int]) -> bool:
        """Unit-propagation fixpoint in place; False on conflict. Newly
        assigned variable codes are appended to ``trail``."""
        clauses = self.clauses
        changed = True
        while changed:
            changed = False
            for clause in clauses:
                unassigned = 0
                pending = 0
                satisfied = False
                for lit in clause:
                    value = vals[lit if lit > 0 else -lit]
                    if value < 0:
                        unassigned += 1
                        pending = lit
                    elif (value == 1) == (lit > 0):
                        satisfied = True
                        break
                if satisfied:
                    continue
                if unassigned == 0:
                    return False
                if unassigned == 1:
                    code = pending if pending > 0 else -pending
                    vals[code] = 1 if pending > 0 else 0
                    trail.append(code)
                    changed = True
        return True

    def solutions(self, assumptions: Mapping[str, int] | None, order: ValueOrdering) -> Iterator[tuple[int, ...]]:
        """All satisfying total assignments extending ``assumptions``, in
        lexicographic order of the variable sequence (preferred value first)."""
        vals = self.seed(assumptions)
        if vals is None:
            return
        n = len(self.names)
        prefer = [0] * (n + 1)
        for i, name in enumerate(self.names):
            prefer[i + 1] = order.first(name)
        trail: list[int] = []

        def search() -> Iterator[tuple[int, ...]]:
            mark = len(trail)
            if self.propagate_units(vals, trail):
                branch = 0
                for code in range(1, n + 1):
                    if vals[code] < 0:
                        branch = code
                        break
                if branch == 0:
                    yield tuple(vals[1:])
                else:
                    first = prefer[branch]
                    for value in (first, 1 - first):
                        vals[branch] = value
                        trail.append(branch)
                        yield from search()
                        trail.pop()
                        vals[branch] = -1
            while len(trail) > mark:
                vals[trail.pop()] = -1

        yield from search()

    def satisfiable(self, assumptions: Mapping[str, int] | None = None) -> bool:
        return next(self.solutions(assumptions, ValueOrdering()), None) is not None


@lru_cache(maxsize=256)
def _engine(task: ConfigurationTask) -> ClauseEngine:
    return ClauseEngine(task.variables, task.all_constraints())


def propagate(task: ConfigurationTask, partial: Mapping[str, int] | None = None) -> dict[str, int] | None:
    """Least fixpoint of unit inference over the task constraints extended
    with ``partial``; None when a constraint is violated by forced literals.

    The result extends the input: every pair from ``partial`` is included.
    """
    engine = _engine(task)
    vals = engine.seed(partial)
    if vals is None:
        return None
    trail: list[int] = []
    if not engine.propagate_units(vals, trail):
        return None
    return {name: vals[i + 1] for i, name in enumerate(engine.names) if vals[i + 1] >= 0}


def solve(
    task: ConfigurationTask,
    assumptions: Mapping[str, int] | None = None,
    order: ValueOrdering | None = None,
) -> dict[str, int] | None:
    """First satisfying configuration extending ``assumptions`` under the
    branch-value ordering, or None if there is none."""
    engine = _engine(task)
    row = next(engine.solutions(assumptions, order or ValueOrdering()), None)
    return None if row is None else engine.named(row)


def is_consistent(task: ConfigurationTask, extra: Mapping[str, int] | None = None) -> bool:
    """True iff some configuration satisfies the task constraints plus ``extra``."""
    return _engine(task).satisfiable(extra)


def enumerate_configurations(
    task: ConfigurationTask,
    limit: int | None = None,
    order: ValueOrdering | None = None,
    cap: int | None = DEFAULT_ENUMERATION_CAP,
) -> list[dict[str, int]]:
    """All (or the first ``limit``) configurations, deterministically ordered.

    With ``limit=None`` the full solution set is returned, guarded by ``cap``
    (default 10,000): exceeding it raises :class:`EnumerationLimitError`
    rather than silently truncating. Pass ``cap=None`` to lift the guard.
    """
    if limit is not None and limit < 1:
        raise ValueError("limit must be a positive count")
    engine = _engine(task)
    out: list[dict[str, int]] = []
    for row in engine.solutions(None, order or ValueOrdering()):
        if limit is not None and len(out) == limit:
            break
        if limit is None and cap is not None and len(out) == cap:
            raise EnumerationLimitError(
                f"more than {cap} configurations; pass limit= or raise cap="
            )
        out.append(engine.named(row))
    return out


def consistent_completion(
    task: ConfigurationTask,
    partial: Mapping[str, int] | None = None,
    scores: Mapping[str, float] | None = None,
) -> dict[str, int] | None:
    """Complete ``partial`` into a configuration guided by preference scores.

    Scores in [0, 1] become a value ordering (prefer inclusion at >= 0.5), so
    preferences act as search heuristics and the result is consistent by
    construction; None when ``partial`` cannot be completed at all.
    """
    for name in scores or {}:
        if name not in _engine(task).index:
            raise UnknownVariableError(f"unknown variable: {name!r}")
    ordering = ValueOrdering.from_scores(scores or {})
    return solve(task, partial, ordering)
