"""Conflict detection, diagnosis, and repair for inconsistent requirements.

Given model constraints as fixed background and the user's requirements as
retractable candidates:

- :func:`min_conflict` finds one minimal inconsistent requirement subset by
  preference-aware divide and conquer (earlier-listed requirements are the
  ones the user would rather keep);
- :func:`all_diagnoses` builds the breadth-first hitting-set tree over such
  conflicts, so minimal-cardinality diagnoses surface first;
- :func:`repairs` turns each diagnosis into concrete replacement values,
  re-verified against the solver;
- :func:`rank_repairs` orders repairs by the utility of the post-repair
  requirement assignment.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from itertools import product
from typing import Iterable, Mapping, Sequence

from . import solver
from .formula import Formula
from .formula import variables as formula_variables
from .recommend import InterestProfile, UtilityTable, overall_utility
from .solver import ClauseEngine
from .task import ConfigurationTask, Requirement

__all__ = [
    "InconsistentBackgroundError",
    "ConflictSet",
    "Diagnosis",
    "Repair",
    "DiagnosisReport",
    "min_conflict",
    "all_diagnoses",
    "analyze",
    "repairs",
    "rank_repairs",
    "ordered_requirements",
]


class InconsistentBackgroundError(ValueError):
    """The background constraints admit no configuration on their own."""


ConflictSet = frozenset  # of Requirement; minimal inconsistent candidate subset
Diagnosis = frozenset  # of Requirement; minimal removal restoring consistency


@dataclass(frozen=True)
class Repair:
    """Replacement values for one diagnosis' features.

    ``changes`` covers just the diagnosed features; ``assignment`` adds the
    kept requirements back in, giving the full post-repair value of every
    feature the user had constrained.
    """

    diagnosis: Diagnosis
    changes: Mapping[str, int]
    assignment: Mapping[str, int]
    utility: float | None = None


@dataclass(frozen=True)
class DiagnosisReport:
    conflicts: tuple[ConflictSet, ...]  # discovery order
    diagnoses: tuple[Diagnosis, ...]  # by size, then feature order


class _Checker:
    """Satisfiability of background plus requirement subsets, compiled once."""

    def __init__(self, background: Sequence[Formula], candidates: Sequence[Requirement]):
        names: dict[str, None] = {}
        for f in background:
            for name in sorted(formula_variables(f)):
                names.setdefault(name)
        for requirement in candidates:
            names.setdefault(requirement.feature)
        self.engine = ClauseEngine(tuple(names), background)

    def consistent(self, requirements: Iterable[Requirement]) -> bool:
        seed: dict[str, int] = {}
        for requirement in requirements:
            existing = seed.get(requirement.feature)
            if existing is not None and existing != requirement.value:
                return False
            seed[requirement.feature] = requirement.value
        return self.engine.satisfiable(seed)


def min_conflict(
    background: Sequence[Formula],
    candidates: Sequence[Requirement],
) -> ConflictSet | None:
    """One minimal conflict among ``candidates`` against ``background``, or
    None when everything is consistent together.

    Deterministic: splits keep the candidate listing order, so the result
    prefers retaining earlier-listed (more important) requirements.
    """
    checker = _Checker(background, candidates)
    return _min_conflict(checker, tuple(candidates))


def _min_conflict(checker: _Checker, candidates: tuple[Requirement, ...]) -> ConflictSet | None:
    if not checker.consistent(()):
        raise InconsistentBackgroundError("background constraints are inconsistent on their own")
    if checker.consistent(candidates):
        return None
    return frozenset(_qx(checker, (), False, candidates))


def _qx(
    checker: _Checker,
    base: tuple[Requirement, ...],
    base_grew: bool,
    candidates: tuple[Requirement, ...],
) -> tuple[Requirement, ...]:
    if base_grew and not checker.consistent(base):
        return ()
    if len(candidates) == 1:
        return candidates
    half = len(candidates) // 2
    left, right = candidates[:half], candidates[half:]
    keep_right = _qx(checker, base + left, bool(left), right)
    keep_left = _qx(checker, base + keep_right, bool(keep_right), left)
    return keep_left + keep_right


def analyze(
    background: Sequence[Formula],
    candidates: Sequence[Requirement],
) -> DiagnosisReport:
    """Hitting-set-tree exploration: every minimal diagnosis plus the
    conflicts used to derive them."""
    checker = _Checker(background, candidates)
    ordered = tuple(candidates)
    first = _min_conflict(checker, ordered)
    if first is None:
        return DiagnosisReport((), ())
    conflicts: list[tuple[Requirement, ...]] = [ordered_requirements(first, ordered)]
    diagnoses: list[frozenset] = []
    queue: deque[frozenset] = deque([frozenset()])
    visited: set[frozenset] = {frozenset()}
    while queue:
        removed = queue.popleft()
        if any(diagnosis <= removed for diagnosis in diagnoses):
            continue  # a subset already restores consistency
        label = next((c for c in conflicts if not set(c) & removed), None)
        if label is None:
            rest = tuple(r for r in ordered if r not in removed)
            if checker.consistent(rest):
                diagnoses.append(removed)
                continue
            label = ordered_requirements(frozenset(_qx(checker, (), False, rest)), ordered)
            conflicts.append(label)
        for requirement in label:
            child = removed | {requirement}
            if child not in visited:
                visited.add(child)
                queue.append(child)
    diagnoses.sort(key=lambda d: (len(d), sorted((r.feature, r.value) for r in d)))
    return DiagnosisReport(
        tuple(frozenset(c) for c in conflicts),
        tuple(diagnoses),
    )


def all_diagnoses(
    background: Sequence[Formula],
    candidates: Sequence[Requirement],
) -> list[Diagnosis]:
    """All set-minimal diagnoses, smallest first (then by feature order)."""
    return list(analyze(background, candidates).diagnoses)


def ordered_requirements(
    subset: Iterable[Requirement],
    candidates: Sequence[Requirement],
) -> tuple[Requirement, ...]:
    """Present a requirement set in the original candidate listing order."""
    member = set(subset)
    return tuple(r for r in candidates if r in member)


def repairs(task: ConfigurationTask, diagnoses: Sequence[Diagnosis]) -> list[Repair]:
    """Concrete change alternatives per diagnosis.

    For each diagnosis the kept requirements stay in force and every value
    combination over the diagnosed features that the solver accepts becomes
    one repair (for Boolean domains that is the flipped values, but the
    search does not assume it).
    """
    out: list[Repair] = []
    for diagnosis in diagnoses:
        kept = tuple(r for r in task.requirements if r not in diagnosis)
        base = replace(task, requirements=kept)
        features = [f for f in task.variables if any(r.feature == f for r in diagnosis)]
        involved = [f for f in task.variables if any(r.feature == f for r in task.requirements)]
        for combo in product((0, 1), repeat=len(features)):
            changes = dict(zip(features, combo))
            if not solver.is_consistent(base, changes):
                continue
            values = {r.feature: r.value for r in kept}
            values.update(changes)
            assignment = {f: values[f] for f in involved if f in values}
            out.append(Repair(diagnosis, changes, assignment))
    return out


def rank_repairs(
    candidates: Sequence[Repair],
    table: UtilityTable,
    profile: InterestProfile,
) -> list[Repair]:
    """Repairs with utilities filled in, best first (stable on ties).

    A repair's utility is that of its post-repair assignment: features set
    to 1 contribute their weighted utility, features set to 0 contribute 0.
    """
    scored = [
        replace(repair, utility=overall_utility(repair.assignment, table, profile))
        for repair in candidates
    ]
    scored.sort(key=lambda repair: -repair.utility)
    return scored
