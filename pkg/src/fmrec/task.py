"""Boolean constraint-satisfaction view of a feature model.

A configuration task holds the variable list (one Boolean per feature, in
depth-first declaration order), the constraints derived from the model
structure, and the user requirements accumulated during a session. The
two constraint sets are kept apart because diagnosis treats model
constraints as fixed background and requirements as retractable.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from . import formula as fm
from .formula import And, Formula, Iff, Implies, Lit, Not, Or
from .model import ALTERNATIVE, MANDATORY, REQUIRES, FeatureModel, FeatureTree, Group, RelChild

__all__ = ["Requirement", "ConfigurationTask", "translate", "satisfies", "requirements_from"]


@dataclass(frozen=True, slots=True)
class Requirement:
    """A user-chosen inclusion (1) or exclusion (0) of one feature."""

    feature: str
    value: int
    provenance: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.value not in (0, 1):
            raise ValueError(f"requirement value must be 0 or 1, got {self.value!r}")

    def to_formula(self) -> Lit:
        return Lit(self.feature, bool(self.value))

    def __str__(self) -> str:
        return f"{self.feature}={self.value}"


@dataclass(frozen=True)
class ConfigurationTask:
    """Variables with {0,1} domains plus model constraints and requirements."""

    variables: tuple[str, ...]
    model_constraints: tuple[Formula, ...]
    requirements: tuple[Requirement, ...] = ()

    def __post_init__(self):
        known = set(self.variables)
        if len(known) != len(self.variables):
            raise ValueError("task variables must be unique")
        for constraint in self.model_constraints:
            missing = fm.variables(constraint) - known
            if missing:
                raise ValueError(f"constraint references unknown variables: {sorted(missing)}")
        for requirement in self.requirements:
            if requirement.feature not in known:
                raise ValueError(f"requirement references unknown variable: {requirement.feature}")

    @property
    def domains(self) -> dict[str, tuple[int, int]]:
        return {name: (0, 1) for name in self.variables}

    def all_constraints(self) -> tuple[Formula, ...]:
        return self.model_constraints + tuple(r.to_formula() for r in self.requirements)

    def with_requirements(self, requirements: Iterable[Requirement]) -> "ConfigurationTask":
        return replace(self, requirements=self.requirements + tuple(requirements))

    def without_requirements(self, dropped: Iterable[Requirement]) -> "ConfigurationTask":
        gone = set(dropped)
        return replace(self, requirements=tuple(r for r in self.requirements if r not in gone))


def requirements_from(values: Mapping[str, int], provenance: str | None = None) -> tuple[Requirement, ...]:
    return tuple(Requirement(feature, value, provenance) for feature, value in values.items())


def translate(model: FeatureModel) -> ConfigurationTask:
    """Derive the configuration task for a valid feature model.

    Encoding per relationship:

    - root feature: ``root`` (must be selected)
    - mandatory child c of p: ``p <-> c``
    - optional child c of p: ``c -> p``
    - alternative group c1..cn under p: ``ci <-> (p & !cj & ...)`` for each i
    - or group c1..cn under p: ``p <-> (c1 | ... | cn)``
    - requires(a, b): ``a -> b``; excludes(a, b): ``!(a & b)``

    Requirements start empty; sessions add them via ``with_requirements``.
    """
    model.require_valid()
    constraints: list[Formula] = [Lit(model.root.feature.id)]
    _structural(model.root, constraints)
    for ct in model.cross_tree:
        if ct.kind == REQUIRES:
            constraints.append(Implies(Lit(ct.a), Lit(ct.b)))
        else:
            constraints.append(Not(And((Lit(ct.a), Lit(ct.b)))))
    return ConfigurationTask(model.feature_ids, tuple(constraints))


def _structural(node: FeatureTree, out: list[Formula]) -> None:
    parent = Lit(node.feature.id)
    for child in node.children:
        if isinstance(child, RelChild):
            lit = Lit(child.node.feature.id)
            if child.kind == MANDATORY:
                out.append(Iff(parent, lit))
            else:
                out.append(Implies(lit, parent))
            _structural(child.node, out)
        elif isinstance(child, Group):
            lits = tuple(Lit(member.feature.id) for member in child.members)
            if child.kind == ALTERNATIVE:
                for i, lit in enumerate(lits):
                    others = tuple(Not(other) for j, other in enumerate(lits) if j != i)
                    out.append(Iff(lit, And((parent,) + others)))
            else:
                out.append(Iff(parent, Or(lits)))
            for member in child.members:
                _structural(member, out)


def satisfies(task: ConfigurationTask, assignment: Mapping[str, int]) -> bool:
    """Check a complete assignment against every constraint by direct
    formula interpretation (independent of the clause-based solver)."""
    return all(fm.evaluate(constraint, assignment) for constraint in task.all_constraints())
