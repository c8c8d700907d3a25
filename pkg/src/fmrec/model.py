"""Feature-model structure: hierarchy, groups, and cross-tree constraints.

All types are immutable values; a model never changes after construction
and can be shared freely across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Union

__all__ = [
    "MANDATORY",
    "OPTIONAL",
    "ALTERNATIVE",
    "OR",
    "REQUIRES",
    "EXCLUDES",
    "NAME_PATTERN",
    "ModelError",
    "Feature",
    "FeatureTree",
    "RelChild",
    "Group",
    "Child",
    "CrossTreeConstraint",
    "Finding",
    "FeatureModel",
    "validate_model",
]

NAME_PATTERN = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

MANDATORY = "mandatory"
OPTIONAL = "optional"
ALTERNATIVE = "alternative"
OR = "or"

REQUIRES = "requires"
EXCLUDES = "excludes"


class ModelError(ValueError):
    """Raised when an operation needs a structurally valid model."""


@dataclass(frozen=True, slots=True)
class Feature:
    id: str
    name: str

    @classmethod
    def named(cls, name: str) -> "Feature":
        return cls(name, name)


@dataclass(frozen=True, slots=True)
class FeatureTree:
    """A feature together with its ordered child entries."""

    feature: Feature
    children: tuple["Child", ...] = ()


@dataclass(frozen=True, slots=True)
class RelChild:
    """Solitary child related to its parent as mandatory or optional."""

    kind: str
    node: FeatureTree


@dataclass(frozen=True, slots=True)
class Group:
    """Alternative (exactly one) or or (at least one) child grouping."""

    kind: str
    members: tuple[FeatureTree, ...]


Child = Union[RelChild, Group]


@dataclass(frozen=True, slots=True)
class CrossTreeConstraint:
    kind: str  # REQUIRES | EXCLUDES
    a: str
    b: str


@dataclass(frozen=True, slots=True)
class Finding:
    """One structural defect reported by :func:`validate_model`."""

    code: str
    message: str
    feature: str | None = None


@dataclass(frozen=True)
class FeatureModel:
    root: FeatureTree
    cross_tree: tuple[CrossTreeConstraint, ...] = ()

    @cached_property
    def feature_ids(self) -> tuple[str, ...]:
        """Feature ids in depth-first declaration order."""
        return tuple(node.feature.id for node, _ in self.nodes())

    @cached_property
    def features_by_id(self) -> dict[str, Feature]:
        return {node.feature.id: node.feature for node, _ in self.nodes()}

    @cached_property
    def parents(self) -> dict[str, str | None]:
        """Parent feature id per feature id (None for the root)."""
        return {node.feature.id: parent for node, parent in self.nodes()}

    def nodes(self) -> Iterator[tuple[FeatureTree, str | None]]:
        """Depth-first traversal yielding (node, parent feature id)."""
        stack: list[tuple[FeatureTree, str | None]] = [(self.root, None)]
        while stack:
            node, parent = stack.pop()
            yield node, parent
            subnodes: list[tuple[FeatureTree, str | None]] = []
            for child in node.children:
                if isinstance(child, RelChild):
                    subnodes.append((child.node, node.feature.id))
                else:
                    subnodes.extend((member, node.feature.id) for member in child.members)
            stack.extend(reversed(subnodes))

    def validate(self) -> list[Finding]:
        return validate_model(self)

    def require_valid(self) -> None:
        findings = self.validate()
        if findings:
            raise ModelError("; ".join(f.message for f in findings))


def validate_model(model: FeatureModel) -> list[Finding]:
    """Structural check; an empty list means the model is valid.

    Findings are data, not exceptions, so callers can report all defects
    at once. The tree representation cannot express unparented features,
    so reachability is guaranteed by construction and not re-checked.
    """
    findings: list[Finding] = []
    seen: set[str] = set()
    for node, _ in model.nodes():
        feature = node.feature
        if feature.id in seen:
            findings.append(
                Finding("duplicate-id", f"feature '{feature.id}' appears more than once", feature.id)
            )
        seen.add(feature.id)
        if not NAME_PATTERN.match(feature.name or ""):
            findings.append(
                Finding("bad-name", f"feature name {feature.name!r} is not a valid identifier", feature.id)
            )
        for child in node.children:
            if isinstance(child, Group) and len(child.members) < 2:
                findings.append(
                    Finding(
                        "degenerate-group",
                        f"{child.kind} group under '{feature.id}' has fewer than 2 children",
                        feature.id,
                    )
                )
    for constraint in model.cross_tree:
        for ref in (constraint.a, constraint.b):
            if ref not in seen:
                findings.append(
                    Finding("unknown-feature", f"constraint references unknown feature '{ref}'", ref)
                )
        if constraint.a == constraint.b:
            findings.append(
                Finding(
                    "self-reference",
                    f"{constraint.kind} constraint relates '{constraint.a}' to itself",
                    constraint.a,
                )
            )
    return findings
