"""Ranking and session-based recommendation.

Three ingredients:

- utility ranking: configurations scored as the sum over selected features
  of per-dimension utility times the user's interest weight, plus the
  group variant that averages over several interest profiles;
- value recommendation: nearest neighbors by agreement ratio over features
  both sessions specified, majority vote among the top k;
- next-item recommendation: neighbors by specification-order similarity,
  then the most similar session's lowest-ranked item the current session
  has not touched yet (shared between features and constraint edits).

All functions are pure over immutable inputs.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import AbstractSet, Iterable, Mapping, Sequence

from . import solver
from .task import ConfigurationTask

__all__ = [
    "DimensionMismatchError",
    "NoCandidateError",
    "UtilityTable",
    "InterestProfile",
    "SessionLog",
    "EditLog",
    "ValueRecommendation",
    "overall_utility",
    "rank_configurations",
    "group_utility",
    "user_similarity",
    "recommend_value",
    "rank_similarity",
    "max_rank_distance",
    "recommend_next_feature",
    "recommend_next_constraint",
    "consistency_filtered",
    "utility_table_from_csv",
    "profile_from_csv",
    "session_logs_from_csv",
    "edit_logs_from_csv",
]


class DimensionMismatchError(ValueError):
    """Utility table and interest profile disagree on the dimension set."""


class NoCandidateError(LookupError):
    """No session provides the data the recommendation needs."""


def _check_unit_interval(label: str, items: Iterable[tuple[object, float]]) -> None:
    for key, value in items:
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{label} for {key!r} must be within [0, 1], got {value}")


@dataclass(frozen=True)
class UtilityTable:
    """Per-feature utility against each interest dimension, all in [0, 1].

    Features absent from the table contribute zero utility, which is how
    always-selected structural features stay out of the ranking.
    """

    dimensions: tuple[str, ...]
    values: Mapping[str, Mapping[str, float]]  # feature -> dimension -> utility

    def __post_init__(self):
        if not self.dimensions:
            raise ValueError("utility table needs at least one dimension")
        if len(set(self.dimensions)) != len(self.dimensions):
            raise ValueError("utility dimensions must be unique")
        dims = set(self.dimensions)
        for feature, row in self.values.items():
            if set(row) != dims:
                raise ValueError(f"feature {feature!r} must define a utility for every dimension")
            _check_unit_interval("utility", row.items())


@dataclass(frozen=True)
class InterestProfile:
    """A user's weight per interest dimension, in [0, 1]."""

    user: str
    weights: Mapping[str, float]  # dimension -> weight

    def __post_init__(self):
        _check_unit_interval("interest weight", self.weights.items())


@dataclass(frozen=True)
class SessionLog:
    """Feature decisions (and optionally their specification order) from one
    configurator session."""

    session_id: str
    user_id: str
    values: Mapping[str, int]  # feature -> 0/1, the specified features
    ranks: Mapping[str, int] = field(default_factory=dict)  # feature -> specification position
    completed: bool = False

    def __post_init__(self):
        for feature, value in self.values.items():
            if value not in (0, 1):
                raise ValueError(f"session value for {feature!r} must be 0 or 1")
        _validate_ranks(self.ranks)
        stray = set(self.ranks) - set(self.values)
        if stray:
            raise ValueError(f"ranked features missing a value: {sorted(stray)}")


@dataclass(frozen=True)
class EditLog:
    """Constraint-edit order from one knowledge-engineering session."""

    session_id: str
    ranks: Mapping[str, int]  # constraint id -> edit position

    def __post_init__(self):
        _validate_ranks(self.ranks)


def _validate_ranks(ranks: Mapping[str, int]) -> None:
    for item, rank in ranks.items():
        if not isinstance(rank, int) or rank < 1:
            raise ValueError(f"rank for {item!r} must be a positive integer")
    if len(set(ranks.values())) != len(ranks):
        raise ValueError("ranks must be distinct within a session")


@dataclass(frozen=True)
class ValueRecommendation:
    feature: str
    value: int
    neighbors: tuple[str, ...]  # session ids, most similar first
    vote_fraction: float  # supporting neighbors / neighbors consulted


# -- utility ranking ---------------------------------------------------------


def overall_utility(
    config: Mapping[str, int],
    table: UtilityTable,
    profile: InterestProfile,
    scope: AbstractSet[str] | None = None,
) -> float:
    """Utility of a configuration for one user: sum over selected features
    (optionally restricted to ``scope``) of utility times interest weight
    across all dimensions. Features without a table entry contribute 0."""
    if set(profile.weights) != set(table.dimensions):
        raise DimensionMismatchError(
            f"profile {profile.user!r} dimensions {sorted(profile.weights)} "
            f"do not match table dimensions {sorted(table.dimensions)}"
        )
    total = 0.0
    for feature, value in config.items():
        if value != 1 or (scope is not None and feature not in scope):
            continue
        row = table.values.get(feature)
        if row is None:
            continue
        for dimension in table.dimensions:
            total += row[dimension] * profile.weights[dimension]
    return total


def rank_configurations(
    configs: Sequence[Mapping[str, int]],
    table: UtilityTable,
    profile: InterestProfile,
) -> list[tuple[Mapping[str, int], float]]:
    """Configurations with scores, best first; ties keep enumeration order."""
    if not configs:
        raise ValueError("nothing to rank: configs is empty")
    scored = [(config, overall_utility(config, table, profile)) for config in configs]
    scored.sort(key=lambda pair: -pair[1])  # stable: equal scores keep input order
    return scored


def group_utility(
    config: Mapping[str, int],
    table: UtilityTable,
    profiles: Sequence[InterestProfile],
) -> float:
    """Arithmetic mean of the per-user utilities over a group of profiles."""
    if not profiles:
        raise ValueError("group_utility needs at least one profile")
    return sum(overall_utility(config, table, p) for p in profiles) / len(profiles)


# -- nearest-neighbor value recommendation ------------------------------------


def user_similarity(a: SessionLog, b: SessionLog) -> float:
    """Agreement ratio over features specified by both sessions; 0 when the
    sessions share no specified feature."""
    shared = a.values.keys() & b.values.keys()
    if not shared:
        return 0.0
    agreeing = sum(1 for f in shared if a.values[f] == b.values[f])
    return agreeing / len(shared)


def recommend_value(
    logs: Sequence[SessionLog],
    current: SessionLog,
    target: str,
    k: int = 2,
) -> ValueRecommendation:
    """Majority vote of the k most similar completed sessions on ``target``.

    Similarity ties at the k-boundary break by ascending session id; a tied
    vote recommends exclusion (the conservative choice). The neighbor count
    k is the tunable knob of this recommender.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if target in current.values:
        raise ValueError(f"feature {target!r} is already specified in the current session")
    eligible = [
        log
        for log in logs
        if log.completed and target in log.values and log.session_id != current.session_id
    ]
    if not eligible:
        raise NoCandidateError(f"no completed session specifies {target!r}")
    eligible.sort(key=lambda log: (-user_similarity(log, current), log.session_id))
    neighbors = eligible[: min(k, len(eligible))]
    ones = sum(1 for log in neighbors if log.values[target] == 1)
    value = 1 if ones > len(neighbors) - ones else 0
    supporting = ones if value == 1 else len(neighbors) - ones
    return ValueRecommendation(
        feature=target,
        value=value,
        neighbors=tuple(log.session_id for log in neighbors),
        vote_fraction=supporting / len(neighbors),
    )


# -- rank-distance next-item recommendation -----------------------------------


def max_rank_distance(a: Mapping[str, int], b: Mapping[str, int]) -> int:
    """Largest achievable sum of absolute rank differences over the items
    ranked in both maps: pair one side's ranks ascending against the
    other's descending."""
    shared = a.keys() & b.keys()
    ranks_a = sorted(a[item] for item in shared)
    ranks_b = sorted((b[item] for item in shared), reverse=True)
    return sum(abs(x - y) for x, y in zip(ranks_a, ranks_b))


def rank_similarity(a: Mapping[str, int], b: Mapping[str, int]) -> float:
    """Order agreement over items ranked in both maps.

    The observed distance (sum of absolute rank differences) is normalized
    by :func:`max_rank_distance`. Identical degenerate cases (max distance
    0) count as fully similar.
    """
    shared = a.keys() & b.keys()
    dist = sum(abs(a[item] - b[item]) for item in shared)
    max_dist = max_rank_distance(a, b)
    if max_dist == 0:
        return 1.0 if dist == 0 else 0.0
    return (max_dist - dist) / max_dist


def _next_ranked_item(
    sessions: Sequence[tuple[str, Mapping[str, int]]],
    current_ranks: Mapping[str, int],
    exclude: AbstractSet[str],
) -> str:
    if not current_ranks:
        raise ValueError("the current session has no ranked items yet")
    ordered = sorted(sessions, key=lambda s: (-rank_similarity(s[1], current_ranks), s[0]))
    for _, ranks in ordered:
        candidates = [(rank, item) for item, rank in ranks.items() if item not in exclude]
        if candidates:
            return min(candidates)[1]
    raise NoCandidateError("no session ranks an item outside the current session")


def recommend_next_feature(logs: Sequence[SessionLog], current: SessionLog) -> str:
    """The feature the current user should decide next: among the sessions
    most similar by specification order, the lowest-ranked feature the
    current session has not specified. Ongoing sessions may serve as
    neighbors here since orderings are meaningful mid-session."""
    sessions = [(log.session_id, log.ranks) for log in logs if log.session_id != current.session_id]
    exclude = current.values.keys() | current.ranks.keys()
    return _next_ranked_item(sessions, current.ranks, exclude)


def recommend_next_constraint(edits: Sequence[EditLog], current: EditLog) -> str:
    """Same scheme as :func:`recommend_next_feature` over constraint-edit
    orderings: which constraint the knowledge engineer should visit next."""
    sessions = [(log.session_id, log.ranks) for log in edits if log.session_id != current.session_id]
    return _next_ranked_item(sessions, current.ranks, set(current.ranks))


# -- consistency post-filter ---------------------------------------------------


def consistency_filtered(
    task: ConfigurationTask,
    partial: Mapping[str, int],
    rec: ValueRecommendation,
) -> ValueRecommendation | None:
    """Guard a value recommendation against the model constraints.

    Returns ``rec`` if it is consistent with the constraints plus the
    session's partial assignment, the flipped value if only that one is,
    and None (suppressed) when the partial itself admits no completion.
    """
    if solver.is_consistent(task, {**partial, rec.feature: rec.value}):
        return rec
    flipped = replace(rec, value=1 - rec.value, vote_fraction=1.0 - rec.vote_fraction)
    if solver.is_consistent(task, {**partial, flipped.feature: flipped.value}):
        return flipped
    return None


# -- CSV loaders ----------------------------------------------------------------

SESSION_CSV_COLUMNS = ("session_id", "user_id", "feature", "value", "rank")
UTILITY_CSV_COLUMNS = ("feature", "dimension", "utility")
PROFILE_CSV_COLUMNS = ("dimension", "weight")


def _reader(text: str, required: tuple[str, ...]) -> Iterable[dict]:
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    missing = [column for column in required if column not in header]
    if missing:
        raise ValueError(f"CSV is missing columns: {missing}")
    return reader


def utility_table_from_csv(text: str) -> UtilityTable:
    """Rows ``feature,dimension,utility``; dimension order follows first
    appearance."""
    dimensions: list[str] = []
    values: dict[str, dict[str, float]] = {}
    for row in _reader(text, UTILITY_CSV_COLUMNS):
        dimension = row["dimension"].strip()
        if dimension not in dimensions:
            dimensions.append(dimension)
        values.setdefault(row["feature"].strip(), {})[dimension] = float(row["utility"])
    if not values:
        raise ValueError("utility CSV has no rows")
    return UtilityTable(tuple(dimensions), values)


def profile_from_csv(text: str, user: str) -> InterestProfile:
    """Rows ``dimension,weight`` for one user."""
    weights = {
        row["dimension"].strip(): float(row["weight"]) for row in _reader(text, PROFILE_CSV_COLUMNS)
    }
    if not weights:
        raise ValueError("profile CSV has no rows")
    return InterestProfile(user, weights)


def session_logs_from_csv(text: str, ongoing: AbstractSet[str] = frozenset()) -> list[SessionLog]:
    """Rows ``session_id,user_id,feature,value,rank`` (rank may be blank).

    Sessions listed in ``ongoing`` are loaded as not yet completed.
    """
    values: dict[str, dict[str, int]] = {}
    ranks: dict[str, dict[str, int]] = {}
    users: dict[str, str] = {}
    for row in _reader(text, SESSION_CSV_COLUMNS):
        sid = row["session_id"].strip()
        feature = row["feature"].strip()
        users.setdefault(sid, row["user_id"].strip())
        values.setdefault(sid, {})[feature] = int(row["value"])
        rank = (row["rank"] or "").strip()
        if rank:
            ranks.setdefault(sid, {})[feature] = int(rank)
    if not values:
        raise ValueError("session CSV has no rows")
    return [
        SessionLog(sid, users[sid], values[sid], ranks.get(sid, {}), completed=sid not in ongoing)
        for sid in values
    ]


def edit_logs_from_csv(text: str) -> list[EditLog]:
    """Constraint-edit orderings from the session CSV layout: the feature
    column carries constraint ids, the value column is ignored, and every
    row must be ranked."""
    ranks: dict[str, dict[str, int]] = {}
    for row in _reader(text, ("session_id", "feature", "rank")):
        rank = (row["rank"] or "").strip()
        if not rank:
            raise ValueError("edit logs need a rank on every row")
        ranks.setdefault(row["session_id"].strip(), {})[row["feature"].strip()] = int(rank)
    if not ranks:
        raise ValueError("edit CSV has no rows")
    return [EditLog(sid, items) for sid, items in ranks.items()]
