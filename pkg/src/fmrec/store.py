"""Event-sourced persistence for models, sessions, and recommendation data.

State lives in memory; every mutation is appended to a JSON-lines journal
first (one object per line) and acknowledged only after the write is
flushed to disk. Replaying the journal rebuilds the exact state, which
:meth:`Store.state_digest` makes checkable.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from . import solver
from .dsl import parse_model
from .model import FeatureModel
from .recommend import InterestProfile, SessionLog, UtilityTable
from .task import ConfigurationTask, Requirement, translate

__all__ = [
    "UnknownIdError",
    "InvalidOperationError",
    "ValidationError",
    "ModelRecord",
    "SessionEvent",
    "SessionRecord",
    "Store",
    "OPEN",
    "COMPLETED",
    "INCONSISTENT",
]

OPEN = "open"
COMPLETED = "completed"
INCONSISTENT = "inconsistent"


class UnknownIdError(KeyError):
    """Referenced model or session id does not exist."""


class InvalidOperationError(RuntimeError):
    """Operation conflicts with the session's current status."""


class ValidationError(ValueError):
    """Payload is semantically invalid for the referenced model."""


@dataclass(frozen=True)
class ModelRecord:
    model_id: str
    source: str
    model: FeatureModel
    created_at: int  # UTC seconds


@dataclass(frozen=True, slots=True)
class SessionEvent:
    feature: str
    value: int
    rank: int
    timestamp: int


@dataclass
class SessionRecord:
    session_id: str
    model_id: str
    user_id: str
    events: list[SessionEvent] = field(default_factory=list)
    status: str = OPEN

    def values(self) -> dict[str, int]:
        """Effective feature values (a later event overrides an earlier one)."""
        return {event.feature: event.value for event in self.events}

    def ranks(self) -> dict[str, int]:
        return {event.feature: event.rank for event in self.events}

    def requirements(self) -> tuple[Requirement, ...]:
        effective = self.values()
        seen: set[str] = set()
        out: list[Requirement] = []
        for event in self.events:
            if event.feature in seen:
                continue
            seen.add(event.feature)
            out.append(Requirement(event.feature, effective[event.feature], self.session_id))
        return tuple(out)

    def to_session_log(self) -> SessionLog:
        return SessionLog(
            self.session_id,
            self.user_id,
            self.values(),
            self.ranks(),
            completed=self.status == COMPLETED,
        )


class Store:
    """In-memory state backed by an append-only journal.

    A single lock serializes all mutations, which trivially satisfies the
    per-session ordering guarantee at this scale; reads take the lock only
    long enough to copy references to immutable values.
    """

    def __init__(self, path: str | Path | None = None):
        self._lock = threading.RLock()
        self._path = Path(path) if path is not None else None
        self._file = None
        self._models: dict[str, ModelRecord] = {}
        self._sessions: dict[str, SessionRecord] = {}
        self._utilities: UtilityTable | None = None
        self._profiles: dict[str, InterestProfile] = {}
        self._matrix_csv: str | None = None
        self._counters = {"model": 0, "session": 0}
        if self._path is not None and self._path.exists():
            for line in self._path.read_text().splitlines():
                if line.strip():
                    self._apply(json.loads(line))
        if self._path is not None:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            self._file = self._path.open("a", encoding="utf-8")

    def close(self) -> None:
        with self._lock:
            if self._file is not None:
                self._file.close()
                self._file = None

    # -- journal --------------------------------------------------------------

    def _record(self, event: dict) -> None:
        """Apply an event and make it durable before returning."""
        self._apply(event)
        if self._file is not None:
            self._file.write(json.dumps(event, sort_keys=True) + "\n")
            self._file.flush()
            os.fsync(self._file.fileno())

    def _apply(self, event: dict) -> None:
        kind = event["type"]
        if kind == "model":
            record = ModelRecord(event["id"], event["source"], parse_model(event["source"]), event["ts"])
            self._models[record.model_id] = record
            self._counters["model"] += 1
        elif kind == "session":
            self._sessions[event["id"]] = SessionRecord(event["id"], event["modelId"], event["userId"])
            self._counters["session"] += 1
        elif kind == "assign":
            session = self._sessions[event["sessionId"]]
            rank = max((e.rank for e in session.events), default=0) + 1
            session.events.append(SessionEvent(event["feature"], event["value"], rank, event["ts"]))
            session.status = self._derive_status(session)
        elif kind == "complete":
            self._sessions[event["sessionId"]].status = COMPLETED
        elif kind == "importSession":
            session = SessionRecord(event["id"], event["modelId"], event["userId"], status=COMPLETED)
            session.events = [
                SessionEvent(e["feature"], e["value"], e["rank"], event["ts"]) for e in event["events"]
            ]
            self._sessions[session.session_id] = session
            self._counters["session"] += 1
        elif kind == "utilities":
            self._utilities = UtilityTable(
                tuple(event["dimensions"]),
                {feature: dict(row) for feature, row in event["values"].items()},
            )
        elif kind == "profile":
            self._profiles[event["name"]] = InterestProfile(event["name"], dict(event["weights"]))
        elif kind == "matrix":
            self._matrix_csv = event["csv"]
        else:
            raise ValueError(f"unknown journal event type: {kind!r}")

    def _derive_status(self, session: SessionRecord) -> str:
        task = self.task_for_session(session)
        return OPEN if solver.propagate(task) is not None else INCONSISTENT

    # -- models ---------------------------------------------------------------

    def store_model(self, source: str) -> ModelRecord:
        with self._lock:
            parse_model(source).require_valid()  # reject before journaling
            model_id = self._fresh_id("model", "m", self._models)
            self._record({"type": "model", "id": model_id, "source": source, "ts": int(time.time())})
            return self._models[model_id]

    def _fresh_id(self, counter: str, prefix: str, taken: Mapping[str, object]) -> str:
        n = self._counters[counter] + 1
        while f"{prefix}{n}" in taken:
            n += 1
        return f"{prefix}{n}"

    def model(self, model_id: str) -> ModelRecord:
        with self._lock:
            try:
                return self._models[model_id]
            except KeyError:
                raise UnknownIdError(f"unknown model id: {model_id!r}") from None

    def model_ids(self) -> list[str]:
        with self._lock:
            return list(self._models)

    # -- sessions ---------------------------------------------------------------

    def create_session(self, model_id: str, user_id: str) -> SessionRecord:
        with self._lock:
            self.model(model_id)
            session_id = self._fresh_id("session", "s", self._sessions)
            self._record(
                {"type": "session", "id": session_id, "modelId": model_id, "userId": user_id, "ts": int(time.time())}
            )
            return self._sessions[session_id]

    def session(self, session_id: str) -> SessionRecord:
        with self._lock:
            try:
                return self._sessions[session_id]
            except KeyError:
                raise UnknownIdError(f"unknown session id: {session_id!r}") from None

    def sessions_for_model(self, model_id: str) -> list[SessionRecord]:
        with self._lock:
            return [s for s in self._sessions.values() if s.model_id == model_id]

    def record_assignment(self, session_id: str, feature: str, value: int) -> tuple[str, dict[str, int]]:
        """Append one feature decision; returns (status, forced assignments).

        Propagation runs after the event is applied: a conflict flags the
        session inconsistent, otherwise the forced map carries every value
        implied by the constraints beyond the explicit decisions.
        """
        with self._lock:
            session = self.session(session_id)
            if session.status == COMPLETED:
                raise InvalidOperationError(f"session {session_id!r} is completed")
            record = self.model(session.model_id)
            if feature not in record.model.feature_ids:
                raise ValidationError(f"unknown feature {feature!r} for model {session.model_id!r}")
            if value not in (0, 1):
                raise ValidationError(f"value must be 0 or 1, got {value!r}")
            self._record(
                {"type": "assign", "sessionId": session_id, "feature": feature, "value": value, "ts": int(time.time())}
            )
            return session.status, self.forced_assignments(session_id)

    def forced_assignments(self, session_id: str) -> dict[str, int]:
        """Values implied by propagation beyond the session's own decisions
        (empty when the session is inconsistent)."""
        with self._lock:
            session = self.session(session_id)
            fixpoint = solver.propagate(self.task_for_session(session))
            if fixpoint is None:
                return {}
            explicit = session.values()
            return {f: v for f, v in fixpoint.items() if f not in explicit}

    def complete_session(self, session_id: str) -> str:
        with self._lock:
            session = self.session(session_id)
            if session.status == COMPLETED:
                return session.status
            if session.status == INCONSISTENT:
                raise InvalidOperationError(f"session {session_id!r} is inconsistent; repair it first")
            if not solver.is_consistent(self.task_for_session(session)):
                raise InvalidOperationError(f"session {session_id!r} has no consistent completion")
            self._record({"type": "complete", "sessionId": session_id, "ts": int(time.time())})
            return self.session(session_id).status

    def import_session(
        self, model_id: str, session_id: str, user_id: str, events: Iterable[tuple[str, int, int]]
    ) -> SessionRecord:
        """Bulk-load one completed session; events are (feature, value, rank)
        triples whose ranks must be strictly increasing."""
        with self._lock:
            record = self.model(model_id)
            if session_id in self._sessions:
                raise ValidationError(f"session id {session_id!r} already exists")
            ordered = list(events)
            last = 0
            for feature, value, rank in ordered:
                if feature not in record.model.feature_ids:
                    raise ValidationError(f"unknown feature {feature!r} for model {model_id!r}")
                if value not in (0, 1):
                    raise ValidationError(f"value must be 0 or 1, got {value!r}")
                if rank <= last:
                    raise ValidationError(f"rank regression at feature {feature!r}: {rank} after {last}")
                last = rank
            self._record(
                {
                    "type": "importSession",
                    "id": session_id,
                    "modelId": model_id,
                    "userId": user_id,
                    "events": [{"feature": f, "value": v, "rank": r} for f, v, r in ordered],
                    "ts": int(time.time()),
                }
            )
            return self._sessions[session_id]

    # -- recommendation data -----------------------------------------------------

    def set_utilities(self, table: UtilityTable) -> None:
        with self._lock:
            self._record(
                {
                    "type": "utilities",
                    "dimensions": list(table.dimensions),
                    "values": {feature: dict(row) for feature, row in table.values.items()},
                }
            )

    def utilities(self) -> UtilityTable | None:
        with self._lock:
            return self._utilities

    def set_profile(self, profile: InterestProfile) -> None:
        with self._lock:
            self._record({"type": "profile", "name": profile.user, "weights": dict(profile.weights)})

    def profile(self, name: str) -> InterestProfile:
        with self._lock:
            try:
                return self._profiles[name]
            except KeyError:
                raise UnknownIdError(f"unknown profile: {name!r}") from None

    def set_matrix_csv(self, csv_text: str) -> None:
        with self._lock:
            self._record({"type": "matrix", "csv": csv_text})

    def matrix_csv(self) -> str | None:
        with self._lock:
            return self._matrix_csv

    # -- derived views --------------------------------------------------------------

    def task_for_session(self, session: SessionRecord) -> ConfigurationTask:
        base = translate(self.model(session.model_id).model)
        return base.with_requirements(session.requirements())

    def session_logs(self, model_id: str, exclude: str | None = None) -> list[SessionLog]:
        return [
            s.to_session_log()
            for s in self.sessions_for_model(model_id)
            if s.session_id != exclude
        ]

    def state_digest(self) -> str:
        """Hash of the full store state; equal digests mean equal state."""
        with self._lock:
            state = {
                "models": {
                    mid: {"source": record.source, "ts": record.created_at}
                    for mid, record in sorted(self._models.items())
                },
                "sessions": {
                    sid: {
                        "model": s.model_id,
                        "user": s.user_id,
                        "status": s.status,
                        "events": [[e.feature, e.value, e.rank, e.timestamp] for e in s.events],
                    }
                    for sid, s in sorted(self._sessions.items())
                },
                "utilities": None
                if self._utilities is None
                else {
                    "dimensions": list(self._utilities.dimensions),
                    "values": {f: dict(r) for f, r in sorted(self._utilities.values.items())},
                },
                "profiles": {name: dict(p.weights) for name, p in sorted(self._profiles.items())},
                "matrix": self._matrix_csv,
            }
        return hashlib.sha256(json.dumps(state, sort_keys=True).encode()).hexdigest()
