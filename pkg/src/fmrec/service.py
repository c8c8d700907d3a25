"""HTTP/JSON API over the store, consumed by the browser UI and scripts.

All paths are prefixed ``/api/v1``. Error mapping: 400 malformed payloads,
404 unknown ids, 409 operations a session's status forbids, 422 payloads
that parse but violate semantics. Value recommendations always pass the
consistency filter before they are returned.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import diagnose, factorize, recommend, solver
from .dsl import ParseError
from .model import Group, RelChild
from .store import COMPLETED, INCONSISTENT, InvalidOperationError, Store, UnknownIdError, ValidationError
from .task import Requirement, translate

__all__ = ["create_app"]

DEFAULT_NEIGHBORS = 2


class ModelIn(BaseModel):
    source: str


class SessionIn(BaseModel):
    modelId: str
    userId: str


class AssignIn(BaseModel):
    feature: str
    value: int


class TrainIn(BaseModel):
    matrixCsv: str
    k: int = 2
    rate: float = 0.05
    reg: float = Field(0.0, alias="lambda")
    epochs: int = 2000
    seed: int = 42

    model_config = {"populate_by_name": True}


def create_app(store: Store) -> FastAPI:
    app = FastAPI(title="fmrec", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    trained: dict[str, factorize.InteractionMatrix] = {}

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": "malformed request payload"})

    @app.exception_handler(UnknownIdError)
    async def unknown_id(request: Request, exc: UnknownIdError):
        return JSONResponse(status_code=404, content={"detail": str(exc.args[0])})

    @app.exception_handler(InvalidOperationError)
    async def invalid_state(request: Request, exc: InvalidOperationError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(ParseError)
    async def bad_source(request: Request, exc: ParseError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def semantic(request: Request, exc: ValueError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(solver.EnumerationLimitError)
    async def too_many(request: Request, exc: solver.EnumerationLimitError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(LookupError)
    async def no_candidate(request: Request, exc: LookupError):
        return JSONResponse(status_code=422, content={"detail": str(exc.args[0] if exc.args else exc)})

    # -- models ----------------------------------------------------------------

    @app.post("/api/v1/models")
    def store_model(payload: ModelIn):
        record = store.store_model(payload.source)
        return {"modelId": record.model_id}

    @app.get("/api/v1/models/{model_id}")
    def get_model(model_id: str):
        record = store.model(model_id)
        return {"source": record.source, "features": _feature_entries(record.model)}

    @app.get("/api/v1/models/{model_id}/configurations")
    def configurations(model_id: str, require: str = "", limit: Optional[int] = Query(default=None)):
        record = store.model(model_id)
        base = _task_for(record)
        if require:
            base = base.with_requirements(_parse_requirements(require, record))
        return {"configurations": solver.enumerate_configurations(base, limit=limit)}

    # -- sessions ---------------------------------------------------------------

    @app.post("/api/v1/sessions")
    def create_session(payload: SessionIn):
        session = store.create_session(payload.modelId, payload.userId)
        return {"sessionId": session.session_id}

    @app.get("/api/v1/sessions/{session_id}")
    def get_session(session_id: str):
        session = store.session(session_id)
        return {
            "sessionId": session.session_id,
            "modelId": session.model_id,
            "userId": session.user_id,
            "status": session.status,
            "values": session.values(),
            "forced": _pairs(store.forced_assignments(session_id)),
        }

    @app.post("/api/v1/sessions/{session_id}/assign")
    def assign(session_id: str, payload: AssignIn):
        status, forced = store.record_assignment(session_id, payload.feature, payload.value)
        return {"status": status, "forced": _pairs(forced)}

    @app.post("/api/v1/sessions/{session_id}/complete")
    def complete(session_id: str):
        return {"status": store.complete_session(session_id)}

    # -- recommendations -----------------------------------------------------------

    @app.get("/api/v1/sessions/{session_id}/recommendation/value")
    def value_recommendation(session_id: str, feature: str, k: int = DEFAULT_NEIGHBORS):
        session = _open_session(session_id)
        logs = store.session_logs(session.model_id, exclude=session_id)
        rec = recommend.recommend_value(logs, session.to_session_log(), feature, k)
        task = _task_for(store.model(session.model_id))
        filtered = recommend.consistency_filtered(task, session.values(), rec)
        if filtered is None:
            raise InvalidOperationError("session preferences admit no consistent recommendation")
        return {
            "feature": filtered.feature,
            "value": filtered.value,
            "voteFraction": filtered.vote_fraction,
            "neighbors": list(filtered.neighbors),
        }

    @app.get("/api/v1/sessions/{session_id}/recommendation/next")
    def next_feature(session_id: str):
        session = _open_session(session_id)
        logs = store.session_logs(session.model_id, exclude=session_id)
        return {"feature": recommend.recommend_next_feature(logs, session.to_session_log())}

    # -- diagnosis -------------------------------------------------------------------

    @app.get("/api/v1/sessions/{session_id}/conflicts")
    def conflicts(session_id: str):
        session = store.session(session_id)
        task = store.task_for_session(session)
        report = diagnose.analyze(task.model_constraints, task.requirements)
        return {
            "conflicts": [
                _pairs_from(diagnose.ordered_requirements(conflict, task.requirements))
                for conflict in report.conflicts
            ]
        }

    @app.get("/api/v1/sessions/{session_id}/repairs")
    def session_repairs(session_id: str, profile: str):
        session = store.session(session_id)
        table = store.utilities()
        if table is None:
            raise ValidationError("no utility table loaded")
        weights = store.profile(profile)
        task = store.task_for_session(session)
        report = diagnose.analyze(task.model_constraints, task.requirements)
        ranked = diagnose.rank_repairs(
            diagnose.repairs(task, report.diagnoses), table, weights
        )
        return {"repairs": [{"changes": dict(r.changes), "utility": r.utility} for r in ranked]}

    # -- matrix factorization -----------------------------------------------------------

    @app.post("/api/v1/mf/train")
    def mf_train(payload: TrainIn):
        matrix = factorize.matrix_from_csv(payload.matrixCsv)
        config = factorize.TrainConfig(
            k=payload.k, rate=payload.rate, reg=payload.reg, epochs=payload.epochs, seed=payload.seed
        )
        store.set_matrix_csv(payload.matrixCsv)
        pair = factorize.train(matrix, config)
        predicted = factorize.predict(pair)
        job_id = f"j{len(trained) + 1}"
        trained[job_id] = predicted
        return {"jobId": job_id, "rmse": factorize.rmse(matrix, predicted)}

    @app.get("/api/v1/mf/predict")
    def mf_predict(user: str, jobId: Optional[str] = None):
        if not trained:
            raise UnknownIdError("no trained factorization job")
        key = jobId if jobId is not None else next(reversed(trained))
        if key not in trained:
            raise UnknownIdError(f"unknown job id: {key!r}")
        predicted = trained[key]
        scores = factorize.relevance_ranking(predicted, user, predicted.features)
        return {"scores": {feature: score for feature, score in scores}}

    # -- helpers ------------------------------------------------------------------------

    def _open_session(session_id: str):
        session = store.session(session_id)
        if session.status == COMPLETED:
            raise InvalidOperationError(f"session {session_id!r} is completed")
        if session.status == INCONSISTENT:
            raise InvalidOperationError(
                f"session {session_id!r} is inconsistent; fetch conflicts and repairs"
            )
        return session

    return app


def _task_for(record):
    return translate(record.model)


def _parse_requirements(require: str, record):
    out = []
    for chunk in require.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise ValidationError(f"bad requirement {chunk!r}, expected feature=0|1")
        name, _, raw = chunk.partition("=")
        name = name.strip()
        if name not in record.model.feature_ids:
            raise ValidationError(f"unknown feature {name!r}")
        if raw.strip() not in ("0", "1"):
            raise ValidationError(f"bad value for {name!r}, expected 0 or 1")
        out.append(Requirement(name, int(raw)))
    return out


def _pairs(values: dict[str, int]) -> list[dict]:
    return [{"feature": feature, "value": value} for feature, value in values.items()]


def _pairs_from(requirements) -> list[dict]:
    return [{"feature": r.feature, "value": r.value} for r in requirements]


def _feature_entries(model) -> list[dict]:
    """Tree-shaped feature listing: parent, relationship, group membership."""
    entries: list[dict] = []
    depths: dict[str, int] = {model.root.feature.id: 0}
    entries.append({"id": model.root.feature.id, "name": model.root.feature.name, "parent": None, "rel": "root", "group": None, "depth": 0})

    def walk(node):
        group_index = 0
        for child in node.children:
            if isinstance(child, RelChild):
                _add(child.node, node, child.kind, None)
                walk(child.node)
            elif isinstance(child, Group):
                for member in child.members:
                    _add(member, node, "grouped", {"kind": child.kind, "index": group_index})
                    walk(member)
                group_index += 1

    def _add(node, parent, rel, group):
        depth = depths[parent.feature.id] + 1
        depths[node.feature.id] = depth
        entries.append(
            {
                "id": node.feature.id,
                "name": node.feature.name,
                "parent": parent.feature.id,
                "rel": rel,
                "group": group,
                "depth": depth,
            }
        )

    walk(model.root)
    return entries
