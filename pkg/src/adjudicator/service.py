"""HTTP service: adjudication, retrieval context, and the annotation
workflow consumed by the browser labelling UI."""

from __future__ import annotations

from pathlib import Path
from typing import Callable, Optional

from fastapi import FastAPI, Query
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel, Field

from .annotations import AnnotationStore, DuplicateSubmissionError, submission_from_dict
from .embedding import EmbeddingProviderConfig
from .engines import EngineKind, SceneQuery, run_engine
from .errors import AdjudicatorError, LabelParseError, ProviderError, SchemaError
from .evaluation import LABELS
from .graphs import CANONICAL_ACTIONS, parse_action
from .index import PrecedentIndex
from .ingestion import ExtractionProviderConfig
from .providers import ChatProvider

ERROR_CODES = {
    SchemaError: ("VALIDATION_ERROR", 400),
    DuplicateSubmissionError: ("CONFLICT", 409),
    LabelParseError: ("PARSE_ERROR", 502),
    ProviderError: ("PROVIDER_ERROR", 502),
}


def _error_response(exc: Exception) -> JSONResponse:
    for exc_type, (code, status) in ERROR_CODES.items():
        if isinstance(exc, exc_type):
            return JSONResponse(status_code=status, content={"error": {"code": code, "message": str(exc)}})
    return JSONResponse(status_code=500, content={"error": {"code": "INTERNAL", "message": str(exc)}})


class SceneBody(BaseModel):
    description: str
    image_ref: Optional[str] = None
    agent_types: list[str] = Field(default_factory=list)
    relative_positions: list[str] = Field(default_factory=list)
    map_note: str = ""


class AdjudicateRequest(BaseModel):
    scene: SceneBody
    action: str
    engine: str
    k: int = 3
    max_iterations: int = 3


class AnnotationBody(BaseModel):
    task_id: str
    annotator_id: str
    labels: dict[str, str]
    submitted_at: str = ""


def create_app(
    store: Optional[AnnotationStore] = None,
    index: Optional[PrecedentIndex] = None,
    provider_factory: Optional[Callable[[], ChatProvider]] = None,
    media_dir=None,
    extract_config: ExtractionProviderConfig = ExtractionProviderConfig(),
    embed_config: EmbeddingProviderConfig = EmbeddingProviderConfig(),
) -> FastAPI:
    app = FastAPI(title="precedent adjudication service")
    episodes: dict[str, dict] = {}

    @app.exception_handler(AdjudicatorError)
    async def handle_package_error(request, exc):
        return _error_response(exc)

    @app.get("/api/actions")
    def actions():
        return {
            "version": "1",
            "actions": list(CANONICAL_ACTIONS),
            "labels": [label.value for label in LABELS],
        }

    @app.get("/api/tasks/next")
    def next_task(annotator: str = Query(...)):
        if store is None:
            return _error_response(SchemaError("no task pool configured"))
        task = store.next_task(annotator)
        return {"version": "1", "task": task.to_record() if task else None}

    @app.post("/api/annotations")
    def submit_annotation(body: AnnotationBody):
        if store is None:
            return _error_response(SchemaError("no task pool configured"))
        submission = submission_from_dict(body.model_dump())
        records = store.submit(submission)
        return {"version": "1", "stored_records": len(records), "task_id": submission.task_id}

    @app.post("/api/adjudicate")
    def adjudicate(body: AdjudicateRequest):
        if provider_factory is None:
            return _error_response(SchemaError("no chat provider configured"))
        try:
            kind = EngineKind(body.engine.upper().replace("-", "_"))
        except ValueError:
            return _error_response(SchemaError(f"unknown engine kind {body.engine!r}", path="engine"))
        query = SceneQuery(
            description=body.scene.description,
            candidate_action=parse_action(body.action),
            image_ref=body.scene.image_ref,
            agent_types=tuple(body.scene.agent_types),
            relative_positions=tuple(body.scene.relative_positions),
            map_note=body.scene.map_note,
        )
        episode = run_engine(
            kind,
            query,
            provider_factory(),
            index=index,
            k=body.k,
            max_iterations=body.max_iterations,
            extract_config=extract_config,
            embed_config=embed_config,
        )
        episodes[episode.episode_id] = episode.to_record()
        return {
            "version": "1",
            "episode_id": episode.episode_id,
            "verdict": episode.verdict.value,
            "justification": episode.justification,
            "precedents": [
                {"graph_id": r.graph_id, "score": r.score, "data_class": r.data_class.value}
                for r in episode.retrievals
            ],
        }

    @app.get("/api/episodes/{episode_id}")
    def get_episode(episode_id: str):
        if episode_id not in episodes:
            return JSONResponse(
                status_code=404,
                content={"error": {"code": "NOT_FOUND", "message": f"no episode {episode_id}"}},
            )
        return episodes[episode_id]

    @app.get("/media/{task_id}")
    def media(task_id: str):
        if store is None or media_dir is None:
            return JSONResponse(
                status_code=404, content={"error": {"code": "NOT_FOUND", "message": "no media configured"}}
            )
        task = store.task(task_id)
        if task is None or not task.image_url:
            return JSONResponse(
                status_code=404, content={"error": {"code": "NOT_FOUND", "message": f"no media for {task_id}"}}
            )
        path = Path(media_dir) / Path(task.image_url).name
        if not path.exists():
            return JSONResponse(
                status_code=404, content={"error": {"code": "NOT_FOUND", "message": f"missing file {path.name}"}}
            )
        return FileResponse(path)

    return app
