"""HTTP API over the engine: ingestion, classification, review, training.

All endpoints live under /v1 and exchange JSON. Errors carry a machine-readable
code plus a message: {"error": {"code": ..., "message": ...}}.
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .engine import ConflictError, Engine, EngineError
from .critic import ReviewError
from .rbpnn import SnapshotIncompatibleError
from .store import DuplicateError, NotFoundError, StoreError


class TextIn(BaseModel):
    text: str
    author_id: int | None = None
    split: str = "unlabeled"
    sample_id: str | None = None


class ClassifyIn(BaseModel):
    text: str
    sample_id: str | None = None


class VerdictIn(BaseModel):
    accepted: bool
    true_author: int | None = None


class TrainIn(BaseModel):
    epochs: int = Field(default=5, ge=1)
    step: float = Field(default=0.01, ge=0.0)


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def _attribution_payload(attribution) -> dict:
    return {
        "sample_id": attribution.sample_id,
        "scores": [float(s) for s in attribution.scores],
        "selected_author": attribution.selected_author,
        "margin": attribution.margin,
    }


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="authorid", version="1.0")

    @app.exception_handler(HTTPException)
    async def handle_http_error(request: Request, exc: HTTPException):
        detail = exc.detail
        if not isinstance(detail, dict):
            detail = {"code": "internal", "message": str(detail)}
        return JSONResponse(status_code=exc.status_code, content={"error": detail})

    @app.post("/v1/texts", status_code=201)
    def post_text(body: TextIn):
        if not body.text.strip():
            raise _error(400, "bad_request", "empty text")
        try:
            sid = engine.ingest_text(
                body.text, author_id=body.author_id, split=body.split, sample_id=body.sample_id
            )
        except DuplicateError as exc:
            raise _error(409, "conflict", str(exc))
        except (EngineError, StoreError, ValueError) as exc:
            raise _error(400, "bad_request", str(exc))
        return {"sample_id": sid}

    @app.post("/v1/classify")
    def classify(body: ClassifyIn):
        try:
            attribution, item_id = engine.classify_text(body.text, body.sample_id or "")
        except SnapshotIncompatibleError as exc:
            raise _error(409, "snapshot_incompatible", str(exc))
        except EngineError as exc:
            raise _error(409, "conflict", str(exc))
        return {"attribution": _attribution_payload(attribution), "item_id": item_id}

    @app.get("/v1/review/queue")
    def review_queue(
        state: str = Query("pending"),
        cursor: str | None = Query(None),
        limit: int = Query(50, ge=1, le=500),
    ):
        items = engine.review_queue(state)
        start = 0
        if cursor:
            try:
                start = int(cursor)
            except ValueError:
                raise _error(400, "bad_request", f"bad cursor {cursor!r}")
        page = items[start : start + limit]
        next_cursor = str(start + limit) if start + limit < len(items) else None
        return {
            "items": [
                {
                    "item_id": item.item_id,
                    "created_at": item.created_at,
                    "state": item.state,
                    "attribution": _attribution_payload(item.attribution),
                    "top_groups": _top_groups(item),
                }
                for item in page
            ],
            "next_cursor": next_cursor,
        }

    def _top_groups(item, k: int = 5):
        fv = item.feature_vector
        if fv is None:
            return []
        freqs = fv.frequencies
        order = sorted(range(len(freqs)), key=lambda i: -freqs[i])[:k]
        names = engine.lexicon.group_names() if engine.lexicon else []
        return [
            {
                "group_id": int(i),
                "group_name": names[i] if i < len(names) else str(i),
                "frequency": float(freqs[i]),
            }
            for i in order
            if freqs[i] > 0
        ]

    @app.post("/v1/review/{item_id}/verdict")
    def post_verdict(item_id: str, body: VerdictIn):
        if not body.accepted and body.true_author is None:
            raise _error(400, "bad_request", "a rejection requires true_author")
        try:
            verdict, p_human = engine.submit_verdict(item_id, body.accepted, body.true_author)
        except NotFoundError as exc:
            raise _error(404, "not_found", str(exc))
        except ConflictError as exc:
            raise _error(409, "conflict", str(exc))
        except ReviewError as exc:
            raise _error(400, "bad_request", str(exc))
        return {
            "verdict": {
                "item_id": verdict.item_id,
                "source": verdict.source,
                "accepted": verdict.accepted,
                "true_author": verdict.true_author,
                "xi": [float(v) for v in verdict.xi],
            },
            "p_human": p_human,
        }

    @app.post("/v1/train")
    def train(body: TrainIn):
        try:
            result = engine.train_cycle(epochs=body.epochs, step=body.step)
        except EngineError as exc:
            raise _error(409, "conflict", str(exc))
        decision = result["decision"]
        return {
            "decision": {
                "retrain": decision.retrain,
                "persist_candidate": decision.persist_candidate,
                "reason": decision.reason,
            },
            "serving_snapshot_id": result["snapshot_id"],
            "candidate_snapshot_id": result.get("candidate_id"),
            "candidate_accuracy": result.get("candidate_accuracy"),
            "serving_accuracy": result.get("serving_accuracy"),
        }

    @app.get("/v1/model/status")
    def model_status():
        return engine.status()

    return app
