"""HTTP review API consumed by the annotation review UI.

File-backed and single-instance: base items come from the audit store, and
every vote/override is appended to the event log before the request is
acknowledged. Endpoint writes are serialized by the log's single appender.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .corpus import PiiType, Transcript, load_corpus
from .events import EVENT_OVERRIDE, EVENT_VOTE, EventLog, load_review_state
from .surrogation import (
    EVAL_NOT_PII,
    EVAL_PII,
    EVAL_UNCERTAIN,
    AnnotationItem,
    parse_evaluation,
    resolution_rate,
)

CONTEXT_RADIUS = 3


def _item_view(item: AnnotationItem, transcripts: dict[str, Transcript]) -> dict:
    view = item.to_dict()
    transcript = transcripts.get(item.session_id)
    if transcript is not None:
        lo = max(0, item.message_index - CONTEXT_RADIUS)
        hi = min(len(transcript.messages), item.message_index + CONTEXT_RADIUS + 1)
        view["context"] = [
            {"index": m.index, "role": m.role, "text": m.text}
            for m in transcript.messages[lo:hi]
        ]
        view["highlight"] = (
            {"start": item.start, "end": item.end}
            if item.start is not None and item.end is not None
            else None
        )
    return view


def create_app(
    corpus_path: str | Path,
    store_path: str | Path,
    events_path: str | Path,
    ui_dir: str | Path | None = None,
    token: str | None = None,
) -> FastAPI:
    corpus = load_corpus(corpus_path)
    transcripts = {t.session_id: t for t in corpus}
    items = load_review_state(store_path, events_path)
    log = EventLog(events_path)
    # Serve the latest iteration of each item id; earlier iterations stay for
    # resolution statistics.
    latest: dict[str, AnnotationItem] = {}
    for item in items:
        cur = latest.get(item.id)
        if cur is None or item.iteration > cur.iteration:
            latest[item.id] = item

    app = FastAPI(title="mathdeid review service")

    @app.middleware("http")
    async def check_token(request: Request, call_next):
        if token and request.url.path.startswith("/api/"):
            if request.headers.get("X-Auth-Token") != token:
                return JSONResponse({"detail": "missing or bad token"}, status_code=401)
        return await call_next(request)

    @app.get("/api/items")
    def list_items(
        status: str | None = None,
        iteration: int | None = None,
        type: str | None = None,
        page: int = 1,
        page_size: int = 50,
    ):
        selected = sorted(latest.values(), key=lambda i: i.id)
        if status:
            selected = [i for i in selected if i.status == status.upper()]
        if iteration is not None:
            selected = [i for i in selected if i.iteration == iteration]
        if type:
            try:
                want = PiiType.parse(type)
            except ValueError:
                raise HTTPException(status_code=400, detail=f"unknown type {type!r}")
            selected = [i for i in selected if i.pii_type is want]
        total = len(selected)
        page = max(1, page)
        page_size = max(1, min(page_size, 500))
        chunk = selected[(page - 1) * page_size : page * page_size]
        return {
            "items": [_item_view(i, transcripts) for i in chunk],
            "total": total,
            "page": page,
            "page_size": page_size,
        }

    def _get_item(item_id: str) -> AnnotationItem:
        item = latest.get(item_id)
        if item is None:
            raise HTTPException(status_code=404, detail=f"no item {item_id!r}")
        return item

    @app.get("/api/items/{item_id}")
    def get_item(item_id: str):
        return _item_view(_get_item(item_id), transcripts)

    @app.post("/api/items/{item_id}/vote")
    async def vote(item_id: str, request: Request):
        item = _get_item(item_id)
        body = await _json_body(request)
        reviewer = body.get("reviewer_id")
        direction = str(body.get("direction", "")).upper()
        if not reviewer or direction not in ("UP", "DOWN"):
            raise HTTPException(status_code=400, detail="need reviewer_id and direction UP|DOWN")
        if any(v.reviewer_id == reviewer for v in item.votes):
            raise HTTPException(
                status_code=409,
                detail=f"reviewer {reviewer!r} already voted on {item_id} "
                f"in iteration {item.iteration}",
            )
        # durable first, then visible: the ack implies the event is on disk
        event = log.append(
            EVENT_VOTE,
            item_id,
            {
                "reviewer_id": reviewer,
                "direction": direction,
                "note": body.get("note"),
                "iteration": item.iteration,
            },
        )
        item.record_vote(reviewer, direction, body.get("note"), timestamp=event["timestamp"])
        return {"ok": True, "item": _item_view(item, transcripts)}

    @app.post("/api/items/{item_id}/override")
    async def override(item_id: str, request: Request):
        item = _get_item(item_id)
        body = await _json_body(request)
        raw_eval = body.get("evaluation")
        if not raw_eval:
            raise HTTPException(status_code=400, detail="need evaluation")
        evaluation, recognized = parse_evaluation(str(raw_eval))
        if not recognized:
            raise HTTPException(status_code=400, detail=f"bad evaluation {raw_eval!r}")
        surrogate = body.get("surrogate")
        if evaluation in (EVAL_PII, EVAL_UNCERTAIN) and not (surrogate or item.surrogate):
            raise HTTPException(status_code=400, detail=f"{evaluation} override needs a surrogate")
        # durable first, then visible
        log.append(
            EVENT_OVERRIDE,
            item_id,
            {"evaluation": evaluation, "surrogate": surrogate, "iteration": item.iteration},
        )
        item.evaluation = evaluation
        if surrogate is not None:
            item.surrogate = surrogate
        item.status = "OVERRIDDEN"
        return {"ok": True, "item": _item_view(item, transcripts)}

    @app.get("/api/iterations/{k}/resolution")
    def resolution(k: int):
        previous = {i.id for i in items if i.iteration == k - 1 and i.downvoted}
        current = [i for i in items if i.iteration == k]
        decision = resolution_rate(previous, current)
        return {
            "iteration": k,
            "rate": decision.rate,
            "stop": decision.stop,
            "resolved": decision.resolved,
            "previously_downvoted": decision.total,
        }

    @app.get("/api/stats")
    def stats():
        by_type: dict[str, dict[str, int]] = {}
        totals = {EVAL_PII: 0, EVAL_NOT_PII: 0, EVAL_UNCERTAIN: 0}
        for item in latest.values():
            slot = by_type.setdefault(
                item.pii_type.value, {EVAL_PII: 0, EVAL_NOT_PII: 0, EVAL_UNCERTAIN: 0}
            )
            slot[item.evaluation] = slot.get(item.evaluation, 0) + 1
            totals[item.evaluation] = totals.get(item.evaluation, 0) + 1
        total = sum(totals.values())
        return {
            "items": total,
            "verdicts": totals,
            "not_pii_share": totals[EVAL_NOT_PII] / total if total else 0.0,
            "by_type": by_type,
        }

    async def _json_body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail="malformed JSON body")
        if not isinstance(body, dict):
            raise HTTPException(status_code=400, detail="body must be a JSON object")
        return body

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
