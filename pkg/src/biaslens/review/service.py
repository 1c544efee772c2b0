"""HTTP service for the human-in-the-loop review workflow.

Serves the triage queue (model-flagged descriptions ordered by confidence),
description detail with span provenance, durable verdict recording with
idempotency keys, and the corpus-augmentation export.  A built frontend
directory can be mounted at /ui.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

from fastapi import FastAPI, Header, HTTPException, Query
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from ..cascade import PredRecord
from ..corpus import CodeLabel, Corpus, dumps_description
from .store import DecisionStore, export_accepted

VALID_STATUS = ("pending", "reviewed")


class SpanBody(BaseModel):
    start: int
    end: int
    label: str


class DecisionBody(BaseModel):
    description_id: str
    span: SpanBody | None = None
    label: str | None = None  # whole-description target
    verdict: str
    note: str = ""
    reviewer: str = Field(default="", max_length=200)


def _queue_items(corpus: Corpus, records: Sequence[PredRecord],
                 store: DecisionStore) -> list[dict]:
    by_desc: dict[str, list[PredRecord]] = {}
    for rec in records:
        by_desc.setdefault(rec.id, []).append(rec)
    fonds = {d.id: (d.fonds_id, d.fonds_title) for d in corpus}
    items = []
    for desc_id, recs in by_desc.items():
        if desc_id not in fonds:
            continue
        flags = [{
            "label": r.label.value, "start": r.start, "end": r.end,
            "stage": r.stage, "fold": r.fold, "confidence": r.confidence,
            "score": r.score,
        } for r in recs]
        items.append({
            "description_id": desc_id,
            "fonds_id": fonds[desc_id][0],
            "fonds_title": fonds[desc_id][1],
            "confidence": max(f["confidence"] for f in flags),
            "flags": flags,
        })
    # ordering: max confidence descending, ties by id; stable across calls
    items.sort(key=lambda it: (-it["confidence"], it["description_id"]))
    return items


def create_app(corpus: Corpus | None = None,
               records: Sequence[PredRecord] | None = None,
               store: DecisionStore | None = None,
               ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="biaslens review service")
    corpus = corpus or []
    records = list(records or [])
    by_id = {d.id: d for d in corpus}
    fonds_ids = {d.fonds_id for d in corpus}
    base_queue = _queue_items(corpus, records, store) if store else []
    model_spans: dict[str, set[tuple[int, int, str]]] = {}
    for rec in records:
        model_spans.setdefault(rec.id, set()).add(
            (rec.start, rec.end, rec.label.value))

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "descriptions": len(by_id),
                "flagged": len(base_queue)}

    @app.get("/queue")
    def queue(label: str | None = None, fonds: str | None = None,
              status: str | None = None,
              limit: int = Query(default=50, ge=1, le=1000),
              offset: int = Query(default=0, ge=0)) -> dict:
        if store is None or not records:
            raise HTTPException(status_code=503, detail="no run loaded")
        if label is not None:
            try:
                CodeLabel(label)
            except ValueError:
                raise HTTPException(status_code=400,
                                    detail=f"unknown label {label!r}") from None
        if fonds is not None and fonds not in fonds_ids:
            raise HTTPException(status_code=400,
                                detail=f"unknown fonds {fonds!r}")
        if status is not None and status not in VALID_STATUS:
            raise HTTPException(status_code=400,
                                detail=f"unknown status {status!r}")
        reviewed = store.reviewed_ids()
        selected = []
        for item in base_queue:
            if label is not None and not any(f["label"] == label
                                             for f in item["flags"]):
                continue
            if fonds is not None and item["fonds_id"] != fonds:
                continue
            item_status = ("reviewed" if item["description_id"] in reviewed
                           else "pending")
            if status is not None and item_status != status:
                continue
            selected.append({**item, "status": item_status})
        page = selected[offset:offset + limit]
        return {"items": page, "total": len(selected), "offset": offset,
                "limit": limit}

    @app.get("/descriptions/{desc_id}")
    def description(desc_id: str) -> dict:
        d = by_id.get(desc_id)
        if d is None:
            raise HTTPException(status_code=404,
                                detail=f"unknown description {desc_id!r}")
        return {
            "id": d.id,
            "fonds_id": d.fonds_id,
            "fonds_title": d.fonds_title,
            "field": d.field.value,
            "text": d.text,
            "languages": list(d.languages),
            "gold_spans": [{"start": s.start, "end": s.end,
                            "label": s.label.value, "source": s.source}
                           for s in d.annotations],
            "model_spans": [{"start": r.start, "end": r.end,
                             "label": r.label.value, "source": r.source,
                             "fold": r.fold, "stage": r.stage,
                             "confidence": r.confidence, "score": r.score}
                            for r in records if r.id == desc_id],
            "decisions": ([dec.to_dict() for dec in store.history(desc_id)]
                          if store else []),
        }

    @app.post("/decisions")
    def post_decision(body: DecisionBody,
                      idempotency_key: str | None = Header(
                          default=None, alias="Idempotency-Key")):
        if store is None:
            raise HTTPException(status_code=503, detail="no store configured")
        if body.verdict not in ("accept", "reject", "unsure"):
            raise HTTPException(status_code=422,
                                detail=f"invalid verdict {body.verdict!r}")
        d = by_id.get(body.description_id)
        if d is None:
            raise HTTPException(
                status_code=404,
                detail=f"unknown description {body.description_id!r}")
        if body.span is not None:
            target = (body.span.start, body.span.end, body.span.label)
        elif body.label is not None:
            target = (0, len(d.text), body.label)
        else:
            raise HTTPException(status_code=422,
                                detail="decision needs a span or a label")
        try:
            CodeLabel(target[2])
        except ValueError:
            raise HTTPException(status_code=422,
                                detail=f"unknown label {target[2]!r}") from None
        if target not in model_spans.get(body.description_id, set()):
            raise HTTPException(status_code=404,
                                detail="no model span matches this target")
        try:
            decision, created = store.append(
                body.description_id, target[0], target[1], target[2],
                body.verdict, body.note, body.reviewer,
                idempotency_key=idempotency_key)
        except KeyError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        return JSONResponse(status_code=201 if created else 200,
                            content=decision.to_dict())

    @app.get("/export")
    def export(policy: str = "latest-accepted") -> PlainTextResponse:
        if policy != "latest-accepted":
            raise HTTPException(status_code=400,
                                detail=f"unknown export policy {policy!r}")
        if store is None:
            return PlainTextResponse("", media_type="application/x-ndjson")
        lines = [dumps_description(d)
                 for d in export_accepted(store, list(by_id.values()))]
        body = "\n".join(lines) + ("\n" if lines else "")
        return PlainTextResponse(body, media_type="application/x-ndjson")

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True),
                  name="ui")

    return app
