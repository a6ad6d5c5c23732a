"""Local control API for the decision console.

Token-authenticated (bearer token from ``GAAP_CONSOLE_TOKEN``), local-only
HTTP endpoints: pending decision/value requests, decision submission, a
server-sent event stream of transcript and decision events, permission
CRUD, private-data key management (values write-only, always masked), and
disclosure-log export.
"""

from __future__ import annotations

import json
import os
import queue
import threading
from typing import Optional

import uvicorn
from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.responses import StreamingResponse

from ..permissions import Decision, NotFound
from ..private_data import InvalidKey, KeyNotFound
from ..taint import item_from_wire, render_item
from .hub import ConsoleHub
from .runner import Runtime

TOKEN_ENV = "GAAP_CONSOLE_TOKEN"
MASK = "•••"


def _auth_dependency(request: Request) -> None:
    token = os.environ.get(TOKEN_ENV, "")
    if not token:
        raise HTTPException(status_code=503, detail=f"{TOKEN_ENV} is not configured")
    header = request.headers.get("authorization", "")
    if header != f"Bearer {token}":
        raise HTTPException(status_code=401, detail="bad or missing bearer token")


def build_app(runtime: Runtime, hub: ConsoleHub) -> FastAPI:
    app = FastAPI(title="gaap control api", docs_url=None, redoc_url=None)
    auth = Depends(_auth_dependency)

    # ------------------------------------------------------------------
    # Pending prompts

    @app.get("/api/pending", dependencies=[auth])
    def pending():
        return {
            "decisions": [r.as_wire() for r in hub.pending_decisions()],
            "values": [
                {"request_id": p.request_id, "key": p.key}
                for p in hub.pending_values()
            ],
        }

    @app.post("/api/decisions", dependencies=[auth])
    def submit_decision(body: dict):
        batch_id = body.get("batch_id")
        choices = body.get("choices")
        if not isinstance(batch_id, str) or not isinstance(choices, list):
            raise HTTPException(status_code=422, detail="need batch_id and choices")
        status = hub.submit_decision(batch_id, choices)
        if status == "unknown":
            raise HTTPException(status_code=404, detail="no such batch")
        if status == "duplicate":
            raise HTTPException(status_code=409, detail="batch already resolved")
        if status == "invalid":
            raise HTTPException(status_code=422, detail="bad choices")
        return {"ok": True}

    @app.post("/api/values", dependencies=[auth])
    def submit_value(body: dict):
        request_id = body.get("request_id")
        if not isinstance(request_id, str):
            raise HTTPException(status_code=422, detail="need request_id")
        value = body.get("value")
        if value is not None and not isinstance(value, str):
            raise HTTPException(status_code=422, detail="value must be text or null")
        status = hub.submit_value(request_id, value)
        if status == "unknown":
            raise HTTPException(status_code=404, detail="no such request")
        if status == "duplicate":
            raise HTTPException(status_code=409, detail="request already resolved")
        return {"ok": True}

    # ------------------------------------------------------------------
    # Event stream

    @app.get("/api/events", dependencies=[auth])
    def events():
        subscriber = hub.subscribe()

        def stream():
            try:
                yield 'event: hello\ndata: {"type": "hello"}\n\n'
                while True:
                    try:
                        event = subscriber.get(timeout=15.0)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    payload = json.dumps(event, ensure_ascii=False)
                    yield f"event: {event.get('type', 'message')}\ndata: {payload}\n\n"
            finally:
                hub.unsubscribe(subscriber)

        return StreamingResponse(stream(), media_type="text/event-stream")

    # ------------------------------------------------------------------
    # Permissions

    @app.get("/api/permissions", dependencies=[auth])
    def list_permissions(entity: Optional[str] = None, item: Optional[str] = None):
        return {
            "records": [
                {
                    "item": render_item(r.item),
                    "entity": r.entity,
                    "decision": r.decision.value,
                    "decided_at": r.decided_at,
                }
                for r in runtime.permissions.list(entity=entity, item=item)
            ]
        }

    @app.put("/api/permissions", dependencies=[auth])
    def set_permission(body: dict):
        try:
            item = item_from_wire(body["item"])
            decision = Decision(body["decision"])
            entity = body["entity"]
        except (KeyError, ValueError):
            raise HTTPException(status_code=422, detail="need item, entity, decision")
        if decision is Decision.UNKNOWN:
            raise HTTPException(status_code=422, detail="decision must be allow or deny")
        runtime.permissions.record(item, entity, decision)
        return {"ok": True}

    @app.post("/api/permissions/revoke", dependencies=[auth])
    def revoke_permission(body: dict):
        try:
            item = item_from_wire(body["item"])
            entity = body["entity"]
        except (KeyError, ValueError):
            raise HTTPException(status_code=422, detail="need item and entity")
        try:
            runtime.permissions.revoke(item, entity)
        except NotFound:
            raise HTTPException(status_code=404, detail="no such permission")
        return {"ok": True}

    # ------------------------------------------------------------------
    # Private data keys (values masked, write-only)

    @app.get("/api/pdb", dependencies=[auth])
    def list_keys():
        records = []
        for key in runtime.pdb.list_keys():
            record = runtime.pdb.record(key)
            records.append({
                "key": key,
                "value": MASK,
                "origin": record.origin,
                "created_at": record.created_at,
            })
        return {"keys": records}

    @app.put("/api/pdb/{key}", dependencies=[auth])
    def set_key(key: str, body: dict):
        value = body.get("value")
        if not isinstance(value, str) or not value:
            raise HTTPException(status_code=422, detail="need a non-empty value")
        try:
            runtime.pdb.upsert_external(key, value)
        except InvalidKey:
            raise HTTPException(status_code=422, detail="invalid key")
        return {"ok": True, "key": key, "value": MASK}

    @app.delete("/api/pdb/{key}", dependencies=[auth])
    def delete_key(key: str):
        try:
            runtime.pdb.delete(key)
        except KeyNotFound:
            raise HTTPException(status_code=404, detail="no such key")
        return {"ok": True}

    # ------------------------------------------------------------------
    # Disclosure log

    @app.get("/api/disclosures", dependencies=[auth])
    def export_log(
        entity: Optional[str] = None,
        start_seq: int = 1,
        end_seq: Optional[int] = None,
    ):
        records = runtime.disclosures.export(
            start_seq=start_seq, end_seq=end_seq, entity=entity
        )
        return {"records": [r.as_wire() | {"item": render_item(r.item)} for r in records]}

    @app.get("/api/health")
    def health():
        return {"ok": True}

    return app


class ApiServer:
    """Uvicorn in a background thread; used by `serve` and console runs."""

    def __init__(self, app: FastAPI, host: str, port: int):
        config = uvicorn.Config(app, host=host, port=port, log_level="warning")
        self.server = uvicorn.Server(config)
        self.thread = threading.Thread(target=self.server.run, daemon=True)

    def start(self, ready_timeout: float = 10.0) -> None:
        self.thread.start()
        import time

        deadline = time.time() + ready_timeout
        while not self.server.started:
            if time.time() > deadline:
                raise RuntimeError("control API failed to start")
            if not self.thread.is_alive():
                raise RuntimeError("control API exited at startup")
            time.sleep(0.02)

    def stop(self) -> None:
        self.server.should_exit = True
        self.thread.join(timeout=5)
