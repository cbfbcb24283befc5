"""HTTP API for the reporting wizard and for developers viewing reports.

Endpoints::

    GET  /apps
    POST /sessions
    GET  /sessions/{id}
    GET  /sessions/{id}/suggestions?action=CLICK
    POST /sessions/{id}/steps
    POST /sessions/{id}/confirmations        (screenshots for a chosen entry)
    POST /sessions/{id}/finalize
    GET  /reports/{id}                       (Accept: text/html or JSON)
    GET  /shots/{sha256}.png

Errors come back as ``{"error": code, "message": str, "field"?: str}``.
Requests across sessions run fully parallel; writes within one session
are serialized, a concurrent second write is rejected with a conflict.
"""

from __future__ import annotations

import re
import threading
from datetime import datetime, timezone

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import HTMLResponse, JSONResponse
from pydantic import BaseModel

from .errors import (
    BugtrailError,
    ConflictError,
    NotFoundError,
    StateError,
    ValidationError,
)
from .model import (
    Action,
    ActionKind,
    ComponentType,
    ManualComponent,
    Orientation,
    RelativeLocation,
    ReportSession,
    StepTarget,
    SwipeDirection,
)
from .report import assemble_report, render_html
from .serialize import encode_hypothesis, encode_session, encode_step
from .store import StoreHandle
from .suggest import (
    SuggestionEntry,
    confirmation_screens,
    initial_hypothesis,
    record_step,
    suggest_components,
)

_SHOT_RE = re.compile(r"^[0-9a-f]{64}\.png$")

_STATUS_BY_ERROR = {
    ValidationError: 400,
    NotFoundError: 404,
    ConflictError: 409,
    StateError: 409,
}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class CreateSessionBody(BaseModel):
    app_id: str
    version: str
    reporter_name: str = ""
    device_name: str = ""
    orientation: str = "PORTRAIT"
    title: str
    description: str = ""


class TargetBody(BaseModel):
    descriptor_id: str
    object_index: int
    state_id: str


class ManualBody(BaseModel):
    component_type: str
    text: str = ""
    relative_location: str


class AddStepBody(BaseModel):
    action: str
    target: TargetBody | None = None
    manual: ManualBody | None = None
    entered_text: str | None = None
    direction: str | None = None
    note: str = ""
    confirmed_full_screenshot: str | None = None


class ConfirmationsBody(BaseModel):
    descriptor_id: str
    object_index: int


class _SessionGuard:
    """Per-session mutual exclusion; a busy session rejects instead of queueing."""

    def __init__(self):
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def acquire(self, session_id: str) -> threading.Lock:
        with self._guard:
            lock = self._locks.setdefault(session_id, threading.Lock())
        if not lock.acquire(blocking=False):
            raise ConflictError(f"another update for session {session_id} is in flight")
        return lock


def _parse_enum(enum_cls, raw: str, field: str):
    try:
        return enum_cls(raw.upper())
    except ValueError:
        valid = ", ".join(m.value for m in enum_cls)
        raise ValidationError(f"{field} must be one of: {valid}", field=field) from None


def create_app(store: StoreHandle) -> FastAPI:
    app = FastAPI(title="bugtrail", docs_url=None, redoc_url=None)
    # the reporter wizard is served statically from elsewhere
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    guard = _SessionGuard()

    @app.exception_handler(BugtrailError)
    async def _domain_error(request: Request, exc: BugtrailError):
        status = 500
        for klass, code in _STATUS_BY_ERROR.items():
            if isinstance(exc, klass):
                status = code
                break
        body = {"error": exc.code, "message": str(exc)}
        field = getattr(exc, "field", None)
        if field:
            body["field"] = field
        return JSONResponse(status_code=status, content=body)

    @app.exception_handler(RequestValidationError)
    async def _request_error(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        loc = [str(part) for part in first.get("loc", ()) if part != "body"]
        body = {"error": "validation", "message": first.get("msg", "invalid request body")}
        if loc:
            body["field"] = ".".join(loc)
        return JSONResponse(status_code=400, content=body)

    def _open_session(session_id: str) -> ReportSession:
        return store.get_session(session_id)

    def _bundle_for(session: ReportSession):
        return store.bundle(session.app_id, session.app_version)

    # -- model listing ---------------------------------------------------------

    @app.get("/apps")
    def list_apps():
        return [{"app_id": app_id, "version": version} for app_id, version in store.list_apps()]

    # -- sessions ----------------------------------------------------------------

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        if not body.title.strip():
            raise ValidationError("title must not be empty", field="title")
        orientation = _parse_enum(Orientation, body.orientation, "orientation")
        bundle = store.bundle(body.app_id, body.version)  # 404 when not ingested/ripped
        now = _now()
        session = ReportSession(
            session_id=store.next_session_id(),
            app_id=body.app_id,
            app_version=body.version,
            reporter_name=body.reporter_name,
            device_name=body.device_name,
            orientation=orientation,
            title=body.title,
            description=body.description,
            hypothesis=initial_hypothesis(bundle),
            created_at=now,
            updated_at=now,
        )
        store.put_session(session)
        return {"session_id": session.session_id}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return encode_session(_open_session(session_id))

    @app.get("/sessions/{session_id}/suggestions")
    def get_suggestions(session_id: str, action: str):
        session = _open_session(session_id)
        if not session.is_open:
            raise StateError(f"session {session_id} is finalized")
        kind = _parse_enum(ActionKind, action, "action")
        return suggest_components(session.hypothesis, kind, _bundle_for(session)).to_doc()

    @app.post("/sessions/{session_id}/confirmations")
    def get_confirmations(session_id: str, body: ConfirmationsBody):
        session = _open_session(session_id)
        entry = SuggestionEntry(
            descriptor_id=body.descriptor_id,
            object_index=body.object_index,
            state_id=None,
            display_type=None,
            display_text="",
            display_location=None,
            thumbnail=None,
        )
        return {"screenshots": confirmation_screens(session.hypothesis, entry, _bundle_for(session))}

    @app.post("/sessions/{session_id}/steps")
    def add_step(session_id: str, body: AddStepBody):
        lock = guard.acquire(session_id)
        try:
            session = _open_session(session_id)
            bundle = _bundle_for(session)
            kind = _parse_enum(ActionKind, body.action, "action")
            entered = body.entered_text or ""
            if entered and kind is not ActionKind.TYPE:
                raise ValidationError("entered_text is only valid with TYPE", field="entered_text")
            direction = None
            if body.direction:
                if kind is not ActionKind.SWIPE:
                    raise ValidationError("direction is only valid with SWIPE", field="direction")
                direction = _parse_enum(SwipeDirection, body.direction, "direction")
            if (body.target is None) == (body.manual is None):
                raise ValidationError("provide exactly one of target or manual", field="target")
            if body.target is not None:
                target: StepTarget | ManualComponent = StepTarget(
                    descriptor_id=body.target.descriptor_id,
                    object_index=body.target.object_index,
                    state_id=body.target.state_id,
                )
            else:
                target = ManualComponent(
                    component_type=_parse_enum(ComponentType, body.manual.component_type, "manual.component_type"),
                    text=body.manual.text,
                    relative_location=_parse_enum(
                        RelativeLocation, body.manual.relative_location, "manual.relative_location"
                    ),
                )
            action = Action(
                kind=kind,
                text=entered if kind is ActionKind.TYPE else None,
                direction=direction,
            )
            record_step(
                session,
                bundle,
                action=action,
                target=target,
                entered_text=entered if kind is ActionKind.TYPE else "",
                note=body.note,
                confirmed_full_screenshot=body.confirmed_full_screenshot,
                shot_exists=lambda digest: digest in store.shots,
                persist=None,
            )
            session.updated_at = _now()
            store.put_session(session)
            return {
                "session_id": session.session_id,
                "steps": [encode_step(s) for s in session.steps],
                "hypothesis": encode_hypothesis(session.hypothesis),
            }
        finally:
            lock.release()

    @app.post("/sessions/{session_id}/finalize")
    def finalize(session_id: str):
        lock = guard.acquire(session_id)
        try:
            session = _open_session(session_id)
            if not session.is_open:
                raise StateError(f"session {session_id} is already finalized")
            if not session.steps:
                raise ValidationError("cannot finalize a session with no steps")
            report_id = store.next_report_id()
            report = assemble_report(session, _bundle_for(session), report_id)
            store.put_report(report)
            session.finalized_report_id = report_id
            session.updated_at = _now()
            store.put_session(session)
            return {"report_id": report_id}
        finally:
            lock.release()

    # -- reports and screenshots ---------------------------------------------------

    @app.get("/reports/{report_id}")
    def get_report(report_id: int, request: Request):
        data = store.get_report_bytes(report_id)
        accept = request.headers.get("accept", "")
        if "text/html" in accept:
            from .canonical import load_json_bytes
            from .serialize import decode_report

            return HTMLResponse(render_html(decode_report(load_json_bytes(data))))
        return Response(content=data, media_type="application/json")

    @app.get("/shots/{name}")
    def get_shot(name: str):
        if not _SHOT_RE.match(name):
            raise NotFoundError(f"no screenshot {name!r}")
        data = store.shots.get(name[: -len(".png")])
        return Response(
            content=data,
            media_type="image/png",
            headers={"Cache-Control": "public, max-age=31536000, immutable"},
        )

    return app
