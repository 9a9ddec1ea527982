"""HTTP+JSON session service.

Sessions live in memory, optionally snapshotted to a state directory (one
file per session id). Requests for distinct sessions run concurrently;
requests touching one session are serialized by a per-session lock. Long
automatic searches run in worker threads and are cancellable through their
progress handle.
"""
from __future__ import annotations

import json
import os
import threading
import uuid
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from .enumeration import Constraint, ListGoal, TermGoal, is_solved_constraint
from .grammar import print_term
from .presets import PRESETS
from .rewrite import Verdict
from .session import (
    ProofSession,
    SessionError,
    applicable_rules,
    apply_action,
    create_session,
    export_session,
    import_session,
)


class SessionStore:
    def __init__(self, state_dir: Optional[str] = None):
        self._sessions: dict = {}
        self._locks: dict = {}
        self._auto: dict = {}  # handle -> {event, thread, session_id, done, error}
        self._mutex = threading.Lock()
        self.state_dir = state_dir
        if state_dir:
            os.makedirs(state_dir, exist_ok=True)

    def add(self, session: ProofSession) -> None:
        with self._mutex:
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()
        self.snapshot(session)

    def get(self, sid: str) -> ProofSession:
        s = self._sessions.get(sid)
        if s is None:
            raise HTTPException(404, detail={"code": "no_such_session", "message": sid})
        return s

    def lock(self, sid: str) -> threading.Lock:
        return self._locks[sid]

    def snapshot(self, session: ProofSession) -> None:
        if not self.state_dir:
            return
        path = os.path.join(self.state_dir, f"{session.id}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(export_session(session), fh)

    def load_snapshots(self) -> int:
        if not self.state_dir:
            return 0
        n = 0
        for name in sorted(os.listdir(self.state_dir)):
            if not name.endswith(".json"):
                continue
            with open(os.path.join(self.state_dir, name), encoding="utf-8") as fh:
                session = import_session(json.load(fh))
            with self._mutex:
                self._sessions[session.id] = session
                self._locks[session.id] = threading.Lock()
            n += 1
        return n


def session_state(session: ProofSession) -> dict:
    goals = []
    constraints = []
    for i, e in enumerate(session.sigma_env):
        if isinstance(e, TermGoal):
            goals.append({
                "index": i, "kind": "term", "metavar": e.mv.name,
                "env": [[x, print_term(a)] for x, a in e.env],
                "env_compact": [[x, print_term(a, compact=True)] for x, a in e.env],
                "type": print_term(e.type),
                "type_compact": print_term(e.type, compact=True),
            })
        elif isinstance(e, ListGoal):
            goals.append({
                "index": i, "kind": "list", "metavar": e.mv.name,
                "env": [[x, print_term(a)] for x, a in e.env],
                "env_compact": [[x, print_term(a, compact=True)] for x, a in e.env],
                "stoup": print_term(e.stoup),
                "stoup_compact": print_term(e.stoup, compact=True),
                "type": print_term(e.type),
                "type_compact": print_term(e.type, compact=True),
            })
        else:
            constraints.append({
                "index": i,
                "env": [[x, print_term(a)] for x, a in e.env],
                "lhs": print_term(e.lhs),
                "rhs": print_term(e.rhs),
                "lhs_compact": print_term(e.lhs, compact=True),
                "rhs_compact": print_term(e.rhs, compact=True),
                "solved": is_solved_constraint(e, session.fuel) is Verdict.YES,
            })
    applicable = []
    for g in goals:
        for rule in applicable_rules(session, g["index"]):
            applicable.append({"goal_index": g["index"], **rule})
    return {
        "id": session.id,
        "spec": session.spec.to_dict(),
        "spec_name": session.spec_name,
        "root_env": [[x, print_term(a)] for x, a in session.root_env],
        "root_goal": print_term(session.root_goal),
        "goals": goals,
        "constraints": constraints,
        "partial_term": print_term(session.partial),
        "partial_term_compact": print_term(session.partial, compact=True),
        "bindings": [
            {"metavar": mv.name, "binders": list(b), "body": print_term(body)}
            for mv, b, body in session.bindings
        ],
        "status": session.status,
        "failure": session.failure,
        "history_length": len(session.history),
        "applicable": applicable,
    }


def create_app(store: Optional[SessionStore] = None, static_dir: Optional[str] = None) -> FastAPI:
    store = store or SessionStore()
    app = FastAPI(title="ptsc session service")
    app.state.store = store

    @app.exception_handler(SessionError)
    async def _session_error(_req, exc: SessionError):
        return JSONResponse(status_code=422, content={"error": exc.envelope})

    @app.get("/presets")
    def presets():
        return {name: spec.to_dict() for name, spec in PRESETS.items()}

    @app.post("/sessions")
    def new_session(payload: dict):
        spec = payload.get("preset") or payload.get("spec")
        if isinstance(spec, dict):
            from .presets import PtsSpec

            spec = PtsSpec.from_dict(spec)
        session = create_session(spec, payload.get("env", ""), payload.get("goal", ""))
        store.add(session)
        return {"id": session.id, "state": session_state(session)}

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        return session_state(store.get(sid))

    @app.post("/sessions/{sid}/actions")
    def post_action(sid: str, payload: dict):
        session = store.get(sid)
        action = payload.get("action", payload)
        with store.lock(sid):
            apply_action(session, action)
            store.snapshot(session)
        return session_state(session)

    @app.post("/sessions/{sid}/undo")
    def post_undo(sid: str):
        session = store.get(sid)
        with store.lock(sid):
            apply_action(session, {"type": "undo"})
            store.snapshot(session)
        return session_state(session)

    @app.post("/sessions/{sid}/auto")
    def post_auto(sid: str, payload: dict):
        session = store.get(sid)
        handle = uuid.uuid4().hex[:12]
        cancel_event = threading.Event()
        record = {"event": cancel_event, "done": False, "error": None, "session_id": sid}
        store._auto[handle] = record

        def run():
            try:
                with store.lock(sid):
                    apply_action(session, {
                        "type": "auto",
                        "strategy": payload.get("strategy", "lazy"),
                        "budget": payload.get("budget", 50_000),
                        "_cancel": cancel_event.is_set,
                    })
                    store.snapshot(session)
            except SessionError as e:
                record["error"] = e.envelope
            finally:
                record["done"] = True

        thread = threading.Thread(target=run, daemon=True)
        record["thread"] = thread
        thread.start()
        thread.join(timeout=payload.get("wait", 10.0))
        if record["done"]:
            del store._auto[handle]
            if record["error"]:
                return JSONResponse(status_code=422, content={"error": record["error"]})
            return session_state(session)
        return JSONResponse(status_code=202, content={"handle": handle})

    @app.get("/auto/{handle}")
    def auto_status(handle: str):
        record = store._auto.get(handle)
        if record is None:
            raise HTTPException(404, detail={"code": "no_such_handle", "message": handle})
        if not record["done"]:
            return {"status": "running"}
        sid = record["session_id"]
        del store._auto[handle]
        if record["error"]:
            return {"status": "finished", "error": record["error"]}
        return {"status": "finished", "state": session_state(store.get(sid))}

    @app.delete("/auto/{handle}")
    def auto_cancel(handle: str):
        record = store._auto.get(handle)
        if record is None:
            raise HTTPException(404, detail={"code": "no_such_handle", "message": handle})
        record["event"].set()
        record["thread"].join(timeout=30.0)
        return {"status": "cancelled" if record["done"] else "cancelling"}

    @app.get("/sessions/{sid}/export")
    def get_export(sid: str):
        return export_session(store.get(sid))

    @app.post("/sessions/import")
    def post_import(payload: dict):
        session = import_session(payload)
        store.add(session)
        return {"id": session.id}

    if static_dir:
        from fastapi.responses import RedirectResponse
        from fastapi.staticfiles import StaticFiles

        @app.get("/")
        def root():
            return RedirectResponse("/ui/")

        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
