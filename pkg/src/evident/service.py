"""HTTP/JSON facade over one workspace.

Thin by design: every endpoint delegates to the same operations the CLI
uses, mutations append events, reads replay the log, and every JSON
response is in canonical form (byte-identical to `--format canonical` CLI
output for the same state).
"""

from __future__ import annotations

import argparse
import threading

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from . import algebra, engine, store
from .canonical import canonical_bytes, canonical_json
from .errors import (
    DanglingReference,
    EvidentError,
    MalformedInput,
    SingleObservationViolation,
    UnknownHypothesis,
    UnknownId,
    UnknownObservation,
    ValidationRejected,
    WinnerConflict,
)
from .model import Association, make_container
from .workspace import Workspace, resolve_id, resolve_workspace

DEFAULT_PORT = 8787

_NOT_FOUND = (DanglingReference, UnknownId, UnknownHypothesis, UnknownObservation)
_CONFLICT = (SingleObservationViolation, WinnerConflict)


def _status_for(exc: EvidentError) -> int:
    cause = exc.cause if isinstance(exc, ValidationRejected) else exc
    if isinstance(cause, _NOT_FOUND):
        return 404
    if isinstance(cause, _CONFLICT):
        return 409
    return 400


def _canonical(doc: dict, status_code: int = 200) -> Response:
    return Response(
        content=canonical_bytes(doc) + b"\n",
        media_type="application/json",
        status_code=status_code,
    )


async def _body(request: Request) -> dict:
    try:
        doc = await request.json()
    except Exception as exc:
        raise MalformedInput(f"request body is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedInput("request body must be a JSON object")
    return doc


def create_app(workspace: Workspace) -> FastAPI:
    app = FastAPI(title="evident", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    write_lock = threading.Lock()

    if not workspace.exists():
        workspace.root.mkdir(parents=True, exist_ok=True)
        workspace.log_path.touch()

    @app.exception_handler(EvidentError)
    async def _domain_error(request: Request, exc: EvidentError):
        cause = exc.cause if isinstance(exc, ValidationRejected) else exc
        doc = {"code": cause.code, "message": str(cause), "ids": list(cause.ids)}
        return _canonical(doc, _status_for(exc))

    @app.post("/containers")
    async def post_container(request: Request):
        body = await _body(request)
        container = make_container(
            kind=body.get("kind"),
            payload=body.get("payload"),
            period_tag=body.get("period_tag"),
            labels=tuple(body.get("labels", ())),
        )
        with write_lock:
            if workspace.snapshot().has(container.id):
                return _canonical({"id": container.id}, 200)
            payload = {
                "kind": container.kind,
                "payload": container.payload,
                "labels": list(container.labels),
            }
            if container.period_tag is not None:
                payload["period_tag"] = container.period_tag
            workspace.append(store.ADD_CONTAINER, payload)
        return _canonical({"id": container.id}, 201)

    @app.post("/associations")
    async def post_association(request: Request):
        body = await _body(request)
        kind = body.get("kind")
        if kind not in ("hypothesis-edge", "observation-edge", "premise-edge"):
            raise MalformedInput(f"unknown edge kind {kind!r}")
        with write_lock:
            snapshot = workspace.snapshot()
            source = resolve_id(snapshot, str(body.get("source", "")))
            target = resolve_id(snapshot, str(body.get("target", "")))
            doc = {"kind": kind, "source": source, "target": target}
            if Association(source=source, target=target, kind=kind) in snapshot.associations:
                return _canonical(doc, 200)
            workspace.append(store.ADD_ASSOCIATION, doc)
        return _canonical(doc, 201)

    @app.post("/tests/{test_ref}/winner")
    async def post_winner(test_ref: str, request: Request):
        body = await _body(request)
        with write_lock:
            snapshot = workspace.snapshot()
            test = resolve_id(snapshot, test_ref)
            hypothesis = resolve_id(snapshot, str(body.get("hypothesis", "")))
            if snapshot.winners.get(test) != hypothesis:
                workspace.append(store.SET_WINNER, {"test": test, "hypothesis": hypothesis})
        return _canonical({"test": test, "hypothesis": hypothesis}, 200)

    @app.post("/tests/{test_ref}/observation")
    async def post_observation(test_ref: str, request: Request):
        body = await _body(request)
        outcome = body.get("outcome")
        confidence = body.get("confidence")
        with write_lock:
            snapshot = workspace.snapshot()
            test = resolve_id(snapshot, test_ref)
            events: list[tuple[str, dict]] = []
            if "observation_payload" in body:
                obs = make_container(
                    kind="Observation",
                    payload=body.get("observation_payload"),
                    period_tag=body.get("period_tag"),
                    labels=tuple(body.get("labels", ())),
                )
                observation = obs.id
                if not snapshot.has(obs.id):
                    payload = {
                        "kind": obs.kind,
                        "payload": obs.payload,
                        "labels": list(obs.labels),
                    }
                    if obs.period_tag is not None:
                        payload["period_tag"] = obs.period_tag
                    events.append((store.ADD_CONTAINER, payload))
            else:
                observation = resolve_id(snapshot, str(body.get("observation", "")))
            attach: dict = {"test": test, "observation": observation, "outcome": outcome}
            if confidence is not None:
                attach["confidence"] = confidence
            events.append((store.ATTACH_OBSERVATION, attach))
            appended = workspace.append_many(events)
            successor = engine.promoted_test(
                snapshot.containers[test], outcome, confidence, created_at=appended[-1].timestamp
            )
        return _canonical(
            {"test": test, "observation": observation, "successor": successor.id}, 201
        )

    @app.get("/grid")
    async def get_grid():
        snapshot = workspace.snapshot()
        return _canonical(engine.grid_doc(engine.grid_view(snapshot), snapshot))

    @app.get("/hypotheses/{hyp_ref}/status")
    async def get_status(hyp_ref: str):
        snapshot = workspace.snapshot()
        status = engine.hypothesis_status(snapshot, resolve_id(snapshot, hyp_ref))
        return _canonical(engine.status_doc(status))

    @app.get("/backlog")
    async def get_backlog():
        snapshot = workspace.snapshot()
        return _canonical(engine.backlog_doc(engine.backlog(snapshot)))

    @app.get("/tests/{test_ref}/report")
    async def get_report(test_ref: str, format: str = "canonical"):
        snapshot = workspace.snapshot()
        report = engine.knowledge_report(snapshot, resolve_id(snapshot, test_ref))
        if format == "markdown":
            return Response(
                content=engine.render_report_markdown(report), media_type="text/markdown"
            )
        return _canonical(engine.report_doc(report))

    @app.get("/verify")
    async def get_verify():
        report = workspace.verify()
        doc: dict = {"events": report.events, "ok": report.ok}
        if report.first_bad_seq is not None:
            doc["first_bad_seq"] = report.first_bad_seq
        return _canonical(doc)

    @app.post("/algebra/join")
    async def post_join(request: Request):
        body = await _body(request)
        other = store.deserialize_snapshot(canonical_json(body.get("other")))
        joined = algebra.join(workspace.snapshot(), other)
        return _canonical(store.snapshot_doc(joined))

    @app.post("/algebra/restrict")
    async def post_restrict(request: Request):
        body = await _body(request)
        snapshot = workspace.snapshot()
        rows = {resolve_id(snapshot, ref) for ref in _ref_list(body, "rows")}
        return _canonical(store.snapshot_doc(algebra.restrict(snapshot, rows)))

    @app.post("/algebra/project")
    async def post_project(request: Request):
        body = await _body(request)
        snapshot = workspace.snapshot()
        cols = {resolve_id(snapshot, ref) for ref in _ref_list(body, "cols")}
        return _canonical(store.snapshot_doc(algebra.project(snapshot, cols)))

    @app.post("/algebra/compose")
    async def post_compose(request: Request):
        body = await _body(request)
        spec = body.get("parts")
        if not isinstance(spec, list):
            raise MalformedInput("'parts' must be a list")
        parts = []
        for entry in spec:
            if not isinstance(entry, dict):
                raise MalformedInput("each part must be an object")
            if "snapshot" in entry and entry["snapshot"] is not None:
                snapshot = store.deserialize_snapshot(canonical_json(entry["snapshot"]))
            else:
                snapshot = workspace.snapshot()
            rows = entry.get("rows")
            cols = entry.get("cols")
            if rows is not None:
                rows = {resolve_id(snapshot, ref) for ref in rows}
            if cols is not None:
                cols = {resolve_id(snapshot, ref) for ref in cols}
            parts.append((snapshot, rows, cols))
        return _canonical(store.snapshot_doc(algebra.compose(parts)))

    return app


def _ref_list(body: dict, key: str) -> list[str]:
    refs = body.get(key)
    if not isinstance(refs, list) or not all(isinstance(r, str) for r in refs):
        raise MalformedInput(f"'{key}' must be a list of id strings")
    return refs


def main(argv=None) -> int:
    import uvicorn

    parser = argparse.ArgumentParser(prog="evident-service")
    parser.add_argument("--workspace", help="workspace directory")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=DEFAULT_PORT)
    args = parser.parse_args(argv)
    app = create_app(Workspace(resolve_workspace(args.workspace)))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    main()
