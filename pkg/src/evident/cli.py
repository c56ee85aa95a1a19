"""Command-line front end.

Scriptable verbs over one workspace: mutations append events to the log,
reads replay it.  Exit codes: 0 success, 1 domain error (the error code is
printed to stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import algebra, engine, store
from .canonical import canonical_bytes
from .errors import EvidentError, MalformedInput
from .model import (
    Association,
    HYPOTHESIS,
    OBSERVATION,
    TEST,
    make_container,
)
from .workspace import Workspace, load_snapshot_source, resolve_id, resolve_workspace

EDGE_KIND_FLAGS = {
    "hypothesis": "hypothesis-edge",
    "observation": "observation-edge",
    "premise": "premise-edge",
}


def _short(cid: str) -> str:
    return cid[len("sha256:"):][:12] if cid.startswith("sha256:") else cid


def _emit(data: bytes, out: str | None) -> None:
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()


def _doc_bytes(doc: dict) -> bytes:
    return canonical_bytes(doc) + b"\n"


def _payload_from_args(args, extra: dict) -> dict:
    payload: dict = {}
    if args.payload:
        try:
            parsed = json.loads(args.payload)
        except json.JSONDecodeError as exc:
            raise MalformedInput(f"--payload is not valid JSON: {exc}") from exc
        if not isinstance(parsed, dict):
            raise MalformedInput("--payload must be a JSON object")
        payload.update(parsed)
    payload.update({k: v for k, v in extra.items() if v is not None})
    return payload


def _add_container(args, kind: str, payload: dict) -> int:
    ws = Workspace(resolve_workspace(args.workspace))
    container = make_container(
        kind, payload, period_tag=args.period_tag, labels=tuple(args.label or ())
    )
    if not ws.snapshot().has(container.id):
        event_payload = {"kind": kind, "payload": container.payload, "labels": list(container.labels)}
        if container.period_tag is not None:
            event_payload["period_tag"] = container.period_tag
        ws.append(store.ADD_CONTAINER, event_payload)
    print(container.id)
    return 0


def cmd_init(args) -> int:
    Workspace(resolve_workspace(args.workspace)).init()
    return 0


def cmd_add_hypothesis(args) -> int:
    return _add_container(args, HYPOTHESIS, _payload_from_args(args, {"text": args.text}))


def cmd_add_observation(args) -> int:
    extra = {"dataset": args.dataset, "digest": args.digest}
    return _add_container(args, OBSERVATION, _payload_from_args(args, extra))


def cmd_add_test(args) -> int:
    extra = {
        "method": args.method,
        "metric": args.metric,
        "strategy": args.strategy,
        "outcome": args.outcome,
        "confidence": args.confidence,
    }
    return _add_container(args, TEST, _payload_from_args(args, extra))


def cmd_link(args) -> int:
    ws = Workspace(resolve_workspace(args.workspace))
    snapshot = ws.snapshot()
    source = resolve_id(snapshot, args.src)
    target = resolve_id(snapshot, args.dst)
    kind = EDGE_KIND_FLAGS[args.kind]
    if Association(source=source, target=target, kind=kind) not in snapshot.associations:
        ws.append(store.ADD_ASSOCIATION, {"source": source, "target": target, "kind": kind})
    return 0


def cmd_set_winner(args) -> int:
    ws = Workspace(resolve_workspace(args.workspace))
    snapshot = ws.snapshot()
    test = resolve_id(snapshot, args.test)
    hypothesis = resolve_id(snapshot, args.hypothesis)
    if snapshot.winners.get(test) != hypothesis:
        ws.append(store.SET_WINNER, {"test": test, "hypothesis": hypothesis})
    return 0


def cmd_promote(args) -> int:
    ws = Workspace(resolve_workspace(args.workspace))
    snapshot = ws.snapshot()
    test = resolve_id(snapshot, args.test)
    observation = resolve_id(snapshot, args.observation)
    payload = {"test": test, "observation": observation, "outcome": args.outcome}
    if args.confidence is not None:
        payload["confidence"] = args.confidence
    event = ws.append(store.ATTACH_OBSERVATION, payload)
    successor = engine.promoted_test(
        snapshot.containers[test], args.outcome, args.confidence, created_at=event.timestamp
    )
    print(successor.id)
    return 0


def cmd_grid(args) -> int:
    snapshot = Workspace(resolve_workspace(args.workspace)).snapshot()
    grid = engine.grid_view(snapshot)
    if args.transpose:
        grid = algebra.permute(grid)
    if args.format == "csv":
        _emit(engine.grid_to_csv(grid, snapshot).encode("utf-8"), args.out)
    elif args.format == "canonical":
        _emit(_doc_bytes(engine.grid_doc(grid, snapshot)), args.out)
    else:
        _emit(_grid_table(grid, snapshot).encode("utf-8"), args.out)
    return 0


def _grid_table(grid, snapshot) -> str:
    header = [""] + [_short(c) for c in grid.columns]
    body = []
    for row in grid.rows:
        cells = []
        for col in grid.columns:
            tests = grid.cells.get((row, col), ())
            if tests:
                cells.append(
                    ";".join(f"{_short(t)}|{snapshot.containers[t].outcome() or ''}" for t in tests)
                )
            else:
                cells.append("TBD")
        body.append([_short(row)] + cells)
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    lines = []
    for r in [header] + body:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(r)).rstrip())
    return "\n".join(lines) + "\n"


def cmd_status(args) -> int:
    snapshot = Workspace(resolve_workspace(args.workspace)).snapshot()
    if args.hypothesis:
        statuses = [engine.hypothesis_status(snapshot, resolve_id(snapshot, args.hypothesis))]
    else:
        statuses = [
            engine.hypothesis_status(snapshot, c.id) for c in snapshot.of_kind(HYPOTHESIS)
        ]
    if args.format == "canonical":
        if args.hypothesis:
            _emit(_doc_bytes(engine.status_doc(statuses[0])), args.out)
        else:
            _emit(
                _doc_bytes({"statuses": [engine.status_doc(s) for s in statuses]}), args.out
            )
    else:
        lines = [
            f"{_short(s.hypothesis)}  {s.summary}  ({len(s.per_test)} tests)" for s in statuses
        ]
        _emit(("\n".join(lines) + "\n").encode("utf-8") if lines else b"", args.out)
    return 0


def cmd_backlog(args) -> int:
    snapshot = Workspace(resolve_workspace(args.workspace)).snapshot()
    entries = engine.backlog(snapshot)
    if args.format == "canonical":
        _emit(_doc_bytes(engine.backlog_doc(entries)), args.out)
    else:
        lines = []
        for e in entries:
            test = f"  test={_short(e.test)}" if e.test else ""
            period = f"  period={e.period_tag}" if e.period_tag else ""
            lines.append(f"{e.kind}  ({_short(e.row)}, {_short(e.column)}){test}{period}")
        _emit(("\n".join(lines) + "\n").encode("utf-8") if lines else b"", args.out)
    return 0


def cmd_report(args) -> int:
    snapshot = Workspace(resolve_workspace(args.workspace)).snapshot()
    report = engine.knowledge_report(snapshot, resolve_id(snapshot, args.test))
    if args.format == "canonical":
        _emit(_doc_bytes(engine.report_doc(report)), args.out)
    else:
        _emit(engine.render_report_markdown(report).encode("utf-8"), args.out)
    return 0


def cmd_export(args) -> int:
    snapshot = Workspace(resolve_workspace(args.workspace)).snapshot()
    _emit(store.serialize_snapshot(snapshot) + b"\n", args.out)
    return 0


def cmd_verify(args) -> int:
    report = Workspace(resolve_workspace(args.workspace)).verify()
    doc: dict = {"events": report.events, "ok": report.ok}
    if report.first_bad_seq is not None:
        doc["first_bad_seq"] = report.first_bad_seq
    if args.format == "canonical":
        _emit(_doc_bytes(doc), args.out)
    elif report.ok:
        print(f"ok: {report.events} events, chain verified")
    else:
        print(f"corrupt: chain breaks at seq {report.first_bad_seq}")
    return 0 if report.ok else 1


def cmd_join(args) -> int:
    snapshot = Workspace(resolve_workspace(args.workspace)).snapshot()
    other = load_snapshot_source(args.source)
    _emit(store.serialize_snapshot(algebra.join(snapshot, other)) + b"\n", args.out)
    return 0


def _split_ids(values) -> list[str]:
    refs = []
    for value in values or ():
        refs.extend(part for part in value.split(",") if part)
    return refs


def cmd_restrict(args) -> int:
    snapshot = Workspace(resolve_workspace(args.workspace)).snapshot()
    rows = {resolve_id(snapshot, ref) for ref in _split_ids(args.rows)}
    _emit(store.serialize_snapshot(algebra.restrict(snapshot, rows)) + b"\n", args.out)
    return 0


def cmd_project(args) -> int:
    snapshot = Workspace(resolve_workspace(args.workspace)).snapshot()
    cols = {resolve_id(snapshot, ref) for ref in _split_ids(args.cols)}
    _emit(store.serialize_snapshot(algebra.project(snapshot, cols)) + b"\n", args.out)
    return 0


def cmd_compose(args) -> int:
    try:
        spec = json.loads(args.parts)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"--parts is not valid JSON: {exc}") from exc
    if not isinstance(spec, list):
        raise MalformedInput("--parts must be a JSON list of parts")
    parts = []
    for i, entry in enumerate(spec):
        if not isinstance(entry, dict) or "source" not in entry:
            raise MalformedInput(f"part {i} must be an object with a 'source' path")
        snapshot = load_snapshot_source(entry["source"])
        rows = entry.get("rows")
        cols = entry.get("cols")
        if rows is not None:
            rows = {resolve_id(snapshot, ref) for ref in rows}
        if cols is not None:
            cols = {resolve_id(snapshot, ref) for ref in cols}
        parts.append((snapshot, rows, cols))
    _emit(store.serialize_snapshot(algebra.compose(parts)) + b"\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evident",
        description="Append-only knowledge base: hypotheses, observations, tests.",
    )
    parser.add_argument(
        "--workspace",
        help="workspace directory (default: $EVIDENT_WORKSPACE or the current directory)",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=fn)
        return p

    add("init", cmd_init, help="create an empty workspace log")

    p = add("add-hypothesis", cmd_add_hypothesis, help="register a hypothesis container")
    p.add_argument("--text", help="shorthand for payload {'text': ...}")
    _container_flags(p)

    p = add("add-observation", cmd_add_observation, help="register an observation container")
    p.add_argument("--dataset", help="shorthand payload field")
    p.add_argument("--digest", help="shorthand payload field (external artifact digest)")
    _container_flags(p)

    p = add("add-test", cmd_add_test, help="register a test container")
    p.add_argument("--method", help="evaluation procedure description")
    p.add_argument("--metric", help="cost function or score name")
    p.add_argument("--strategy", help="observation usage strategy")
    p.add_argument("--outcome", choices=["proved", "disproved", "overlooked", "pending"])
    p.add_argument("--confidence", type=float)
    _container_flags(p)

    p = add("link", cmd_link, help="associate a container with a test")
    p.add_argument("--from", dest="src", required=True)
    p.add_argument("--to", dest="dst", required=True)
    p.add_argument("--kind", choices=sorted(EDGE_KIND_FLAGS), required=True)

    p = add("set-winner", cmd_set_winner, help="designate the best-explaining hypothesis")
    p.add_argument("--test", required=True)
    p.add_argument("--hypothesis", required=True)

    p = add("promote", cmd_promote, help="attach an observation to a deduction test")
    p.add_argument("--test", required=True)
    p.add_argument("--observation", required=True)
    p.add_argument("--outcome", choices=["proved", "disproved", "overlooked"], required=True)
    p.add_argument("--confidence", type=float)

    p = add("grid", cmd_grid, help="hypothesis x observation grid")
    p.add_argument("--format", choices=["table", "csv", "canonical"], default="table")
    p.add_argument("--transpose", action="store_true", help="swap rows and columns")
    p.add_argument("--out")

    p = add("status", cmd_status, help="hypothesis outcome roll-up")
    p.add_argument("--hypothesis")
    p.add_argument("--format", choices=["table", "canonical"], default="table")
    p.add_argument("--out")

    p = add("backlog", cmd_backlog, help="TBD cells and pending deductions")
    p.add_argument("--format", choices=["table", "canonical"], default="table")
    p.add_argument("--out")

    p = add("report", cmd_report, help="knowledge report for one test")
    p.add_argument("--test", required=True)
    p.add_argument("--format", choices=["markdown", "canonical"], default="markdown")
    p.add_argument("--out")

    p = add("export", cmd_export, help="canonical snapshot document (.ekb)")
    p.add_argument("--out")

    p = add("join", cmd_join, help="lossless union with another knowledge base")
    p.add_argument("--with", dest="source", required=True, help="workspace dir, .ekblog or .ekb")
    p.add_argument("--out")

    p = add("restrict", cmd_restrict, help="keep selected hypothesis rows")
    p.add_argument("--rows", action="append", required=True, help="comma-separated ids/prefixes")
    p.add_argument("--out")

    p = add("project", cmd_project, help="keep selected observation columns")
    p.add_argument("--cols", action="append", required=True, help="comma-separated ids/prefixes")
    p.add_argument("--out")

    p = add("compose", cmd_compose, help="join selected rows/columns of several sources")
    p.add_argument(
        "--parts",
        required=True,
        help='JSON list: [{"source": path, "rows": [...], "cols": [...]}, ...]',
    )
    p.add_argument("--out")

    p = add("verify", cmd_verify, help="check the hash chain of the stored log")
    p.add_argument("--format", choices=["table", "canonical"], default="table")
    p.add_argument("--out")

    return parser


def _container_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--payload", help="JSON object merged under any shorthand flags")
    p.add_argument("--period-tag", dest="period_tag")
    p.add_argument("--label", action="append")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EvidentError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
