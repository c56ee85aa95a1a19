"""Append-only, hash-chained event log and canonical snapshot exchange.

The log is the source of truth: every mutation is an event, each event's
hash covers its predecessor's hash, and snapshots are deterministic replays.
One log per knowledge base; the stored form is newline-delimited canonical
JSON (`.ekblog`), snapshots export to a single canonical document (`.ekb`).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import Any

from .canonical import (
    GENESIS_HASH,
    canonical_bytes,
    canonical_json,
    check_tree,
    event_hash,
)
from .engine import attach_observation
from .errors import (
    ChainCorrupt,
    EvidentError,
    MalformedInput,
    ValidationRejected,
    WinnerConflict,
)
from .model import (
    Association,
    Container,
    Snapshot,
    check_winner,
    make_association,
    make_container,
    validate,
)

ADD_CONTAINER = "AddContainer"
ADD_ASSOCIATION = "AddAssociation"
SET_WINNER = "SetWinner"
ATTACH_OBSERVATION = "AttachObservation"
EVENT_KINDS = (ADD_CONTAINER, ADD_ASSOCIATION, SET_WINNER, ATTACH_OBSERVATION)

LOG_SUFFIX = ".ekblog"
SNAPSHOT_SUFFIX = ".ekb"


@dataclass(frozen=True)
class Event:
    seq: int
    timestamp: int
    kind: str
    payload: dict
    prev_hash: str
    hash: str


@dataclass(frozen=True)
class EventLog:
    events: tuple[Event, ...] = ()

    def __len__(self) -> int:
        return len(self.events)

    @property
    def head_hash(self) -> str:
        return self.events[-1].hash if self.events else GENESIS_HASH


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    events: int
    first_bad_seq: int | None = None


def _need(payload: dict, key: str, types: type | tuple) -> Any:
    value = payload.get(key)
    if not isinstance(value, types) or isinstance(value, bool):
        raise MalformedInput(f"event payload field {key!r} missing or mistyped")
    return value


def apply_event(snapshot: Snapshot, event: Event) -> Snapshot:
    """Apply one event through the validating constructors.

    Re-adding an identical container, association, or winner is a no-op, so
    replay is stable under idempotent re-registration.
    """
    payload = event.payload
    if event.kind == ADD_CONTAINER:
        c = make_container(
            kind=_need(payload, "kind", str),
            payload=_need(payload, "payload", dict),
            period_tag=payload.get("period_tag"),
            labels=tuple(_need(payload, "labels", list)),
            created_at=event.timestamp,
        )
        if snapshot.has(c.id):
            return snapshot
        return snapshot.with_container(c)
    if event.kind == ADD_ASSOCIATION:
        candidate = Association(
            source=_need(payload, "source", str),
            target=_need(payload, "target", str),
            kind=_need(payload, "kind", str),
        )
        if candidate in snapshot.associations:
            return snapshot
        return snapshot.with_association(
            make_association(snapshot, candidate.source, candidate.target, candidate.kind)
        )
    if event.kind == SET_WINNER:
        test = _need(payload, "test", str)
        hypothesis = _need(payload, "hypothesis", str)
        check_winner(snapshot, test, hypothesis)
        current = snapshot.winners.get(test)
        if current == hypothesis:
            return snapshot
        if current is not None:
            raise WinnerConflict(
                f"test {test} already has winner {current}", test, current, hypothesis
            )
        return snapshot.with_winner(test, hypothesis)
    if event.kind == ATTACH_OBSERVATION:
        confidence = payload.get("confidence")
        return attach_observation(
            snapshot,
            test=_need(payload, "test", str),
            observation=_need(payload, "observation", str),
            outcome=_need(payload, "outcome", str),
            confidence=confidence,
            created_at=event.timestamp,
        )
    raise MalformedInput(f"unknown event kind {event.kind!r}")


def verify_log(log: EventLog) -> VerificationReport:
    """Walk the chain; report the smallest seq at which it breaks."""
    prev = GENESIS_HASH
    for i, e in enumerate(log.events):
        ok = (
            e.seq == i
            and isinstance(e.timestamp, int)
            and e.kind in EVENT_KINDS
            and isinstance(e.payload, dict)
            and e.prev_hash == prev
            and e.hash == event_hash(e.seq, e.timestamp, e.kind, e.payload, e.prev_hash)
        )
        if not ok:
            return VerificationReport(ok=False, events=len(log.events), first_bad_seq=i)
        prev = e.hash
    return VerificationReport(ok=True, events=len(log.events))


def replay(log: EventLog) -> Snapshot:
    """Deterministically rebuild the snapshot; identical logs, identical state."""
    report = verify_log(log)
    if not report.ok:
        raise ChainCorrupt(f"event chain breaks at seq {report.first_bad_seq}")
    snapshot = Snapshot.empty()
    for event in log.events:
        snapshot = apply_event(snapshot, event)
    return snapshot


def append_event(
    log: EventLog,
    kind: str,
    payload: dict,
    timestamp: int | None = None,
    snapshot: Snapshot | None = None,
) -> EventLog:
    """Extend the log by one validated event; rejection leaves it untouched.

    `snapshot` may carry a pre-replayed state for the existing log to avoid
    replaying twice; it must equal replay(log).
    """
    report = verify_log(log)
    if not report.ok:
        raise ChainCorrupt(f"event chain breaks at seq {report.first_bad_seq}")
    if kind not in EVENT_KINDS:
        raise ValidationRejected(MalformedInput(f"unknown event kind {kind!r}"))
    try:
        check_tree(payload, "event payload")
    except EvidentError as exc:
        raise ValidationRejected(exc) from exc
    payload = json.loads(canonical_json(payload))
    seq = len(log.events)
    ts = int(time.time()) if timestamp is None else int(timestamp)
    prev = log.head_hash
    event = Event(
        seq=seq,
        timestamp=ts,
        kind=kind,
        payload=payload,
        prev_hash=prev,
        hash=event_hash(seq, ts, kind, payload, prev),
    )
    if snapshot is None:
        snapshot = Snapshot.empty()
        for e in log.events:
            snapshot = apply_event(snapshot, e)
    try:
        after = apply_event(snapshot, event)
    except EvidentError as exc:
        raise ValidationRejected(exc) from exc
    violations = validate(after)
    if violations:
        raise ValidationRejected(MalformedInput(f"event leaves snapshot invalid: {violations[0]}"))
    return EventLog(events=log.events + (event,))


# --- stored form -----------------------------------------------------------

def event_line(event: Event) -> str:
    return canonical_json(
        {
            "hash": event.hash,
            "kind": event.kind,
            "payload": event.payload,
            "prev_hash": event.prev_hash,
            "seq": event.seq,
            "timestamp": event.timestamp,
        }
    )


def _parse_event_line(raw: bytes) -> Event:
    try:
        text = raw.decode("utf-8")
        doc = json.loads(text)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"unparseable event record: {exc}") from exc
    if not isinstance(doc, dict) or set(doc) != {
        "hash", "kind", "payload", "prev_hash", "seq", "timestamp",
    }:
        raise MalformedInput("event record has wrong shape")
    event = Event(
        seq=_need(doc, "seq", int),
        timestamp=_need(doc, "timestamp", int),
        kind=_need(doc, "kind", str),
        payload=_need(doc, "payload", dict),
        prev_hash=_need(doc, "prev_hash", str),
        hash=_need(doc, "hash", str),
    )
    if text != event_line(event):
        raise MalformedInput("event record is not in canonical form")
    return event


def log_to_bytes(log: EventLog) -> bytes:
    return b"".join(event_line(e).encode("utf-8") + b"\n" for e in log.events)


def log_from_bytes(data: bytes) -> EventLog:
    """Strict parse of a stored log; raises on the first bad record."""
    if data == b"":
        return EventLog()
    lines = data.split(b"\n")
    trailer = lines.pop()
    if trailer != b"":
        raise MalformedInput(f"log record {len(lines)} is truncated")
    events = []
    for i, raw in enumerate(lines):
        try:
            events.append(_parse_event_line(raw))
        except MalformedInput as exc:
            raise MalformedInput(f"log record {i}: {exc}") from exc
    return EventLog(events=tuple(events))


# Record-content verdicts keyed by raw line bytes: None for a malformed
# record, else (seq, prev_hash, hash) once every content-local check passed
# (canonical form, shape, kind, recomputed hash).  Purely derived from the
# bytes, so caching is semantically transparent; it makes sweeping many
# near-identical copies of one log (tamper checks) cheap.
_RECORD_VERDICTS: dict[bytes, tuple[int, str, str] | None] = {}
_RECORD_VERDICTS_MAX = 65536


def _record_verdict(raw: bytes) -> tuple[int, str, str] | None:
    if raw in _RECORD_VERDICTS:
        return _RECORD_VERDICTS[raw]
    verdict: tuple[int, str, str] | None
    try:
        e = _parse_event_line(raw)
        ok = (
            e.kind in EVENT_KINDS
            and e.hash == event_hash(e.seq, e.timestamp, e.kind, e.payload, e.prev_hash)
        )
        verdict = (e.seq, e.prev_hash, e.hash) if ok else None
    except MalformedInput:
        verdict = None
    if len(_RECORD_VERDICTS) >= _RECORD_VERDICTS_MAX:
        _RECORD_VERDICTS.clear()
    _RECORD_VERDICTS[raw] = verdict
    return verdict


def verify_log_bytes(data: bytes) -> VerificationReport:
    """Tamper check of the stored form; corruption is the report, not an error.

    Any byte-level deviation from canonical records counts as corruption at
    the first record it touches.
    """
    if data == b"":
        return VerificationReport(ok=True, events=0)
    lines = data.split(b"\n")
    trailer = lines.pop()
    prev = GENESIS_HASH
    for i, raw in enumerate(lines):
        verdict = _record_verdict(raw)
        if verdict is None or verdict[0] != i or verdict[1] != prev:
            return VerificationReport(ok=False, events=len(lines), first_bad_seq=i)
        prev = verdict[2]
    if trailer != b"":
        return VerificationReport(ok=False, events=len(lines) + 1, first_bad_seq=len(lines))
    return VerificationReport(ok=True, events=len(lines))


# --- snapshot exchange ------------------------------------------------------

def snapshot_doc(snapshot: Snapshot) -> dict:
    containers = {}
    for c in snapshot.containers.values():
        record: dict[str, Any] = {
            "created_at": c.created_at,
            "kind": c.kind,
            "labels": list(c.labels),
            "payload": c.payload,
        }
        if c.period_tag is not None:
            record["period_tag"] = c.period_tag
        containers[c.id] = record
    associations = [
        {"kind": a.kind, "source": a.source, "target": a.target}
        for a in sorted(snapshot.associations, key=lambda a: (a.source, a.target, a.kind))
    ]
    return {
        "associations": associations,
        "containers": containers,
        "winners": dict(snapshot.winners),
    }


def serialize_snapshot(snapshot: Snapshot) -> bytes:
    """Canonical bytes; snapshot equality is byte equality of this form."""
    return canonical_bytes(snapshot_doc(snapshot))


def deserialize_snapshot(data: bytes | str) -> Snapshot:
    try:
        doc = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"unparseable snapshot document: {exc}") from exc
    if not isinstance(doc, dict) or set(doc) != {"associations", "containers", "winners"}:
        raise MalformedInput("snapshot document has wrong shape")
    if not isinstance(doc["containers"], dict) or not isinstance(doc["associations"], list):
        raise MalformedInput("snapshot document has wrong shape")
    if not isinstance(doc["winners"], dict):
        raise MalformedInput("snapshot document has wrong shape")
    containers: dict[str, Container] = {}
    for cid in sorted(doc["containers"]):
        record = doc["containers"][cid]
        if not isinstance(record, dict):
            raise MalformedInput(f"container record {cid} is not a map")
        try:
            c = make_container(
                kind=record.get("kind"),
                payload=record.get("payload"),
                period_tag=record.get("period_tag"),
                labels=tuple(record.get("labels", ())),
                created_at=_need(record, "created_at", int),
            )
        except EvidentError as exc:
            raise MalformedInput(f"container record {cid}: {exc}") from exc
        if c.id != cid:
            raise MalformedInput(f"container {cid} does not match its content address")
        containers[c.id] = c
    associations = set()
    for entry in doc["associations"]:
        if not isinstance(entry, dict) or set(entry) != {"kind", "source", "target"}:
            raise MalformedInput("association record has wrong shape")
        associations.add(
            Association(
                source=_need(entry, "source", str),
                target=_need(entry, "target", str),
                kind=_need(entry, "kind", str),
            )
        )
    winners = {}
    for test, hyp in doc["winners"].items():
        if not isinstance(test, str) or not isinstance(hyp, str):
            raise MalformedInput("winner record has wrong shape")
        winners[test] = hyp
    return Snapshot(containers=containers, associations=frozenset(associations), winners=winners)

