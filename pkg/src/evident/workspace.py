"""Workspace handling: one directory, one log, one writer at a time.

The workspace directory holds the append-only ``evident.ekblog``; an
advisory flock on ``.evident.lock`` serializes writers while readers replay
freely.  Also hosts id-prefix resolution and snapshot loading for algebra
inputs (either another log or an exported ``.ekb`` document).
"""

from __future__ import annotations

import fcntl
import os
from contextlib import contextmanager
from pathlib import Path

from .canonical import is_container_id
from .errors import AmbiguousId, MalformedInput, UnknownId
from .model import Snapshot, validate
from .store import (
    LOG_SUFFIX,
    Event,
    EventLog,
    SNAPSHOT_SUFFIX,
    VerificationReport,
    append_event,
    deserialize_snapshot,
    event_line,
    log_from_bytes,
    replay,
    verify_log_bytes,
)

LOG_NAME = "evident" + LOG_SUFFIX
LOCK_NAME = ".evident.lock"
ENV_WORKSPACE = "EVIDENT_WORKSPACE"

MIN_PREFIX = 8


def resolve_workspace(path: str | None) -> Path:
    if path:
        return Path(path)
    env = os.environ.get(ENV_WORKSPACE)
    if env:
        return Path(env)
    return Path.cwd()


class Workspace:
    def __init__(self, root: Path | str):
        self.root = Path(root)

    @property
    def log_path(self) -> Path:
        return self.root / LOG_NAME

    def exists(self) -> bool:
        return self.log_path.is_file()

    def init(self) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        if self.exists():
            raise MalformedInput(f"workspace already initialized: {self.log_path}")
        self.log_path.touch()
        return self.log_path

    def load(self) -> EventLog:
        if not self.exists():
            raise MalformedInput(f"no workspace log at {self.log_path}")
        return log_from_bytes(self.log_path.read_bytes())

    def snapshot(self) -> Snapshot:
        return replay(self.load())

    def verify(self) -> VerificationReport:
        if not self.exists():
            raise MalformedInput(f"no workspace log at {self.log_path}")
        return verify_log_bytes(self.log_path.read_bytes())

    @contextmanager
    def locked(self):
        self.root.mkdir(parents=True, exist_ok=True)
        with open(self.root / LOCK_NAME, "w") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            try:
                yield
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)

    def append(self, kind: str, payload: dict, timestamp: int | None = None) -> Event:
        """Validate and durably append one event; returns it."""
        return self.append_many([(kind, payload)], timestamp=timestamp)[0]

    def append_many(
        self, items: list[tuple[str, dict]], timestamp: int | None = None
    ) -> list[Event]:
        """Append several events under one lock; all validated, all or none."""
        with self.locked():
            log = self.load()
            appended: list[Event] = []
            for kind, payload in items:
                log = append_event(log, kind, payload, timestamp=timestamp)
                appended.append(log.events[-1])
            with open(self.log_path, "ab") as fh:
                for event in appended:
                    fh.write(event_line(event).encode("utf-8") + b"\n")
        return appended


def resolve_id(snapshot: Snapshot, ref: str) -> str:
    """Accept a full container id or an unambiguous hex prefix (>= 8 chars)."""
    if is_container_id(ref):
        if not snapshot.has(ref):
            raise UnknownId(f"unknown container {ref}", ref)
        return ref
    prefix = ref[len("sha256:"):] if ref.startswith("sha256:") else ref
    if len(prefix) < MIN_PREFIX or not all(c in "0123456789abcdef" for c in prefix):
        raise UnknownId(f"not an id or hex prefix of >= {MIN_PREFIX} chars: {ref!r}")
    matches = [cid for cid in snapshot.containers if cid[len("sha256:"):].startswith(prefix)]
    if not matches:
        raise UnknownId(f"no container matches prefix {ref!r}")
    if len(matches) > 1:
        raise AmbiguousId(f"prefix {ref!r} matches {len(matches)} containers", *sorted(matches))
    return matches[0]


def load_snapshot_source(path: str | Path) -> Snapshot:
    """Snapshot from a workspace dir, an .ekblog, or an exported .ekb file."""
    p = Path(path)
    if p.is_dir():
        return Workspace(p).snapshot()
    if not p.is_file():
        raise MalformedInput(f"no such snapshot source: {p}")
    if p.suffix == SNAPSHOT_SUFFIX:
        snapshot = deserialize_snapshot(p.read_bytes())
        violations = validate(snapshot)
        if violations:
            raise MalformedInput(f"snapshot {p} is invalid: {violations[0]}")
        return snapshot
    return replay(log_from_bytes(p.read_bytes()))
