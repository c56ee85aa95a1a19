"""Canonical serialization and content addressing.

Everything persisted or hashed goes through ``canonical_json``: UTF-8, keys
sorted by code point, no insignificant whitespace, base-10 integers, floats
in shortest round-trip form, no NaN/Infinity.  Equal values therefore have
equal bytes, which is what both the content-addressed container ids and the
event hash chain rely on.
"""

from __future__ import annotations

import hashlib
import json
import re
from typing import Any

from .errors import MalformedPayload

GENESIS_HASH = "0" * 64

_ID_RE = re.compile(r"^sha256:[0-9a-f]{64}$")
_SCALARS = (str, int, float, bool)


def check_tree(value: Any, where: str = "value") -> None:
    """Reject anything outside the str/int/float/bool/list/map subset."""
    if isinstance(value, bool):
        return
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise MalformedPayload(f"{where} is not a finite number")
        return
    if isinstance(value, (str, int)):
        return
    if isinstance(value, (list, tuple)):
        for i, item in enumerate(value):
            check_tree(item, f"{where}[{i}]")
        return
    if isinstance(value, dict):
        for key, item in value.items():
            if not isinstance(key, str):
                raise MalformedPayload(f"{where} has a non-string key: {key!r}")
            check_tree(item, f"{where}.{key}")
        return
    raise MalformedPayload(f"{where} has unsupported type {type(value).__name__}")


def canonical_json(value: Any) -> str:
    try:
        return json.dumps(
            value,
            ensure_ascii=False,
            sort_keys=True,
            separators=(",", ":"),
            allow_nan=False,
        )
    except (TypeError, ValueError) as exc:
        raise MalformedPayload(str(exc)) from exc


def canonical_bytes(value: Any) -> bytes:
    return canonical_json(value).encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def container_id(
    kind: str,
    payload: dict,
    period_tag: str | None = None,
    labels: tuple[str, ...] | list[str] = (),
) -> str:
    """Content address of a container.

    Covers kind, payload, period_tag and labels; created_at is deliberately
    excluded so re-registering the same artifact yields the same id.
    """
    doc: dict[str, Any] = {"kind": kind, "labels": list(labels), "payload": payload}
    if period_tag is not None:
        doc["period_tag"] = period_tag
    return "sha256:" + sha256_hex(canonical_bytes(doc))


def is_container_id(value: str) -> bool:
    return isinstance(value, str) and _ID_RE.match(value) is not None


def event_hash(seq: int, timestamp: int, kind: str, payload: dict, prev_hash: str) -> str:
    doc = {
        "kind": kind,
        "payload": payload,
        "prev_hash": prev_hash,
        "seq": seq,
        "timestamp": timestamp,
    }
    return sha256_hex(canonical_bytes(doc))
