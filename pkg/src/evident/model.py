"""Containers, associations, snapshots, and the classification rules.

Three container kinds (Observation, Hypothesis, Test) and three edge kinds,
every edge pointing at a Test.  A Test's edges plus its recorded outcome
determine its knowledge classification: Induction, Abduction, Deduction, or
Incomplete while still being wired up.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Iterator

from .canonical import canonical_json, check_tree, container_id, is_container_id
from .errors import (
    CycleDetected,
    DanglingReference,
    EmptyPayload,
    EvidentError,
    InvalidOutcome,
    InvalidPremise,
    InvalidTarget,
    InvalidWinner,
    KindMismatch,
    MalformedPayload,
    NotATest,
    SingleObservationViolation,
)

OBSERVATION = "Observation"
HYPOTHESIS = "Hypothesis"
TEST = "Test"
CONTAINER_KINDS = (OBSERVATION, HYPOTHESIS, TEST)

HYPOTHESIS_EDGE = "hypothesis-edge"
OBSERVATION_EDGE = "observation-edge"
PREMISE_EDGE = "premise-edge"
EDGE_KINDS = (HYPOTHESIS_EDGE, OBSERVATION_EDGE, PREMISE_EDGE)

# Edge kind -> required source container kind.  Targets are always Tests.
EDGE_SOURCE_KIND = {
    HYPOTHESIS_EDGE: HYPOTHESIS,
    OBSERVATION_EDGE: OBSERVATION,
    PREMISE_EDGE: TEST,
}

PROVED = "proved"
DISPROVED = "disproved"
OVERLOOKED = "overlooked"
PENDING_OUTCOME = "pending"
OUTCOMES = (PROVED, DISPROVED, OVERLOOKED, PENDING_OUTCOME)
DECIDED_OUTCOMES = (PROVED, DISPROVED)

INDUCTION = "Induction"
ABDUCTION = "Abduction"
DEDUCTION = "Deduction"
INCOMPLETE = "Incomplete"

SUPERSEDES_PREFIX = "supersedes:"


@dataclass(frozen=True)
class Container:
    id: str
    kind: str
    payload: dict
    created_at: int
    period_tag: str | None = None
    labels: tuple[str, ...] = ()

    def outcome(self) -> str | None:
        value = self.payload.get("outcome")
        return value if isinstance(value, str) else None


@dataclass(frozen=True)
class Association:
    source: str
    target: str
    kind: str


@dataclass(frozen=True)
class Snapshot:
    """In-memory state: containers, edges, and abduction winner picks.

    Value-semantic and treated as immutable; the with_* helpers return new
    snapshots.  Container insertion order is preserved and drives row/column
    ordering in derived views.
    """

    containers: dict[str, Container] = field(default_factory=dict)
    associations: frozenset[Association] = frozenset()
    winners: dict[str, str] = field(default_factory=dict)

    @classmethod
    def empty(cls) -> "Snapshot":
        return cls()

    def container(self, cid: str) -> Container:
        try:
            return self.containers[cid]
        except KeyError:
            raise DanglingReference(f"unknown container {cid}", cid) from None

    def has(self, cid: str) -> bool:
        return cid in self.containers

    def of_kind(self, kind: str) -> Iterator[Container]:
        return (c for c in self.containers.values() if c.kind == kind)

    def hypothesis_edges(self, test: str) -> list[Association]:
        return sorted(
            (a for a in self.associations if a.target == test and a.kind == HYPOTHESIS_EDGE),
            key=lambda a: a.source,
        )

    def observation_edge(self, test: str) -> Association | None:
        for a in self.associations:
            if a.target == test and a.kind == OBSERVATION_EDGE:
                return a
        return None

    def premise_edges(self, test: str) -> list[Association]:
        return sorted(
            (a for a in self.associations if a.source == test and a.kind == PREMISE_EDGE),
            key=lambda a: a.target,
        )

    def with_container(self, c: Container) -> "Snapshot":
        containers = dict(self.containers)
        containers[c.id] = c
        return Snapshot(containers, self.associations, dict(self.winners))

    def with_association(self, a: Association) -> "Snapshot":
        return Snapshot(dict(self.containers), self.associations | {a}, dict(self.winners))

    def with_winner(self, test: str, hypothesis: str) -> "Snapshot":
        winners = dict(self.winners)
        winners[test] = hypothesis
        return Snapshot(dict(self.containers), self.associations, winners)


@dataclass(frozen=True)
class Violation:
    rule: str
    ids: tuple[str, ...]
    message: str

    def __str__(self) -> str:
        return f"{self.rule}({', '.join(self.ids)}): {self.message}"


def _check_test_payload(payload: dict) -> None:
    outcome = payload.get("outcome")
    if outcome not in OUTCOMES:
        raise InvalidOutcome(f"Test outcome must be one of {OUTCOMES}, got {outcome!r}")
    method = payload.get("method")
    if not isinstance(method, str) or not method:
        raise MalformedPayload("Test payload requires a non-empty 'method' string")
    for key in ("metric", "strategy"):
        if key in payload and not isinstance(payload[key], str):
            raise MalformedPayload(f"Test {key} must be a string")
    if "confidence" in payload:
        confidence = payload["confidence"]
        if isinstance(confidence, bool) or not isinstance(confidence, (int, float)):
            raise MalformedPayload("Test confidence must be a number")
        if not 0 <= confidence <= 1:
            raise MalformedPayload("Test confidence must lie in [0, 1]")


def make_container(
    kind: str,
    payload: dict,
    period_tag: str | None = None,
    labels: tuple[str, ...] | list[str] = (),
    created_at: int | None = None,
) -> Container:
    """Build an immutable, content-addressed container.

    The id is a pure function of (kind, payload, period_tag, labels);
    created_at is excluded so re-registering an artifact is idempotent.
    """
    if kind not in CONTAINER_KINDS:
        raise KindMismatch(f"unknown container kind {kind!r}")
    if not isinstance(payload, dict) or not payload:
        raise EmptyPayload("container payload must be a non-empty map")
    check_tree(payload, "payload")
    if not all(isinstance(label, str) for label in labels):
        raise MalformedPayload("labels must be strings")
    if period_tag is not None and not isinstance(period_tag, str):
        raise MalformedPayload("period_tag must be a string")
    # Normalize (tuples become lists) and detach from the caller's dict.
    payload = json.loads(canonical_json(payload))
    if kind == TEST:
        _check_test_payload(payload)
    labels = tuple(labels)
    return Container(
        id=container_id(kind, payload, period_tag, labels),
        kind=kind,
        payload=payload,
        created_at=int(time.time()) if created_at is None else int(created_at),
        period_tag=period_tag,
        labels=labels,
    )


def _premise_reaches(snapshot: Snapshot, start: str, goal: str) -> bool:
    """Depth-first over premise edges: is goal reachable from start?"""
    stack, seen = [start], set()
    while stack:
        node = stack.pop()
        if node == goal:
            return True
        if node in seen:
            continue
        seen.add(node)
        stack.extend(
            a.target for a in snapshot.associations if a.source == node and a.kind == PREMISE_EDGE
        )
    return False


def make_association(snapshot: Snapshot, source: str, target: str, kind: str) -> Association:
    """Validate a prospective edge against the snapshot; pure, no mutation."""
    if kind not in EDGE_KINDS:
        raise KindMismatch(f"unknown edge kind {kind!r}")
    src = snapshot.container(source)
    dst = snapshot.container(target)
    if dst.kind != TEST:
        raise InvalidTarget(f"associations may only target Tests, {target} is a {dst.kind}", target)
    if src.kind != EDGE_SOURCE_KIND[kind]:
        raise KindMismatch(
            f"{kind} requires a {EDGE_SOURCE_KIND[kind]} source, {source} is a {src.kind}",
            source,
        )
    if kind == OBSERVATION_EDGE:
        existing = snapshot.observation_edge(target)
        if existing is not None:
            raise SingleObservationViolation(
                f"test {target} already has observation {existing.source}", target, existing.source
            )
    if kind == PREMISE_EDGE:
        if source == target or _premise_reaches(snapshot, target, source):
            raise CycleDetected(f"premise edge {source} -> {target} would close a cycle", source, target)
        if classify_test(snapshot, target) not in (INDUCTION, ABDUCTION):
            raise InvalidPremise(
                f"premise target {target} is not an induction or abduction test", target
            )
    return Association(source=source, target=target, kind=kind)


def classify_test(snapshot: Snapshot, test: str, _seen: frozenset = frozenset()) -> str:
    """Apply the classification rule table to one Test.

    Induction: one hypothesis, one observation, decided outcome.
    Abduction: two or more hypotheses, one observation, decided outcome,
    and a designated winner.  Deduction: exactly one hypothesis, evidence
    absent or overlooked, and a premise edge into an induction or abduction
    test.  Anything else is Incomplete.
    """
    c = snapshot.container(test)
    if c.kind != TEST:
        raise NotATest(f"{test} is a {c.kind}, not a Test", test)
    n_hyp = len(snapshot.hypothesis_edges(test))
    has_obs = snapshot.observation_edge(test) is not None
    outcome = c.outcome()

    if n_hyp == 1 and has_obs and outcome in DECIDED_OUTCOMES:
        return INDUCTION
    if n_hyp >= 2 and has_obs and outcome in DECIDED_OUTCOMES and test in snapshot.winners:
        return ABDUCTION
    if n_hyp == 1 and (not has_obs or outcome == OVERLOOKED):
        seen = _seen | {test}
        for edge in snapshot.premise_edges(test):
            if edge.target in seen or not snapshot.has(edge.target):
                continue
            if classify_test(snapshot, edge.target, seen) in (INDUCTION, ABDUCTION):
                return DEDUCTION
    return INCOMPLETE


def _container_violations(snapshot: Snapshot) -> Iterator[Violation]:
    for key, c in snapshot.containers.items():
        if key != c.id or not is_container_id(c.id):
            yield Violation("InvalidId", (key,), "container keyed by a different or malformed id")
            continue
        try:
            if c.kind not in CONTAINER_KINDS:
                raise KindMismatch(f"unknown container kind {c.kind!r}")
            if not isinstance(c.payload, dict) or not c.payload:
                raise EmptyPayload("container payload must be a non-empty map")
            check_tree(c.payload, "payload")
            if c.kind == TEST:
                _check_test_payload(c.payload)
            if c.id != container_id(c.kind, c.payload, c.period_tag, c.labels):
                yield Violation("InvalidId", (c.id,), "id does not match container content")
        except EvidentError as exc:
            yield Violation(exc.code, (c.id,), str(exc))


def _association_violations(snapshot: Snapshot) -> Iterator[Violation]:
    obs_edges: dict[str, list[str]] = {}
    for a in sorted(snapshot.associations, key=lambda a: (a.source, a.target, a.kind)):
        ids = (a.source, a.target)
        if a.kind not in EDGE_KINDS:
            yield Violation("KindMismatch", ids, f"unknown edge kind {a.kind!r}")
            continue
        if not snapshot.has(a.source) or not snapshot.has(a.target):
            yield Violation("DanglingReference", ids, "association endpoint not in snapshot")
            continue
        if snapshot.containers[a.target].kind != TEST:
            yield Violation("InvalidTarget", ids, "association target is not a Test")
            continue
        if snapshot.containers[a.source].kind != EDGE_SOURCE_KIND[a.kind]:
            yield Violation("KindMismatch", ids, f"{a.kind} has wrong source kind")
        if a.kind == OBSERVATION_EDGE:
            obs_edges.setdefault(a.target, []).append(a.source)
    for test, sources in sorted(obs_edges.items()):
        if len(sources) > 1:
            yield Violation(
                "SingleObservationViolation",
                (test, *sorted(sources)),
                "test has more than one observation edge",
            )


def _premise_cycle(snapshot: Snapshot) -> list[str] | None:
    """Return one cycle in the premise relation, if any (iterative DFS)."""
    adjacency: dict[str, list[str]] = {}
    for a in sorted(snapshot.associations, key=lambda a: (a.source, a.target)):
        if a.kind == PREMISE_EDGE:
            adjacency.setdefault(a.source, []).append(a.target)
    done: set[str] = set()
    for root in adjacency:
        if root in done:
            continue
        path: list[str] = []
        on_path: set[str] = set()
        stack: list[tuple[str, int]] = [(root, 0)]
        while stack:
            node, idx = stack.pop()
            if idx == 0:
                if node in on_path:
                    return path[path.index(node):] + [node]
                if node in done:
                    continue
                path.append(node)
                on_path.add(node)
            children = adjacency.get(node, [])
            if idx < len(children):
                stack.append((node, idx + 1))
                child = children[idx]
                if child in on_path:
                    return path[path.index(child):] + [child]
                if child not in done:
                    stack.append((child, 0))
            else:
                done.add(node)
                on_path.discard(node)
                path.pop()
    return None


def _winner_violations(snapshot: Snapshot) -> Iterator[Violation]:
    for test, hyp in sorted(snapshot.winners.items()):
        if not snapshot.has(test) or not snapshot.has(hyp):
            yield Violation("DanglingReference", (test, hyp), "winner entry references unknown id")
            continue
        edge = Association(source=hyp, target=test, kind=HYPOTHESIS_EDGE)
        if edge not in snapshot.associations:
            yield Violation(
                "InvalidWinner", (test, hyp), "winner hypothesis has no edge into the test"
            )


def validate(snapshot: Snapshot) -> list[Violation]:
    """Bulk re-check of every structural invariant; violations are data."""
    violations = list(_container_violations(snapshot))
    violations.extend(_association_violations(snapshot))
    cycle = _premise_cycle(snapshot)
    if cycle is not None:
        violations.append(
            Violation("CycleDetected", tuple(cycle), "premise edges form a cycle")
        )
    violations.extend(_winner_violations(snapshot))
    return violations


def check_winner(snapshot: Snapshot, test: str, hypothesis: str) -> None:
    """Validate a prospective winner designation for an abduction test."""
    c = snapshot.container(test)
    if c.kind != TEST:
        raise NotATest(f"{test} is a {c.kind}, not a Test", test)
    snapshot.container(hypothesis)
    edge = Association(source=hypothesis, target=test, kind=HYPOTHESIS_EDGE)
    if edge not in snapshot.associations:
        raise InvalidWinner(
            f"{hypothesis} has no hypothesis edge into {test}", test, hypothesis
        )
