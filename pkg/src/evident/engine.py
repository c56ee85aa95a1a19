"""Derived views over snapshots: grid placement, backlog, status, reports.

Everything here is a pure function of a snapshot.  Containers that have
been superseded (named by another container's ``supersedes:<id>`` label,
the mechanism promotion uses) stay in the store but drop out of every view.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .canonical import canonical_json
from .errors import (
    InvalidOutcome,
    KindMismatch,
    NotAHypothesis,
    NotATest,
    NotDeduction,
    SingleObservationViolation,
    Unclassifiable,
)
from .model import (
    ABDUCTION,
    DEDUCTION,
    DISPROVED,
    HYPOTHESIS,
    HYPOTHESIS_EDGE,
    INCOMPLETE,
    INDUCTION,
    OBSERVATION,
    OBSERVATION_EDGE,
    OVERLOOKED,
    PREMISE_EDGE,
    PROVED,
    SUPERSEDES_PREFIX,
    TEST,
    Container,
    Snapshot,
    classify_test,
    make_association,
    make_container,
)

PENDING = "PENDING"

SUMMARY_TBD = "TBD"
SUMMARY_CONTESTED = "contested"


@dataclass(frozen=True)
class GridCoordinate:
    row: str
    column: str


@dataclass(frozen=True)
class GridView:
    """Rows of hypotheses, columns of observations plus the PENDING column.

    ``cells`` holds only occupied coordinates; ``tbd`` the empty
    (hypothesis, observation) pairs, i.e. tests still to be done.
    """

    rows: tuple[str, ...]
    columns: tuple[str, ...]
    cells: dict[tuple[str, str], tuple[str, ...]]
    tbd: frozenset[tuple[str, str]]


@dataclass(frozen=True)
class StatusSummary:
    hypothesis: str
    per_test: dict[str, str]
    summary: str


@dataclass(frozen=True)
class BacklogEntry:
    kind: str  # "tbd" | "pending-deduction"
    row: str
    column: str
    test: str | None = None
    period_tag: str | None = None


@dataclass(frozen=True)
class KnowledgeReport:
    test: str
    kind: str
    hypotheses: tuple[dict, ...]
    observation: dict | None
    method: str
    metric: str | None
    strategy: str | None
    outcome: str
    confidence: float | None
    premises: tuple[dict, ...]
    period_tag: str | None


def superseded_ids(snapshot: Snapshot) -> frozenset[str]:
    retired = set()
    for c in snapshot.containers.values():
        for label in c.labels:
            if label.startswith(SUPERSEDES_PREFIX):
                retired.add(label[len(SUPERSEDES_PREFIX):])
    return frozenset(retired)


def display_label(c: Container) -> str:
    for key in ("text", "name", "dataset", "method"):
        value = c.payload.get(key)
        if isinstance(value, str) and value:
            return value
    return ""


def place_test(snapshot: Snapshot, test: str) -> GridCoordinate:
    """Grid coordinate of a classified test; Incomplete tests have none."""
    kind = classify_test(snapshot, test)
    if kind == INCOMPLETE:
        raise Unclassifiable(f"test {test} is incomplete and has no grid placement", test)
    obs_edge = snapshot.observation_edge(test)
    if kind == INDUCTION:
        row = snapshot.hypothesis_edges(test)[0].source
        return GridCoordinate(row=row, column=obs_edge.source)
    if kind == ABDUCTION:
        return GridCoordinate(row=snapshot.winners[test], column=obs_edge.source)
    # Deduction: the single hypothesis row, evidence still pending.
    row = snapshot.hypothesis_edges(test)[0].source
    return GridCoordinate(row=row, column=PENDING)


def grid_view(snapshot: Snapshot) -> GridView:
    """Materialize the grid: rows/columns in insertion order, PENDING last."""
    rows = tuple(c.id for c in snapshot.of_kind(HYPOTHESIS))
    observations = tuple(c.id for c in snapshot.of_kind(OBSERVATION))
    columns = observations + (PENDING,)
    hidden = superseded_ids(snapshot)
    cells: dict[tuple[str, str], list[str]] = {}
    for c in snapshot.of_kind(TEST):
        if c.id in hidden:
            continue
        if classify_test(snapshot, c.id) == INCOMPLETE:
            continue
        coord = place_test(snapshot, c.id)
        cells.setdefault((coord.row, coord.column), []).append(c.id)
    tbd = frozenset(
        (row, col)
        for row in rows
        for col in observations
        if (row, col) not in cells
    )
    return GridView(
        rows=rows,
        columns=columns,
        cells={key: tuple(tests) for key, tests in cells.items()},
        tbd=tbd,
    )


def promoted_test(
    original: Container,
    outcome: str,
    confidence: float | None,
    created_at: int | None = None,
) -> Container:
    """Successor test carrying the new outcome and a supersedes label."""
    payload = dict(original.payload)
    payload["outcome"] = outcome
    if confidence is None:
        payload.pop("confidence", None)
    else:
        payload["confidence"] = confidence
    return make_container(
        kind=TEST,
        payload=payload,
        period_tag=original.period_tag,
        labels=original.labels + (SUPERSEDES_PREFIX + original.id,),
        created_at=created_at,
    )


def attach_observation(
    snapshot: Snapshot,
    test: str,
    observation: str,
    outcome: str,
    confidence: float | None = None,
    created_at: int | None = None,
) -> Snapshot:
    """Promote a deduction by attaching the observation that judged it.

    A successor test (original payload, new outcome/confidence, linked back
    via a supersedes label) inherits the hypothesis and premise edges and
    carries the observation edge.  Proved/disproved successors classify as
    induction; an overlooked observation leaves the successor a deduction.
    The original test stays in the store.
    """
    original = snapshot.container(test)
    if original.kind != TEST:
        raise NotATest(f"{test} is a {original.kind}, not a Test", test)
    existing = snapshot.observation_edge(test)
    if existing is not None:
        raise SingleObservationViolation(
            f"test {test} already has observation {existing.source}", test, existing.source
        )
    if classify_test(snapshot, test) != DEDUCTION:
        raise NotDeduction(f"test {test} is not a deduction", test)
    obs = snapshot.container(observation)
    if obs.kind != OBSERVATION:
        raise KindMismatch(f"{observation} is a {obs.kind}, not an Observation", observation)
    if outcome not in (PROVED, DISPROVED, OVERLOOKED):
        raise InvalidOutcome(
            f"promotion outcome must be proved, disproved or overlooked, got {outcome!r}"
        )
    successor = promoted_test(original, outcome, confidence, created_at)
    result = snapshot.with_container(successor)
    hyp = snapshot.hypothesis_edges(test)[0].source
    result = result.with_association(
        make_association(result, hyp, successor.id, HYPOTHESIS_EDGE)
    )
    for premise in snapshot.premise_edges(test):
        result = result.with_association(
            make_association(result, successor.id, premise.target, PREMISE_EDGE)
        )
    return result.with_association(
        make_association(result, observation, successor.id, OBSERVATION_EDGE)
    )


def hypothesis_status(snapshot: Snapshot, hypothesis: str) -> StatusSummary:
    """Outcome roll-up over the classified tests sitting in one row."""
    c = snapshot.container(hypothesis)
    if c.kind != HYPOTHESIS:
        raise NotAHypothesis(f"{hypothesis} is a {c.kind}, not a Hypothesis", hypothesis)
    hidden = superseded_ids(snapshot)
    per_test: dict[str, str] = {}
    for t in snapshot.of_kind(TEST):
        if t.id in hidden or classify_test(snapshot, t.id) == INCOMPLETE:
            continue
        if place_test(snapshot, t.id).row == hypothesis:
            per_test[t.id] = t.outcome() or ""
    outcomes = set(per_test.values())
    if not per_test:
        summary = SUMMARY_TBD
    elif PROVED in outcomes and DISPROVED in outcomes:
        summary = SUMMARY_CONTESTED
    elif PROVED in outcomes:
        summary = PROVED
    elif DISPROVED in outcomes:
        summary = DISPROVED
    else:
        # Only overlooked or still-pending evidence in this row.
        summary = OVERLOOKED
    return StatusSummary(hypothesis=hypothesis, per_test=per_test, summary=summary)


def backlog(snapshot: Snapshot) -> tuple[BacklogEntry, ...]:
    """TBD cells plus unpromoted deductions, ordered for period planning."""
    grid = grid_view(snapshot)
    entries = []
    for row, col in grid.tbd:
        entries.append(
            BacklogEntry(
                kind="tbd",
                row=row,
                column=col,
                period_tag=snapshot.containers[row].period_tag,
            )
        )
    for (row, col), tests in grid.cells.items():
        if col != PENDING:
            continue
        for tid in tests:
            entries.append(
                BacklogEntry(
                    kind="pending-deduction",
                    row=row,
                    column=PENDING,
                    test=tid,
                    period_tag=snapshot.containers[tid].period_tag,
                )
            )
    entries.sort(key=lambda e: (e.period_tag or "", e.row, e.column, e.test or ""))
    return tuple(entries)


def _observation_summary(c: Container) -> str:
    for key in ("digest", "dataset"):
        value = c.payload.get(key)
        if isinstance(value, str) and value:
            return value
    return canonical_json(c.payload)


def knowledge_report(snapshot: Snapshot, test: str) -> KnowledgeReport:
    """Self-contained description of one piece of knowledge."""
    kind = classify_test(snapshot, test)
    if kind == INCOMPLETE:
        raise Unclassifiable(f"test {test} is incomplete; no report", test)
    c = snapshot.containers[test]
    coord = place_test(snapshot, test)
    hypotheses = tuple(
        {
            "id": edge.source,
            "text": display_label(snapshot.containers[edge.source]),
            "winner": edge.source == coord.row,
        }
        for edge in snapshot.hypothesis_edges(test)
    )
    obs_edge = snapshot.observation_edge(test)
    observation = None
    if obs_edge is not None:
        observation = {
            "id": obs_edge.source,
            "summary": _observation_summary(snapshot.containers[obs_edge.source]),
        }
    premises = tuple(
        {"test": edge.target, "kind": classify_test(snapshot, edge.target)}
        for edge in snapshot.premise_edges(test)
    )
    payload = c.payload
    return KnowledgeReport(
        test=test,
        kind=kind,
        hypotheses=hypotheses,
        observation=observation,
        method=payload.get("method", ""),
        metric=payload.get("metric"),
        strategy=payload.get("strategy"),
        outcome=c.outcome() or "",
        confidence=payload.get("confidence"),
        premises=premises,
        period_tag=c.period_tag,
    )


# --- exports ----------------------------------------------------------------

def grid_to_csv(grid: GridView, snapshot: Snapshot) -> str:
    """Grid as CSV: observation-id header plus PENDING, hypothesis-id rows,
    cells as semicolon-joined ``testid|outcome`` entries, empty cells TBD."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([""] + list(grid.columns))
    for row in grid.rows:
        fields = [row]
        for col in grid.columns:
            tests = grid.cells.get((row, col), ())
            if tests:
                fields.append(
                    ";".join(f"{tid}|{snapshot.containers[tid].outcome() or ''}" for tid in tests)
                )
            else:
                fields.append("TBD")
        writer.writerow(fields)
    return out.getvalue()


def grid_doc(grid: GridView, snapshot: Snapshot) -> dict:
    """Grid as a canonical-JSON-ready document (what the service serves)."""
    cells: dict[str, dict[str, list[dict]]] = {}
    for (row, col), tests in grid.cells.items():
        per_row = cells.setdefault(row, {})
        per_row[col] = []
        for tid in tests:
            c = snapshot.containers[tid]
            entry = {
                "id": tid,
                "kind": classify_test(snapshot, tid),
                "outcome": c.outcome() or "",
            }
            if isinstance(c.payload.get("metric"), str):
                entry["metric"] = c.payload["metric"]
            if isinstance(c.payload.get("confidence"), (int, float)):
                entry["confidence"] = c.payload["confidence"]
            per_row[col].append(entry)
    return {
        "rows": [
            {"id": row, "label": display_label(snapshot.containers[row])} for row in grid.rows
        ],
        "columns": [
            {"id": col, "label": PENDING if col == PENDING else display_label(snapshot.containers[col])}
            for col in grid.columns
        ],
        "cells": cells,
        "tbd": [
            [row, col]
            for row in grid.rows
            for col in grid.columns
            if (row, col) in grid.tbd
        ],
    }


def status_doc(status: StatusSummary) -> dict:
    return {
        "hypothesis": status.hypothesis,
        "per_test": dict(status.per_test),
        "summary": status.summary,
    }


def backlog_doc(entries: tuple[BacklogEntry, ...]) -> dict:
    records = []
    for e in entries:
        record: dict = {"column": e.column, "kind": e.kind, "row": e.row}
        if e.test is not None:
            record["test"] = e.test
        if e.period_tag is not None:
            record["period_tag"] = e.period_tag
        records.append(record)
    return {"entries": records}


def report_doc(report: KnowledgeReport) -> dict:
    doc: dict = {
        "test": report.test,
        "kind": report.kind,
        "hypotheses": list(report.hypotheses),
        "method": report.method,
        "outcome": report.outcome,
        "premises": list(report.premises),
    }
    if report.observation is not None:
        doc["observation"] = report.observation
    if report.metric is not None:
        doc["metric"] = report.metric
    if report.strategy is not None:
        doc["strategy"] = report.strategy
    if report.confidence is not None:
        doc["confidence"] = report.confidence
    if report.period_tag is not None:
        doc["period_tag"] = report.period_tag
    return doc


def render_report_markdown(report: KnowledgeReport) -> str:
    lines = [f"# {report.kind} knowledge: {report.test}", ""]
    lines.append(f"- outcome: {report.outcome}")
    lines.append(f"- method: {report.method}")
    if report.metric is not None:
        lines.append(f"- metric: {report.metric}")
    if report.strategy is not None:
        lines.append(f"- strategy: {report.strategy}")
    if report.confidence is not None:
        lines.append(f"- confidence: {canonical_json(report.confidence)}")
    if report.period_tag is not None:
        lines.append(f"- period: {report.period_tag}")
    lines.append("")
    lines.append("## Hypotheses")
    for h in report.hypotheses:
        marker = " (winner)" if h["winner"] and len(report.hypotheses) > 1 else ""
        text = f": {h['text']}" if h["text"] else ""
        lines.append(f"- {h['id']}{text}{marker}")
    lines.append("")
    lines.append("## Observation")
    if report.observation is None:
        lines.append("- pending")
    else:
        lines.append(f"- {report.observation['id']}: {report.observation['summary']}")
    if report.premises:
        lines.append("")
        lines.append("## Premises")
        for p in report.premises:
            lines.append(f"- {p['test']} ({p['kind']})")
    lines.append("")
    return "\n".join(lines)
