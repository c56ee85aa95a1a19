"""Relational operations over knowledge bases.

Permutation and Join work on any snapshot.  Restriction, Projection and
Composition require a selectable snapshot: one with no premise edges, i.e.
holding only induction/abduction knowledge.  Join is a lossless union made
possible by content addressing; the only merge conflict that can exist is
two different winner designations for the same test.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NotSelectable, ResultInvalid, UnknownHypothesis, UnknownObservation, WinnerConflict
from .model import (
    HYPOTHESIS,
    HYPOTHESIS_EDGE,
    INCOMPLETE,
    OBSERVATION,
    PREMISE_EDGE,
    TEST,
    Association,
    Container,
    Snapshot,
    classify_test,
    validate,
)
from .engine import GridView, place_test


@dataclass(frozen=True)
class SelectabilityReport:
    selectable: bool
    offending_premise_edges: tuple[Association, ...]


def is_selectable(snapshot: Snapshot) -> SelectabilityReport:
    offending = tuple(
        sorted(
            (a for a in snapshot.associations if a.kind == PREMISE_EDGE),
            key=lambda a: (a.source, a.target),
        )
    )
    return SelectabilityReport(selectable=not offending, offending_premise_edges=offending)


def _require_selectable(snapshot: Snapshot) -> None:
    report = is_selectable(snapshot)
    if not report.selectable:
        edges = ", ".join(f"{a.source}->{a.target}" for a in report.offending_premise_edges)
        raise NotSelectable(f"snapshot holds deduction knowledge (premise edges: {edges})")


def permute(grid: GridView) -> GridView:
    """Swap rows and columns; applying it twice gives the original grid."""
    return GridView(
        rows=grid.columns,
        columns=grid.rows,
        cells={(col, row): tests for (row, col), tests in grid.cells.items()},
        tbd=frozenset((col, row) for (row, col) in grid.tbd),
    )


def _merge_container(a: Container, b: Container) -> Container:
    if (a.kind, a.payload, a.period_tag, a.labels) != (b.kind, b.payload, b.period_tag, b.labels):
        raise ResultInvalid(f"container {a.id} has diverging content across inputs", a.id)
    if b.created_at < a.created_at:
        return b
    return a


def join(a: Snapshot, b: Snapshot) -> Snapshot:
    """Lossless union of two snapshots.

    Containers unify by content address (earliest created_at wins for the
    timestamp), associations and winners by set union.  A test with two
    different winners is a conflict, and a union that breaks a structural
    rule (say, a second observation edge onto one test) is rejected.
    """
    containers = dict(a.containers)
    for cid, c in b.containers.items():
        containers[cid] = _merge_container(containers[cid], c) if cid in containers else c
    winners = dict(a.winners)
    for test, hyp in b.winners.items():
        if winners.get(test, hyp) != hyp:
            raise WinnerConflict(
                f"test {test} has winner {winners[test]} in one input and {hyp} in the other",
                test,
                winners[test],
                hyp,
            )
        winners[test] = hyp
    result = Snapshot(
        containers=containers,
        associations=a.associations | b.associations,
        winners=winners,
    )
    violations = validate(result)
    if violations:
        raise ResultInvalid(f"join result is invalid: {violations[0]}")
    return result


def restrict(snapshot: Snapshot, keep_rows) -> Snapshot:
    """Keep the selected hypothesis rows.

    Columns are schema and survive untouched.  A test survives when its row
    (the winner row, for abduction) is kept; its losing candidate
    hypotheses are retained as containers so the test stays well formed.
    """
    _require_selectable(snapshot)
    keep = set(keep_rows)
    hypothesis_ids = {c.id for c in snapshot.of_kind(HYPOTHESIS)}
    unknown = keep - hypothesis_ids
    if unknown:
        raise UnknownHypothesis(
            f"not hypotheses of this snapshot: {', '.join(sorted(unknown))}", *sorted(unknown)
        )
    surviving: set[str] = set()
    for c in snapshot.of_kind(TEST):
        if classify_test(snapshot, c.id) == INCOMPLETE:
            sources = {e.source for e in snapshot.hypothesis_edges(c.id)}
            if sources <= keep:
                surviving.add(c.id)
        elif place_test(snapshot, c.id).row in keep:
            surviving.add(c.id)
    retained_losers = {
        a.source
        for a in snapshot.associations
        if a.kind == HYPOTHESIS_EDGE and a.target in surviving
    }
    containers = {}
    for cid, c in snapshot.containers.items():
        if c.kind == OBSERVATION:
            containers[cid] = c
        elif c.kind == HYPOTHESIS and (cid in keep or cid in retained_losers):
            containers[cid] = c
        elif c.kind == TEST and cid in surviving:
            containers[cid] = c
    associations = frozenset(a for a in snapshot.associations if a.target in surviving)
    winners = {t: h for t, h in snapshot.winners.items() if t in surviving}
    return Snapshot(containers=containers, associations=associations, winners=winners)


def project(snapshot: Snapshot, keep_cols) -> Snapshot:
    """Keep the selected observation columns; rows are schema and survive."""
    _require_selectable(snapshot)
    keep = set(keep_cols)
    observation_ids = {c.id for c in snapshot.of_kind(OBSERVATION)}
    unknown = keep - observation_ids
    if unknown:
        raise UnknownObservation(
            f"not observations of this snapshot: {', '.join(sorted(unknown))}", *sorted(unknown)
        )
    surviving: set[str] = set()
    for c in snapshot.of_kind(TEST):
        edge = snapshot.observation_edge(c.id)
        if edge is None or edge.source in keep:
            surviving.add(c.id)
    containers = {}
    for cid, c in snapshot.containers.items():
        if c.kind == HYPOTHESIS:
            containers[cid] = c
        elif c.kind == OBSERVATION and cid in keep:
            containers[cid] = c
        elif c.kind == TEST and cid in surviving:
            containers[cid] = c
    associations = frozenset(a for a in snapshot.associations if a.target in surviving)
    winners = {t: h for t, h in snapshot.winners.items() if t in surviving}
    return Snapshot(containers=containers, associations=associations, winners=winners)


def compose(parts) -> Snapshot:
    """Join selected rows and columns from several knowledge bases.

    Each part is (snapshot, keep_rows, keep_cols); None keeps everything.
    Equivalent to a left fold of join over the projected-then-restricted
    parts, and order-independent because join is.
    """
    result = Snapshot.empty()
    for snapshot, keep_rows, keep_cols in parts:
        piece = project(
            snapshot,
            keep_cols if keep_cols is not None else (c.id for c in snapshot.of_kind(OBSERVATION)),
        )
        piece = restrict(
            piece,
            keep_rows if keep_rows is not None else (c.id for c in piece.of_kind(HYPOTHESIS)),
        )
        result = join(result, piece)
    return result
