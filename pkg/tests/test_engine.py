import random

import pytest

import genlib
import oracle
from evident.engine import (
    PENDING,
    attach_observation,
    backlog,
    grid_to_csv,
    grid_view,
    hypothesis_status,
    knowledge_report,
    place_test,
    render_report_markdown,
)
from evident.errors import (
    InvalidOutcome,
    NotDeduction,
    SingleObservationViolation,
    Unclassifiable,
)
from evident.model import Snapshot, classify_test, make_association, make_container


def _snap(*containers) -> Snapshot:
    s = Snapshot.empty()
    for c in containers:
        s = s.with_container(c)
    return s


def _deduction_setup():
    """Proved induction t1 plus deduction td predicting from it."""
    h = make_container("Hypothesis", {"text": "h"}, created_at=1)
    o = make_container("Observation", {"dataset": "d.csv"}, created_at=1)
    t1 = make_container("Test", {"method": "cv", "outcome": "proved"}, created_at=1)
    h4 = make_container("Hypothesis", {"text": "h4"}, created_at=1)
    td = make_container("Test", {"method": "monitor", "metric": "AUC", "outcome": "pending"}, created_at=1)
    s = _snap(h, o, t1, h4, td)
    s = s.with_association(make_association(s, h.id, t1.id, "hypothesis-edge"))
    s = s.with_association(make_association(s, o.id, t1.id, "observation-edge"))
    s = s.with_association(make_association(s, h4.id, td.id, "hypothesis-edge"))
    s = s.with_association(make_association(s, td.id, t1.id, "premise-edge"))
    return s, h, o, t1, h4, td


def test_place_induction(simple_snapshot):
    s, h, o, t = simple_snapshot
    coord = place_test(s, t.id)
    assert (coord.row, coord.column) == (h.id, o.id)


def test_place_abduction():
    hs = [make_container("Hypothesis", {"text": f"h{i}"}) for i in range(3)]
    o = make_container("Observation", {"dataset": "d.csv"})
    t = make_container("Test", {"method": "bake-off", "outcome": "proved"})
    s = _snap(*hs, o, t)
    for h in hs:
        s = s.with_association(make_association(s, h.id, t.id, "hypothesis-edge"))
    s = s.with_association(make_association(s, o.id, t.id, "observation-edge"))
    s = s.with_winner(t.id, hs[1].id)
    coord = place_test(s, t.id)
    assert (coord.row, coord.column) == (hs[1].id, o.id)


def test_place_deduction():
    s, h, o, t1, h4, td = _deduction_setup()
    coord = place_test(s, td.id)
    assert (coord.row, coord.column) == (h4.id, PENDING)


def test_place_incomplete_rejected(simple_snapshot):
    s, h, o, t = simple_snapshot
    t2 = make_container("Test", {"method": "m", "outcome": "pending"})
    s = s.with_container(t2)
    with pytest.raises(Unclassifiable):
        place_test(s, t2.id)


def test_grid_example_two_by_three(simple_snapshot):
    s, h, o, t = simple_snapshot
    h2 = make_container("Hypothesis", {"text": "h2"})
    o2 = make_container("Observation", {"dataset": "d2.csv"})
    s = s.with_container(h2).with_container(o2)
    grid = grid_view(s)
    assert grid.rows == (h.id, h2.id)
    assert grid.columns == (o.id, o2.id, PENDING)
    assert grid.cells == {(h.id, o.id): (t.id,)}
    assert grid.tbd == {(h.id, o2.id), (h2.id, o.id), (h2.id, o2.id)}


def test_grid_empty_snapshot():
    grid = grid_view(Snapshot.empty())
    assert grid.rows == ()
    assert grid.columns == (PENDING,)
    assert grid.tbd == frozenset()


def test_two_knowledges_share_a_cell(simple_snapshot):
    s, h, o, t = simple_snapshot
    t2 = make_container("Test", {"method": "cv", "metric": "RMSE", "outcome": "disproved"})
    s = s.with_container(t2)
    s = s.with_association(make_association(s, h.id, t2.id, "hypothesis-edge"))
    s = s.with_association(make_association(s, o.id, t2.id, "observation-edge"))
    grid = grid_view(s)
    assert grid.cells[(h.id, o.id)] == (t.id, t2.id)


def test_grid_matches_oracle_on_random_snapshots():
    rng = random.Random(31)
    for _ in range(60):
        s = genlib.random_universe(rng)
        grid = grid_view(s)
        expected = {k: tuple(v) for k, v in oracle.grid_cells(s).items()}
        assert grid.cells == expected
        assert grid.tbd == oracle.tbd_pairs(s)


def test_promotion_proved_becomes_induction():
    s, h, o, t1, h4, td = _deduction_setup()
    o5 = make_container("Observation", {"dataset": "prod.csv"}, created_at=1)
    s = s.with_container(o5)
    before = len(s.containers)
    after = attach_observation(s, td.id, o5.id, "proved", confidence=0.9, created_at=2)
    successor = next(c for c in after.containers.values() if f"supersedes:{td.id}" in c.labels)
    assert classify_test(after, successor.id) == "Induction"
    coord = place_test(after, successor.id)
    assert (coord.row, coord.column) == (h4.id, o5.id)
    assert td.id in after.containers
    assert len(after.containers) == before + 1
    assert successor.payload["confidence"] == 0.9
    assert successor.payload["outcome"] == "proved"


def test_promotion_overlooked_stays_deduction():
    s, h, o, t1, h4, td = _deduction_setup()
    o5 = make_container("Observation", {"dataset": "prod.csv"}, created_at=1)
    s = s.with_container(o5)
    after = attach_observation(s, td.id, o5.id, "overlooked", created_at=2)
    successor = next(c for c in after.containers.values() if f"supersedes:{td.id}" in c.labels)
    assert classify_test(after, successor.id) == "Deduction"
    coord = place_test(after, successor.id)
    assert (coord.row, coord.column) == (h4.id, PENDING)


def test_promotion_drops_stale_confidence():
    s, h, o, t1, h4, td = _deduction_setup()
    # Give the original a confidence, promote without one.
    td2 = make_container(
        "Test", {"method": "monitor2", "outcome": "pending", "confidence": 0.5}, created_at=1
    )
    s = s.with_container(td2)
    s = s.with_association(make_association(s, h4.id, td2.id, "hypothesis-edge"))
    s = s.with_association(make_association(s, td2.id, t1.id, "premise-edge"))
    o5 = make_container("Observation", {"dataset": "prod.csv"}, created_at=1)
    s = s.with_container(o5)
    after = attach_observation(s, td2.id, o5.id, "disproved", created_at=2)
    successor = next(c for c in after.containers.values() if f"supersedes:{td2.id}" in c.labels)
    assert "confidence" not in successor.payload


def test_second_attach_rejected():
    s, h, o, t1, h4, td = _deduction_setup()
    o5 = make_container("Observation", {"dataset": "prod.csv"}, created_at=1)
    o6 = make_container("Observation", {"dataset": "prod2.csv"}, created_at=1)
    s = s.with_container(o5).with_container(o6)
    after = attach_observation(s, td.id, o5.id, "proved", created_at=2)
    successor = next(c for c in after.containers.values() if f"supersedes:{td.id}" in c.labels)
    with pytest.raises(SingleObservationViolation):
        attach_observation(after, successor.id, o6.id, "proved")


def test_attach_requires_deduction(simple_snapshot):
    s, h, o, t = simple_snapshot
    o2 = make_container("Observation", {"dataset": "d2.csv"})
    s = s.with_container(o2)
    with pytest.raises(SingleObservationViolation):
        attach_observation(s, t.id, o2.id, "proved")  # induction already has evidence
    t2 = make_container("Test", {"method": "m2", "outcome": "pending"})
    s = s.with_container(t2)
    s = s.with_association(make_association(s, h.id, t2.id, "hypothesis-edge"))
    with pytest.raises(NotDeduction):
        attach_observation(s, t2.id, o2.id, "proved")  # incomplete, not deduction


def test_attach_rejects_pending_outcome():
    s, h, o, t1, h4, td = _deduction_setup()
    o5 = make_container("Observation", {"dataset": "prod.csv"}, created_at=1)
    s = s.with_container(o5)
    with pytest.raises(InvalidOutcome):
        attach_observation(s, td.id, o5.id, "pending")


def test_superseded_test_leaves_views():
    s, h, o, t1, h4, td = _deduction_setup()
    o5 = make_container("Observation", {"dataset": "prod.csv"}, created_at=1)
    s = s.with_container(o5)
    before = grid_view(s)
    assert (h4.id, PENDING) in before.cells
    after_snapshot = attach_observation(s, td.id, o5.id, "proved", created_at=2)
    after = grid_view(after_snapshot)
    assert (h4.id, PENDING) not in after.cells  # moved out of PENDING
    assert all(td.id not in tests for tests in after.cells.values())
    assert all(e.test != td.id for e in backlog(after_snapshot))
    assert td.id not in hypothesis_status(after_snapshot, h4.id).per_test


def test_status_rule_table(simple_snapshot):
    s, h, o, t = simple_snapshot
    assert hypothesis_status(s, h.id).summary == "proved"
    h2 = make_container("Hypothesis", {"text": "h2"})
    s = s.with_container(h2)
    assert hypothesis_status(s, h2.id).summary == "TBD"
    # One proved + one disproved on different observations: contested.
    o2 = make_container("Observation", {"dataset": "d2.csv"})
    t2 = make_container("Test", {"method": "cv2", "outcome": "disproved"})
    s = s.with_container(o2).with_container(t2)
    s = s.with_association(make_association(s, h.id, t2.id, "hypothesis-edge"))
    s = s.with_association(make_association(s, o2.id, t2.id, "observation-edge"))
    status = hypothesis_status(s, h.id)
    assert status.summary == "contested"
    assert status.per_test == {t.id: "proved", t2.id: "disproved"}


def test_status_overlooked_and_pending():
    s, h, o, t1, h4, td = _deduction_setup()
    # h4's only evidence is an unpromoted deduction: neither proves nor disproves.
    assert hypothesis_status(s, h4.id).summary == "overlooked"


def test_backlog_example():
    s, h, o, t1, h4, td = _deduction_setup()
    # Grid: rows {h, h4} x column {o}; (h, o) holds t1, (h4, o) is TBD,
    # plus one unpromoted deduction -> 2 entries.
    entries = backlog(s)
    kinds = [e.kind for e in entries]
    assert kinds.count("tbd") == 1
    assert kinds.count("pending-deduction") == 1
    o2 = make_container("Observation", {"dataset": "d2.csv"}, created_at=1)
    s = s.with_container(o2)
    entries = backlog(s)
    assert len(entries) == 4  # 3 empty cells + 1 pending deduction
    assert sorted(e.kind for e in entries) == ["pending-deduction", "tbd", "tbd", "tbd"]
    assert list(entries) == sorted(
        entries, key=lambda e: (e.period_tag or "", e.row, e.column, e.test or "")
    )


def test_backlog_sorted_by_period_row_column():
    h1 = make_container("Hypothesis", {"text": "a"}, period_tag="2026-Q2", created_at=1)
    h2 = make_container("Hypothesis", {"text": "b"}, period_tag="2026-Q1", created_at=1)
    o = make_container("Observation", {"dataset": "d.csv"}, created_at=1)
    s = _snap(h1, h2, o)
    entries = backlog(s)
    assert [e.period_tag for e in entries] == ["2026-Q1", "2026-Q2"]


def test_report_fields(simple_snapshot):
    s, h, o, t = simple_snapshot
    report = knowledge_report(s, t.id)
    assert report.kind == "Induction"
    assert report.method == "cv"
    assert report.outcome == "proved"
    assert report.hypotheses[0]["id"] == h.id
    assert report.observation["id"] == o.id


def test_report_includes_premise_chain():
    s, h, o, t1, h4, td = _deduction_setup()
    report = knowledge_report(s, td.id)
    assert report.kind == "Deduction"
    assert report.premises == ({"test": t1.id, "kind": "Induction"},)
    assert report.observation is None
    text = render_report_markdown(report)
    assert t1.id in text and "Premises" in text


def test_report_rendering_deterministic(simple_snapshot):
    s, h, o, t = simple_snapshot
    a = render_report_markdown(knowledge_report(s, t.id))
    b = render_report_markdown(knowledge_report(s, t.id))
    assert a == b


def test_report_incomplete_rejected(simple_snapshot):
    s, h, o, t = simple_snapshot
    t2 = make_container("Test", {"method": "m", "outcome": "pending"})
    s = s.with_container(t2)
    with pytest.raises(Unclassifiable):
        knowledge_report(s, t2.id)


def test_csv_export_shape(simple_snapshot):
    s, h, o, t = simple_snapshot
    text = grid_to_csv(grid_view(s), s)
    lines = text.splitlines()
    assert lines[0] == f",{o.id},PENDING"
    assert lines[1] == f"{h.id},{t.id}|proved,TBD"
    assert text.endswith("\n")
