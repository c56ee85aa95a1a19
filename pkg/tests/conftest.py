import pytest

from evident.model import Snapshot, make_association, make_container


@pytest.fixture
def simple_snapshot():
    """One proved induction: h -> t <- o."""
    h = make_container("Hypothesis", {"text": "h"}, created_at=1000)
    o = make_container("Observation", {"dataset": "d.csv"}, created_at=1000)
    t = make_container("Test", {"method": "cv", "outcome": "proved"}, created_at=1000)
    s = Snapshot.empty().with_container(h).with_container(o).with_container(t)
    s = s.with_association(make_association(s, h.id, t.id, "hypothesis-edge"))
    s = s.with_association(make_association(s, o.id, t.id, "observation-edge"))
    return s, h, o, t
