"""Evident: an embeddable, append-only knowledge base.

Facts live in content-addressed containers (observations, hypotheses,
tests), knowledge in direction-constrained associations between them, and
history in a hash-chained event log that replays deterministically.
"""

from .algebra import SelectabilityReport, compose, is_selectable, join, permute, project, restrict
from .engine import (
    BacklogEntry,
    GridCoordinate,
    GridView,
    KnowledgeReport,
    PENDING,
    StatusSummary,
    attach_observation,
    backlog,
    grid_to_csv,
    grid_view,
    hypothesis_status,
    knowledge_report,
    place_test,
    render_report_markdown,
)
from .errors import EvidentError
from .model import (
    ABDUCTION,
    Association,
    Container,
    DEDUCTION,
    HYPOTHESIS,
    INCOMPLETE,
    INDUCTION,
    OBSERVATION,
    Snapshot,
    TEST,
    classify_test,
    make_association,
    make_container,
    validate,
)
from .store import (
    Event,
    EventLog,
    append_event,
    deserialize_snapshot,
    replay,
    serialize_snapshot,
    verify_log,
)
from .workspace import Workspace

__version__ = "0.1.0"

__all__ = [
    "ABDUCTION",
    "Association",
    "BacklogEntry",
    "Container",
    "DEDUCTION",
    "Event",
    "EventLog",
    "EvidentError",
    "GridCoordinate",
    "GridView",
    "HYPOTHESIS",
    "INCOMPLETE",
    "INDUCTION",
    "KnowledgeReport",
    "OBSERVATION",
    "PENDING",
    "SelectabilityReport",
    "Snapshot",
    "StatusSummary",
    "TEST",
    "Workspace",
    "append_event",
    "attach_observation",
    "backlog",
    "classify_test",
    "compose",
    "deserialize_snapshot",
    "grid_to_csv",
    "grid_view",
    "hypothesis_status",
    "is_selectable",
    "join",
    "knowledge_report",
    "make_association",
    "make_container",
    "permute",
    "place_test",
    "project",
    "render_report_markdown",
    "replay",
    "restrict",
    "serialize_snapshot",
    "validate",
    "verify_log",
]
