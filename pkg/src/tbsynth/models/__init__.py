"""Pydantic models for specifications, plans, games and documents."""

from .base import DocumentModel, FrozenModel, normalize_keys
from .documents import (
    CONTROLLER_FORMAT,
    PLAN_FORMAT,
    SPEC_FORMAT,
    ControllerDocument,
    PlanDocument,
    SpecDocument,
    parse_term,
)
from .events import Action, Event, EventSequence, Openness, SequenceCheck, TokenView, sorted_actions
from .moves import MoveC, MoveE, MoveKind, Player, Round
from .spec import (
    UNBOUNDED,
    Atom,
    Constraint,
    Controllability,
    Diagnostic,
    Duration,
    Endpoint,
    ExistentialStatement,
    GameSpec,
    PlanningProblem,
    ProblemConstants,
    Quantifier,
    StateVariable,
    SyncRule,
    Term,
    ValidationReport,
)

__all__ = [
    "CONTROLLER_FORMAT",
    "PLAN_FORMAT",
    "SPEC_FORMAT",
    "UNBOUNDED",
    "Action",
    "Atom",
    "Constraint",
    "Controllability",
    "ControllerDocument",
    "Diagnostic",
    "DocumentModel",
    "Duration",
    "Endpoint",
    "Event",
    "EventSequence",
    "ExistentialStatement",
    "FrozenModel",
    "GameSpec",
    "MoveC",
    "MoveE",
    "MoveKind",
    "Openness",
    "PlanDocument",
    "PlanningProblem",
    "Player",
    "ProblemConstants",
    "Quantifier",
    "Round",
    "SequenceCheck",
    "SpecDocument",
    "StateVariable",
    "SyncRule",
    "Term",
    "TokenView",
    "ValidationReport",
    "normalize_keys",
    "parse_term",
]
