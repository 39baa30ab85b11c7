"""JSON document formats: specifications, plans and controllers."""

from __future__ import annotations

import logging
import re
from enum import StrEnum
from typing import Literal

from pydantic import Field, field_validator, model_validator

from .base import DocumentModel
from .events import Action, Event, EventSequence, sorted_actions
from .moves import MoveC, MoveE, MoveKind
from .spec import (
    Atom,
    Controllability,
    Duration,
    Endpoint,
    ExistentialStatement,
    GameSpec,
    PlanningProblem,
    Quantifier,
    StateVariable,
    SyncRule,
    Term,
)

logger = logging.getLogger(__name__)

SPEC_FORMAT = "tbsynth-spec/1"
PLAN_FORMAT = "tbsynth-plan/1"
CONTROLLER_FORMAT = "tbsynth-controller/1"

_TERM_RE = re.compile(r"^\s*(start|end)\s*\(\s*([A-Za-z0-9_]+)\s*\)\s*$")

# ============================================================================
# Specification document
# ============================================================================


class Owner(StrEnum):
    """Which player owns a variable in a game."""

    CONTROLLER = "controller"
    ENVIRONMENT = "environment"


class RuleRole(StrEnum):
    """Whether a rule is a system goal or a domain assumption."""

    SYSTEM = "system"
    DOMAIN = "domain"


class Relation(StrEnum):
    """Shorthand bounds for atoms."""

    BEFORE = "before"
    EQUALS = "equals"


class ValueDocument(DocumentModel):
    """One value of a variable with its successors, duration and controllability."""

    name: str
    next: list[str] | None = Field(None, description="Allowed successor values; omitted means every value.")
    min_duration: int = Field(0, ge=0)
    max_duration: int | None = Field(None, ge=0, description="null for +infinity.")
    controllable: bool = True


class VariableDocument(DocumentModel):
    """A state variable."""

    name: str
    owner: Owner = Owner.CONTROLLER
    values: list[ValueDocument] = Field(..., min_length=1)

    def to_model(self) -> StateVariable:
        """Build the domain model, filling defaulted transitions."""
        names = tuple(v.name for v in self.values)
        return StateVariable(
            name=self.name,
            values=names,
            transitions={v.name: frozenset(names if v.next is None else v.next) for v in self.values},
            durations={v.name: Duration(dmin=v.min_duration, dmax=v.max_duration) for v in self.values},
            controllability={
                v.name: Controllability.CONTROLLABLE if v.controllable else Controllability.UNCONTROLLABLE
                for v in self.values
            },
        )


class QuantifierDocument(DocumentModel):
    """``token[variable=value]``."""

    token: str
    variable: str
    value: str

    def to_model(self) -> Quantifier:
        """Build the domain model."""
        return Quantifier(token=self.token, variable=self.variable, value=self.value)


def parse_term(text: str) -> Term:
    """Parse ``start(a)`` / ``end(a)``.

    Raises:
        ValueError: If the text is not a term.
    """
    match = _TERM_RE.match(text)
    if not match:
        raise ValueError(f"not a term: {text!r}")
    return Term(endpoint=Endpoint(match.group(1)), token=match.group(2))


class AtomDocument(DocumentModel):
    """An atom ``lhs <=[lower,upper] rhs``, or a shorthand relation."""

    lhs: str = Field(..., examples=["start(a1)"])
    rhs: str = Field(..., examples=["end(a0)"])
    rel: Relation | None = None
    lower: int | None = Field(None, ge=0)
    upper: int | None = Field(None, ge=0, description="null for +infinity.")

    @field_validator("lhs", "rhs")
    @classmethod
    def _is_term(cls, text: str) -> str:
        parse_term(text)
        return text

    @model_validator(mode="after")
    def _rel_or_bounds(self) -> AtomDocument:
        if self.rel is not None and (self.lower is not None or self.upper is not None):
            raise ValueError("give either rel or explicit bounds, not both")
        return self

    def to_model(self) -> Atom:
        """Build the domain model, expanding shorthands."""
        lower, upper = self.lower or 0, self.upper
        if self.rel is Relation.EQUALS:
            lower, upper = 0, 0
        elif self.rel is Relation.BEFORE:
            lower, upper = 0, None
        return Atom(lhs=parse_term(self.lhs), rhs=parse_term(self.rhs), lower=lower, upper=upper)


class StatementDocument(DocumentModel):
    """An existential statement."""

    quantifiers: list[QuantifierDocument] = Field(default_factory=list)
    atoms: list[AtomDocument] = Field(default_factory=list)

    def to_model(self) -> ExistentialStatement:
        """Build the domain model."""
        return ExistentialStatement(
            quantifiers=tuple(q.to_model() for q in self.quantifiers),
            clause=tuple(a.to_model() for a in self.atoms),
        )


class RuleDocument(DocumentModel):
    """A synchronization rule. ``trigger: null`` is the (unsupported) triggerless form."""

    name: str | None = None
    role: RuleRole = RuleRole.SYSTEM
    trigger: QuantifierDocument | None
    statements: list[StatementDocument] = Field(default_factory=list)

    def to_model(self) -> SyncRule:
        """Build the domain model."""
        return SyncRule(
            name=self.name,
            trigger=self.trigger.to_model() if self.trigger else None,
            statements=tuple(s.to_model() for s in self.statements),
        )


class SpecDocument(DocumentModel):
    """Top-level specification file."""

    format: Literal["tbsynth-spec/1"] = SPEC_FORMAT
    variables: list[VariableDocument] = Field(default_factory=list)
    rules: list[RuleDocument] = Field(default_factory=list)

    def to_problem(self) -> PlanningProblem:
        """All variables and all rules, ignoring owners and roles."""
        return PlanningProblem(
            variables=tuple(v.to_model() for v in self.variables),
            rules=tuple(r.to_model() for r in self.rules),
        )

    def to_game(self) -> GameSpec:
        """Split variables by owner and rules by role."""
        return GameSpec(
            controlled=tuple(v.to_model() for v in self.variables if v.owner is Owner.CONTROLLER),
            external=tuple(v.to_model() for v in self.variables if v.owner is Owner.ENVIRONMENT),
            system_rules=tuple(r.to_model() for r in self.rules if r.role is RuleRole.SYSTEM),
            domain_rules=tuple(r.to_model() for r in self.rules if r.role is RuleRole.DOMAIN),
        )


# ============================================================================
# Plan document
# ============================================================================


class ActionDocument(DocumentModel):
    """``{"kind": "start", "var": "x", "value": "v"}``."""

    kind: Endpoint
    var: str
    value: str

    @classmethod
    def from_model(cls, action: Action) -> ActionDocument:
        """Serialize an action."""
        return cls(kind=action.kind, var=action.variable, value=action.value)

    def to_model(self) -> Action:
        """Build the domain model."""
        return Action(kind=self.kind, variable=self.var, value=self.value)


class EventDocument(DocumentModel):
    """An event. The first event's delta is not meaningful and is canonicalized to 1."""

    actions: list[ActionDocument] = Field(default_factory=list)
    delta: int = Field(1, ge=0)


class PlanDocument(DocumentModel):
    """Top-level plan file."""

    format: Literal["tbsynth-plan/1"] = PLAN_FORMAT
    events: list[EventDocument] = Field(default_factory=list)

    @classmethod
    def from_sequence(cls, seq: EventSequence) -> PlanDocument:
        """Serialize an event sequence."""
        return cls(
            events=[
                EventDocument(
                    actions=[ActionDocument.from_model(a) for a in sorted_actions(e.actions)],
                    delta=e.delta,
                )
                for e in seq.events
            ]
        )

    def to_sequence(self) -> EventSequence:
        """Build the event sequence, canonicalizing the first delta to 1.

        Raises:
            ValueError: If a later event has delta 0.
        """
        events = []
        for position, doc in enumerate(self.events, start=1):
            delta = doc.delta
            if position == 1 and delta != 1:
                logger.warning("first event delta canonicalized to 1", extra={"given": delta})
                delta = 1
            if delta < 1:
                raise ValueError(f"event {position} has delta {delta}; deltas after the first must be >= 1")
            events.append(Event(actions=frozenset(a.to_model() for a in doc.actions), delta=delta))
        return EventSequence(events=tuple(events))


# ============================================================================
# Controller document
# ============================================================================


class MoveDocument(DocumentModel):
    """A move of either player. Eve moves never use ``kind: wait``."""

    kind: MoveKind = MoveKind.PLAY
    delta: int | None = Field(None, ge=1)
    actions: list[ActionDocument] = Field(default_factory=list)

    @classmethod
    def from_charlie(cls, move: MoveC) -> MoveDocument:
        """Serialize a Charlie move."""
        return cls(
            kind=move.kind,
            delta=move.delta,
            actions=[ActionDocument.from_model(a) for a in sorted_actions(move.actions)],
        )

    @classmethod
    def from_eve(cls, move: MoveE) -> MoveDocument:
        """Serialize an Eve move."""
        return cls(delta=move.delta, actions=[ActionDocument.from_model(a) for a in sorted_actions(move.actions)])

    def to_charlie(self) -> MoveC:
        """Build a Charlie move."""
        return MoveC(kind=self.kind, delta=self.delta, actions=frozenset(a.to_model() for a in self.actions))

    def to_eve(self) -> MoveE:
        """Build an Eve move.

        Raises:
            ValueError: For wait moves, which Eve cannot play.
        """
        if self.kind is MoveKind.WAIT:
            raise ValueError("Eve never waits")
        return MoveE(delta=self.delta, actions=frozenset(a.to_model() for a in self.actions))


class ControllerStateDocument(DocumentModel):
    """A controller state with its output move."""

    id: int = Field(..., ge=0)
    goal: bool = Field(False, description="Whether the state is a goal state of the arena.")
    output: MoveDocument | None = Field(None, description="Move played in this state; null when terminal.")


class ControllerTransitionDocument(DocumentModel):
    """Controller transition on an Eve move."""

    source: int = Field(..., ge=0)
    eve: MoveDocument
    target: int = Field(..., ge=0)


class ControllerDocument(DocumentModel):
    """Top-level controller file (Moore machine)."""

    format: Literal["tbsynth-controller/1"] = CONTROLLER_FORMAT
    initial: int = Field(0, ge=0)
    states: list[ControllerStateDocument] = Field(default_factory=list)
    transitions: list[ControllerTransitionDocument] = Field(default_factory=list)
