"""Plans as words: actions, events, event sequences and token views."""

from __future__ import annotations

from collections import Counter
from enum import StrEnum

from pydantic import Field, field_validator

from .base import IDENTIFIER_PATTERN, FrozenModel
from .spec import Endpoint


class Action(FrozenModel):
    """``start(x, v)`` or ``end(x, v)``."""

    kind: Endpoint
    variable: str = Field(..., pattern=IDENTIFIER_PATTERN)
    value: str = Field(..., pattern=IDENTIFIER_PATTERN)

    @classmethod
    def start(cls, variable: str, value: str) -> Action:
        """Build ``start(variable, value)``."""
        return cls(kind=Endpoint.START, variable=variable, value=value)

    @classmethod
    def end(cls, variable: str, value: str) -> Action:
        """Build ``end(variable, value)``."""
        return cls(kind=Endpoint.END, variable=variable, value=value)

    @property
    def is_start(self) -> bool:
        """True for start actions."""
        return self.kind is Endpoint.START

    def sort_key(self) -> tuple[str, int, str]:
        """Canonical order: by variable, ends before starts, then value."""
        return (self.variable, 0 if self.kind is Endpoint.END else 1, self.value)

    def __str__(self) -> str:
        """``start(x,v)`` or ``end(x,v)``."""
        return f"{self.kind}({self.variable},{self.value})"


def sorted_actions(actions: frozenset[Action] | set[Action]) -> list[Action]:
    """Actions in canonical order."""
    return sorted(actions, key=Action.sort_key)


class Event(FrozenModel):
    """A set of simultaneous actions happening ``delta`` time units after the previous event."""

    actions: frozenset[Action] = frozenset()
    delta: int = Field(1, ge=1, description="Time elapsed since the previous event.")

    @field_validator("actions")
    @classmethod
    def _one_start_and_end_per_variable(cls, actions: frozenset[Action]) -> frozenset[Action]:
        counts = Counter((action.variable, action.kind) for action in actions)
        clashes = sorted(f"{kind}({variable},...)" for (variable, kind), n in counts.items() if n > 1)
        if clashes:
            raise ValueError(f"more than one action of the same kind per variable: {', '.join(clashes)}")
        return actions

    def for_variable(self, variable: str) -> tuple[Action | None, Action | None]:
        """The (end, start) actions of ``variable`` in this event."""
        end = start = None
        for action in self.actions:
            if action.variable == variable:
                if action.is_start:
                    start = action
                else:
                    end = action
        return end, start

    def sort_key(self) -> tuple[int, list[tuple[str, int, str]]]:
        """Canonical order over events."""
        return (self.delta, [a.sort_key() for a in sorted_actions(self.actions)])

    def __str__(self) -> str:
        """``({actions}, delta)``."""
        inner = ", ".join(str(a) for a in sorted_actions(self.actions))
        return f"({{{inner}}}, {self.delta})"


class EventSequence(FrozenModel):
    """An ordered list of events. Positions are 1-based."""

    events: tuple[Event, ...] = ()

    def __len__(self) -> int:
        """Number of events."""
        return len(self.events)

    def __getitem__(self, position: int) -> Event:
        """The event at 1-based ``position``."""
        if not 1 <= position <= len(self.events):
            raise IndexError(position)
        return self.events[position - 1]

    def append(self, event: Event) -> EventSequence:
        """A new sequence with ``event`` added at the end."""
        return EventSequence(events=self.events + (event,))

    def __str__(self) -> str:
        """Events between angle brackets."""
        return "<" + ", ".join(str(e) for e in self.events) + ">"


class Openness(StrEnum):
    """How a variable's timeline is cut by the ends of the sequence."""

    CLOSED = "closed"
    OPEN_RIGHT = "open-right"
    OPEN_LEFT = "open-left"
    OPEN_BOTH = "open-both"


class TokenView(FrozenModel):
    """One token of a timeline. ``None`` marks an open endpoint."""

    variable: str
    value: str
    start: int | None = Field(None, ge=1, description="Position of the start action, None if open-left.")
    end: int | None = Field(None, ge=1, description="Position of the end action, None if open-right.")

    @property
    def closed(self) -> bool:
        """Both endpoints present."""
        return self.start is not None and self.end is not None


class SequenceCheck(FrozenModel):
    """Outcome of checking the well-formedness conditions of an event sequence."""

    position: int | None = Field(None, description="First violating position, None when well-formed.")
    conditions: tuple[int, ...] = Field((), description="Violated conditions (1-4) at that position.")

    @property
    def ok(self) -> bool:
        """True when every condition holds."""
        return self.position is None
