"""Players, moves and rounds of a timeline-based game."""

from __future__ import annotations

from enum import StrEnum
from typing import Any

from pydantic import Field, model_validator

from .base import FrozenModel
from .events import Action, sorted_actions


class Player(StrEnum):
    """The controller (Charlie) and the environment (Eve)."""

    CHARLIE = "charlie"
    EVE = "eve"


class MoveKind(StrEnum):
    """Charlie either waits or plays a set of actions."""

    PLAY = "play"
    WAIT = "wait"


def _homogeneous(actions: frozenset[Action]) -> bool:
    return len({action.kind for action in actions}) <= 1


def _render_actions(actions: frozenset[Action]) -> str:
    return "{" + ", ".join(str(a) for a in sorted_actions(actions)) + "}"


class MoveC(FrozenModel):
    """A Charlie move: ``wait(delta)`` or ``play(actions)``.

    An empty ``play`` only appears as the chain step of a starting phase in which Charlie starts nothing.
    """

    kind: MoveKind
    delta: int | None = Field(None, ge=1, description="Waiting time, only for wait moves.")
    actions: frozenset[Action] = frozenset()

    @model_validator(mode="after")
    def _check_shape(self) -> MoveC:
        if self.kind is MoveKind.WAIT:
            if self.delta is None or self.actions:
                raise ValueError("wait moves carry a delay and no actions")
        elif self.delta is not None:
            raise ValueError("play moves carry no delay")
        if not _homogeneous(self.actions):
            raise ValueError("a move plays only starting or only ending actions")
        return self

    @classmethod
    def wait(cls, delta: int) -> MoveC:
        """Build ``wait(delta)``."""
        return cls(kind=MoveKind.WAIT, delta=delta)

    @classmethod
    def play(cls, actions: frozenset[Action] | set[Action] = frozenset()) -> MoveC:
        """Build ``play(actions)``."""
        return cls(kind=MoveKind.PLAY, actions=frozenset(actions))

    def sort_key(self) -> tuple[Any, ...]:
        """Canonical total order used for deterministic tie-breaking."""
        return (self.kind.value, self.delta or 0, [a.sort_key() for a in sorted_actions(self.actions)])

    def __str__(self) -> str:
        """``wait(d)`` or ``play({...})``."""
        if self.kind is MoveKind.WAIT:
            return f"wait({self.delta})"
        return f"play({_render_actions(self.actions)})"


class MoveE(FrozenModel):
    """An Eve move: ``play(actions)`` or ``play(delta, actions)``; the action set may be empty."""

    actions: frozenset[Action] = frozenset()
    delta: int | None = Field(None, ge=1, description="Time increment, only when answering a wait.")

    @model_validator(mode="after")
    def _check_shape(self) -> MoveE:
        if not _homogeneous(self.actions):
            raise ValueError("a move plays only starting or only ending actions")
        return self

    @classmethod
    def play(cls, actions: frozenset[Action] | set[Action] = frozenset(), delta: int | None = None) -> MoveE:
        """Build ``play(actions)`` or ``play(delta, actions)``."""
        return cls(actions=frozenset(actions), delta=delta)

    @property
    def effective_delta(self) -> int:
        """The time increment this move contributes (1 when none is given)."""
        return self.delta if self.delta is not None else 1

    def sort_key(self) -> tuple[Any, ...]:
        """Canonical total order used for deterministic listings."""
        return (self.delta or 0, [a.sort_key() for a in sorted_actions(self.actions)])

    def __str__(self) -> str:
        """``play({...})`` or ``play(d, {...})``."""
        if self.delta is None:
            return f"play({_render_actions(self.actions)})"
        return f"play({self.delta}, {_render_actions(self.actions)})"


class Round(FrozenModel):
    """A Charlie move paired with the Eve move that answers it."""

    charlie: MoveC
    eve: MoveE

    @model_validator(mode="after")
    def _check_pairing(self) -> Round:
        if self.charlie.kind is MoveKind.WAIT:
            if self.eve.delta is None or self.charlie.delta is None or self.eve.delta > self.charlie.delta:
                raise ValueError("a wait is answered by play(delta_E, ...) with delta_E <= delta_C")
            if any(action.is_start for action in self.eve.actions):
                raise ValueError("a wait opens an ending round")
        else:
            if self.eve.delta is not None:
                raise ValueError("a play is answered by a play without delay")
            kinds = {a.kind for a in self.charlie.actions | self.eve.actions}
            if len(kinds) > 1:
                raise ValueError("both moves of a round are starting or both are ending")
        return self

    @property
    def is_ending(self) -> bool:
        """True for ending rounds. Rounds with no actions at all count as starting."""
        if self.charlie.kind is MoveKind.WAIT:
            return True
        return any(not a.is_start for a in self.charlie.actions | self.eve.actions)

    @property
    def actions(self) -> frozenset[Action]:
        """Union of both players' actions."""
        return self.charlie.actions | self.eve.actions

    def __str__(self) -> str:
        """Both moves in brackets."""
        return f"[{self.charlie} | {self.eve}]"
