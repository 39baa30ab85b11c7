"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations

from collections.abc import Iterable
from typing import Any


class TbsynthError(Exception):
    """Base class for every error raised by tbsynth."""

    exit_code = 1


class InputError(TbsynthError):
    """Malformed input: undeclared identifiers, bad documents, bad positions."""

    exit_code = 2


class PositionError(InputError):
    """A 1-based position outside the event sequence."""


class NotApplicableError(TbsynthError):
    """A round or move that the rules of the game do not allow."""

    exit_code = 2

    def __init__(self, clause: str, reason: str):
        """Initialize the error.

        Args:
            clause: Violated applicability clause, "a" (well-formedness) or "b" (alternation).
            reason: Human readable explanation.
        """
        super().__init__(f"not applicable ({clause}): {reason}")
        self.clause = clause
        self.reason = reason


class ProtocolError(TbsynthError):
    """An Eve move that is not a legal edge at the current state."""

    exit_code = 2

    def __init__(self, move: Any, legal: Iterable[Any]):
        """Initialize the error.

        Args:
            move: The rejected move.
            legal: The moves that were legal at that point.
        """
        self.move = move
        self.legal = tuple(legal)
        listing = ", ".join(str(m) for m in self.legal) or "none"
        super().__init__(f"illegal move {move}; legal moves: {listing}")


class ContractError(TbsynthError):
    """A caller violated a documented precondition."""


class DbmOverflowError(TbsynthError):
    """A shifted DBM entry left the signed 64-bit range."""


class ResourceError(TbsynthError):
    """A configured state budget or enumeration guard was exceeded."""

    exit_code = 4

    def __init__(self, what: str, count: int, limit: int):
        """Initialize the error.

        Args:
            what: Name of the guarded quantity.
            count: Value reached when the guard tripped.
            limit: Configured limit.
        """
        super().__init__(f"{what} exceeded the limit of {limit} (reached {count})")
        self.what = what
        self.count = count
        self.limit = limit


class SynthesisImpossibleError(TbsynthError):
    """The environment wins the game, so no controller exists."""
