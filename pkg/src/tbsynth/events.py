"""Well-formedness, elapsed time and token bookkeeping over event sequences."""

from __future__ import annotations

from collections.abc import Iterable

from .errors import InputError, PositionError
from .models import Action, EventSequence, Openness, SequenceCheck, StateVariable, TokenView


def _check_declared(seq: EventSequence, variables: Iterable[StateVariable]) -> None:
    domains = {v.name: set(v.values) for v in variables}
    for position, event in enumerate(seq.events, start=1):
        for action in event.actions:
            if action.variable not in domains:
                raise InputError(f"event {position}: undeclared variable {action.variable!r}")
            if action.value not in domains[action.variable]:
                raise InputError(f"event {position}: undeclared value {action.value!r} of {action.variable!r}")


def check_event_sequence(seq: EventSequence, variables: Iterable[StateVariable] | None = None) -> SequenceCheck:
    """Check the four well-formedness conditions and report the first violating position.

    Violations of conditions 1 and 2 are reported at the later of the two clashing events.

    Raises:
        InputError: If ``variables`` is given and an action uses an undeclared variable or value.
    """
    if variables is not None:
        _check_declared(seq, variables)
    n = len(seq.events)
    actions = [event.actions for event in seq.events]
    found: dict[int, set[int]] = {}

    def flag(position: int, condition: int) -> None:
        found.setdefault(position, set()).add(condition)

    def has(position: int, kind_start: bool, variable: str, value: str | None = None) -> bool:
        return any(
            a.is_start == kind_start and a.variable == variable and (value is None or a.value == value)
            for a in actions[position - 1]
        )

    for i in range(1, n + 1):
        for action in actions[i - 1]:
            x, v = action.variable, action.value
            if action.is_start:
                # 1: no other start of x before the token's closing end
                closing = next((k for k in range(i + 1, n + 1) if has(k, False, x, v)), n + 1)
                for j in range(i + 1, closing):
                    if has(j, True, x):
                        flag(j, 1)
                # 4: later starts come with an end
                if i > 1 and not has(i, False, x):
                    flag(i, 4)
            else:
                # 2: no other end of x since the token's opening start
                opening = next((k for k in range(i - 1, 0, -1) if has(k, True, x, v)), 0)
                for j in range(opening + 1, i):
                    if has(j, False, x):
                        flag(i, 2)
                # 3: ends before the last event come with a start
                if i < n and not has(i, True, x):
                    flag(i, 3)
    if not found:
        return SequenceCheck()
    position = min(found)
    return SequenceCheck(position=position, conditions=tuple(sorted(found[position])))


def duration_between(seq: EventSequence, i: int, j: int) -> int:
    """Time elapsed from position ``i`` to position ``j`` (sum of deltas of events i+1..j).

    Raises:
        PositionError: Unless ``1 <= i <= j <= len(seq)``.
    """
    if not 1 <= i <= j <= len(seq):
        raise PositionError(f"positions must satisfy 1 <= i <= j <= {len(seq)}, got i={i}, j={j}")
    return sum(event.delta for event in seq.events[i:j])


def total_duration(seq: EventSequence) -> int:
    """Duration of the whole sequence (0 for the empty one)."""
    return duration_between(seq, 1, len(seq)) if len(seq) else 0


def tokens_of(seq: EventSequence, variable: str) -> list[TokenView]:
    """Tokens of one variable in order.

    An end whose value differs from the open token leaves that token open to the right and
    closes a separate token open to the left.
    """
    tokens: list[TokenView] = []
    current: Action | None = None
    opened_at: int | None = None
    for position, event in enumerate(seq.events, start=1):
        end, start = event.for_variable(variable)
        if end is not None:
            if current is not None and current.value != end.value:
                tokens.append(TokenView(variable=variable, value=current.value, start=opened_at, end=None))
                opened_at = None
            tokens.append(TokenView(variable=variable, value=end.value, start=opened_at, end=position))
            current, opened_at = None, None
        if start is not None:
            current, opened_at = start, position
    if current is not None:
        tokens.append(TokenView(variable=variable, value=current.value, start=opened_at, end=None))
    return tokens


def openness(seq: EventSequence, variable: str) -> Openness:
    """Classify how the sequence cuts the timeline of ``variable``."""
    tokens = tokens_of(seq, variable)
    left = any(token.start is None for token in tokens)
    right = any(token.end is None for token in tokens)
    if left and right:
        return Openness.OPEN_BOTH
    if left:
        return Openness.OPEN_LEFT
    if right:
        return Openness.OPEN_RIGHT
    return Openness.CLOSED


def is_closed(seq: EventSequence, variables: Iterable[str]) -> bool:
    """Every listed variable is closed on both sides."""
    return all(openness(seq, name) is Openness.CLOSED for name in variables)


def is_partial_plan(seq: EventSequence, variables: Iterable[str]) -> bool:
    """Closed to the left for every listed variable."""
    return all(openness(seq, name) in (Openness.CLOSED, Openness.OPEN_RIGHT) for name in variables)


def open_values(seq: EventSequence) -> dict[str, str]:
    """Values currently held by variables whose last token has not ended."""
    held: dict[str, str] = {}
    for event in seq.events:
        for action in event.actions:
            if not action.is_start:
                held.pop(action.variable, None)
        for action in event.actions:
            if action.is_start:
                held[action.variable] = action.value
    return held


def transition_violations(seq: EventSequence, variables: Iterable[StateVariable]) -> list[tuple[int, str]]:
    """Positions and variables where a token is followed by a value its transition relation forbids."""
    violations = []
    for variable in variables:
        for position, event in enumerate(seq.events, start=1):
            end, start = event.for_variable(variable.name)
            if end is not None and start is not None and start.value not in variable.transition(end.value):
                violations.append((position, variable.name))
    return violations
