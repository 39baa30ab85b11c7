"""Matching structures: partial satisfaction of one existential statement.

Terms are addressed by position in the statement's term list: token ``k`` (0 is the trigger)
owns ``start`` at ``2k`` and ``end`` at ``2k + 1``.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from functools import lru_cache
from itertools import combinations

from .dbm import INF, Dbm, init_dbm, render, shift
from .errors import ContractError
from .models import Event, EventSequence, ExistentialStatement, ProblemConstants, StateVariable, SyncRule, Term

TRIGGER_START = 0


class StatusKind(StrEnum):
    """Mutually exclusive status of a matching structure."""

    INITIAL = "initial"
    ACTIVE = "active"
    CLOSED = "closed"
    OTHER = "other"


@dataclass(frozen=True, slots=True)
class StructureStatus:
    """Status plus the residual flag (active with only unbounded pending terms)."""

    kind: StatusKind
    residual: bool = False


@dataclass(frozen=True, slots=True)
class StatementInfo:
    """Static data shared by every structure of one statement."""

    key: int
    rule_index: int
    statement_index: int
    rule: SyncRule = field(repr=False)
    statement: ExistentialStatement = field(repr=False)
    tokens: tuple[tuple[str, str], ...]
    dbm: Dbm = field(repr=False)
    horizon: int
    window: int

    @classmethod
    def create(
        cls,
        rule: SyncRule,
        statement_index: int,
        constants: ProblemConstants,
        variables: Mapping[str, StateVariable] | None = None,
        *,
        key: int = 0,
        rule_index: int = 0,
    ) -> StatementInfo:
        """Prepare a statement of a triggered rule.

        Args:
            rule: The enclosing rule, which must have a trigger.
            statement_index: Position of the statement in the rule body.
            constants: Horizon and window of the problem.
            variables: Variables whose duration bounds augment the initial matrix.
            key: Global index of the statement inside its automaton.
            rule_index: Index of the rule inside its automaton.
        """
        if rule.trigger is None:
            raise ContractError("triggerless rules have no matching structures")
        statement = rule.statements[statement_index]
        quantifiers = (rule.trigger, *statement.quantifiers)
        return cls(
            key=key,
            rule_index=rule_index,
            statement_index=statement_index,
            rule=rule,
            statement=statement,
            tokens=tuple((q.variable, q.value) for q in quantifiers),
            dbm=init_dbm(statement, rule.trigger, variables),
            horizon=constants.horizon,
            window=constants.window,
        )

    @property
    def size(self) -> int:
        """Number of terms."""
        return 2 * len(self.tokens)

    @property
    def label(self) -> str:
        """Human readable statement id."""
        return f"{self.rule.label(self.rule_index)}/{self.statement_index}"


@dataclass(frozen=True, slots=True, eq=False)
class MatchingStructure:
    """A statement's DBM, matched term positions and trigger clock.

    Identity is ``(statement key, matched, entries, clock)``.
    """

    info: StatementInfo
    dbm: Dbm
    matched: frozenset[int]
    clock: int = 0

    def _identity(self) -> tuple[object, ...]:
        return (self.info.key, self.matched, self.dbm.entries, self.clock)

    def __eq__(self, other: object) -> bool:
        """Compare by identity key."""
        if not isinstance(other, MatchingStructure):
            return NotImplemented
        return self._identity() == other._identity()

    def __hash__(self) -> int:
        """Hash of the identity key."""
        return hash(self._identity())

    @property
    def is_closed(self) -> bool:
        """All terms matched."""
        return len(self.matched) == self.info.size

    @property
    def is_active(self) -> bool:
        """Trigger start matched and not closed yet."""
        return TRIGGER_START in self.matched and not self.is_closed

    @property
    def matched_terms(self) -> list[Term]:
        """Matched terms in term order."""
        return [self.dbm.terms[i] for i in sorted(self.matched)]

    def __repr__(self) -> str:
        """Statement, matched terms and clock."""
        terms = ", ".join(str(t) for t in self.matched_terms)
        return f"MatchingStructure({self.info.label}, {{{terms}}}, t={self.clock})"


def initial_structure(info: StatementInfo) -> MatchingStructure:
    """Nothing matched, clock 0."""
    return MatchingStructure(info=info, dbm=info.dbm, matched=frozenset())


def status(ms: MatchingStructure) -> StructureStatus:
    """Classify a structure and compute its residual flag."""
    if not ms.matched:
        return StructureStatus(StatusKind.INITIAL)
    if ms.is_closed:
        return StructureStatus(StatusKind.CLOSED)
    if not ms.is_active:
        return StructureStatus(StatusKind.OTHER)
    entries = ms.dbm.entries
    pending = [j for j in range(ms.info.size) if j not in ms.matched]
    residual = all(entries[j][i] == INF for i in ms.matched for j in pending)
    return StructureStatus(StatusKind.ACTIVE, residual)


# ============================================================================
# Events against structures
# ============================================================================


@lru_cache(maxsize=8192)
def _event_index(event: Event) -> tuple[frozenset[tuple[str, str]], frozenset[tuple[str, str]]]:
    starts = frozenset((a.variable, a.value) for a in event.actions if a.is_start)
    ends = frozenset((a.variable, a.value) for a in event.actions if not a.is_start)
    return starts, ends


def _admissible(ms: MatchingStructure, delta: int) -> bool:
    entries = ms.dbm.entries
    for i in ms.matched:
        for j in range(ms.info.size):
            if j not in ms.matched and delta > entries[j][i]:
                return False
    return True


def admissible(ms: MatchingStructure, event: Event) -> bool:
    """No pending upper bound is exceeded by the event's delay."""
    return _admissible(ms, event.delta)


def _forced(ms: MatchingStructure, ends: frozenset[tuple[str, str]]) -> frozenset[int]:
    return frozenset(
        2 * k + 1
        for k, token in enumerate(ms.info.tokens)
        if 2 * k in ms.matched and 2 * k + 1 not in ms.matched and token in ends
    )


def forced_ends(ms: MatchingStructure, event: Event) -> frozenset[Term]:
    """End terms that the event's end actions force into every matched set."""
    _, ends = _event_index(event)
    return frozenset(ms.dbm.terms[i] for i in _forced(ms, ends))


def _valid(ms: MatchingStructure, chosen: frozenset[int], delta: int) -> bool:
    entries = ms.dbm.entries
    matched = ms.matched
    for t in chosen:
        column = [row[t] for row in entries]
        for other, bound in enumerate(column):
            if other != t and bound <= 0 and other not in matched and other not in chosen:
                return False
        for other in matched:
            if delta < -column[other]:
                return False
    for t, u in combinations(sorted(chosen), 2):
        forward, backward = entries[u][t], entries[t][u]
        if not (forward == 0 or backward == 0 or (forward == INF and backward == INF)):
            return False
    return True


def _candidates(ms: MatchingStructure, event: Event) -> list[frozenset[int]]:
    if not _admissible(ms, event.delta):
        return []
    starts, ends = _event_index(event)
    forced = _forced(ms, ends)
    optional = [2 * k for k, token in enumerate(ms.info.tokens) if 2 * k not in ms.matched and token in starts]
    result = []
    for size in range(len(optional) + 1):
        for extra in combinations(optional, size):
            chosen = forced.union(extra)
            if _valid(ms, chosen, event.delta):
                result.append(chosen)
    return result


def i_match_candidates(ms: MatchingStructure, event: Event) -> frozenset[frozenset[Term]]:
    """Every term set ``I`` for which the event is an I-match event."""
    terms = ms.dbm.terms
    return frozenset(frozenset(terms[i] for i in chosen) for chosen in _candidates(ms, event))


# ============================================================================
# Evolution
# ============================================================================


def _saturate(dbm: Dbm, matched: frozenset[int], cap: int) -> Dbm:
    """Clamp entries from matched to pending terms at ``cap``; past it they all behave alike."""
    rows = None
    for i in matched:
        row = dbm.entries[i]
        for j, value in enumerate(row):
            if j not in matched and value != INF and value > cap:
                if rows is None:
                    rows = [list(r) for r in dbm.entries]
                rows[i][j] = cap
    if rows is None:
        return dbm
    return Dbm(terms=dbm.terms, entries=tuple(tuple(r) for r in rows))


def _apply(ms: MatchingStructure, delta: int, chosen: frozenset[int]) -> MatchingStructure:
    info = ms.info
    dbm = _saturate(shift(ms.dbm, ms.matched, delta), ms.matched, info.horizon)
    clock = min(ms.clock + delta, info.window + info.horizon) if ms.is_active else ms.clock
    return MatchingStructure(info=info, dbm=dbm, matched=ms.matched | chosen, clock=clock)


def apply(ms: MatchingStructure, event: Event, chosen: Iterable[Term]) -> MatchingStructure:
    """Shift by the event's delay, then add ``chosen`` to the matched terms.

    Raises:
        ContractError: If ``chosen`` is not an I-match candidate for the event.
    """
    indices = ms.dbm.indices(list(chosen))
    if indices not in _candidates(ms, event):
        raise ContractError(f"{sorted(map(str, chosen))} is not a matching candidate for {event}")
    return _apply(ms, event.delta, indices)


def step(structures: Iterable[MatchingStructure], event: Event) -> frozenset[MatchingStructure]:
    """All structures reachable by one matching step on ``event``."""
    return frozenset(_apply(ms, event.delta, chosen) for ms in structures for chosen in _candidates(ms, event))


def run(ms: MatchingStructure, seq: EventSequence) -> frozenset[MatchingStructure]:
    """Every structure reachable from ``ms`` along the whole sequence."""
    current = frozenset((ms,))
    for event in seq.events:
        current = step(current, event)
    return current


def describe(ms: MatchingStructure) -> str:
    """Multi-line debug rendering: statement, matched terms, clock and matrix."""
    terms = ", ".join(str(t) for t in ms.matched_terms) or "-"
    return f"statement {ms.info.label}\nmatched {{{terms}}}\nclock {ms.clock}\n{render(ms.dbm)}"
