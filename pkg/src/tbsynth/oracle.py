"""Brute-force semantics used as ground truth for the automata.

Nothing here touches matrices or automata: rules are checked by searching token assignments
directly, plans are enumerated exhaustively and games are solved by bounded minimax.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from enum import StrEnum
from itertools import combinations, product

from pydantic import Field

from .arena import round_outcome
from .errors import NotApplicableError, ResourceError
from .events import check_event_sequence, is_closed, open_values, tokens_of, total_duration, transition_violations
from .models import (
    Action,
    Endpoint,
    Event,
    EventSequence,
    ExistentialStatement,
    FrozenModel,
    GameSpec,
    MoveC,
    MoveE,
    PlanningProblem,
    Quantifier,
    Round,
    StateVariable,
    SyncRule,
    Term,
)
from .problem import clause_to_constraints, constants, desugar_durations, duration_rule

logger = logging.getLogger(__name__)

DEFAULT_LIMIT = 2_000_000

# ============================================================================
# Rule satisfaction
# ============================================================================


@dataclass(frozen=True)
class MatchingAssignment:
    """Tokens chosen for the trigger and every quantified token name of one statement."""

    tokens: Mapping[str, tuple[int | None, int | None]]

    @property
    def positions(self) -> dict[Term, int | None]:
        """Position of every term; None for an endpoint outside the sequence."""
        result: dict[Term, int | None] = {}
        for name, (start, end) in self.tokens.items():
            result[Term.start(name)] = start
            result[Term.end(name)] = end
        return result


class RuleStatus(StrEnum):
    """Standing of a rule on a partial plan."""

    SATISFIED = "satisfied"
    PENDING = "pending"
    VIOLATED = "violated"


class _Timing:
    """Absolute times of positions and the tokens of a sequence."""

    def __init__(self, seq: EventSequence):
        self.times: list[int] = []
        elapsed = 0
        for index, event in enumerate(seq.events):
            elapsed += event.delta if index else 0
            self.times.append(elapsed)
        self.now = total_duration(seq)
        variables = sorted({a.variable for e in seq.events for a in e.actions})
        self.tokens: dict[tuple[str, str], list[tuple[int | None, int | None]]] = {}
        for variable in variables:
            for token in tokens_of(seq, variable):
                self.tokens.setdefault((variable, token.value), []).append((token.start, token.end))

    def time(self, position: int | None) -> int | None:
        return None if position is None else self.times[position - 1]

    def triggers(self, quantifier: Quantifier) -> list[tuple[int | None, int | None]]:
        return [t for t in self.tokens.get((quantifier.variable, quantifier.value), []) if t[0] is not None]


Slot = tuple[int | None, int | None]
_FUTURE: Slot = (None, None)


def _backtrack(
    quantifiers: Sequence[Quantifier],
    candidates: Callable[[Quantifier], Iterable[Slot]],
    consistent: Callable[[dict[str, Slot]], bool],
    assigned: dict[str, Slot],
) -> Iterator[dict[str, Slot]]:
    if not quantifiers:
        yield dict(assigned)
        return
    head, rest = quantifiers[0], quantifiers[1:]
    for slot in candidates(head):
        assigned[head.token] = slot
        if consistent(assigned):
            yield from _backtrack(rest, candidates, consistent, assigned)
        del assigned[head.token]


def _endpoint(slot: Slot, term: Term) -> int | None:
    return slot[0] if term.endpoint is Endpoint.START else slot[1]


def _satisfying(
    timing: _Timing,
    trigger: Quantifier,
    slot: Slot,
    statement: ExistentialStatement,
) -> Iterator[dict[str, Slot]]:
    def consistent(assigned: dict[str, Slot]) -> bool:
        for atom in statement.clause:
            if atom.lhs.token in assigned and atom.rhs.token in assigned:
                lhs = timing.time(_endpoint(assigned[atom.lhs.token], atom.lhs))
                rhs = timing.time(_endpoint(assigned[atom.rhs.token], atom.rhs))
                assert lhs is not None and rhs is not None
                distance = rhs - lhs
                if distance < atom.lower or (atom.upper is not None and distance > atom.upper):
                    return False
        return True

    def closed(quantifier: Quantifier) -> list[Slot]:
        return [t for t in timing.tokens.get((quantifier.variable, quantifier.value), []) if None not in t]

    if None in slot:
        return
    assigned = {trigger.token: slot}
    if consistent(assigned):
        yield from _backtrack(statement.quantifiers, closed, consistent, assigned)


def _viable(
    timing: _Timing,
    trigger: Quantifier,
    slot: Slot,
    statement: ExistentialStatement,
    variables: Mapping[str, StateVariable] | None,
) -> bool:
    constraints = clause_to_constraints(statement, trigger, variables)
    earliest = timing.now + 1

    def consistent(assigned: dict[str, Slot]) -> bool:
        for c in constraints:
            if c.lhs.token not in assigned or c.rhs.token not in assigned:
                continue
            x = timing.time(_endpoint(assigned[c.lhs.token], c.lhs))
            y = timing.time(_endpoint(assigned[c.rhs.token], c.rhs))
            if y is None:
                continue
            if (x if x is not None else earliest) - y > c.bound:
                return False
        return True

    def options(quantifier: Quantifier) -> list[Slot]:
        return [*timing.tokens.get((quantifier.variable, quantifier.value), []), _FUTURE]

    assigned = {trigger.token: slot}
    if not consistent(assigned):
        return False
    return next(_backtrack(statement.quantifiers, options, consistent, assigned), None) is not None


def find_assignment(seq: EventSequence, rule: SyncRule, trigger_position: int) -> MatchingAssignment | None:
    """A witness that the trigger token started at ``trigger_position`` is matched by some statement."""
    assert rule.trigger is not None
    timing = _Timing(seq)
    for slot in timing.triggers(rule.trigger):
        if slot[0] != trigger_position:
            continue
        for statement in rule.statements:
            found = next(_satisfying(timing, rule.trigger, slot, statement), None)
            if found is not None:
                return MatchingAssignment(tokens=found)
    return None


def satisfies_rule(seq: EventSequence, rule: SyncRule) -> bool:
    """Every trigger token is closed and matched by some statement through closed tokens."""
    trigger = rule.trigger
    if trigger is None:
        raise ValueError("triggerless rules are not supported")
    timing = _Timing(seq)
    return all(
        any(next(_satisfying(timing, trigger, slot, s), None) is not None for s in rule.statements)
        for slot in timing.triggers(trigger)
    )


def rule_status(
    seq: EventSequence,
    rule: SyncRule,
    variables: Mapping[str, StateVariable] | None = None,
) -> RuleStatus:
    """Classify a rule on a partial plan whose next event can come no earlier than one unit later.

    A trigger is pending when some statement can still be completed by tokens that are open or not
    started yet; ``variables`` adds their duration bounds to that test.
    """
    if rule.trigger is None:
        raise ValueError("triggerless rules are not supported")
    timing = _Timing(seq)
    outcome = RuleStatus.SATISFIED
    for slot in timing.triggers(rule.trigger):
        if any(next(_satisfying(timing, rule.trigger, slot, s), None) is not None for s in rule.statements):
            continue
        if any(_viable(timing, rule.trigger, slot, s, variables) for s in rule.statements):
            outcome = RuleStatus.PENDING
        else:
            return RuleStatus.VIOLATED
    return outcome


def is_solution_plan(seq: EventSequence, problem: PlanningProblem) -> bool:
    """Well-formed, closed, transition-compliant and satisfying every rule once durations are desugared."""
    if not check_event_sequence(seq).ok:
        return False
    if not is_closed(seq, [v.name for v in problem.variables]):
        return False
    if transition_violations(seq, problem.variables):
        return False
    return all(satisfies_rule(seq, rule) for rule in desugar_durations(problem).rules)


# ============================================================================
# Enumeration
# ============================================================================


class EnumBounds(FrozenModel):
    """Limits of an exhaustive enumeration."""

    max_length: int = Field(..., ge=0, description="Maximum number of events.")
    max_delta: int = Field(1, ge=1, description="Largest delay between consecutive events.")
    variables: tuple[str, ...] | None = Field(None, description="Variables to use; all when None.")


def _options(variable: StateVariable) -> list[tuple[Action, ...]]:
    options: list[tuple[Action, ...]] = [()]
    for v in variable.values:
        options.append((Action.start(variable.name, v),))
        options.append((Action.end(variable.name, v),))
        options.extend((Action.end(variable.name, v), Action.start(variable.name, w)) for w in variable.values)
    return options


def enumerate_sequences(
    variables: Iterable[StateVariable],
    bounds: EnumBounds,
    limit: int = DEFAULT_LIMIT,
) -> Iterator[EventSequence]:
    """Every well-formed sequence within ``bounds``, shortest extensions first in depth-first order.

    Sequences may be open on either side. The first event always has delay 1.

    Raises:
        ResourceError: Once more than ``limit`` sequences have been produced.
    """
    chosen = [v for v in variables if bounds.variables is None or v.name in bounds.variables]
    action_sets = [frozenset(a for group in combo for a in group) for combo in product(*map(_options, chosen))]
    produced = 0

    def walk(seq: EventSequence) -> Iterator[EventSequence]:
        nonlocal produced
        produced += 1
        if produced > limit:
            raise ResourceError("enumerated sequences", produced, limit)
        yield seq
        if len(seq) >= bounds.max_length:
            return
        deltas = range(1, bounds.max_delta + 1) if seq.events else range(1, 2)
        for actions in action_sets:
            for delta in deltas:
                extended = seq.append(Event(actions=actions, delta=delta))
                if check_event_sequence(extended).ok:
                    yield from walk(extended)

    yield from walk(EventSequence())


# ============================================================================
# Bounded minimax
# ============================================================================


class Verdict(StrEnum):
    """Outcome of a bounded game search."""

    CHARLIE = "charlie"
    EVE = "eve"
    UNKNOWN = "unknown"


def _charlie_choice(values: Iterable[Verdict]) -> Verdict:
    """Best verdict for Charlie, stopping at the first win."""
    result = Verdict.EVE
    for value in values:
        if value is Verdict.CHARLIE:
            return value
        if value is Verdict.UNKNOWN:
            result = value
    return result


def _eve_choice(values: Iterable[Verdict]) -> Verdict:
    """Best verdict for Eve; no reply at all leaves Charlie winning."""
    result = Verdict.CHARLIE
    for value in values:
        if value is Verdict.EVE:
            return value
        if value is Verdict.UNKNOWN:
            result = value
    return result


class _GameSearch:
    def __init__(self, game: GameSpec, limit: int):
        self.game = game
        self.limit = limit
        self.nodes = 0
        self.horizon = constants(game.as_problem()).horizon
        self.controlled = game.controlled_names
        self.by_name = {v.name: v for v in game.variables}
        durations = [(v, value) for v in game.variables for value in v.values if not v.duration(value).is_trivial]
        self.system_rules = game.system_rules + tuple(
            duration_rule(v, value) for v, value in durations if v.is_controllable(value)
        )
        self.domain_rules = game.domain_rules + tuple(
            duration_rule(v, value) for v, value in durations if not v.is_controllable(value)
        )
        self.domain_bounds = {
            v.name: v.model_copy(
                update={"durations": {val: v.duration(val) for val in v.values if not v.is_controllable(val)}}
            )
            for v in game.variables
        }

    # -- plan standing -------------------------------------------------------

    def terminated(self, seq: EventSequence) -> bool:
        if not seq.events:
            return False
        last = seq.events[-1]
        return any(last.for_variable(a.variable)[1] is None for a in last.actions if not a.is_start)

    def standing(self, seq: EventSequence) -> tuple[bool, bool, bool]:
        """(system met, system broken, domain broken)."""
        system = [rule_status(seq, r, self.by_name) for r in self.system_rules]
        charlie_ok = not transition_violations(seq, self.game.controlled)
        domain = [rule_status(seq, r, self.domain_bounds) for r in self.domain_rules]
        eve_ok = not transition_violations(seq, self.game.external)
        met = charlie_ok and all(s is RuleStatus.SATISFIED for s in system)
        broken = not charlie_ok or RuleStatus.VIOLATED in system
        domain_broken = not eve_ok or RuleStatus.VIOLATED in domain
        if self.terminated(seq) and any(s is not RuleStatus.SATISFIED for s in domain):
            domain_broken = True
        return met, broken, domain_broken

    # -- moves ---------------------------------------------------------------

    def _starts(self, names: Iterable[str]) -> list[frozenset[Action]]:
        options = [[None, *(Action.start(n, v) for v in self.by_name[n].values)] for n in names]
        return [frozenset(a for a in combo if a is not None) for combo in product(*options)]

    def _start_moves(self, seq: EventSequence, charlie: bool) -> list[frozenset[Action]]:
        if seq.events:
            ended = {a.variable for a in seq.events[-1].actions if not a.is_start}
        else:
            ended = set(self.by_name)
        names = sorted(n for n in ended if (n in self.controlled) == charlie)
        return self._starts(names)

    def _ends(self, seq: EventSequence, charlie: bool) -> list[Action]:
        held = open_values(seq)
        return sorted(
            (Action.end(n, v) for n, v in held.items() if self.by_name[n].is_controllable(v) == charlie),
            key=Action.sort_key,
        )

    def _apply(self, seq: EventSequence, charlie: MoveC, eve: MoveE) -> EventSequence | None:
        try:
            return round_outcome(seq, Round(charlie=charlie, eve=eve))
        except (NotApplicableError, ValueError):
            return None

    # -- search --------------------------------------------------------------

    def solve(self, seq: EventSequence, depth: int) -> Verdict:
        self.nodes += 1
        if self.nodes > self.limit:
            raise ResourceError("minimax nodes", self.nodes, self.limit)
        if seq.events:
            met, broken, domain_broken = self.standing(seq)
            if met or domain_broken:
                return Verdict.CHARLIE
            if broken and not self.domain_rules:
                return Verdict.EVE
            if self.terminated(seq):
                return Verdict.EVE
        if not seq.events:
            if depth < 1:
                return Verdict.UNKNOWN
            return self._starting(seq, depth - 1)
        if depth < 2:
            return Verdict.UNKNOWN
        return _charlie_choice(self._ending(seq, depth - 2))

    def _starting(self, seq: EventSequence, depth: int) -> Verdict:
        def eve_replies(charlie: MoveC) -> Iterator[Verdict]:
            for starts in self._start_moves(seq, charlie=False):
                after = self._apply(seq, charlie, MoveE.play(starts))
                if after is not None:
                    yield self.solve(after, depth)

        charlie_moves = [MoveC.play(s) for s in self._start_moves(seq, charlie=True)]
        return _charlie_choice(_eve_choice(eve_replies(m)) for m in charlie_moves)

    def _ending(self, seq: EventSequence, depth: int) -> Iterator[Verdict]:
        charlie_ends = self._ends(seq, charlie=True)
        eve_ends = self._ends(seq, charlie=False)
        eve_subsets = [frozenset(c) for size in range(len(eve_ends) + 1) for c in combinations(eve_ends, size)]
        for size in range(1, len(charlie_ends) + 1):
            for chosen in combinations(charlie_ends, size):
                move = MoveC.play(frozenset(chosen))
                yield _eve_choice(self._after_end(seq, move, MoveE.play(f), depth) for f in eve_subsets)
        for waited in range(1, self.horizon + 1):
            move = MoveC.wait(waited)
            yield _eve_choice(
                self._after_end(seq, move, MoveE.play(f, delta), depth)
                for delta in range(1, waited + 1)
                for f in eve_subsets
            )

    def _after_end(self, seq: EventSequence, charlie: MoveC, eve: MoveE, depth: int) -> Verdict:
        after = self._apply(seq, charlie, eve)
        if after is None:
            return Verdict.CHARLIE
        return self._starting(after, depth)


def minimax_winner(game: GameSpec, depth: int, limit: int = DEFAULT_LIMIT) -> Verdict:
    """Solve ``game`` by backward induction over at most ``depth`` rounds.

    Success is only evaluated between events. A plan is lost for Charlie when the system side is
    broken and the game has no domain rules that Eve could break.

    Raises:
        ResourceError: If more than ``limit`` search nodes are visited.
    """
    search = _GameSearch(game, limit)
    verdict = search.solve(EventSequence(), depth)
    logger.info("minimax finished", extra={"verdict": verdict.value, "nodes": search.nodes, "depth": depth})
    return verdict
