"""Game-side constructions: action ownership, rounds, the game automaton and its move-split arena."""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from enum import StrEnum
from itertools import combinations, product

from .automaton import (
    BOTTOM,
    LazyDfa,
    State,
    SyncAutomaton,
    TvAutomaton,
    TvState,
    complement,
    intersect,
    union,
)
from .dot import digraph
from .errors import NotApplicableError, ResourceError
from .events import check_event_sequence, open_values
from .models import Action, Event, EventSequence, GameSpec, MoveC, MoveE, PlanningProblem, Player, Round
from .problem import constants

logger = logging.getLogger(__name__)

Move = MoveC | MoveE

# ============================================================================
# Actions and rounds
# ============================================================================


def partition_actions(game: GameSpec) -> tuple[frozenset[Action], frozenset[Action]]:
    """Split every action into Charlie's and Eve's.

    Starts belong to the variable's owner; ends belong to Charlie exactly for controllable values.
    """
    controlled = game.controlled_names
    charlie: set[Action] = set()
    eve: set[Action] = set()
    for variable in game.variables:
        for value in variable.values:
            (charlie if variable.name in controlled else eve).add(Action.start(variable.name, value))
            (charlie if variable.is_controllable(value) else eve).add(Action.end(variable.name, value))
    return frozenset(charlie), frozenset(eve)


def round_outcome(seq: EventSequence, round_: Round) -> EventSequence:
    """Apply a round to a partial plan.

    Starting rounds merge their actions into the last event (or open the plan with a first event
    of delay 1); ending rounds append a new event.

    Raises:
        NotApplicableError: With clause "b" when an ending round ends a token that is not open, and
            clause "a" when the result is not a well-formed event sequence.
    """
    actions = round_.actions
    if round_.is_ending:
        held = open_values(seq)
        stale = sorted(str(a) for a in actions if held.get(a.variable) != a.value)
        if stale:
            raise NotApplicableError("b", f"ending closed tokens: {', '.join(stale)}")
        delta = round_.eve.effective_delta
        result = seq.append(Event(actions=actions, delta=delta))
    elif not seq.events:
        result = seq.append(Event(actions=actions, delta=1))
    elif not actions:
        return seq
    else:
        last = seq.events[-1]
        try:
            merged = Event(actions=last.actions | actions, delta=last.delta)
        except ValueError as exc:
            raise NotApplicableError("a", str(exc)) from exc
        result = EventSequence(events=seq.events[:-1] + (merged,))
    check = check_event_sequence(result)
    if not check.ok:
        raise NotApplicableError("a", f"condition(s) {list(check.conditions)} violated at event {check.position}")
    return result


def play_to_sequence(moves: Sequence[Move]) -> EventSequence:
    """Fold a play given as alternating Charlie and Eve moves into its event sequence.

    A trailing unanswered Charlie move is ignored.
    """
    seq = EventSequence()
    for index in range(0, len(moves) - 1, 2):
        charlie, eve = moves[index], moves[index + 1]
        if not isinstance(charlie, MoveC) or not isinstance(eve, MoveE):
            raise NotApplicableError("b", f"moves {index} and {index + 1} do not form a Charlie/Eve pair")
        seq = round_outcome(seq, Round(charlie=charlie, eve=eve))
    return seq


# ============================================================================
# Game automaton
# ============================================================================


class GameDfa(LazyDfa):
    """Union of the system side with the complement of the domain side, read on partial plans.

    States are ``(structure, (system, domain))``. The structure component tracks token openness
    over every variable and makes ill-formed events undefined.
    """

    def __init__(self, game: GameSpec):
        """Build both sides of ``game``."""
        self.game = game
        self.horizon = constants(game.as_problem()).horizon
        self.structure = TvAutomaton(game.variables, require_closed=False, check_transitions=())
        self.system = intersect(
            SyncAutomaton(
                PlanningProblem(variables=game.variables, rules=game.system_rules),
                duration_rules=lambda variable, value: variable.is_controllable(value),
            ),
            TvAutomaton(game.controlled, require_closed=False),
        )
        self.domain = intersect(
            SyncAutomaton(
                PlanningProblem(variables=game.variables, rules=game.domain_rules),
                duration_rules=lambda variable, value: not variable.is_controllable(value),
                augment=lambda variable, value: not variable.is_controllable(value),
            ),
            TvAutomaton(game.external, require_closed=False),
        )
        self.goal = union(self.system, complement(self.domain))

    @property
    def initial(self) -> State:
        """Empty plan."""
        return (self.structure.initial, self.goal.initial)

    def successor(self, state: State, event: Event) -> State | None:
        """Advance both sides; undefined when the event breaks the timeline structure."""
        structure, sides = state  # type: ignore[misc]
        after = self.structure.successor(structure, event)
        if after is BOTTOM:
            return None
        sides = self.goal.successor(sides, event)
        return None if sides is None else (after, sides)

    def is_final(self, state: State) -> bool:
        """A nonempty plan meeting the system side or breaking the domain side.

        The domain side is broken once it is dead, or when the plan has terminated with domain
        obligations still pending.
        """
        structure, sides = state  # type: ignore[misc]
        if structure.fresh:
            return False
        if structure.terminated:
            return self.goal.is_final(sides)
        system, domain = sides
        return self.system.is_final(system) or self.domain.is_dead(domain)

    def timeline(self, state: State) -> TvState:
        """Token openness of the plan that reached ``state``."""
        structure, _ = state  # type: ignore[misc]
        return structure

    def describe(self, state: State) -> str:
        """Openness plus both side labels."""
        structure, sides = state  # type: ignore[misc]
        return f"{self.structure.describe(structure)}\n{self.goal.describe(sides)}"


def build_game_dfa(game: GameSpec) -> GameDfa:
    """Automaton whose final states are the successful partial plans of ``game``."""
    return GameDfa(game)


class PrunedDfa(LazyDfa):
    """The game automaton without events that delay a Charlie-owned end by more than one unit.

    Args:
        inner: Game automaton to prune.
        literal: Treat every end of a controlled variable as Charlie's instead of every end of
            a controllable value.
    """

    def __init__(self, inner: GameDfa, *, literal: bool = False):
        """Wrap ``inner``."""
        self.inner = inner
        self.literal = literal
        game = inner.game
        if literal:
            controlled = game.controlled_names
            self._charlie_ends = frozenset(
                Action.end(v.name, value) for v in game.variables if v.name in controlled for value in v.values
            )
        else:
            charlie, _ = partition_actions(game)
            self._charlie_ends = frozenset(a for a in charlie if not a.is_start)

    @property
    def initial(self) -> State:
        """Initial state of the game automaton."""
        return self.inner.initial

    def is_pruned(self, event: Event) -> bool:
        """Whether the transition on ``event`` is removed."""
        return event.delta > 1 and not self._charlie_ends.isdisjoint(event.actions)

    def successor(self, state: State, event: Event) -> State | None:
        """Undefined on pruned events."""
        if self.is_pruned(event):
            return None
        return self.inner.successor(state, event)

    def is_final(self, state: State) -> bool:
        """Same finality as the game automaton."""
        return self.inner.is_final(state)

    def describe(self, state: State) -> str:
        """Game automaton label."""
        return self.inner.describe(state)


def prune(dfa: GameDfa, *, literal: bool = False) -> PrunedDfa:
    """Drop transitions on ``(A, delta)`` with ``delta > 1`` and a Charlie end in ``A``."""
    return PrunedDfa(dfa, literal=literal)


# ============================================================================
# Arena
# ============================================================================


class Phase(StrEnum):
    """Position of an arena state inside the move chain of one event."""

    ORIGINAL = "original"
    AFTER_WAIT = "after-wait"
    EVE_ENDS = "eve-ends"
    CHARLIE_STARTS = "charlie-starts"
    EVE_STARTS = "eve-starts"


_CHARLIE_PHASES = frozenset({Phase.ORIGINAL, Phase.CHARLIE_STARTS})


@dataclass(frozen=True, slots=True)
class ArenaState:
    """A base automaton state, or an intermediate point of the chain leaving it."""

    phase: Phase
    base: State
    delta: int = 0
    actions: frozenset[Action] = frozenset()

    @property
    def turn(self) -> Player:
        """Player to move."""
        return Player.CHARLIE if self.phase in _CHARLIE_PHASES else Player.EVE

    @property
    def kind(self) -> str:
        """``original``, ``after-wait`` or ``partial``."""
        if self.phase in (Phase.ORIGINAL, Phase.AFTER_WAIT):
            return self.phase.value
        return "partial"


def _subsets(items: Iterable[Action], *, nonempty: bool = False) -> Iterator[frozenset[Action]]:
    ordered = sorted(items, key=Action.sort_key)
    for size in range(1 if nonempty else 0, len(ordered) + 1):
        for chosen in combinations(ordered, size):
            yield frozenset(chosen)


def _start_choices(variables: Iterable[tuple[str, tuple[str, ...]]]) -> Iterator[frozenset[Action]]:
    options = [[None, *(Action.start(name, v) for v in values)] for name, values in variables]
    for combination in product(*options):
        yield frozenset(a for a in combination if a is not None)


class Arena:
    """Turn-based arena obtained by splitting every event into its players' moves.

    States are numbered in breadth-first discovery order; state 0 is the initial state.
    """

    def __init__(self, dfa: PrunedDfa, budget: int):
        """Build the arena reachable from the initial state.

        Raises:
            ResourceError: If more than ``budget`` states are interned.
        """
        self.dfa = dfa
        self.game = dfa.inner.game
        self.horizon = dfa.inner.horizon
        charlie, eve = partition_actions(self.game)
        self._charlie_ends = frozenset(a for a in charlie if not a.is_start)
        self._eve_ends = frozenset(a for a in eve if not a.is_start)
        controlled = self.game.controlled_names
        self._domains = {v.name: v.values for v in self.game.variables}
        self._owned = {
            Player.CHARLIE: tuple(v.name for v in self.game.variables if v.name in controlled),
            Player.EVE: tuple(v.name for v in self.game.variables if v.name not in controlled),
        }

        initial = ArenaState(phase=Phase.ORIGINAL, base=dfa.initial)
        self.states: list[ArenaState] = [initial]
        self.index: dict[ArenaState, int] = {initial: 0}
        self.edges: list[list[tuple[Move, int]]] = []
        queue = deque([0])
        while queue:
            source = queue.popleft()
            out: list[tuple[Move, int]] = []
            for move, target in self._moves(self.states[source]):
                if target not in self.index:
                    if len(self.states) >= budget:
                        raise ResourceError("arena states", len(self.states) + 1, budget)
                    self.index[target] = len(self.states)
                    self.states.append(target)
                    queue.append(self.index[target])
                out.append((move, self.index[target]))
            out.sort(key=lambda edge: edge[0].sort_key())
            self.edges.append(out)
            if len(self.states) % 10_000 == 0:
                logger.debug("splitting", extra={"states": len(self.states)})
        self.finals = frozenset(
            i for i, s in enumerate(self.states) if s.phase is Phase.ORIGINAL and dfa.is_final(s.base)
        )
        logger.info("arena built", extra=self.stats())

    @property
    def initial(self) -> int:
        """Id of the initial state."""
        return 0

    def __len__(self) -> int:
        """Number of arena states."""
        return len(self.states)

    def turn(self, state: int) -> Player:
        """Owner of ``state``."""
        return self.states[state].turn

    def moves(self, state: int) -> list[Move]:
        """Moves available at ``state`` in canonical order."""
        return [move for move, _ in self.edges[state]]

    def target(self, state: int, move: Move) -> int | None:
        """Successor of ``state`` under ``move``, or None when the edge does not exist."""
        for candidate, target in self.edges[state]:
            if candidate == move:
                return target
        return None

    def stats(self) -> dict[str, int]:
        """State, edge and final-state counts."""
        return {
            "states": len(self.states),
            "edges": sum(len(out) for out in self.edges),
            "finals": len(self.finals),
        }

    # -- move generation -----------------------------------------------------

    def _startable(self, state: ArenaState, player: Player) -> list[tuple[str, tuple[str, ...]]]:
        timeline = self.dfa.inner.timeline(state.base)
        ended = {a.variable for a in state.actions if not a.is_start}
        return [(name, self._domains[name]) for name in self._owned[player] if timeline.fresh or name in ended]

    def _open_ends(self, state: ArenaState, owned: frozenset[Action]) -> list[Action]:
        timeline = self.dfa.inner.timeline(state.base)
        held = timeline.open_values(self.dfa.inner.structure.names)
        return [Action.end(name, value) for name, value in held.items() if Action.end(name, value) in owned]

    def _moves(self, state: ArenaState) -> Iterator[tuple[Move, ArenaState]]:
        phase, base = state.phase, state.base
        if phase is Phase.ORIGINAL:
            timeline = self.dfa.inner.timeline(base)
            if timeline.terminated:
                return
            if timeline.fresh:
                for starts in _start_choices(self._startable(state, Player.CHARLIE)):
                    yield MoveC.play(starts), ArenaState(Phase.EVE_STARTS, base, 1, starts)
                return
            for ends in _subsets(self._open_ends(state, self._charlie_ends), nonempty=True):
                yield MoveC.play(ends), ArenaState(Phase.EVE_ENDS, base, 1, ends)
            for delta in range(1, self.horizon + 1):
                yield MoveC.wait(delta), ArenaState(Phase.AFTER_WAIT, base, delta)
        elif phase is Phase.EVE_ENDS:
            for ends in _subsets(self._open_ends(state, self._eve_ends)):
                yield MoveE.play(ends), ArenaState(Phase.CHARLIE_STARTS, base, 1, state.actions | ends)
        elif phase is Phase.AFTER_WAIT:
            for delta in range(1, state.delta + 1):
                for ends in _subsets(self._open_ends(state, self._eve_ends)):
                    yield MoveE.play(ends, delta), ArenaState(Phase.CHARLIE_STARTS, base, delta, ends)
        elif phase is Phase.CHARLIE_STARTS:
            for starts in _start_choices(self._startable(state, Player.CHARLIE)):
                yield MoveC.play(starts), ArenaState(Phase.EVE_STARTS, base, state.delta, state.actions | starts)
        else:
            for starts in _start_choices(self._startable(state, Player.EVE)):
                event = Event(actions=state.actions | starts, delta=state.delta)
                target = self.dfa.successor(base, event)
                if target is not None:
                    yield MoveE.play(starts), ArenaState(Phase.ORIGINAL, target)


def split(dfa: PrunedDfa, budget: int) -> Arena:
    """Build the move-split arena of a pruned game automaton."""
    return Arena(dfa, budget)


def build_arena(game: GameSpec, budget: int, *, literal: bool = False) -> Arena:
    """Game automaton, pruning and splitting in one call."""
    return split(prune(build_game_dfa(game), literal=literal), budget)


def read_play(arena: Arena, moves: Sequence[Move]) -> int:
    """Walk ``moves`` from the initial state and return the state reached.

    Raises:
        NotApplicableError: With clause "b" for a move of the wrong player and clause "a" for a
            move that is not an edge.
    """
    state = arena.initial
    for step, move in enumerate(moves):
        expected = MoveC if arena.turn(state) is Player.CHARLIE else MoveE
        if not isinstance(move, expected):
            raise NotApplicableError("b", f"move {step} ({move}) is not {arena.turn(state)}'s turn")
        target = arena.target(state, move)
        if target is None:
            raise NotApplicableError("a", f"move {step} ({move}) is not available in state {state}")
        state = target
    return state


def arena_to_dot(arena: Arena) -> str:
    """DOT rendering: Charlie states as boxes, Eve states as diamonds, goals double-bordered."""
    nodes = []
    for i, state in enumerate(arena.states):
        attrs = {
            "label": f"{i}" if state.phase is not Phase.ORIGINAL else f"{i}\\n{arena.dfa.describe(state.base)}",
            "shape": "box" if state.turn is Player.CHARLIE else "diamond",
        }
        if i in arena.finals:
            attrs["peripheries"] = "2"
        nodes.append((str(i), attrs))
    edges = [
        (str(i), str(target), {"label": str(move), "style": "solid" if isinstance(move, MoveC) else "dashed"})
        for i, out in enumerate(arena.edges)
        for move, target in out
    ]
    return digraph("arena", nodes, edges)

