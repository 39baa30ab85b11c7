"""Deterministic automata over event sequences.

``SyncAutomaton`` checks synchronization rules, ``TvAutomaton`` checks timeline structure and
transition relations, and the combinators build products and complements lazily. ``explore``
materializes any of them breadth-first.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections import defaultdict, deque
from collections.abc import Callable, Collection, Hashable, Iterable, Iterator
from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Any

from .dot import digraph
from .errors import ResourceError
from .matching import TRIGGER_START, MatchingStructure, StatementInfo, initial_structure, step
from .models import (
    UNBOUNDED,
    Action,
    Event,
    EventSequence,
    PlanningProblem,
    ProblemConstants,
    StateVariable,
)
from .problem import duration_rule, horizon_d, strip_durations, window

logger = logging.getLogger(__name__)

State = Hashable
ValueFilter = Callable[[StateVariable, str], bool]


class Sink(Enum):
    """Distinguished absorbing rejecting state."""

    BOTTOM = "bottom"

    def __repr__(self) -> str:
        """Bare name, as in DOT labels and test output."""
        return "BOTTOM"


BOTTOM = Sink.BOTTOM


# ============================================================================
# Interface
# ============================================================================


class LazyDfa(ABC):
    """A deterministic automaton whose states are computed on demand.

    ``successor`` returns ``None`` where the transition is undefined (pruned automata).
    """

    @property
    @abstractmethod
    def initial(self) -> State:
        """Initial state."""

    @abstractmethod
    def successor(self, state: State, event: Event) -> State | None:
        """State reached by reading ``event``."""

    @abstractmethod
    def is_final(self, state: State) -> bool:
        """Whether ``state`` accepts."""

    def is_dead(self, state: State) -> bool:
        """Whether no continuation from ``state`` can ever accept."""
        return False

    def canonical(self, state: State) -> State:
        """Representative used when interning states."""
        return state

    def describe(self, state: State) -> str:
        """Short label for DOT output."""
        return "⊥" if state is BOTTOM else type(state).__name__


def accepts(dfa: LazyDfa, seq: EventSequence) -> bool:
    """Run ``dfa`` over ``seq`` and report acceptance. Undefined transitions reject."""
    state: State | None = dfa.initial
    for event in seq.events:
        state = dfa.successor(state, event)
        if state is None:
            return False
    return dfa.is_final(state)


# ============================================================================
# Rule automaton
# ============================================================================


@dataclass(frozen=True, slots=True)
class SyncState:
    """In-window structures, beyond-window summaries and trigger-sharing sets, per statement key."""

    current: frozenset[MatchingStructure]
    beyond: tuple[frozenset[MatchingStructure], ...]
    sharing: tuple[frozenset[int], ...]


def _everything(variable: StateVariable, value: str) -> bool:
    return True


def _contains_closed(structures: Iterable[MatchingStructure]) -> bool:
    return any(ms.is_closed for ms in structures)


class SyncAutomaton(LazyDfa):
    """Checks a set of synchronization rules over event sequences.

    Nontrivial duration bounds become rules (for the values selected by ``duration_rules``) and
    also tighten the initial matrices of every statement quantifying them (for the values
    selected by ``augment``).
    """

    def __init__(
        self,
        problem: PlanningProblem,
        *,
        duration_rules: ValueFilter = _everything,
        augment: ValueFilter = _everything,
    ):
        """Prepare statement data for every rule of ``problem``."""
        self.rules = problem.rules + tuple(
            duration_rule(variable, value)
            for variable in problem.variables
            for value in variable.values
            if not variable.duration(value).is_trivial and duration_rules(variable, value)
        )
        desugared = PlanningProblem(variables=tuple(strip_durations(v) for v in problem.variables), rules=self.rules)
        self.constants = ProblemConstants(horizon=horizon_d(desugared), window=window(desugared))
        augmenting = {
            v.name: v.model_copy(
                update={"durations": {val: v.duration(val) if augment(v, val) else UNBOUNDED for val in v.values}}
            )
            for v in problem.variables
        }
        self.statements: list[StatementInfo] = []
        self.rule_statements: list[frozenset[int]] = []
        self.triggers: list[tuple[str, str]] = []
        for rule_index, rule in enumerate(self.rules):
            assert rule.trigger is not None, "validated problems have triggered rules only"
            self.triggers.append((rule.trigger.variable, rule.trigger.value))
            keys = []
            for statement_index in range(len(rule.statements)):
                key = len(self.statements)
                self.statements.append(
                    StatementInfo.create(
                        rule,
                        statement_index,
                        self.constants,
                        augmenting,
                        key=key,
                        rule_index=rule_index,
                    )
                )
                keys.append(key)
            self.rule_statements.append(frozenset(keys))
        self._initial = SyncState(
            current=frozenset(initial_structure(info) for info in self.statements),
            beyond=tuple(frozenset() for _ in self.statements),
            sharing=tuple(self.rule_statements[info.rule_index] for info in self.statements),
        )

    @property
    def window(self) -> int:
        """Sum of finite upper bounds over the rules, duration rules included."""
        return self.constants.window

    @property
    def initial(self) -> SyncState:
        """One initial structure per statement; empty summaries."""
        return self._initial

    def successor(self, state: State, event: Event) -> State:
        """Advance every structure, promote groups crossing the window and check the trigger conditions."""
        if state is BOTTOM:
            return BOTTOM
        assert isinstance(state, SyncState)
        delta, limit = event.delta, self.window - event.delta

        idle: list[MatchingStructure] = []
        groups: dict[tuple[int, int], list[MatchingStructure]] = defaultdict(list)
        for ms in state.current:
            if ms.is_active:
                groups[(ms.info.rule_index, ms.clock)].append(ms)
            else:
                idle.append(ms)

        current = set(step(idle, event))
        crossing: list[tuple[int, frozenset[MatchingStructure]]] = []
        for rule_index, clock in sorted(groups):
            stepped = step(groups[(rule_index, clock)], event)
            if not stepped:
                return BOTTOM
            if clock > limit:
                crossing.append((rule_index, stepped))
            elif not _contains_closed(stepped):
                current |= stepped

        started = {(a.variable, a.value) for a in event.actions if a.is_start}
        for rule_index, trigger in enumerate(self.triggers):
            if trigger in started and not any(
                ms.info.rule_index == rule_index and ms.clock == 0 and TRIGGER_START in ms.matched for ms in current
            ):
                return BOTTOM

        count = len(self.statements)
        beyond = list(state.beyond)
        promoted = [False] * count
        crossed: list[tuple[int, frozenset[int]]] = []
        for rule_index, stepped in crossing:
            by_statement: dict[int, set[MatchingStructure]] = defaultdict(set)
            for ms in stepped:
                by_statement[ms.info.key].add(ms)
            crossed.append((rule_index, frozenset(by_statement)))
            for key, structures in by_statement.items():
                if not promoted[key]:
                    beyond[key] = frozenset(structures)
                    promoted[key] = True
        for key in range(count):
            if not promoted[key]:
                beyond[key] = step(state.beyond[key], event) if state.beyond[key] else frozenset()

        closed = [_contains_closed(structures) for structures in beyond]
        sharing = []
        for key, info in enumerate(self.statements):
            siblings = self.rule_statements[info.rule_index]
            reset = any(
                rule_index == info.rule_index and key in group and any(closed[k] for k in group)
                for rule_index, group in crossed
            ) or any(key in state.sharing[k] and closed[k] and not promoted[k] for k in siblings)
            if reset:
                sharing.append(siblings)
            else:
                removed = {
                    k
                    for rule_index, group in crossed
                    if rule_index == info.rule_index and key not in group
                    for k in group
                }
                sharing.append(state.sharing[key] - removed)
        for key, info in enumerate(self.statements):
            if any(key in sharing[k] and closed[k] for k in self.rule_statements[info.rule_index]):
                beyond[key] = frozenset()

        return SyncState(
            current=frozenset(ms for ms in current if not ms.is_closed),
            beyond=tuple(beyond),
            sharing=tuple(sharing),
        )

    def is_final(self, state: State) -> bool:
        """No active structure in the window and nothing pending beyond it."""
        if state is BOTTOM:
            return False
        assert isinstance(state, SyncState)
        return not any(ms.is_active for ms in state.current) and not any(state.beyond)

    def is_dead(self, state: State) -> bool:
        """Only Bottom is dead."""
        return state is BOTTOM

    def describe(self, state: State) -> str:
        """In-window structure count, active groups and beyond-window sizes."""
        if state is BOTTOM:
            return "⊥"
        assert isinstance(state, SyncState)
        groups = {(ms.info.rule_index, ms.clock) for ms in state.current if ms.is_active}
        sizes = ",".join(str(len(s)) for s in state.beyond)
        return f"window={len(state.current)} groups={len(groups)} beyond=[{sizes}]"


def sync_initial(problem: PlanningProblem) -> SyncState:
    """Initial state of the rule automaton of ``problem``."""
    return SyncAutomaton(problem).initial


# ============================================================================
# Timeline automaton
# ============================================================================


@dataclass(frozen=True, slots=True)
class TvState:
    """Open value per tracked variable (``None`` when closed) plus the fresh and terminated flags."""

    values: tuple[str | None, ...]
    fresh: bool = True
    terminated: bool = False

    def open_values(self, names: tuple[str, ...]) -> dict[str, str]:
        """Variables currently holding a value."""
        return {name: value for name, value in zip(names, self.values) if value is not None}


class TvAutomaton(LazyDfa):
    """Tracks timeline structure and transition relations.

    The first event may only start tokens; later starts must follow an end of the same
    variable in the same event. An end without a restart terminates the plan: any further event
    is rejected.

    Args:
        variables: Variables to track; actions on other variables are ignored.
        require_closed: Accept only when every tracked variable is closed. When false, every
            state except Bottom accepts.
        check_transitions: Names of the variables whose transition relation is enforced
            (all tracked variables when None).
    """

    def __init__(
        self,
        variables: Iterable[StateVariable],
        *,
        require_closed: bool = True,
        check_transitions: Collection[str] | None = None,
    ):
        """Track ``variables``."""
        self.variables = tuple(variables)
        self.names = tuple(v.name for v in self.variables)
        self.require_closed = require_closed
        self.checked = frozenset(self.names if check_transitions is None else check_transitions)
        self._initial = TvState(values=tuple(None for _ in self.variables))

    @property
    def initial(self) -> TvState:
        """Everything closed, nothing read."""
        return self._initial

    def successor(self, state: State, event: Event) -> State:
        """Apply the event's actions variable by variable."""
        if state is BOTTOM:
            return BOTTOM
        assert isinstance(state, TvState)
        if state.terminated:
            return BOTTOM
        values = list(state.values)
        terminated = False
        for index, variable in enumerate(self.variables):
            end, start = event.for_variable(variable.name)
            current = values[index]
            if end is not None and current != end.value:
                return BOTTOM
            if start is not None:
                if not state.fresh and end is None:
                    return BOTTOM
                if end is not None and variable.name in self.checked:
                    if start.value not in variable.transition(end.value):
                        return BOTTOM
                values[index] = start.value
            elif end is not None:
                values[index] = None
                terminated = True
        return TvState(values=tuple(values), fresh=False, terminated=terminated)

    def is_final(self, state: State) -> bool:
        """Closed everywhere (or merely not Bottom, for the safety variant)."""
        if state is BOTTOM:
            return False
        assert isinstance(state, TvState)
        return not self.require_closed or all(value is None for value in state.values)

    def is_dead(self, state: State) -> bool:
        """Bottom and terminated-but-open states cannot accept any more."""
        if state is BOTTOM:
            return True
        assert isinstance(state, TvState)
        return self.require_closed and state.terminated and not self.is_final(state)

    def describe(self, state: State) -> str:
        """Open values, with markers for fresh and terminated states."""
        if state is BOTTOM:
            return "⊥"
        assert isinstance(state, TvState)
        held = ",".join(f"{n}={v}" for n, v in state.open_values(self.names).items()) or "-"
        flags = "fresh " if state.fresh else "end " if state.terminated else ""
        return f"{flags}{held}"


def tv_initial(variables: Iterable[StateVariable]) -> TvState:
    """Initial state of the timeline automaton."""
    return TvAutomaton(variables).initial


# ============================================================================
# Combinators
# ============================================================================


class Intersection(LazyDfa):
    """Synchronous product accepting when both components accept. Dead pairs collapse to Bottom."""

    def __init__(self, left: LazyDfa, right: LazyDfa):
        """Combine two automata over the same alphabet."""
        self.left, self.right = left, right

    @property
    def initial(self) -> State:
        """Pair of initial states."""
        return self._normalize((self.left.initial, self.right.initial))

    def _normalize(self, pair: tuple[Any, Any]) -> State:
        if self.left.is_dead(pair[0]) or self.right.is_dead(pair[1]):
            return BOTTOM
        return pair

    def successor(self, state: State, event: Event) -> State | None:
        """Advance both components."""
        if state is BOTTOM:
            return BOTTOM
        assert isinstance(state, tuple)
        left = self.left.successor(state[0], event)
        right = self.right.successor(state[1], event)
        if left is None or right is None:
            return None
        return self._normalize((left, right))

    def is_final(self, state: State) -> bool:
        """Both accept."""
        if state is BOTTOM:
            return False
        assert isinstance(state, tuple)
        return self.left.is_final(state[0]) and self.right.is_final(state[1])

    def is_dead(self, state: State) -> bool:
        """Only the collapsed Bottom is dead."""
        return state is BOTTOM

    def describe(self, state: State) -> str:
        """Component labels joined."""
        if state is BOTTOM:
            return "⊥"
        assert isinstance(state, tuple)
        return f"{self.left.describe(state[0])} & {self.right.describe(state[1])}"


class Union(LazyDfa):
    """Synchronous product accepting when either component accepts."""

    def __init__(self, left: LazyDfa, right: LazyDfa):
        """Combine two automata over the same alphabet."""
        self.left, self.right = left, right

    @property
    def initial(self) -> State:
        """Pair of initial states."""
        return self._normalize((self.left.initial, self.right.initial))

    def _normalize(self, pair: tuple[Any, Any]) -> State:
        if self.left.is_dead(pair[0]) and self.right.is_dead(pair[1]):
            return BOTTOM
        return pair

    def successor(self, state: State, event: Event) -> State | None:
        """Advance both components."""
        if state is BOTTOM:
            return BOTTOM
        assert isinstance(state, tuple)
        left = self.left.successor(state[0], event)
        right = self.right.successor(state[1], event)
        if left is None or right is None:
            return None
        return self._normalize((left, right))

    def is_final(self, state: State) -> bool:
        """Either accepts."""
        if state is BOTTOM:
            return False
        assert isinstance(state, tuple)
        return self.left.is_final(state[0]) or self.right.is_final(state[1])

    def is_dead(self, state: State) -> bool:
        """Only the collapsed Bottom is dead."""
        return state is BOTTOM

    def describe(self, state: State) -> str:
        """Component labels joined."""
        if state is BOTTOM:
            return "⊥"
        assert isinstance(state, tuple)
        return f"{self.left.describe(state[0])} | {self.right.describe(state[1])}"


class Complement(LazyDfa):
    """Same states, finality flipped. Bottom of the inner automaton becomes an accepting sink."""

    def __init__(self, inner: LazyDfa):
        """Wrap ``inner``."""
        self.inner = inner

    @property
    def initial(self) -> State:
        """Initial state of the inner automaton."""
        return self.inner.initial

    def successor(self, state: State, event: Event) -> State | None:
        """Inner successor."""
        return self.inner.successor(state, event)

    def is_final(self, state: State) -> bool:
        """Negated inner finality."""
        return not self.inner.is_final(state)

    def describe(self, state: State) -> str:
        """Inner label."""
        return "not " + self.inner.describe(state)


def intersect(left: LazyDfa, right: LazyDfa) -> LazyDfa:
    """Automaton of the intersection of two languages."""
    return Intersection(left, right)


def union(left: LazyDfa, right: LazyDfa) -> LazyDfa:
    """Automaton of the union of two languages."""
    return Union(left, right)


def complement(inner: LazyDfa) -> LazyDfa:
    """Automaton of the complement language."""
    return Complement(inner)


def planning_automaton(problem: PlanningProblem) -> LazyDfa:
    """Accepts exactly the solution plans of ``problem``: timelines intersected with rules."""
    return intersect(TvAutomaton(problem.variables), SyncAutomaton(problem))


# ============================================================================
# Alphabets
# ============================================================================


def _variable_options(variable: StateVariable, held: str | None, fresh: bool) -> list[tuple[Action, ...]]:
    if fresh:
        return [()] + [(Action.start(variable.name, v),) for v in variable.values]
    if held is None:
        return [()]
    end = Action.end(variable.name, held)
    return [(), (end,)] + [(end, Action.start(variable.name, v)) for v in variable.values]


def _events(per_variable: list[list[tuple[Action, ...]]], deltas: Iterable[int]) -> Iterator[Event]:
    deltas = list(deltas)
    for combination in product(*per_variable):
        actions = frozenset(a for group in combination for a in group)
        for delta in deltas:
            yield Event(actions=actions, delta=delta)


def alphabet(variables: Iterable[StateVariable], horizon: int) -> list[Event]:
    """Every event over ``variables`` with delays 1..horizon. Only usable for tiny problems."""
    per_variable = []
    for variable in variables:
        options: list[tuple[Action, ...]] = [()]
        for v in variable.values:
            options.append((Action.start(variable.name, v),))
            options.append((Action.end(variable.name, v),))
            options.extend((Action.end(variable.name, v), Action.start(variable.name, w)) for w in variable.values)
        per_variable.append(options)
    return list(_events(per_variable, range(1, horizon + 1)))


def legal_events(tv: TvAutomaton, state: State, horizon: int) -> list[Event]:
    """Events that keep the timeline structure intact from ``state`` (transition relations aside)."""
    if state is BOTTOM:
        return []
    assert isinstance(state, TvState)
    if state.terminated:
        return []
    per_variable = [
        _variable_options(variable, held, state.fresh) for variable, held in zip(tv.variables, state.values)
    ]
    return list(_events(per_variable, [1] if state.fresh else range(1, horizon + 1)))


# ============================================================================
# Exploration
# ============================================================================


@dataclass(frozen=True)
class ExploredDfa:
    """Materialized automaton with interned states numbered in discovery order."""

    states: tuple[State, ...]
    edges: tuple[tuple[int, Event, int], ...]
    initial: int
    finals: frozenset[int]

    def successor(self, source: int, event: Event) -> int | None:
        """Target of the edge labelled ``event`` out of ``source``."""
        for src, label, dst in self.edges:
            if src == source and label == event:
                return dst
        return None

    def stats(self) -> dict[str, int]:
        """State, edge and final-state counts."""
        return {"states": len(self.states), "edges": len(self.edges), "finals": len(self.finals)}


def explore(dfa: LazyDfa, symbols: Callable[[State], Iterable[Event]], budget: int) -> ExploredDfa:
    """Breadth-first closure of the initial state under the symbols offered at each state.

    Raises:
        ResourceError: If more than ``budget`` states are interned.
    """
    initial = dfa.canonical(dfa.initial)
    index: dict[State, int] = {initial: 0}
    states: list[State] = [initial]
    edges: list[tuple[int, Event, int]] = []
    queue = deque([0])
    while queue:
        source = queue.popleft()
        state = states[source]
        for event in symbols(state):
            target = dfa.successor(state, event)
            if target is None:
                continue
            target = dfa.canonical(target)
            if target not in index:
                if len(states) >= budget:
                    raise ResourceError("explored states", len(states) + 1, budget)
                index[target] = len(states)
                states.append(target)
                queue.append(index[target])
            edges.append((source, event, index[target]))
        if len(states) % 10_000 == 0:
            logger.debug("exploring", extra={"states": len(states), "edges": len(edges)})
    finals = frozenset(i for i, state in enumerate(states) if dfa.is_final(state))
    logger.info("explored", extra={"states": len(states), "edges": len(edges), "finals": len(finals)})
    return ExploredDfa(states=tuple(states), edges=tuple(edges), initial=0, finals=finals)


def explored_to_dot(dfa: LazyDfa, explored: ExploredDfa) -> str:
    """DOT rendering: finals double-circled, Bottom shaded."""
    nodes = []
    for i, state in enumerate(explored.states):
        attrs = {"label": f"{i}: {dfa.describe(state)}", "shape": "circle"}
        if i in explored.finals:
            attrs["shape"] = "doublecircle"
        if state is BOTTOM:
            attrs.update(style="filled", fillcolor="gray")
        nodes.append((str(i), attrs))
    edges = [(str(src), str(dst), {"label": str(event)}) for src, event, dst in explored.edges]
    return digraph("automaton", nodes, edges, graph={"rankdir": "LR"})
