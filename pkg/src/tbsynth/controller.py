"""Moore-machine controllers built from winning strategies, their execution and export."""

from __future__ import annotations

import json
import logging
import random
from collections import deque
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Literal, Protocol

from .arena import Arena, round_outcome
from .dot import digraph
from .errors import ProtocolError, SynthesisImpossibleError
from .models import ControllerDocument, EventSequence, MoveC, MoveE, Player, Round
from .models.documents import ControllerStateDocument, ControllerTransitionDocument, MoveDocument
from .solver import AttractorResult, StrategyTable

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MooreController:
    """Controller states are Charlie's winning states, numbered 0..n-1 with 0 initial.

    Attributes:
        output: Move played in each state, None in goal states where no move keeps the win.
        transitions: Next state for each (state, Eve move) allowed after the output move.
        goal_states: States that are goal states of the arena.
        arena_ids: Arena state behind each controller state, when built from an arena.
        arena_size: Number of arena states, which bounds the rounds needed to win.
    """

    output: tuple[MoveC | None, ...]
    transitions: dict[tuple[int, MoveE], int]
    goal_states: frozenset[int]
    arena_ids: tuple[int, ...] | None = None
    arena_size: int | None = None
    _legal: dict[int, list[MoveE]] = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def initial(self) -> int:
        """Initial state."""
        return 0

    def __len__(self) -> int:
        """Number of controller states."""
        return len(self.output)

    def legal(self, state: int) -> list[MoveE]:
        """Eve moves accepted in ``state``, in canonical order."""
        if state not in self._legal:
            moves = [move for (source, move) in self.transitions if source == state]
            self._legal[state] = sorted(moves, key=MoveE.sort_key)
        return self._legal[state]


def build_controller(arena: Arena, result: AttractorResult, strategy: StrategyTable) -> MooreController:
    """Restrict the arena to the strategy and collapse each Charlie/Eve pair of edges into one transition.

    Raises:
        SynthesisImpossibleError: If Eve wins from the initial state.
    """
    if arena.initial not in result.winning_c:
        raise SynthesisImpossibleError("the environment wins this game; no controller exists")
    ids = {arena.initial: 0}
    order = [arena.initial]
    output: list[MoveC | None] = []
    transitions: dict[tuple[int, MoveE], int] = {}
    queue = deque([arena.initial])
    while queue:
        state = queue.popleft()
        move = strategy.get(state)
        output.append(move)
        if move is None:
            continue
        reply_state = arena.target(state, move)
        assert reply_state is not None and arena.turn(reply_state) is Player.EVE
        for eve, target in arena.edges[reply_state]:
            assert isinstance(eve, MoveE)
            if target not in ids:
                ids[target] = len(order)
                order.append(target)
                queue.append(target)
            transitions[(ids[state], eve)] = ids[target]
    ctrl = MooreController(
        output=tuple(output),
        transitions=transitions,
        goal_states=frozenset(ids[s] for s in order if s in arena.finals),
        arena_ids=tuple(order),
        arena_size=len(arena),
    )
    logger.info("controller built", extra={"states": len(ctrl), "transitions": len(transitions)})
    return ctrl


def controller_step(ctrl: MooreController, state: int, eve_move: MoveE) -> tuple[int, MoveC | None]:
    """Follow the transition on ``eve_move`` and return the new state with its output.

    Raises:
        ProtocolError: If ``eve_move`` is not accepted in ``state``.
    """
    target = ctrl.transitions.get((state, eve_move))
    if target is None:
        raise ProtocolError(eve_move, ctrl.legal(state))
    return target, ctrl.output[target]


# ============================================================================
# Eve policies
# ============================================================================


class EvePolicy(Protocol):
    """Chooses Eve's reply; None ends the simulation."""

    def choose(self, plan: EventSequence, legal: Sequence[MoveE]) -> MoveE | None:
        """Pick one of ``legal`` for the current partial plan."""
        ...


class ScriptedPolicy:
    """Replays a fixed list of moves."""

    def __init__(self, moves: Sequence[MoveE]):
        """Store the script."""
        self.moves = list(moves)
        self.position = 0

    def choose(self, plan: EventSequence, legal: Sequence[MoveE]) -> MoveE | None:
        """Next scripted move, or None once the script is exhausted."""
        if self.position >= len(self.moves):
            return None
        move = self.moves[self.position]
        self.position += 1
        return move


class RandomPolicy:
    """Uniform choice among the legal moves, reproducible from the seed."""

    def __init__(self, seed: int):
        """Seed the generator."""
        self.seed = seed
        self._random = random.Random(seed)

    def choose(self, plan: EventSequence, legal: Sequence[MoveE]) -> MoveE | None:
        """A uniformly drawn legal move."""
        return self._random.choice(list(legal)) if legal else None


class InteractivePolicy:
    """Delegates the choice to a callback, typically a terminal prompt."""

    def __init__(self, callback: Callable[[EventSequence, Sequence[MoveE]], MoveE | None]):
        """Store the callback."""
        self.callback = callback

    def choose(self, plan: EventSequence, legal: Sequence[MoveE]) -> MoveE | None:
        """Whatever the callback returns."""
        return self.callback(plan, legal)


@dataclass(frozen=True)
class Playout:
    """Rounds played, the controller state reached and the plan they produce."""

    rounds: tuple[Round, ...]
    final_state: int
    reached_goal: bool
    plan: EventSequence


def simulate(ctrl: MooreController, policy: EvePolicy, max_rounds: int | None = None) -> Playout:
    """Play the controller against ``policy`` until a goal state, a dead end or the round budget.

    The default budget is one more round than the arena has states.

    Raises:
        ProtocolError: If the policy returns a move the controller does not accept.
    """
    if max_rounds is None:
        max_rounds = (ctrl.arena_size or len(ctrl)) + 1
    state = ctrl.initial
    plan = EventSequence()
    rounds: list[Round] = []
    for _ in range(max_rounds):
        if state in ctrl.goal_states:
            break
        charlie = ctrl.output[state]
        if charlie is None:
            break
        legal = ctrl.legal(state)
        eve = policy.choose(plan, legal)
        if eve is None:
            break
        target, _ = controller_step(ctrl, state, eve)
        round_ = Round(charlie=charlie, eve=eve)
        plan = round_outcome(plan, round_)
        rounds.append(round_)
        state = target
    return Playout(rounds=tuple(rounds), final_state=state, reached_goal=state in ctrl.goal_states, plan=plan)


# ============================================================================
# Export
# ============================================================================


def to_document(ctrl: MooreController) -> ControllerDocument:
    """Serializable form of the controller."""
    return ControllerDocument(
        initial=ctrl.initial,
        states=[
            ControllerStateDocument(
                id=i,
                goal=i in ctrl.goal_states,
                output=MoveDocument.from_charlie(move) if move is not None else None,
            )
            for i, move in enumerate(ctrl.output)
        ],
        transitions=[
            ControllerTransitionDocument(source=source, eve=MoveDocument.from_eve(eve), target=target)
            for (source, eve), target in sorted(ctrl.transitions.items(), key=lambda t: (t[0][0], t[0][1].sort_key()))
        ],
    )


def load_controller(document: ControllerDocument) -> MooreController:
    """Rebuild a controller from its document. Arena ids are not part of the format."""
    states = sorted(document.states, key=lambda s: s.id)
    return MooreController(
        output=tuple(s.output.to_charlie() if s.output is not None else None for s in states),
        transitions={(t.source, t.eve.to_eve()): t.target for t in document.transitions},
        goal_states=frozenset(s.id for s in states if s.goal),
    )


def to_dot(ctrl: MooreController) -> str:
    """Moore-machine diagram: outputs inside the nodes, Eve moves on the edges."""
    nodes = []
    for i, move in enumerate(ctrl.output):
        attrs = {"label": f"{i}\\n{move if move is not None else '-'}", "shape": "box"}
        if i in ctrl.goal_states:
            attrs["peripheries"] = "2"
        nodes.append((str(i), attrs))
    edges = [
        (str(source), str(target), {"label": str(eve)})
        for (source, eve), target in sorted(ctrl.transitions.items(), key=lambda t: (t[0][0], t[0][1].sort_key()))
    ]
    return digraph("controller", nodes, edges, graph={"rankdir": "LR"})


def export(ctrl: MooreController, format: Literal["json", "dot"]) -> bytes:
    """Encode the controller as JSON (``tbsynth-controller/1``) or DOT."""
    if format == "dot":
        return to_dot(ctrl).encode()
    document = to_document(ctrl).model_dump_camel(mode="json")
    return (json.dumps(document, indent=2, sort_keys=False) + "\n").encode()
