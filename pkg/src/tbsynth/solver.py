"""Reachability games on the arena: attractor ranks, winner and strategy extraction."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .arena import Arena
from .models import MoveC, Player

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AttractorResult:
    """Attractor ranks of every arena state.

    Attributes:
        rank: Least ``i`` with the state in the i-th attractor layer, None outside the attractor.
        winning_c: States from which Charlie forces a goal state.
        winning_e: All other states.
        iterations: Index at which the layers stabilized.
    """

    rank: tuple[int | None, ...]
    winning_c: frozenset[int]
    winning_e: frozenset[int]
    iterations: int

    def summary(self) -> dict[str, int]:
        """Region sizes and stabilization index."""
        return {"winning_c": len(self.winning_c), "winning_e": len(self.winning_e), "iterations": self.iterations}


def attractor(arena: Arena) -> AttractorResult:
    """Charlie's attractor of the goal states, computed layer by layer with predecessor counters.

    A Charlie state joins as soon as one successor has; an Eve state once all of its edges
    lead into the attractor. Eve states without moves join the first layer vacuously; Charlie
    states without moves never join unless they are goals.
    """
    size = len(arena)
    predecessors: list[list[int]] = [[] for _ in range(size)]
    remaining = [0] * size
    for source, out in enumerate(arena.edges):
        remaining[source] = len(out)
        for _, target in out:
            predecessors[target].append(source)

    rank: list[int | None] = [None] * size
    frontier = sorted(arena.finals)
    for state in frontier:
        rank[state] = 0
    stuck = [s for s in range(size) if rank[s] is None and not arena.edges[s] and arena.turn(s) is Player.EVE]

    layer = 0
    while frontier or (layer == 0 and stuck):
        layer += 1
        attracted: list[int] = []
        if layer == 1:
            for state in stuck:
                rank[state] = 1
                attracted.append(state)
        for target in frontier:
            for source in predecessors[target]:
                if rank[source] is not None:
                    continue
                if arena.turn(source) is Player.EVE:
                    remaining[source] -= 1
                    if remaining[source]:
                        continue
                rank[source] = layer
                attracted.append(source)
        frontier = attracted
        logger.debug("attractor layer", extra={"layer": layer, "added": len(attracted)})

    winning_c = frozenset(s for s in range(size) if rank[s] is not None)
    result = AttractorResult(
        rank=tuple(rank),
        winning_c=winning_c,
        winning_e=frozenset(range(size)) - winning_c,
        iterations=max((r for r in rank if r is not None), default=0),
    )
    logger.info("attractor computed", extra=result.summary())
    return result


def winner(arena: Arena, result: AttractorResult | None = None) -> Player:
    """Charlie when the initial state is in Charlie's winning region, Eve otherwise."""
    result = result or attractor(arena)
    return Player.CHARLIE if arena.initial in result.winning_c else Player.EVE


@dataclass(frozen=True)
class StrategyTable:
    """Charlie's positional strategy on the winning region."""

    moves: dict[int, MoveC]

    def get(self, state: int) -> MoveC | None:
        """Move at ``state``, None for terminal goal states."""
        return self.moves.get(state)

    def __len__(self) -> int:
        """Number of states with a move."""
        return len(self.moves)


def extract_strategy(arena: Arena, result: AttractorResult) -> StrategyTable:
    """Pick, in every winning Charlie state, the least move that lowers the rank.

    Goal states keep playing the least move that stays in the winning region, if any.
    """
    moves: dict[int, MoveC] = {}
    for state in sorted(result.winning_c):
        if arena.turn(state) is not Player.CHARLIE:
            continue
        current = result.rank[state]
        assert current is not None
        for move, target in arena.edges[state]:
            target_rank = result.rank[target]
            if target_rank is None:
                continue
            if current == 0 or target_rank < current:
                assert isinstance(move, MoveC)
                moves[state] = move
                break
    return StrategyTable(moves=moves)
