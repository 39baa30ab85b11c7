"""Controller synthesis for timeline-based games.

Compiles synchronization-rule specifications into deterministic automata over
event sequences, turns them into turn-based game arenas, solves the
reachability game and emits Moore-machine controllers. A brute-force oracle
provides the reference semantics used to cross-check every stage.
"""

__version__ = "0.1.0"
