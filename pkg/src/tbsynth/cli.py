"""Command-line front end: validation, plan checking, compilation, synthesis and play."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any, TextIO

from pydantic import BaseModel, ValidationError

from . import __version__, corpus
from .arena import arena_to_dot, build_arena
from .automaton import (
    BOTTOM,
    State,
    SyncAutomaton,
    TvAutomaton,
    accepts,
    explore,
    explored_to_dot,
    intersect,
    legal_events,
)
from .config import Settings
from .controller import (
    InteractivePolicy,
    MooreController,
    RandomPolicy,
    build_controller,
    export,
    load_controller,
    simulate,
)
from .errors import InputError, TbsynthError
from .events import check_event_sequence
from .log import configure_logging
from .models import (
    ControllerDocument,
    EventSequence,
    GameSpec,
    MoveE,
    PlanDocument,
    PlanningProblem,
    Player,
    SpecDocument,
    ValidationReport,
)
from .models.documents import MoveDocument
from .oracle import EnumBounds, enumerate_sequences, is_solution_plan
from .problem import constants, validate
from .solver import attractor, extract_strategy, winner

logger = logging.getLogger(__name__)

CORPUS_PREFIX = "corpus:"
TRANSCRIPT_FORMAT = "tbsynth-transcript/1"

EXIT_OK = 0
EXIT_NO = 1
EXIT_INPUT = 2
EXIT_MISMATCH = 3

SCHEMAS: dict[str, type[BaseModel]] = {
    "spec": SpecDocument,
    "plan": PlanDocument,
    "controller": ControllerDocument,
}

InputFn = Callable[[str], str]

# ============================================================================
# Loading
# ============================================================================


def load_spec(ref: str) -> SpecDocument:
    """Read a specification from a path, or from the shipped corpus as ``corpus:<name>``."""
    if ref.startswith(CORPUS_PREFIX):
        return corpus.spec(ref.removeprefix(CORPUS_PREFIX))
    return SpecDocument.model_validate_json(Path(ref).read_text(encoding="utf-8"))


def load_plan(ref: str) -> PlanDocument:
    """Read a plan from a path, or from the shipped corpus as ``corpus:<name>``."""
    if ref.startswith(CORPUS_PREFIX):
        return corpus.plan(ref.removeprefix(CORPUS_PREFIX))
    return PlanDocument.model_validate_json(Path(ref).read_text(encoding="utf-8"))


def _require_valid(report: ValidationReport) -> None:
    if not report.ok:
        raise InputError("; ".join(str(d) for d in report.diagnostics))


def _problem(ref: str) -> PlanningProblem:
    problem = load_spec(ref).to_problem()
    _require_valid(validate(problem))
    return problem


def _game(ref: str) -> GameSpec:
    game = load_spec(ref).to_game()
    _require_valid(validate(game))
    return game


def _print_stats(stats: dict[str, int], out: TextIO) -> None:
    for key in sorted(stats):
        print(f"{key}: {stats[key]}", file=out)


# ============================================================================
# Subcommands
# ============================================================================


def _cmd_validate(args: argparse.Namespace, settings: Settings, out: TextIO, input_fn: InputFn) -> int:
    document = load_spec(args.spec)
    report = validate(document.to_game())
    if report.ok:
        print("ok", file=out)
        return EXIT_OK
    for diagnostic in report.diagnostics:
        logger.error("invalid specification", extra={"path": diagnostic.path, "detail": diagnostic.message})
    print(f"invalid: {len(report.diagnostics)} diagnostic(s)", file=out)
    return EXIT_INPUT


def _cmd_check_plan(args: argparse.Namespace, settings: Settings, out: TextIO, input_fn: InputFn) -> int:
    problem = _problem(args.spec)
    seq = load_plan(args.plan).to_sequence()
    check = check_event_sequence(seq, problem.variables)
    if not check.ok:
        logger.warning("plan is not well formed", extra={"position": check.position, "conditions": check.conditions})
    solution = is_solution_plan(seq, problem)
    accepted = accepts(intersect(TvAutomaton(problem.variables), SyncAutomaton(problem)), seq)
    print(f"solution: {'yes' if solution else 'no'}", file=out)
    print(f"accepted: {'yes' if accepted else 'no'}", file=out)
    if solution != accepted:
        logger.error("oracle and automaton disagree", extra={"solution": solution, "accepted": accepted})
        return EXIT_MISMATCH
    return EXIT_OK if solution else EXIT_NO


def _cmd_compile(args: argparse.Namespace, settings: Settings, out: TextIO, input_fn: InputFn) -> int:
    if args.game:
        arena = build_arena(_game(args.spec), settings.state_budget, literal=args.literal)
        _print_stats(arena.stats(), out)
        dot = arena_to_dot(arena) if args.dot else None
    else:
        problem = _problem(args.spec)
        horizon = constants(problem).horizon
        tv = TvAutomaton(problem.variables)
        dfa = intersect(tv, SyncAutomaton(problem))

        def symbols(state: State) -> list[Any]:
            if state is BOTTOM:
                return []
            assert isinstance(state, tuple)
            return legal_events(tv, state[0], horizon)

        explored = explore(dfa, symbols, settings.state_budget)
        _print_stats(explored.stats(), out)
        dot = explored_to_dot(dfa, explored) if args.dot else None
    if dot is not None:
        Path(args.dot).write_text(dot, encoding="utf-8")
    return EXIT_OK


def _cmd_winner(args: argparse.Namespace, settings: Settings, out: TextIO, input_fn: InputFn) -> int:
    arena = build_arena(_game(args.spec), settings.state_budget, literal=args.literal)
    result = attractor(arena)
    side = winner(arena, result)
    print(side.value, file=out)
    return EXIT_OK if side is Player.CHARLIE else EXIT_NO


def _synthesize(ref: str, settings: Settings, literal: bool = False) -> MooreController:
    arena = build_arena(_game(ref), settings.state_budget, literal=literal)
    result = attractor(arena)
    return build_controller(arena, result, extract_strategy(arena, result))


def _cmd_synth(args: argparse.Namespace, settings: Settings, out: TextIO, input_fn: InputFn) -> int:
    ctrl = _synthesize(args.spec, settings, args.literal)
    Path(args.output).write_bytes(export(ctrl, "json"))
    if args.dot:
        Path(args.dot).write_bytes(export(ctrl, "dot"))
    print(f"controller: {len(ctrl)} states, {len(ctrl.transitions)} transitions", file=out)
    return EXIT_OK


class _TerminalPrompt:
    """Menu-driven Eve for the play REPL, following the controller state as moves are chosen."""

    def __init__(self, ctrl: MooreController, input_fn: InputFn, out: TextIO):
        self.ctrl = ctrl
        self.state = ctrl.initial
        self.input_fn = input_fn
        self.out = out

    def __call__(self, plan: EventSequence, legal: Sequence[MoveE]) -> MoveE | None:
        """Prompt until Eve picks a legal move or quits."""
        print(f"charlie plays {self.ctrl.output[self.state]}", file=self.out)
        for number, move in enumerate(legal):
            print(f"  [{number}] {move}", file=self.out)
        while True:
            try:
                answer = self.input_fn("eve> ").strip()
            except EOFError:
                return None
            if answer in ("q", "quit"):
                return None
            if answer.isdigit() and int(answer) < len(legal):
                move = legal[int(answer)]
                self.state = self.ctrl.transitions[(self.state, move)]
                return move
            print(f"choose a number between 0 and {len(legal) - 1}, or q to stop", file=self.out)


def _cmd_play(args: argparse.Namespace, settings: Settings, out: TextIO, input_fn: InputFn) -> int:
    if args.controller:
        document = ControllerDocument.model_validate_json(Path(args.controller).read_text(encoding="utf-8"))
        ctrl = load_controller(document)
    else:
        ctrl = _synthesize(args.spec, settings)
    policy = RandomPolicy(args.seed) if args.auto else InteractivePolicy(_TerminalPrompt(ctrl, input_fn, out))
    playout = simulate(ctrl, policy, args.max_rounds)

    lines: list[dict[str, Any]] = [
        {"format": TRANSCRIPT_FORMAT, "version": __version__, "spec": args.spec, "seed": args.seed, "auto": args.auto}
    ]
    for number, round_ in enumerate(playout.rounds, start=1):
        print(f"round {number}: charlie {round_.charlie} / eve {round_.eve}", file=out)
        lines.append(
            {
                "round": number,
                "charlie": MoveDocument.from_charlie(round_.charlie).model_dump_camel(mode="json"),
                "eve": MoveDocument.from_eve(round_.eve).model_dump_camel(mode="json"),
            }
        )
    lines.append(
        {
            "goal": playout.reached_goal,
            "state": playout.final_state,
            "plan": PlanDocument.from_sequence(playout.plan).model_dump_camel(mode="json"),
        }
    )
    print(f"goal reached: {'yes' if playout.reached_goal else 'no'}", file=out)
    if args.transcript:
        text = "".join(json.dumps(line, sort_keys=True) + "\n" for line in lines)
        Path(args.transcript).write_text(text, encoding="utf-8")
    return EXIT_OK if playout.reached_goal else EXIT_NO


def _cmd_oracle_diff(args: argparse.Namespace, settings: Settings, out: TextIO, input_fn: InputFn) -> int:
    problem = _problem(args.spec)
    dfa = intersect(TvAutomaton(problem.variables), SyncAutomaton(problem))
    bounds = EnumBounds(max_length=args.max_len, max_delta=args.max_delta)
    reached: dict[EventSequence, State | None] = {}
    checked = 0
    for seq in enumerate_sequences(problem.variables, bounds, settings.enum_limit):
        if not seq.events:
            state: State | None = dfa.initial
        else:
            before = reached[EventSequence(events=seq.events[:-1])]
            state = None if before is None else dfa.successor(before, seq.events[-1])
        reached[seq] = state
        accepted = state is not None and dfa.is_final(state)
        solution = is_solution_plan(seq, problem)
        checked += 1
        if accepted != solution:
            plan = PlanDocument.from_sequence(seq).model_dump_camel(mode="json")
            print(f"mismatch after {checked} sequences: solution={solution} accepted={accepted}", file=out)
            print(json.dumps(plan, sort_keys=True), file=out)
            return EXIT_MISMATCH
    print(f"checked {checked} sequences, 0 mismatches", file=out)
    return EXIT_OK


def _cmd_schema(args: argparse.Namespace, settings: Settings, out: TextIO, input_fn: InputFn) -> int:
    print(json.dumps(SCHEMAS[args.document].model_json_schema(), indent=2, sort_keys=True), file=out)
    return EXIT_OK


# ============================================================================
# Entry points
# ============================================================================


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per subcommand."""
    parser = argparse.ArgumentParser(prog="tbsynth", description="Timeline-based planning and controller synthesis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--state-budget", type=int, default=None, help="Exploration guard (TBSYNTH_STATE_BUDGET).")
    parser.add_argument("--enum-limit", type=int, default=None, help="Enumeration guard (TBSYNTH_ENUM_LIMIT).")
    parser.add_argument("--log-level", default=None, help="Logging level (TBSYNTH_LOG_LEVEL).")
    sub = parser.add_subparsers(dest="command", required=True)

    spec_help = "Specification file, or corpus:<name>."

    p = sub.add_parser("validate", help="Check a specification and list its diagnostics.")
    p.add_argument("spec", help=spec_help)
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("check-plan", help="Decide whether a plan solves a planning problem.")
    p.add_argument("spec", help=spec_help)
    p.add_argument("plan", help="Plan file, or corpus:<name>.")
    p.set_defaults(handler=_cmd_check_plan)

    p = sub.add_parser("compile", help="Explore the planning automaton or build the game arena.")
    p.add_argument("spec", help=spec_help)
    p.add_argument("--game", action="store_true", help="Build the arena instead of the planning automaton.")
    p.add_argument("--literal", action="store_true", help="Prune by variable ownership instead of controllability.")
    p.add_argument("--dot", metavar="PATH", help="Write a DOT rendering.")
    p.set_defaults(handler=_cmd_compile)

    p = sub.add_parser("winner", help="Solve the game and print the winning player.")
    p.add_argument("spec", help=spec_help)
    p.add_argument("--literal", action="store_true", help="Prune by variable ownership instead of controllability.")
    p.set_defaults(handler=_cmd_winner)

    p = sub.add_parser("synth", help="Synthesize a controller.")
    p.add_argument("spec", help=spec_help)
    p.add_argument("-o", "--output", required=True, help="Controller JSON destination.")
    p.add_argument("--dot", metavar="PATH", help="Also write the controller as DOT.")
    p.add_argument("--literal", action="store_true", help="Prune by variable ownership instead of controllability.")
    p.set_defaults(handler=_cmd_synth)

    p = sub.add_parser("play", help="Play as the environment against the synthesized controller.")
    p.add_argument("spec", help=spec_help)
    p.add_argument("--controller", metavar="PATH", help="Use a saved controller instead of synthesizing one.")
    p.add_argument("--auto", action="store_true", help="Let a seeded random environment play.")
    p.add_argument("--seed", type=int, default=0, help="Seed of the random environment.")
    p.add_argument("--max-rounds", type=int, default=None, help="Round budget.")
    p.add_argument("--transcript", metavar="PATH", help="Write the rounds as JSON lines.")
    p.set_defaults(handler=_cmd_play)

    p = sub.add_parser("oracle-diff", help="Compare the automaton with the oracle on every short sequence.")
    p.add_argument("spec", help=spec_help)
    p.add_argument("--max-len", type=int, default=3, help="Maximum number of events.")
    p.add_argument("--max-delta", type=int, default=1, help="Largest delay between events.")
    p.set_defaults(handler=_cmd_oracle_diff)

    p = sub.add_parser("schema", help="Print the JSON schema of a document format.")
    p.add_argument("document", choices=sorted(SCHEMAS))
    p.set_defaults(handler=_cmd_schema)
    return parser


def run(argv: Sequence[str] | None = None, *, input_fn: InputFn = input, out: TextIO | None = None) -> int:
    """Parse ``argv``, run the subcommand and return its exit code.

    Args:
        argv: Arguments without the program name; ``sys.argv[1:]`` when None.
        input_fn: Line reader used by the interactive play loop.
        out: Destination of regular output; standard output when None.

    Returns:
        0 on success, 1 for a negative answer, 2 for malformed input, 3 when the oracle and the
        automaton disagree, 4 when a resource guard trips.
    """
    args = build_parser().parse_args(argv)
    if out is None:
        out = sys.stdout
    try:
        settings = Settings.from_env(args.state_budget, args.enum_limit, args.log_level)
        configure_logging(settings.log_level)
    except (ValidationError, ValueError) as exc:
        print(f"invalid settings: {exc}", file=sys.stderr)
        return EXIT_INPUT
    handler: Callable[[argparse.Namespace, Settings, TextIO, InputFn], int] = args.handler
    try:
        return handler(args, settings, out, input_fn)
    except TbsynthError as exc:
        logger.error(str(exc), extra={"error": type(exc).__name__})
        return exc.exit_code
    except (ValueError, OSError) as exc:
        logger.error("malformed input", extra={"error": type(exc).__name__, "detail": str(exc)})
        return EXIT_INPUT


def main() -> None:
    """Console entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
