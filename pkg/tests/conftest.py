"""Pytest configuration and shared fixtures."""

from collections.abc import Callable, Iterable, Mapping, Sequence

import pytest

from tbsynth import corpus
from tbsynth.models import (
    Action,
    Atom,
    Controllability,
    Duration,
    Event,
    EventSequence,
    ExistentialStatement,
    GameSpec,
    PlanningProblem,
    Quantifier,
    StateVariable,
    SyncRule,
    Term,
)
from tbsynth.problem import desugar_durations

EventSpec = tuple[int, Iterable[Action]]


@pytest.fixture
def make_variable() -> Callable[..., StateVariable]:
    """Factory for state variables with every per-value mapping filled in.

    Transitions default to "any value may follow any value", durations to unbounded and every
    value to controllable.
    """

    def _factory(
        name: str,
        values: Sequence[str],
        *,
        transitions: Mapping[str, Iterable[str]] | None = None,
        durations: Mapping[str, tuple[int, int | None]] | None = None,
        uncontrollable: Iterable[str] = (),
    ) -> StateVariable:
        transitions = transitions or {}
        durations = durations or {}
        blocked = set(uncontrollable)
        bounds = {v: Duration() for v in values}
        bounds.update({v: Duration(dmin=low, dmax=high) for v, (low, high) in durations.items()})
        return StateVariable(
            name=name,
            values=tuple(values),
            transitions={v: frozenset(transitions.get(v, values)) for v in values},
            durations=bounds,
            controllability={
                v: Controllability.UNCONTROLLABLE if v in blocked else Controllability.CONTROLLABLE for v in values
            },
        )

    return _factory


@pytest.fixture
def make_rule() -> Callable[..., SyncRule]:
    """Factory for single-statement rules.

    ``make_rule(("t", "x", "a"), [("s", "y", "c")], [("start(t)", "start(s)", 0, 1)])`` builds
    ``t[x=a] => exists s[y=c]. start(t) <=[0,1] start(s)``.
    """

    def _term(text: str) -> Term:
        endpoint, _, rest = text.partition("(")
        token = rest.rstrip(")")
        return Term.start(token) if endpoint == "start" else Term.end(token)

    def _factory(
        trigger: tuple[str, str, str],
        quantifiers: Iterable[tuple[str, str, str]] = (),
        atoms: Iterable[tuple[str, str, int, int | None]] = (),
        *,
        name: str | None = None,
    ) -> SyncRule:
        return SyncRule(
            name=name,
            trigger=Quantifier(token=trigger[0], variable=trigger[1], value=trigger[2]),
            statements=(
                ExistentialStatement(
                    quantifiers=tuple(Quantifier(token=t, variable=x, value=v) for t, x, v in quantifiers),
                    clause=tuple(
                        Atom(lhs=_term(lhs), rhs=_term(rhs), lower=lower, upper=upper)
                        for lhs, rhs, lower, upper in atoms
                    ),
                ),
            ),
        )

    return _factory


@pytest.fixture
def make_sequence() -> Callable[..., EventSequence]:
    """Factory for event sequences given as ``(delta, actions)`` pairs."""

    def _factory(*events: EventSpec) -> EventSequence:
        return EventSequence(events=tuple(Event(actions=frozenset(actions), delta=delta) for delta, actions in events))

    return _factory


@pytest.fixture
def simultaneous_problem(
    make_variable: Callable[..., StateVariable],
    make_rule: Callable[..., SyncRule],
) -> PlanningProblem:
    """``x`` in {a, b}, ``y`` in {c}; every ``a`` token must start together with a ``c`` token."""
    return PlanningProblem(
        variables=(make_variable("x", ["a", "b"]), make_variable("y", ["c"])),
        rules=(make_rule(("t", "x", "a"), [("s", "y", "c")], [("start(t)", "start(s)", 0, 0)], name="together"),),
    )


@pytest.fixture
def worked_problem() -> PlanningProblem:
    """The four-variable worked example shipped in the corpus."""
    return corpus.spec("worked_example").to_problem()


@pytest.fixture
def worked_plan() -> EventSequence:
    """The plan of the worked example."""
    return corpus.plan("worked_example").to_sequence()


@pytest.fixture
def corpus_game() -> Callable[[str], GameSpec]:
    """Load a shipped game by name."""

    def _factory(name: str) -> GameSpec:
        return corpus.spec(name).to_game()

    return _factory


@pytest.fixture
def corpus_problem() -> Callable[..., PlanningProblem]:
    """Load a shipped planning problem by name, optionally with durations desugared."""

    def _factory(name: str, desugared: bool = False) -> PlanningProblem:
        problem = corpus.spec(name).to_problem()
        return desugar_durations(problem) if desugared else problem

    return _factory
