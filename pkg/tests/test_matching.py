"""Tests for matching structures."""

import random
from collections.abc import Callable, Iterator

import pytest

from tbsynth.automaton import SyncAutomaton, alphabet
from tbsynth.dbm import INF
from tbsynth.errors import ContractError
from tbsynth.matching import (
    TRIGGER_START,
    MatchingStructure,
    StatementInfo,
    StatusKind,
    admissible,
    apply,
    describe,
    forced_ends,
    i_match_candidates,
    initial_structure,
    run,
    status,
    step,
)
from tbsynth.models import (
    Action,
    Event,
    EventSequence,
    ExistentialStatement,
    PlanningProblem,
    ProblemConstants,
    SyncRule,
    Term,
)
from tbsynth.oracle import EnumBounds, enumerate_sequences
from tbsynth.problem import constants

START_T, END_T, START_S = Term.start("t"), Term.end("t"), Term.start("s")


def _event(*actions: Action, delta: int = 1) -> Event:
    return Event(actions=frozenset(actions), delta=delta)


Run = tuple[MatchingStructure, ...]


def _runs(problem: PlanningProblem, bounds: EnumBounds) -> Iterator[tuple[StatementInfo, EventSequence, list[Run]]]:
    """Every matching run of every statement along every enumerated sequence.

    A run lists the structures after 0, 1, ..., n events.
    """
    for info in SyncAutomaton(problem).statements:
        # Sequences come depth first: path[k] holds the runs of the current prefix of length k.
        path: list[list[Run]] = []
        for seq in enumerate_sequences(problem.variables, bounds):
            del path[len(seq) :]
            runs: list[Run] = [(initial_structure(info),)]
            if path:
                runs = [(*r, after) for r in path[-1] for after in step([r[-1]], seq.events[-1])]
            path.append(runs)
            yield info, seq, runs


def _trigger_position(r: Run) -> int:
    return next(k for k, ms in enumerate(r) if TRIGGER_START in ms.matched)


@pytest.fixture
def make_info(make_rule: Callable[..., SyncRule]) -> Callable[..., StatementInfo]:
    """Statement info for ``t[x=a] => exists s[y=b]. start(t) <=[0,upper] start(s)``."""

    def _factory(upper: int | None = 1, horizon: int = 2) -> StatementInfo:
        rule = make_rule(("t", "x", "a"), [("s", "y", "b")], [("start(t)", "start(s)", 0, upper)], name="r")
        return StatementInfo.create(rule, 0, ProblemConstants(horizon=horizon, window=upper or 0))

    return _factory


class TestCandidates:
    """Test I-match candidates."""

    def test_trigger_start_is_optional(self, make_info: Callable[..., StatementInfo]) -> None:
        """Test that a start of the trigger value may or may not be matched."""
        ms = initial_structure(make_info())
        candidates = i_match_candidates(ms, _event(Action.start("x", "a")))
        assert candidates == {frozenset(), frozenset({START_T})}

    def test_simultaneous_starts(self, make_info: Callable[..., StatementInfo]) -> None:
        """Test that start(s) needs start(t) already or simultaneously matched."""
        ms = initial_structure(make_info())
        candidates = i_match_candidates(ms, _event(Action.start("x", "a"), Action.start("y", "b")))
        assert candidates == {frozenset(), frozenset({START_T}), frozenset({START_T, START_S})}

    def test_unrelated_event(self, make_info: Callable[..., StatementInfo]) -> None:
        """Test that an event with no relevant action only allows the empty match."""
        ms = initial_structure(make_info())
        assert i_match_candidates(ms, _event(Action.start("y", "c"))) == {frozenset()}

    def test_end_is_forced(self, make_info: Callable[..., StatementInfo]) -> None:
        """Test that ending a matched token forces its end term."""
        ms = apply(initial_structure(make_info(upper=None)), _event(Action.start("x", "a")), [START_T])
        event = _event(Action.end("x", "a"), Action.start("x", "c"))
        assert forced_ends(ms, event) == {END_T}
        assert i_match_candidates(ms, event) == {frozenset({END_T})}


class TestAdmissible:
    """Test pending upper bounds against delays."""

    def test_bounded_pending_term(self, make_info: Callable[..., StatementInfo]) -> None:
        """Test that once start(t) is matched, start(s) must follow within one unit."""
        ms = apply(initial_structure(make_info()), _event(Action.start("x", "a")), [START_T])
        assert admissible(ms, _event(delta=1))
        assert not admissible(ms, _event(delta=2))
        assert i_match_candidates(ms, _event(Action.start("y", "b"), delta=2)) == frozenset()

    def test_unmatched_structure_is_always_admissible(self, make_info: Callable[..., StatementInfo]) -> None:
        """Test that no bound applies before anything is matched."""
        assert admissible(initial_structure(make_info()), _event(delta=100))


class TestStatus:
    """Test status classification and residuality."""

    def test_lifecycle(self, make_info: Callable[..., StatementInfo]) -> None:
        """Test initial, active and closed along a full match."""
        ms = initial_structure(make_info())
        assert status(ms).kind is StatusKind.INITIAL
        ms = apply(ms, _event(Action.start("x", "a"), Action.start("y", "b")), [START_T, START_S])
        assert status(ms).kind is StatusKind.ACTIVE
        ms = apply(ms, _event(Action.end("x", "a"), Action.end("y", "b")), [END_T, Term.end("s")])
        assert status(ms).kind is StatusKind.CLOSED
        assert ms.is_closed

    def test_bounded_active_is_not_residual(self, make_info: Callable[..., StatementInfo]) -> None:
        """Test that a pending bounded term keeps the structure non-residual."""
        ms = apply(initial_structure(make_info()), _event(Action.start("x", "a")), [START_T])
        assert status(ms).kind is StatusKind.ACTIVE
        assert not status(ms).residual

    def test_unbounded_active_is_residual(self, make_info: Callable[..., StatementInfo]) -> None:
        """Test that only unbounded pending terms make the structure residual."""
        ms = apply(initial_structure(make_info(upper=None)), _event(Action.start("x", "a")), [START_T])
        assert status(ms).residual

    def test_other_when_trigger_unmatched(self, make_rule: Callable[..., SyncRule]) -> None:
        """Test that a structure matching a non-trigger term first is neither initial nor active."""
        rule = make_rule(("t", "x", "a"), [("s", "y", "b")])
        ms = apply(
            initial_structure(StatementInfo.create(rule, 0, ProblemConstants(horizon=1, window=0))),
            _event(Action.start("y", "b")),
            [START_S],
        )
        assert status(ms).kind is StatusKind.OTHER


class TestEvolution:
    """Test apply, step and run."""

    def test_apply_rejects_non_candidates(self, make_info: Callable[..., StatementInfo]) -> None:
        """Test that matching start(s) alone is refused."""
        with pytest.raises(ContractError):
            apply(initial_structure(make_info()), _event(Action.start("x", "a"), Action.start("y", "b")), [START_S])

    def test_clock_runs_while_active(self, make_info: Callable[..., StatementInfo]) -> None:
        """Test that the trigger clock starts after the trigger start and caps at window + horizon."""
        ms = apply(initial_structure(make_info(upper=None, horizon=2)), _event(Action.start("x", "a")), [START_T])
        assert ms.clock == 0
        ms = apply(ms, _event(delta=1), [])
        assert ms.clock == 1
        for _ in range(5):
            ms = apply(ms, _event(delta=1), [])
        assert ms.clock == 2

    def test_saturation_at_horizon(self, make_info: Callable[..., StatementInfo]) -> None:
        """Test that entries from matched to pending terms stop growing at the horizon."""
        ms = apply(initial_structure(make_info(upper=5, horizon=2)), _event(Action.start("x", "a")), [START_T])
        ms = apply(ms, _event(delta=3), [])
        assert ms.dbm.get(START_T, START_S) == 2
        assert ms.dbm.get(START_S, START_T) == 2

    def test_step_and_run(self, make_info: Callable[..., StatementInfo]) -> None:
        """Test that step branches over every candidate and run chains steps."""
        ms = initial_structure(make_info())
        event = _event(Action.start("x", "a"))
        assert len(step([ms], event)) == 2
        reached = run(ms, EventSequence(events=(event, _event(Action.start("y", "b")))))
        matched = {frozenset(str(t) for t in s.matched_terms) for s in reached}
        assert matched == {frozenset(), frozenset({"start(t)"}), frozenset({"start(t)", "start(s)"})}

    def test_identity_ignores_info_object(self, make_info: Callable[..., StatementInfo]) -> None:
        """Test that structures compare by key, matched set, entries and clock."""
        first, second = initial_structure(make_info()), initial_structure(make_info())
        assert first == second
        assert hash(first) == hash(second)
        assert isinstance(first, MatchingStructure)

    def test_describe(self, make_info: Callable[..., StatementInfo]) -> None:
        """Test the debug rendering header."""
        text = describe(initial_structure(make_info()))
        assert text.splitlines()[:3] == ["statement r/0", "matched {-}", "clock 0"]


class TestStatementInfo:
    """Test statement preparation."""

    def test_triggerless_rule_is_refused(self) -> None:
        """Test that triggerless rules have no matching structures."""
        rule = SyncRule(trigger=None, statements=(ExistentialStatement(),))
        with pytest.raises(ContractError):
            StatementInfo.create(rule, 0, ProblemConstants(horizon=1, window=0))

    def test_tokens_and_size(self, make_info: Callable[..., StatementInfo]) -> None:
        """Test the token list and term count."""
        info = make_info()
        assert info.tokens == (("x", "a"), ("y", "b"))
        assert info.size == 4
        assert info.dbm.get(START_S, START_T) == 1
        assert info.dbm.get(END_T, START_T) == INF


class TestResidualStructures:
    """Test residual structures along exhaustively enumerated runs."""

    @pytest.mark.parametrize(
        ("name", "bounds", "long_runs"),
        [
            ("eventually", EnumBounds(max_length=4, max_delta=2), True),
            ("deadline", EnumBounds(max_length=4, max_delta=2), False),
            ("overlap", EnumBounds(max_length=3, max_delta=2), True),
        ],
    )
    def test_old_triggers_pass_a_residual_structure(
        self, corpus_problem: Callable[..., PlanningProblem], name: str, bounds: EnumBounds, long_runs: bool
    ) -> None:
        """Test that an active run whose trigger is older than the window went through a residual structure.

        The residual structure appears at or after the trigger start, before the last event. In
        ``deadline`` every token is bounded, so no active run outlives the window.
        """
        problem = corpus_problem(name)
        limit = SyncAutomaton(problem).window
        checked = 0
        for info, seq, runs in _runs(problem, bounds):
            assert {r[-1] for r in runs} == run(initial_structure(info), seq)
            for r in runs:
                if not r[-1].is_active:
                    continue
                opened = _trigger_position(r)
                if sum(event.delta for event in seq.events[opened:]) <= limit:
                    continue
                assert any(status(ms).residual for ms in r[opened:-1]), f"{info.label} on {seq}"
                checked += 1
        assert (checked > 0) == long_runs

    def test_zero_window_problem(self, simultaneous_problem: PlanningProblem) -> None:
        """Test the zero-window problem, where every delay outlives the window."""
        checked = 0
        for _, seq, runs in _runs(simultaneous_problem, EnumBounds(max_length=3, max_delta=2)):
            for r in runs:
                if r[-1].is_active and len(seq) > _trigger_position(r):
                    assert any(status(ms).residual for ms in r[_trigger_position(r) : -1]), str(seq)
                    checked += 1
        assert checked > 0

    def test_residual_structures_persist(
        self, corpus_problem: Callable[..., PlanningProblem], simultaneous_problem: PlanningProblem
    ) -> None:
        """Test a thousand random residual structures against random events.

        An event that ends no matched token admits the empty match. The result keeps the matched
        terms and every entry among them, and stays residual; only the clock and the lower bounds
        towards pending terms move.
        """
        rng = random.Random(11)
        pools: list[tuple[list[MatchingStructure], list[Event]]] = []
        for problem, bounds in [
            (corpus_problem("eventually"), EnumBounds(max_length=4, max_delta=2)),
            (corpus_problem("overlap"), EnumBounds(max_length=3, max_delta=2)),
            (simultaneous_problem, EnumBounds(max_length=3, max_delta=2)),
        ]:
            seen = dict.fromkeys(r[-1] for _, _, runs in _runs(problem, bounds) for r in runs)
            structures = [ms for ms in seen if status(ms).residual]
            assert structures
            pools.append((structures, alphabet(problem.variables, constants(problem).horizon + 1)))

        for _ in range(1000):
            structures, events = rng.choice(pools)
            ms = rng.choice(structures)
            event = rng.choice([e for e in events if not forced_ends(ms, e)])
            assert frozenset() in i_match_candidates(ms, event)
            after = apply(ms, event, [])
            assert after.matched == ms.matched
            assert status(after).residual
            assert after.clock == min(ms.clock + event.delta, ms.info.window + ms.info.horizon)
            for i in ms.matched:
                for j in ms.matched:
                    assert after.dbm.entries[i][j] == ms.dbm.entries[i][j]
