"""Tests for the brute-force rule semantics and plan enumeration."""

from collections.abc import Callable

import pytest

from tbsynth.errors import ResourceError
from tbsynth.models import Action, EventSequence, PlanningProblem, StateVariable, SyncRule, Term
from tbsynth.oracle import (
    EnumBounds,
    RuleStatus,
    enumerate_sequences,
    find_assignment,
    is_solution_plan,
    rule_status,
    satisfies_rule,
)

START_XA, END_XA = Action.start("x", "a"), Action.end("x", "a")
START_YC, END_YC = Action.start("y", "c"), Action.end("y", "c")


class TestAssignments:
    """Test witness search on the worked example."""

    def test_worked_witness(self, worked_plan: EventSequence, worked_problem: PlanningProblem) -> None:
        """Test the tokens chosen for the trigger started at the first event."""
        found = find_assignment(worked_plan, worked_problem.rules[0], 1)
        assert found is not None
        assert dict(found.tokens) == {"a0": (1, 6), "a1": (3, 5), "a2": (2, 6), "a3": (1, 4)}
        assert found.positions[Term.end("a3")] == 4

    def test_no_trigger_at_position(self, worked_plan: EventSequence, worked_problem: PlanningProblem) -> None:
        """Test that positions without a trigger start have no witness."""
        assert find_assignment(worked_plan, worked_problem.rules[0], 2) is None

    def test_worked_plan_is_a_solution(self, worked_plan: EventSequence, worked_problem: PlanningProblem) -> None:
        """Test the full plan and one of its open prefixes."""
        assert satisfies_rule(worked_plan, worked_problem.rules[0])
        assert is_solution_plan(worked_plan, worked_problem)
        prefix = EventSequence(events=worked_plan.events[:3])
        assert not is_solution_plan(prefix, worked_problem)

    def test_triggerless_rule(self, worked_plan: EventSequence) -> None:
        """Test that triggerless rules are refused."""
        rule = SyncRule(trigger=None, statements=())
        with pytest.raises(ValueError):
            satisfies_rule(worked_plan, rule)
        with pytest.raises(ValueError):
            rule_status(worked_plan, rule)


class TestRuleStatus:
    """Test the standing of rules on partial plans."""

    def test_open_trigger_is_pending(self, worked_plan: EventSequence, worked_problem: PlanningProblem) -> None:
        """Test that the worked rule is pending after the first event and satisfied at the end."""
        rule = worked_problem.rules[0]
        assert rule_status(EventSequence(events=worked_plan.events[:1]), rule) is RuleStatus.PENDING
        assert rule_status(worked_plan, rule) is RuleStatus.SATISFIED

    def test_missed_partner_is_violated(
        self, simultaneous_problem: PlanningProblem, make_sequence: Callable[..., EventSequence]
    ) -> None:
        """Test that a trigger whose partner did not start with it can never be matched."""
        rule = simultaneous_problem.rules[0]
        assert rule_status(make_sequence((1, [START_XA])), rule) is RuleStatus.VIOLATED

    def test_partner_started_together(
        self, simultaneous_problem: PlanningProblem, make_sequence: Callable[..., EventSequence]
    ) -> None:
        """Test pending while both tokens are open, satisfied once both are closed."""
        rule = simultaneous_problem.rules[0]
        opened = make_sequence((1, [START_XA, START_YC]))
        closed = make_sequence((1, [START_XA, START_YC]), (1, [END_XA, END_YC]))
        assert rule_status(opened, rule) is RuleStatus.PENDING
        assert rule_status(closed, rule) is RuleStatus.SATISFIED

    def test_no_trigger_is_satisfied(self, simultaneous_problem: PlanningProblem) -> None:
        """Test that the empty plan satisfies every triggered rule."""
        assert rule_status(EventSequence(), simultaneous_problem.rules[0]) is RuleStatus.SATISFIED


class TestEnumeration:
    """Test exhaustive sequence enumeration."""

    def test_single_value_variable(self, corpus_problem: Callable[..., PlanningProblem]) -> None:
        """Test the empty sequence plus the four one-event sequences."""
        sequences = list(enumerate_sequences(corpus_problem("empty").variables, EnumBounds(max_length=1)))
        assert len(sequences) == 5
        assert sequences[0] == EventSequence()

    def test_sequences_are_well_formed(self, corpus_problem: Callable[..., PlanningProblem]) -> None:
        """Test that first events have delay 1 and later delays stay within bounds."""
        bounds = EnumBounds(max_length=3, max_delta=2)
        for seq in enumerate_sequences(corpus_problem("deadline").variables, bounds):
            assert len(seq) <= 3
            if seq.events:
                assert seq.events[0].delta == 1
                assert all(1 <= e.delta <= 2 for e in seq.events)

    def test_variable_filter(self, make_variable: Callable[..., StateVariable]) -> None:
        """Test that only the listed variables appear."""
        variables = [make_variable("x", ["a"]), make_variable("y", ["c"])]
        bounds = EnumBounds(max_length=2, variables=("y",))
        for seq in enumerate_sequences(variables, bounds):
            assert all(a.variable == "y" for e in seq.events for a in e.actions)

    def test_limit(self, corpus_problem: Callable[..., PlanningProblem]) -> None:
        """Test that the enumeration guard raises with the count reached."""
        with pytest.raises(ResourceError) as excinfo:
            list(enumerate_sequences(corpus_problem("empty").variables, EnumBounds(max_length=1), limit=3))
        assert excinfo.value.count == 4
