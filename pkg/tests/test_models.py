"""Tests for the pydantic models and the JSON document formats."""

import logging

import pytest
from pydantic import ValidationError

from tbsynth.models import (
    Action,
    Event,
    EventSequence,
    MoveC,
    MoveE,
    MoveKind,
    PlanDocument,
    Round,
    SpecDocument,
    Term,
    normalize_keys,
    parse_term,
)
from tbsynth.models.documents import AtomDocument, ControllerDocument, MoveDocument, ValueDocument, VariableDocument


class TestNormalizeKeys:
    """Test the normalize_keys utility function."""

    def test_to_snake_simple(self) -> None:
        """Test conversion of simple camelCase to snake_case."""
        data = {"minDuration": 1, "maxDuration": 2}
        result = normalize_keys(data, "to_snake")
        assert result == {"min_duration": 1, "max_duration": 2}

    def test_to_snake_nested(self) -> None:
        """Test conversion of nested objects and lists."""
        data = {"variables": [{"values": [{"minDuration": 1}]}]}
        result = normalize_keys(data, "to_snake")
        assert result == {"variables": [{"values": [{"min_duration": 1}]}]}

    def test_to_camel_nested(self) -> None:
        """Test conversion of nested objects to camelCase."""
        data = {"values": [{"max_duration": None, "min_duration": 0}]}
        result = normalize_keys(data, "to_camel")
        assert result == {"values": [{"maxDuration": None, "minDuration": 0}]}

    def test_values_are_untouched(self) -> None:
        """Test that identifiers stored as values keep their spelling."""
        data = {"name": "someValue", "next": ["other_value", "thirdValue"]}
        assert normalize_keys(data, "to_snake") == data

    def test_tuples_keep_their_type(self) -> None:
        """Test that tuples from python-mode dumps are walked too."""
        data = {"events": ({"actionList": ()},)}
        assert normalize_keys(data, "to_snake") == {"events": ({"action_list": ()},)}

    def test_preserves_non_string_keys(self) -> None:
        """Test that non-string keys are preserved."""
        data = {1: "one", "normalKey": "value"}
        result = normalize_keys(data, "to_snake")
        assert result == {1: "one", "normal_key": "value"}


class TestDocumentModel:
    """Test camelCase/snake_case handling of the document base class."""

    def test_accepts_camel_and_snake_case(self) -> None:
        """Test that both spellings validate to the same model."""
        camel = ValueDocument.model_validate({"name": "a", "minDuration": 1, "maxDuration": 3})
        snake = ValueDocument.model_validate({"name": "a", "min_duration": 1, "max_duration": 3})
        assert camel == snake
        assert camel.min_duration == 1

    def test_dump_camel(self) -> None:
        """Test that model_dump_camel writes camelCase keys."""
        dumped = ValueDocument(name="a", min_duration=2).model_dump_camel()
        assert dumped["minDuration"] == 2
        assert "min_duration" not in dumped

    def test_rejects_unknown_keys(self) -> None:
        """Test that typos in documents are reported."""
        with pytest.raises(ValidationError):
            ValueDocument.model_validate({"name": "a", "minDurations": 1})


class TestSpecDocument:
    """Test conversion of specification documents to domain models."""

    def test_variable_defaults(self) -> None:
        """Test that omitted transitions allow every value and durations are unbounded."""
        variable = VariableDocument.model_validate({"name": "x", "values": [{"name": "a"}, {"name": "b"}]}).to_model()
        assert variable.transition("a") == frozenset({"a", "b"})
        assert variable.duration("b").is_trivial
        assert variable.is_controllable("a")

    def test_variable_explicit_fields(self) -> None:
        """Test successors, duration bounds and controllability."""
        document = VariableDocument.model_validate(
            {
                "name": "y",
                "values": [
                    {"name": "off", "next": ["req"]},
                    {"name": "req", "minDuration": 1, "maxDuration": 1, "controllable": False},
                ],
            }
        )
        variable = document.to_model()
        assert variable.transition("off") == frozenset({"req"})
        assert variable.duration("req").dmin == 1
        assert variable.duration("req").dmax == 1
        assert not variable.is_controllable("req")

    @pytest.mark.parametrize(
        "atom,expected",
        [
            ({"lhs": "start(a)", "rhs": "end(b)", "rel": "before"}, (0, None)),
            ({"lhs": "start(a)", "rhs": "end(b)", "rel": "equals"}, (0, 0)),
            ({"lhs": "start(a)", "rhs": "end(b)", "lower": 2, "upper": 5}, (2, 5)),
            ({"lhs": "start(a)", "rhs": "end(b)"}, (0, None)),
        ],
    )
    def test_atom_shorthands(self, atom: dict[str, object], expected: tuple[int, int | None]) -> None:
        """Test that relation shorthands expand to bounds."""
        model = AtomDocument.model_validate(atom).to_model()
        assert (model.lower, model.upper) == expected
        assert model.lhs == Term.start("a")
        assert model.rhs == Term.end("b")

    def test_atom_rejects_rel_with_bounds(self) -> None:
        """Test that a shorthand and explicit bounds cannot be mixed."""
        with pytest.raises(ValidationError):
            AtomDocument.model_validate({"lhs": "start(a)", "rhs": "end(a)", "rel": "equals", "upper": 3})

    def test_atom_rejects_bad_term(self) -> None:
        """Test that terms must be start(...) or end(...)."""
        with pytest.raises(ValidationError):
            AtomDocument.model_validate({"lhs": "middle(a)", "rhs": "end(a)"})

    def test_parse_term(self) -> None:
        """Test the term parser, whitespace included."""
        assert parse_term(" end( tok_1 ) ") == Term.end("tok_1")
        with pytest.raises(ValueError):
            parse_term("start a")

    def test_to_game_splits_owners_and_roles(self) -> None:
        """Test that owners and roles decide the game sides."""
        document = SpecDocument.model_validate(
            {
                "variables": [
                    {"name": "x", "values": [{"name": "a"}]},
                    {"name": "y", "owner": "environment", "values": [{"name": "b"}]},
                ],
                "rules": [
                    {"trigger": {"token": "t", "variable": "x", "value": "a"}, "statements": [{}]},
                    {"role": "domain", "trigger": {"token": "t", "variable": "y", "value": "b"}, "statements": [{}]},
                ],
            }
        )
        game = document.to_game()
        assert [v.name for v in game.controlled] == ["x"]
        assert [v.name for v in game.external] == ["y"]
        assert len(game.system_rules) == 1
        assert len(game.domain_rules) == 1
        assert len(document.to_problem().rules) == 2

    def test_triggerless_rule_is_representable(self) -> None:
        """Test that a null trigger parses, leaving rejection to validation."""
        document = SpecDocument.model_validate({"rules": [{"trigger": None, "statements": []}]})
        assert document.to_problem().rules[0].trigger is None

    def test_rejects_unknown_format(self) -> None:
        """Test that the format tag is checked."""
        with pytest.raises(ValidationError):
            SpecDocument.model_validate({"format": "tbsynth-spec/2"})


class TestEvents:
    """Test actions, events and event sequences."""

    def test_event_rejects_two_starts_of_one_variable(self) -> None:
        """Test that an event starts at most one token per variable."""
        with pytest.raises(ValidationError):
            Event(actions=frozenset({Action.start("x", "a"), Action.start("x", "b")}))

    def test_event_allows_end_and_start_of_one_variable(self) -> None:
        """Test that an end and a start of the same variable may share an event."""
        event = Event(actions=frozenset({Action.end("x", "a"), Action.start("x", "b")}), delta=3)
        end, start = event.for_variable("x")
        assert end == Action.end("x", "a")
        assert start == Action.start("x", "b")
        assert event.for_variable("y") == (None, None)

    def test_delta_must_be_positive(self) -> None:
        """Test that events carry a positive delay."""
        with pytest.raises(ValidationError):
            Event(delta=0)

    def test_sequence_positions_are_one_based(self) -> None:
        """Test 1-based indexing of event sequences."""
        first, second = Event(), Event(delta=4)
        seq = EventSequence(events=(first, second))
        assert seq[1] == first
        assert seq[2] == second
        with pytest.raises(IndexError):
            seq[0]

    def test_append_returns_new_sequence(self) -> None:
        """Test that sequences are immutable values."""
        seq = EventSequence()
        longer = seq.append(Event())
        assert len(seq) == 0
        assert len(longer) == 1

    def test_rendering(self) -> None:
        """Test the text form of actions and events."""
        event = Event(actions=frozenset({Action.start("y", "b"), Action.end("x", "a")}), delta=2)
        assert str(event) == "({end(x,a), start(y,b)}, 2)"


class TestMoves:
    """Test move and round shapes."""

    def test_wait_needs_delay(self) -> None:
        """Test that wait moves carry a delay and no actions."""
        with pytest.raises(ValidationError):
            MoveC(kind=MoveKind.WAIT)
        with pytest.raises(ValidationError):
            MoveC(kind=MoveKind.WAIT, delta=1, actions=frozenset({Action.end("x", "a")}))

    def test_play_has_no_delay(self) -> None:
        """Test that Charlie's plays carry no delay."""
        with pytest.raises(ValidationError):
            MoveC(kind=MoveKind.PLAY, delta=2)

    def test_moves_are_homogeneous(self) -> None:
        """Test that a move starts or ends, never both."""
        with pytest.raises(ValidationError):
            MoveE.play({Action.start("x", "a"), Action.end("y", "b")})

    def test_wait_answered_within_delay(self) -> None:
        """Test that Eve answers a wait with a delay no longer than Charlie's."""
        Round(charlie=MoveC.wait(3), eve=MoveE.play(delta=3))
        with pytest.raises(ValidationError):
            Round(charlie=MoveC.wait(2), eve=MoveE.play(delta=3))
        with pytest.raises(ValidationError):
            Round(charlie=MoveC.wait(2), eve=MoveE.play())

    def test_wait_cannot_be_answered_with_starts(self) -> None:
        """Test that a wait opens an ending round."""
        with pytest.raises(ValidationError):
            Round(charlie=MoveC.wait(1), eve=MoveE.play({Action.start("y", "b")}, delta=1))

    def test_round_kinds_must_agree(self) -> None:
        """Test that both moves of a round start or both end."""
        with pytest.raises(ValidationError):
            Round(charlie=MoveC.play({Action.start("x", "a")}), eve=MoveE.play({Action.end("y", "b")}))

    @pytest.mark.parametrize(
        "charlie,eve,ending",
        [
            (MoveC.wait(1), MoveE.play(delta=1), True),
            (MoveC.play({Action.end("x", "a")}), MoveE.play(), True),
            (MoveC.play(), MoveE.play({Action.end("y", "b")}), True),
            (MoveC.play({Action.start("x", "a")}), MoveE.play(), False),
            (MoveC.play(), MoveE.play(), False),
        ],
    )
    def test_is_ending(self, charlie: MoveC, eve: MoveE, ending: bool) -> None:
        """Test the classification of rounds."""
        assert Round(charlie=charlie, eve=eve).is_ending is ending

    def test_rendering(self) -> None:
        """Test the text form of moves."""
        assert str(MoveC.wait(2)) == "wait(2)"
        assert str(MoveE.play({Action.end("y", "b")}, delta=1)) == "play(1, {end(y,b)})"
        assert str(MoveC.play()) == "play({})"


class TestPlanDocument:
    """Test plan documents."""

    def test_first_delta_is_canonicalized(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test that the first event always gets delay 1, with a warning."""
        document = PlanDocument.model_validate({"events": [{"actions": [], "delta": 7}, {"actions": [], "delta": 2}]})
        with caplog.at_level(logging.WARNING, logger="tbsynth"):
            seq = document.to_sequence()
        assert [e.delta for e in seq.events] == [1, 2]
        assert "canonicalized" in caplog.text

    def test_later_delta_zero_is_rejected(self) -> None:
        """Test that only the first event may carry delay 0."""
        document = PlanDocument.model_validate({"events": [{"delta": 0}, {"delta": 0}]})
        with pytest.raises(ValueError, match="event 2"):
            document.to_sequence()

    def test_from_sequence_orders_actions(self) -> None:
        """Test that serialized actions follow the canonical order."""
        seq = EventSequence(events=(Event(actions=frozenset({Action.start("y", "b"), Action.start("x", "a")})),))
        document = PlanDocument.from_sequence(seq)
        assert [a.var for a in document.events[0].actions] == ["x", "y"]
        assert document.to_sequence() == seq


class TestMoveDocument:
    """Test move serialization inside controller documents."""

    def test_charlie_and_eve_moves(self) -> None:
        """Test conversion in both directions."""
        wait = MoveDocument.from_charlie(MoveC.wait(2))
        assert wait.to_charlie() == MoveC.wait(2)
        reply = MoveE.play({Action.end("y", "b")}, delta=1)
        assert MoveDocument.from_eve(reply).to_eve() == reply

    def test_eve_never_waits(self) -> None:
        """Test that a wait cannot be read as an Eve move."""
        with pytest.raises(ValueError):
            MoveDocument.from_charlie(MoveC.wait(1)).to_eve()

    def test_controller_document_defaults(self) -> None:
        """Test the empty controller document."""
        document = ControllerDocument()
        assert document.format == "tbsynth-controller/1"
        assert document.initial == 0
        assert document.states == []
