"""Tiny specifications, games and plans shipped with the package."""

from __future__ import annotations

from importlib import resources

from ..models import PlanDocument, SpecDocument

PROBLEMS = ("worked_example", "empty", "deadline", "eventually", "two_statements", "overlap")
GAMES = ("trivial", "charlie_wins", "eve_wins")
PLANS = ("worked_example",)


def _text(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.json").read_text(encoding="utf-8")


def spec(name: str) -> SpecDocument:
    """Load a shipped specification by name.

    Raises:
        FileNotFoundError: If no such specification is shipped.
    """
    return SpecDocument.model_validate_json(_text(name))


def plan(name: str) -> PlanDocument:
    """Load a shipped plan; plans are stored as ``<name>_plan.json``."""
    return PlanDocument.model_validate_json(_text(f"{name}_plan"))
