"""Tests for runtime settings."""

import pytest
from pydantic import ValidationError

from tbsynth.config import DEFAULT_ENUM_LIMIT, DEFAULT_STATE_BUDGET, Settings


class TestSettings:
    """Test resolution order of settings."""

    def test_defaults(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test the defaults when nothing is configured."""
        for name in ("TBSYNTH_STATE_BUDGET", "TBSYNTH_ENUM_LIMIT", "TBSYNTH_LOG_LEVEL"):
            monkeypatch.delenv(name, raising=False)
        settings = Settings.from_env()
        assert settings.state_budget == DEFAULT_STATE_BUDGET
        assert settings.enum_limit == DEFAULT_ENUM_LIMIT
        assert settings.log_level == "WARNING"

    def test_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test that environment variables override the defaults."""
        monkeypatch.setenv("TBSYNTH_STATE_BUDGET", "50")
        monkeypatch.setenv("TBSYNTH_LOG_LEVEL", "debug")
        settings = Settings.from_env()
        assert settings.state_budget == 50
        assert settings.log_level == "DEBUG"

    def test_arguments_win(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test that explicit arguments override the environment."""
        monkeypatch.setenv("TBSYNTH_ENUM_LIMIT", "10")
        assert Settings.from_env(enum_limit=20).enum_limit == 20

    def test_invalid_budget(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test that budgets must be positive."""
        monkeypatch.delenv("TBSYNTH_STATE_BUDGET", raising=False)
        with pytest.raises(ValidationError):
            Settings.from_env(state_budget=0)

    def test_unparsable_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test that a non-numeric environment value is an error."""
        monkeypatch.setenv("TBSYNTH_STATE_BUDGET", "lots")
        with pytest.raises(ValueError):
            Settings.from_env()
