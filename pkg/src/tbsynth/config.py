"""Runtime settings resolved from arguments and the environment."""

import os

from pydantic import BaseModel, Field

DEFAULT_STATE_BUDGET = 200_000
DEFAULT_ENUM_LIMIT = 2_000_000


class Settings(BaseModel):
    """Guards and logging configuration.

    Explicit arguments win over ``TBSYNTH_*`` environment variables, which win over defaults.
    """

    state_budget: int = Field(
        DEFAULT_STATE_BUDGET,
        ge=1,
        description="Maximum number of interned states during exploration and arena construction.",
    )
    enum_limit: int = Field(
        DEFAULT_ENUM_LIMIT,
        ge=1,
        description="Maximum size of brute-force enumerations in the oracle.",
    )
    log_level: str = Field("WARNING", description="Logging level name.", examples=["DEBUG", "INFO"])

    @classmethod
    def from_env(
        cls,
        state_budget: int | None = None,
        enum_limit: int | None = None,
        log_level: str | None = None,
    ) -> "Settings":
        """Build settings, consulting the environment for anything not given.

        Args:
            state_budget: Optional explicit state budget. Falls back to TBSYNTH_STATE_BUDGET.
            enum_limit: Optional explicit enumeration limit. Falls back to TBSYNTH_ENUM_LIMIT.
            log_level: Optional explicit level name. Falls back to TBSYNTH_LOG_LEVEL.

        Returns:
            Validated settings.
        """
        if state_budget is None:
            state_budget = int(os.getenv("TBSYNTH_STATE_BUDGET", DEFAULT_STATE_BUDGET))
        if enum_limit is None:
            enum_limit = int(os.getenv("TBSYNTH_ENUM_LIMIT", DEFAULT_ENUM_LIMIT))
        if log_level is None:
            log_level = os.getenv("TBSYNTH_LOG_LEVEL", "WARNING")
        return cls(state_budget=state_budget, enum_limit=enum_limit, log_level=log_level.upper())
