"""Specification vocabulary: state variables, rules, problems and games."""

from __future__ import annotations

from enum import StrEnum

from pydantic import Field

from .base import IDENTIFIER_PATTERN, FrozenModel

# ============================================================================
# Enums
# ============================================================================


class Endpoint(StrEnum):
    """Which endpoint of a token a term refers to."""

    START = "start"
    END = "end"


class Controllability(StrEnum):
    """Who decides when a token holding a value ends."""

    CONTROLLABLE = "controllable"
    UNCONTROLLABLE = "uncontrollable"


# ============================================================================
# State Variables
# ============================================================================


class Duration(FrozenModel):
    """Bounds on how long a token may hold a value. ``dmax=None`` means unbounded."""

    dmin: int = Field(0, ge=0, description="Minimum duration.")
    dmax: int | None = Field(None, ge=0, description="Maximum duration, None for +infinity.")

    @property
    def is_trivial(self) -> bool:
        """True for the vacuous bound (0, +infinity)."""
        return self.dmin == 0 and self.dmax is None

    def __str__(self) -> str:
        """``[dmin,dmax]`` with ``inf`` for no maximum."""
        upper = "inf" if self.dmax is None else str(self.dmax)
        return f"[{self.dmin},{upper}]"


UNBOUNDED = Duration()


class StateVariable(FrozenModel):
    """A timeline: a variable with a finite domain, a transition relation, durations and controllability."""

    name: str = Field(..., pattern=IDENTIFIER_PATTERN, description="Variable identifier.", examples=["x0"])
    values: tuple[str, ...] = Field(..., description="Domain of the variable, in declaration order.")
    transitions: dict[str, frozenset[str]] = Field(
        default_factory=dict,
        description="Values allowed to follow each value.",
    )
    durations: dict[str, Duration] = Field(default_factory=dict, description="Duration bounds per value.")
    controllability: dict[str, Controllability] = Field(
        default_factory=dict,
        description="Controllability tag per value.",
    )

    def transition(self, value: str) -> frozenset[str]:
        """Successor values of ``value``."""
        return self.transitions.get(value, frozenset())

    def duration(self, value: str) -> Duration:
        """Duration bounds of ``value`` (unbounded when not declared)."""
        return self.durations.get(value, UNBOUNDED)

    def is_controllable(self, value: str) -> bool:
        """Whether the end of a token holding ``value`` is decided by the controller."""
        return self.controllability.get(value, Controllability.CONTROLLABLE) is Controllability.CONTROLLABLE


# ============================================================================
# Rules
# ============================================================================


class Term(FrozenModel):
    """The start or end point of a named token."""

    endpoint: Endpoint
    token: str = Field(..., pattern=IDENTIFIER_PATTERN)

    @classmethod
    def start(cls, token: str) -> Term:
        """Build ``start(token)``."""
        return cls(endpoint=Endpoint.START, token=token)

    @classmethod
    def end(cls, token: str) -> Term:
        """Build ``end(token)``."""
        return cls(endpoint=Endpoint.END, token=token)

    def sort_key(self) -> tuple[str, int]:
        """Canonical order: by token name, start before end."""
        return (self.token, 0 if self.endpoint is Endpoint.START else 1)

    def __str__(self) -> str:
        """``start(a)`` or ``end(a)``."""
        return f"{self.endpoint}({self.token})"


class Atom(FrozenModel):
    """Bounded distance ``lower <= rhs - lhs <= upper`` between two endpoints."""

    lhs: Term
    rhs: Term
    lower: int = Field(0, ge=0, description="Lower bound l.")
    upper: int | None = Field(None, ge=0, description="Upper bound u, None for +infinity.")

    def __str__(self) -> str:
        """``lhs <=[l,u] rhs``."""
        upper = "inf" if self.upper is None else str(self.upper)
        return f"{self.lhs} <=[{self.lower},{upper}] {self.rhs}"


class Quantifier(FrozenModel):
    """``token[variable = value]``: a token name ranging over tokens of one value."""

    token: str = Field(..., pattern=IDENTIFIER_PATTERN)
    variable: str = Field(..., pattern=IDENTIFIER_PATTERN)
    value: str = Field(..., pattern=IDENTIFIER_PATTERN)

    def __str__(self) -> str:
        """``token[variable=value]``."""
        return f"{self.token}[{self.variable}={self.value}]"


class ExistentialStatement(FrozenModel):
    """One disjunct of a rule body: quantified tokens and a conjunctive clause."""

    quantifiers: tuple[Quantifier, ...] = ()
    clause: tuple[Atom, ...] = ()


class SyncRule(FrozenModel):
    """``trigger => E1 or ... or Ek``. A missing trigger is the unsupported triggerless form."""

    name: str | None = Field(None, description="Optional label used in diagnostics and DOT output.")
    trigger: Quantifier | None
    statements: tuple[ExistentialStatement, ...]

    def label(self, index: int) -> str:
        """Name of the rule, or a positional fallback."""
        return self.name or f"rule{index}"


class Constraint(FrozenModel):
    """Difference constraint ``lhs - rhs <= bound``."""

    lhs: Term
    rhs: Term
    bound: int

    def __str__(self) -> str:
        """``lhs - rhs <= bound``."""
        return f"{self.lhs} - {self.rhs} <= {self.bound}"


# ============================================================================
# Problems and Games
# ============================================================================


class PlanningProblem(FrozenModel):
    """State variables plus synchronization rules."""

    variables: tuple[StateVariable, ...] = ()
    rules: tuple[SyncRule, ...] = ()

    def variable(self, name: str) -> StateVariable:
        """Look a variable up by name.

        Raises:
            KeyError: If no such variable is declared.
        """
        for variable in self.variables:
            if variable.name == name:
                return variable
        raise KeyError(name)


class GameSpec(FrozenModel):
    """A timeline-based game: Charlie owns ``controlled``, Eve owns ``external``."""

    controlled: tuple[StateVariable, ...] = ()
    external: tuple[StateVariable, ...] = ()
    system_rules: tuple[SyncRule, ...] = ()
    domain_rules: tuple[SyncRule, ...] = ()

    @property
    def variables(self) -> tuple[StateVariable, ...]:
        """All variables, controlled first."""
        return self.controlled + self.external

    @property
    def controlled_names(self) -> frozenset[str]:
        """Names of Charlie's variables."""
        return frozenset(v.name for v in self.controlled)

    def as_problem(self) -> PlanningProblem:
        """The planning problem over every variable and every rule."""
        return PlanningProblem(variables=self.variables, rules=self.system_rules + self.domain_rules)


class ProblemConstants(FrozenModel):
    """Derived constants: the time horizon ``d`` and the window."""

    horizon: int = Field(..., ge=1, description="Maximum useful time increment d.")
    window: int = Field(..., ge=0, description="Sum of the finite upper bounds over all rules.")


# ============================================================================
# Diagnostics
# ============================================================================


class Diagnostic(FrozenModel):
    """One validation failure and where it was found."""

    path: str = Field(..., description="Location of the offending element.", examples=["rules[0].trigger"])
    message: str = Field(..., description="Explanation of the failure.")

    def __str__(self) -> str:
        """``path: message``."""
        return f"{self.path}: {self.message}"


class ValidationReport(FrozenModel):
    """All diagnostics for a specification. Empty means valid."""

    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def ok(self) -> bool:
        """True when no diagnostic was produced."""
        return not self.diagnostics
