"""Validation, duration desugaring, derived constants and clause rewriting."""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator, Mapping

from .models import (
    UNBOUNDED,
    Atom,
    Constraint,
    Diagnostic,
    ExistentialStatement,
    GameSpec,
    PlanningProblem,
    ProblemConstants,
    Quantifier,
    StateVariable,
    SyncRule,
    Term,
    ValidationReport,
)
from .models.base import IDENTIFIER_PATTERN

TRIGGERLESS_MESSAGE = "unsupported: triggerless rule"

_IDENTIFIER = re.compile(IDENTIFIER_PATTERN)

# ============================================================================
# Validation
# ============================================================================


def validate(spec: PlanningProblem | GameSpec) -> ValidationReport:
    """Collect every violation of the model invariants.

    Never raises; an empty report means the specification is usable.
    """
    if isinstance(spec, GameSpec):
        variables = spec.variables
        rules = [("system_rules", spec.system_rules), ("domain_rules", spec.domain_rules)]
    else:
        variables = spec.variables
        rules = [("rules", spec.rules)]

    diagnostics: list[Diagnostic] = []
    diagnostics.extend(_check_variables(variables))
    if isinstance(spec, GameSpec):
        shared = {v.name for v in spec.controlled} & {v.name for v in spec.external}
        for name in sorted(shared):
            message = f"variable {name!r} is both controlled and external"
            diagnostics.append(Diagnostic(path="variables", message=message))

    declared = {v.name: v for v in variables}
    for section, section_rules in rules:
        for index, rule in enumerate(section_rules):
            diagnostics.extend(_check_rule(rule, f"{section}[{index}]", declared))
    return ValidationReport(diagnostics=tuple(diagnostics))


def _check_variables(variables: Iterable[StateVariable]) -> Iterator[Diagnostic]:
    seen: set[str] = set()
    for index, variable in enumerate(variables):
        path = f"variables[{index}]"
        if variable.name in seen:
            yield Diagnostic(path=path, message=f"duplicate variable {variable.name!r}")
        seen.add(variable.name)
        if not variable.values:
            yield Diagnostic(path=path, message="a variable needs at least one value")
        values = set(variable.values)
        if len(values) != len(variable.values):
            yield Diagnostic(path=f"{path}.values", message="duplicate values")
        for value in variable.values:
            if not _IDENTIFIER.match(value):
                yield Diagnostic(path=f"{path}.values", message=f"invalid identifier {value!r}")
        for mapping_name, mapping in (
            ("transitions", variable.transitions),
            ("durations", variable.durations),
            ("controllability", variable.controllability),
        ):
            missing = [v for v in variable.values if v not in mapping]
            extra = sorted(set(mapping) - values)
            if missing:
                yield Diagnostic(path=f"{path}.{mapping_name}", message=f"no entry for {', '.join(missing)}")
            if extra:
                yield Diagnostic(path=f"{path}.{mapping_name}", message=f"entries for undeclared {', '.join(extra)}")
        for value, targets in sorted(variable.transitions.items()):
            unknown = sorted(targets - values)
            if unknown:
                yield Diagnostic(
                    path=f"{path}.transitions.{value}",
                    message=f"targets not in values: {', '.join(unknown)}",
                )
        for value, duration in sorted(variable.durations.items()):
            if duration.dmax is not None and duration.dmin > duration.dmax:
                yield Diagnostic(path=f"{path}.durations.{value}", message=f"dmin > dmax in {duration}")


def _check_quantifier(quantifier: Quantifier, path: str, declared: Mapping[str, StateVariable]) -> Iterator[Diagnostic]:
    variable = declared.get(quantifier.variable)
    if variable is None:
        yield Diagnostic(path=path, message=f"undeclared variable {quantifier.variable!r}")
    elif quantifier.value not in variable.values:
        yield Diagnostic(path=path, message=f"undeclared value {quantifier.value!r} of {quantifier.variable!r}")


def _check_rule(rule: SyncRule, path: str, declared: Mapping[str, StateVariable]) -> Iterator[Diagnostic]:
    if rule.trigger is None:
        yield Diagnostic(path=f"{path}.trigger", message=TRIGGERLESS_MESSAGE)
        return
    yield from _check_quantifier(rule.trigger, f"{path}.trigger", declared)
    if not rule.statements:
        yield Diagnostic(path=f"{path}.statements", message="a rule needs at least one statement")
    for s_index, statement in enumerate(rule.statements):
        s_path = f"{path}.statements[{s_index}]"
        tokens = {rule.trigger.token}
        for q_index, quantifier in enumerate(statement.quantifiers):
            q_path = f"{s_path}.quantifiers[{q_index}]"
            if quantifier.token in tokens:
                yield Diagnostic(path=q_path, message=f"token {quantifier.token!r} is already bound")
            tokens.add(quantifier.token)
            yield from _check_quantifier(quantifier, q_path, declared)
        for a_index, atom in enumerate(statement.clause):
            a_path = f"{s_path}.clause[{a_index}]"
            for term in (atom.lhs, atom.rhs):
                if term.token not in tokens:
                    yield Diagnostic(path=a_path, message=f"term {term} uses an unbound token")
            if atom.upper is not None and atom.lower > atom.upper:
                yield Diagnostic(path=a_path, message=f"lower bound exceeds upper bound in {atom}")


# ============================================================================
# Durations and constants
# ============================================================================


def duration_rule(variable: StateVariable, value: str) -> SyncRule:
    """The rule ``a[x=v] => start(a) <=[dmin,dmax] end(a)`` encoding one duration bound."""
    duration = variable.duration(value)
    return SyncRule(
        name=f"duration_{variable.name}_{value}",
        trigger=Quantifier(token="a", variable=variable.name, value=value),
        statements=(
            ExistentialStatement(
                clause=(Atom(lhs=Term.start("a"), rhs=Term.end("a"), lower=duration.dmin, upper=duration.dmax),)
            ),
        ),
    )


def strip_durations(variable: StateVariable) -> StateVariable:
    """The same variable with every duration set to (0, +infinity)."""
    return variable.model_copy(update={"durations": {value: UNBOUNDED for value in variable.values}})


def desugar_durations(problem: PlanningProblem) -> PlanningProblem:
    """Turn every nontrivial duration bound into a synchronization rule.

    Added rules follow the original ones, in variable then value order.
    """
    added = [
        duration_rule(variable, value)
        for variable in problem.variables
        for value in variable.values
        if not variable.duration(value).is_trivial
    ]
    return PlanningProblem(
        variables=tuple(strip_durations(v) for v in problem.variables),
        rules=problem.rules + tuple(added),
    )


def _atoms(rules: Iterable[SyncRule]) -> Iterator[Atom]:
    for rule in rules:
        for statement in rule.statements:
            yield from statement.clause


def horizon_d(problem: PlanningProblem) -> int:
    """``max(L, U) + 1`` over the largest lower bound and the largest finite upper bound."""
    bounds = [0]
    for atom in _atoms(problem.rules):
        bounds.append(atom.lower)
        if atom.upper is not None:
            bounds.append(atom.upper)
    return max(bounds) + 1


def window(problem: PlanningProblem) -> int:
    """Sum of every finite upper bound appearing in the rules."""
    return sum(atom.upper for atom in _atoms(problem.rules) if atom.upper is not None)


def constants(problem: PlanningProblem) -> ProblemConstants:
    """Horizon and window of the desugared problem."""
    desugared = desugar_durations(problem)
    return ProblemConstants(horizon=horizon_d(desugared), window=window(desugared))


# ============================================================================
# Clause rewriting
# ============================================================================


def clause_to_constraints(
    statement: ExistentialStatement,
    trigger: Quantifier,
    variables: Mapping[str, StateVariable] | None = None,
) -> frozenset[Constraint]:
    """Rewrite the clause into difference constraints and add duration bounds of every bound token.

    Args:
        statement: The statement to rewrite.
        trigger: The trigger quantifier of the enclosing rule.
        variables: Declared variables by name; when given, their duration bounds augment the result.

    Returns:
        ``T' - T <= u`` (finite u) and ``T - T' <= -l`` per atom, plus
        ``start(a) - end(a) <= -dmin`` and ``end(a) - start(a) <= dmax`` per token with nontrivial bounds.
    """
    constraints: set[Constraint] = set()
    for atom in statement.clause:
        if atom.upper is not None:
            constraints.add(Constraint(lhs=atom.rhs, rhs=atom.lhs, bound=atom.upper))
        constraints.add(Constraint(lhs=atom.lhs, rhs=atom.rhs, bound=-atom.lower))
    if variables:
        for quantifier in (trigger, *statement.quantifiers):
            variable = variables.get(quantifier.variable)
            if variable is None:
                continue
            duration = variable.duration(quantifier.value)
            if duration.is_trivial:
                continue
            start, end = Term.start(quantifier.token), Term.end(quantifier.token)
            constraints.add(Constraint(lhs=start, rhs=end, bound=-duration.dmin))
            if duration.dmax is not None:
                constraints.add(Constraint(lhs=end, rhs=start, bound=duration.dmax))
    return frozenset(constraints)
