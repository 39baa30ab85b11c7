"""Term-indexed difference bound matrices.

Entries are kept exactly as built and shifted; no closure is ever computed.
"""

from __future__ import annotations

import math
from collections.abc import Collection, Mapping
from dataclasses import dataclass

from .errors import DbmOverflowError
from .models import ExistentialStatement, Quantifier, StateVariable, Term
from .problem import clause_to_constraints

INF = math.inf
INT64_MAX = 2**63 - 1

Bound = int | float


@dataclass(frozen=True, slots=True)
class Dbm:
    """``entries[i][j]`` bounds ``terms[i] - terms[j]``; ``INF`` when unconstrained."""

    terms: tuple[Term, ...]
    entries: tuple[tuple[Bound, ...], ...]

    def index(self, term: Term) -> int:
        """Row/column of ``term``."""
        return self.terms.index(term)

    def get(self, lhs: Term, rhs: Term) -> Bound:
        """Bound on ``lhs - rhs``."""
        return self.entries[self.index(lhs)][self.index(rhs)]

    def indices(self, terms: Collection[Term]) -> frozenset[int]:
        """Positions of several terms."""
        return frozenset(self.index(term) for term in terms)


def statement_terms(statement: ExistentialStatement, trigger: Quantifier) -> tuple[Term, ...]:
    """Start and end of the trigger token, then of every quantified token, in quantifier order."""
    terms: list[Term] = []
    for quantifier in (trigger, *statement.quantifiers):
        terms.extend((Term.start(quantifier.token), Term.end(quantifier.token)))
    return tuple(terms)


def init_dbm(
    statement: ExistentialStatement,
    trigger: Quantifier,
    variables: Mapping[str, StateVariable] | None = None,
) -> Dbm:
    """Initial matrix of a statement: 0 on the diagonal, the tightest constraint elsewhere, ``INF`` otherwise."""
    terms = statement_terms(statement, trigger)
    position = {term: i for i, term in enumerate(terms)}
    rows: list[list[Bound]] = [[0 if i == j else INF for j in range(len(terms))] for i in range(len(terms))]
    for constraint in clause_to_constraints(statement, trigger, variables):
        i, j = position[constraint.lhs], position[constraint.rhs]
        if i != j:
            rows[i][j] = min(rows[i][j], constraint.bound)
    return Dbm(terms=terms, entries=tuple(tuple(row) for row in rows))


def shift(dbm: Dbm, matched: Collection[int], delta: int) -> Dbm:
    """Let ``delta`` time units pass with the terms at ``matched`` positions already placed.

    Entries from a matched to an unmatched term grow by ``delta``; entries from an unmatched
    to a matched term shrink by ``delta``; everything else is unchanged.

    Raises:
        DbmOverflowError: If a finite entry leaves the signed 64-bit range.
    """
    if not matched or delta == 0:
        return dbm
    size = len(dbm.terms)
    rows = []
    for i in range(size):
        row = list(dbm.entries[i])
        i_matched = i in matched
        for j in range(size):
            if i_matched == (j in matched):
                continue
            value = row[j]
            if value == INF:
                continue
            value = value + delta if i_matched else value - delta
            if abs(value) > INT64_MAX:
                raise DbmOverflowError(f"entry [{dbm.terms[i]}, {dbm.terms[j]}] overflowed to {value}")
            row[j] = value
        rows.append(tuple(row))
    return Dbm(terms=dbm.terms, entries=tuple(rows))


def _cell(value: Bound) -> str:
    return "" if value == INF else str(value)


def render(dbm: Dbm) -> str:
    """Aligned text table, rows and columns labelled by term, blank cells for +infinity."""
    labels = [str(term) for term in dbm.terms]
    cells = [[_cell(v) for v in row] for row in dbm.entries]
    width = max([len(label) for label in labels] + [len(c) for row in cells for c in row] + [1])
    lines = [" " * width + " | " + " ".join(label.rjust(width) for label in labels)]
    lines.append("-" * len(lines[0]))
    for label, row in zip(labels, cells):
        lines.append(label.rjust(width) + " | " + " ".join(c.rjust(width) for c in row))
    return "\n".join(lines)
