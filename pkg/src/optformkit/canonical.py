"""
Rule-based conversion of an IRModel into canonical matrix form: rows
(coeffs, rhs) meaning coeffs . x <= rhs, plus a minimization objective
vector. GE/GT constraints are negated, EQ splits into two rows, and a
maximize objective is negated into the minimization convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ir import Constraint, Direction, Identifier, IRModel, Objective, Relation, validate_ir

__all__ = [
    "CanonicalForm",
    "Row",
    "to_canonical",
    "constraint_to_row",
    "objective_to_vector",
    "scale_normalize_row",
    "UnknownVariableError",
    "EmptyModelError",
    "canonical_to_dict",
    "canonical_from_dict",
]

Row = tuple[tuple[float, ...], float]  # (coefficient vector, rhs)


class UnknownVariableError(ValueError):
    """A constraint or objective references a variable not in the order."""


class EmptyModelError(ValueError):
    """The model has no variables to canonicalize over."""


@dataclass(frozen=True)
class CanonicalForm:
    """Matrix encoding of an LP: for n = len(variable_order), each row is a
    length-n coefficient tuple plus an rhs (coeffs . x <= rhs), and the
    objective is a length-n vector to minimize."""

    variable_order: tuple[Identifier, ...]
    rows: tuple[Row, ...]
    objective: tuple[float, ...]

    def __post_init__(self):
        n = len(self.variable_order)
        if len(self.objective) != n:
            raise ValueError("objective length differs from variable count")
        for coeffs, rhs in self.rows:
            if len(coeffs) != n:
                raise ValueError("row length differs from variable count")
            if not all(math.isfinite(c) for c in coeffs) or not math.isfinite(rhs):
                raise ValueError("non-finite entry in canonical row")


def _column_index(order: tuple[Identifier, ...]) -> dict[Identifier, int]:
    return {v: i for i, v in enumerate(order)}


def _side_difference(c: Constraint, order: tuple[Identifier, ...]) -> tuple[list[float], float]:
    """Compute lhs - rhs as (coefficient vector, constant)."""
    index = _column_index(order)
    coeffs = [0.0] * len(order)
    for sign, expr in ((1.0, c.lhs), (-1.0, c.rhs)):
        for coef, var in expr.terms:
            if var not in index:
                raise UnknownVariableError(f"constraint references undeclared variable {var.text!r}")
            coeffs[index[var]] += sign * coef
    constant = c.lhs.constant - c.rhs.constant
    return [0.0 if x == 0 else x for x in coeffs], (0.0 if constant == 0 else constant)


def constraint_to_row(c: Constraint, order: tuple[Identifier, ...]) -> list[Row]:
    """Convert one constraint to its <= rows: one row for LE/LT, one negated
    row for GE/GT, two rows for EQ (the LE row then the negated-GE row)."""
    coeffs, k = _side_difference(c, order)
    le_row: Row = (tuple(coeffs), 0.0 if k == 0 else -k)
    ge_row: Row = (tuple(0.0 if x == 0 else -x for x in coeffs), 0.0 if k == 0 else k)
    if c.relation in (Relation.LE, Relation.LT):
        return [le_row]
    if c.relation in (Relation.GE, Relation.GT):
        return [ge_row]
    return [le_row, ge_row]


def objective_to_vector(obj: Objective, order: tuple[Identifier, ...]) -> tuple[float, ...]:
    """Objective coefficients in variable order; a maximize objective is
    negated into the minimization convention."""
    index = _column_index(order)
    vec = [0.0] * len(order)
    for coef, var in obj.expr.terms:
        if var not in index:
            raise UnknownVariableError(f"objective references undeclared variable {var.text!r}")
        vec[index[var]] += coef
    if obj.direction is Direction.MAX:
        vec = [-x for x in vec]
    return tuple(0.0 if x == 0 else x for x in vec)


def to_canonical(model: IRModel, notes: list[str] | None = None) -> CanonicalForm:
    """Canonicalize a model. Requires a clean declaration list (no
    UnknownVariable findings). Strict relations LT/GT are canonicalized as
    LE/GE; when that happens a note is appended to `notes` if given."""
    if not model.variables:
        raise EmptyModelError("model declares no variables")
    unknown = [d for d in validate_ir(model) if d.kind == "UnknownVariable"]
    if unknown:
        raise UnknownVariableError(unknown[0].message)
    order = model.variables
    rows: list[Row] = []
    for i, c in enumerate(model.constraints):
        if notes is not None and c.relation in (Relation.LT, Relation.GT):
            notes.append(f"constraint {i}: strict relation {c.relation.value} canonicalized as non-strict")
        rows.extend(constraint_to_row(c, order))
    return CanonicalForm(
        variable_order=order,
        rows=tuple(rows),
        objective=objective_to_vector(model.objective, order),
    )


def scale_normalize_row(row: Row) -> Row:
    """Divide coefficients and rhs by the maximum absolute coefficient (a
    strictly positive divisor, so the inequality direction is preserved).
    All-zero rows pass through unchanged. Idempotent."""
    coeffs, rhs = row
    scale = max(abs(c) for c in coeffs) if coeffs else 0.0
    if scale == 0:
        return row
    return (tuple(c / scale for c in coeffs), rhs / scale)


# --- JSON shape: rows serialize with the rhs appended ----------------------
# {"variables": [...], "rows": [[c1, ..., cn, rhs], ...], "objective": [...]}


def canonical_to_dict(form: CanonicalForm) -> dict:
    return {
        "variables": [v.text for v in form.variable_order],
        "rows": [[*coeffs, rhs] for coeffs, rhs in form.rows],
        "objective": list(form.objective),
    }


def canonical_from_dict(d: dict) -> CanonicalForm:
    n = len(d["variables"])
    rows = []
    for entry in d.get("rows", []):
        if len(entry) != n + 1:
            raise ValueError(f"row of length {len(entry)} for {n} variables")
        rows.append((tuple(float(x) for x in entry[:-1]), float(entry[-1])))
    return CanonicalForm(
        variable_order=tuple(Identifier(str(name)) for name in d["variables"]),
        rows=tuple(rows),
        objective=tuple(float(x) for x in d.get("objective", [])),
    )
