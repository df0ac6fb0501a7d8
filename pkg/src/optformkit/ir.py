"""
Core domain types for the equation-centric intermediate representation (IR)
of a linear program: identifiers, linear expressions, constraints, an
objective, and the model that bundles them, together with normalization,
validation, deterministic text rendering, and a JSON wire shape.

All types are immutable after construction and all operations are pure,
so values are safe to share across threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "Identifier",
    "LinearExpr",
    "Relation",
    "Constraint",
    "Direction",
    "Objective",
    "IRModel",
    "Diagnostic",
    "InvalidModel",
    "normalize_expr",
    "render_ir",
    "validate_ir",
    "format_number",
    "model_to_dict",
    "model_from_dict",
]


class InvalidModel(ValueError):
    """Raised when an IRModel violates its structural invariants."""


_KEY_SPLIT = re.compile(r"[\s_]+")


@dataclass(frozen=True)
class Identifier:
    """A variable name.

    Names may be multi-word ("thin jar") or underscored ("thin_jar").
    Equality and hashing are case-insensitive and treat runs of
    whitespace/underscores as equivalent, so "Thin Jar" == "thin_jar".
    The original surface text is kept for rendering.
    """

    text: str

    def __post_init__(self):
        if not self.tokens:
            raise InvalidModel(f"empty identifier: {self.text!r}")

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(t for t in _KEY_SPLIT.split(self.text.strip()) if t)

    @property
    def key(self) -> tuple[str, ...]:
        return tuple(t.lower() for t in self.tokens)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Identifier):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __str__(self) -> str:
        return self.text


def _clean_zero(x: float) -> float:
    # store signed zero as plain 0 so rendering never emits "-0.0"
    return 0.0 if x == 0 else float(x)


@dataclass(frozen=True)
class LinearExpr:
    """A linear expression: ordered (coefficient, variable) terms plus a
    constant. Zero-coefficient terms are legal and preserved (the IR text
    format writes explicit zeros such as "(-0.0) * cleaners")."""

    terms: tuple[tuple[float, Identifier], ...] = ()
    constant: float = 0.0

    def __post_init__(self):
        for coef, _ in self.terms:
            if not math.isfinite(coef):
                raise InvalidModel(f"non-finite coefficient {coef!r}")
        if not math.isfinite(self.constant):
            raise InvalidModel(f"non-finite constant {self.constant!r}")

    def evaluate(self, assignment: dict[Identifier, float]) -> float:
        return sum(c * assignment[v] for c, v in self.terms) + self.constant

    @property
    def variables(self) -> tuple[Identifier, ...]:
        return tuple(v for _, v in self.terms)


class Relation(Enum):
    LE = "LE"
    GE = "GE"
    EQ = "EQ"
    LT = "LT"
    GT = "GT"


@dataclass(frozen=True)
class Constraint:
    """lhs <relation> rhs, where either side may carry terms and a constant
    (so "x <= y + 5" needs no synthetic variable)."""

    lhs: LinearExpr
    relation: Relation
    rhs: LinearExpr


class Direction(Enum):
    MIN = "MIN"
    MAX = "MAX"


@dataclass(frozen=True)
class Objective:
    direction: Direction
    expr: LinearExpr


@dataclass(frozen=True)
class IRModel:
    """An intermediate-representation model: declared variables, constraints,
    and an objective."""

    variables: tuple[Identifier, ...]
    constraints: tuple[Constraint, ...]
    objective: Objective


def normalize_expr(expr: LinearExpr) -> LinearExpr:
    """Merge duplicate variables by summing coefficients, keeping
    first-occurrence order. Zero coefficients are retained; signed zeros
    collapse to plain 0. Idempotent and evaluation-preserving."""
    order: list[Identifier] = []
    sums: dict[Identifier, float] = {}
    for coef, var in expr.terms:
        if var in sums:
            sums[var] += coef
        else:
            order.append(var)
            sums[var] = float(coef)
    terms = tuple((_clean_zero(sums[v]), v) for v in order)
    return LinearExpr(terms=terms, constant=_clean_zero(expr.constant))


def format_number(x: float) -> str:
    """Render a coefficient/constant with at least a decimal point where
    possible; repr round-trips through float() exactly."""
    return repr(_clean_zero(float(x)))


_REL_TEXT = {
    Relation.LE: "<=",
    Relation.GE: ">=",
    Relation.EQ: "=",
    Relation.LT: "<",
    Relation.GT: ">",
}


def _render_terms(expr: LinearExpr) -> str:
    parts = [f"({format_number(c)}) * {v.text}" for c, v in expr.terms]
    out = " + ".join(parts)
    const = _clean_zero(expr.constant)
    if const != 0:
        if const < 0:
            out += f" - {format_number(-const)}"
        else:
            out += f" + {format_number(const)}"
    return out


def _render_side(expr: LinearExpr) -> str:
    if not expr.terms:
        return format_number(expr.constant)
    return _render_terms(expr)


def render_ir(model: IRModel) -> str:
    """Deterministically render a model in the three-section IR text layout:

        Variables: a, b
        Constraints:
        (1.0) * a + (-1.0) * b <= 0.0
        Objective Function:
        minimize (1.0) * a

    Byte-identical output for equal models. Raises InvalidModel when the
    model violates its invariants (duplicate/empty variable list, empty
    objective expression).
    """
    _check_invariants(model)
    lines = ["Variables: " + ", ".join(v.text for v in model.variables)]
    lines.append("Constraints:")
    for c in model.constraints:
        lines.append(f"{_render_side(c.lhs)} {_REL_TEXT[c.relation]} {_render_side(c.rhs)}")
    lines.append("Objective Function:")
    word = "minimize" if model.objective.direction is Direction.MIN else "maximize"
    lines.append(f"{word} {_render_terms(model.objective.expr)}")
    return "\n".join(lines)


def _check_invariants(model: IRModel) -> None:
    if not model.variables:
        raise InvalidModel("model declares no variables")
    if len(set(model.variables)) != len(model.variables):
        raise InvalidModel("duplicate variable declarations")
    if not model.objective.expr.terms:
        raise InvalidModel("objective expression has no terms")


@dataclass(frozen=True)
class Diagnostic:
    """A structured finding about raw input or a parsed model.

    kind is one of: UnknownVariable, DuplicateVariable, RepeatedConstraint,
    ExtraBlock, TrailingNoise, TruncatedLine, MissingSection,
    EmptyConstraintSet. span is a (start, end) offset range into the source
    text; validation findings that have no source text use (0, 0).
    """

    kind: str
    span: tuple[int, int] = (0, 0)
    message: str = ""
    subject: str = ""


def validate_ir(model: IRModel) -> list[Diagnostic]:
    """Check a model against its declaration list. Findings are data, never
    exceptions: UnknownVariable for constraint/objective variables not in
    the declaration list, DuplicateVariable for repeated declarations,
    EmptyConstraintSet when there are no constraints."""
    out: list[Diagnostic] = []
    seen: set[Identifier] = set()
    for v in model.variables:
        if v in seen:
            out.append(Diagnostic("DuplicateVariable", message=f"variable {v.text!r} declared more than once", subject=v.text))
        seen.add(v)
    declared = set(model.variables)
    reported: set[Identifier] = set()

    def check_expr(expr: LinearExpr, where: str) -> None:
        for _, var in expr.terms:
            if var not in declared and var not in reported:
                reported.add(var)
                out.append(Diagnostic("UnknownVariable", message=f"{where} references undeclared variable {var.text!r}", subject=var.text))

    for i, c in enumerate(model.constraints):
        check_expr(c.lhs, f"constraint {i}")
        check_expr(c.rhs, f"constraint {i}")
    check_expr(model.objective.expr, "objective")
    if not model.constraints:
        out.append(Diagnostic("EmptyConstraintSet", message="model has no constraints"))
    return out


# --- JSON wire shape -------------------------------------------------------
# {"variables": ["a", ...],
#  "constraints": [{"lhs": {"terms": [[coef, "name"], ...], "constant": 0.0},
#                   "relation": "LE", "rhs": {...}}, ...],
#  "objective": {"direction": "MIN", "terms": [[coef, "name"], ...]}}


def _expr_to_dict(expr: LinearExpr) -> dict:
    return {"terms": [[c, v.text] for c, v in expr.terms], "constant": expr.constant}


def _expr_from_dict(d: dict) -> LinearExpr:
    terms = tuple((float(c), Identifier(str(name))) for c, name in d.get("terms", []))
    return LinearExpr(terms=terms, constant=float(d.get("constant", 0.0)))


def model_to_dict(model: IRModel) -> dict:
    return {
        "variables": [v.text for v in model.variables],
        "constraints": [
            {"lhs": _expr_to_dict(c.lhs), "relation": c.relation.value, "rhs": _expr_to_dict(c.rhs)}
            for c in model.constraints
        ],
        "objective": {
            "direction": model.objective.direction.value,
            "terms": [[c, v.text] for c, v in model.objective.expr.terms],
            "constant": model.objective.expr.constant,
        },
    }


def model_from_dict(d: dict) -> IRModel:
    variables = tuple(Identifier(str(name)) for name in d["variables"])
    constraints = tuple(
        Constraint(
            lhs=_expr_from_dict(c["lhs"]),
            relation=Relation(c["relation"]),
            rhs=_expr_from_dict(c["rhs"]),
        )
        for c in d.get("constraints", [])
    )
    obj = d["objective"]
    objective = Objective(
        direction=Direction(obj["direction"]),
        expr=LinearExpr(
            terms=tuple((float(c), Identifier(str(name))) for c, name in obj.get("terms", [])),
            constant=float(obj.get("constant", 0.0)),
        ),
    )
    return IRModel(variables=variables, constraints=constraints, objective=objective)
