"""
Fault-tolerant parsing of raw LLM completion text into an IRModel.

parse_ir is a total function: it never raises on arbitrary input. Anything
it cannot make sense of becomes a Diagnostic (truncated constraint lines,
extra blocks from looping output, trailing noise, missing sections), and
the worst case is an absent model with a MissingSection finding.

parse_expr / parse_number are the strict building blocks and do raise
(ExprSyntax / NumberSyntax / DivisionByZero); parse_ir converts those
failures into diagnostics.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ir import (
    Constraint,
    Diagnostic,
    Direction,
    Identifier,
    IRModel,
    LinearExpr,
    Objective,
    Relation,
    normalize_expr,
    validate_ir,
)

__all__ = [
    "ParseOutcome",
    "parse_ir",
    "parse_expr",
    "parse_number",
    "ExprSyntax",
    "NumberSyntax",
    "DivisionByZero",
]


class NumberSyntax(ValueError):
    """A token that should be a number is not one."""


class DivisionByZero(NumberSyntax):
    """A fraction token with a zero denominator."""


class ExprSyntax(ValueError):
    """A linear expression that cannot be parsed; carries the offset of the
    first offending character."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(message)
        self.offset = offset


@dataclass(frozen=True)
class ParseOutcome:
    """Result of parse_ir: the model (absent when a Variables or Objective
    Function section is missing), the diagnostics, and the offset just past
    the first complete IR block."""

    model: IRModel | None
    diagnostics: tuple[Diagnostic, ...]
    consumed: int


_NUM = r"(?:\d+(?:\.\d+)?|\.\d+)(?:[eE][-+]?\d+)?"
_SIGNED = rf"[-+]?{_NUM}"
_FRAC = rf"{_SIGNED}\s*/\s*{_SIGNED}"
_PNUM = rf"\(\s*(?:{_FRAC}|{_SIGNED})\s*\)"

_TOKEN_RE = re.compile(
    rf"(?P<pnum>{_PNUM})"
    rf"|(?P<num>{_FRAC}|{_SIGNED})"
    r"|(?P<word>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<star>\*)"
    r"|(?P<plus>\+)"
    r"|(?P<minus>-)"
    r"|(?P<ws>\s+)"
    r"|(?P<junk>.)"
)


def parse_number(token: str) -> float:
    """Parse a numeric token: decimals, integers, signed values, scientific
    notation, optionally parenthesized, and simple fractions "p/q"."""
    s = token.strip()
    while s.startswith("(") and s.endswith(")"):
        s = s[1:-1].strip()
    if "/" in s:
        num, _, den = s.partition("/")
        try:
            p, q = float(num.strip()), float(den.strip())
        except ValueError:
            raise NumberSyntax(f"bad fraction: {token!r}") from None
        if q == 0:
            raise DivisionByZero(f"zero denominator in {token!r}")
        return p / q
    try:
        return float(s)
    except ValueError:
        raise NumberSyntax(f"not a number: {token!r}") from None


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        if kind == "ws":
            continue
        if kind == "junk":
            raise ExprSyntax(f"unexpected character {m.group()!r}", offset=m.start())
        tokens.append((kind, m.group(), m.start()))
    return tokens


def _plural_resolve(name: Identifier, declared: tuple[Identifier, ...]) -> Identifier:
    # LLM output drops/adds a trailing "s" on declared names ("receptionist"
    # for "receptionists"); bind to the declared name when the fix is unique.
    key = name.key
    hits = []
    for d in declared:
        dk = d.key
        if len(dk) != len(key) or dk[:-1] != key[:-1]:
            continue
        a, b = key[-1], dk[-1]
        if a + "s" == b or (a.endswith("s") and a[:-1] == b):
            hits.append(d)
    if len(hits) == 1:
        return hits[0]
    return name


def _bind_words(words: list[str], declared: tuple[Identifier, ...]) -> list[Identifier]:
    """Turn a run of word tokens into identifiers, matching greedy-longest
    against the declared list; with no declared list the whole run is one
    identifier."""
    if not declared:
        return [Identifier(" ".join(words))]
    keys = {d.key: d for d in declared}
    out: list[Identifier] = []
    i = 0
    while i < len(words):
        match = None
        for j in range(len(words), i, -1):
            cand = Identifier(" ".join(words[i:j]))
            if cand.key in keys:
                match = keys[cand.key]
                i = j
                break
        if match is None:
            # no declared prefix: take the rest verbatim, then try the
            # singular/plural fallback
            cand = Identifier(" ".join(words[i:]))
            match = _plural_resolve(cand, declared)
            i = len(words)
        out.append(match)
    return out


def parse_expr(text: str, declared: tuple[Identifier, ...] = ()) -> LinearExpr:
    """Parse a linear expression such as "(0.33) * cleaners + (-1.0) * x".

    Accepts parenthesized or bare signed coefficients, optional "*",
    implicit coefficient 1 for a bare variable, "+"/"-" separators, and
    bare numeric constant terms. Multi-word variables are matched
    greedy-longest against `declared`; unknown names are kept verbatim.
    Raises ExprSyntax (with offset) on unparseable input.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise ExprSyntax("empty expression", offset=0)
    terms: list[tuple[float, Identifier]] = []
    constant = 0.0
    sign = 1.0
    i = 0
    n = len(tokens)
    while i < n:
        kind, value, start = tokens[i]
        if kind == "plus":
            i += 1
            continue
        if kind == "minus":
            sign = -sign
            i += 1
            continue
        if kind in ("num", "pnum"):
            coef = parse_number(value)
            i += 1
            had_star = False
            if i < n and tokens[i][0] == "star":
                had_star = True
                i += 1
            if i < n and tokens[i][0] == "word":
                words = []
                while i < n and tokens[i][0] == "word":
                    words.append(tokens[i][1])
                    i += 1
                idents = _bind_words(words, declared)
                terms.append((sign * coef, idents[0]))
                for extra in idents[1:]:
                    terms.append((1.0, extra))
            elif had_star:
                raise ExprSyntax("dangling '*' at end of expression", offset=start)
            else:
                constant += sign * coef
            sign = 1.0
            continue
        if kind == "word":
            words = []
            while i < n and tokens[i][0] == "word":
                words.append(tokens[i][1])
                i += 1
            for j, ident in enumerate(_bind_words(words, declared)):
                terms.append((sign if j == 0 else 1.0, ident))
            sign = 1.0
            continue
        raise ExprSyntax(f"unexpected token {value!r}", offset=start)
    return normalize_expr(LinearExpr(terms=tuple(terms), constant=constant))


_VAR_RE = re.compile(r"(?i)variables\s*:")
_VAR_RE_LOOSE = re.compile(r"(?i)\bvariables\b")
_CONS_RE = re.compile(r"(?i)constraints\s*:")
_CONS_RE_LOOSE = re.compile(r"(?i)\bconstraints\b")
_OBJ_RE = re.compile(r"(?i)objective\s+function\s*:")
_OBJ_RE_LOOSE = re.compile(r"(?i)objective\s+function")
_DIR_RE = re.compile(r"(?i)\b(minimize|maximize)\b")
_REL_RE = re.compile(r"<=|=<|≤|>=|=>|≥|<|>|=")

_REL_MAP = {
    "<=": Relation.LE, "=<": Relation.LE, "≤": Relation.LE,
    ">=": Relation.GE, "=>": Relation.GE, "≥": Relation.GE,
    "=": Relation.EQ, "<": Relation.LT, ">": Relation.GT,
}

_MARKUP_CHARS = "\"'`“”$~ \t"
_MARKUP_LINE_RE = re.compile(r"^[\s\"'`“”$~.,:]*$")


def _strip_markup(line: str) -> str:
    return line.strip().strip(_MARKUP_CHARS + ".,").strip()


def _parse_variables(segment: str) -> list[Identifier]:
    names: list[Identifier] = []
    cleaned = _strip_markup(segment.replace("\n", " "))
    for part in cleaned.split(","):
        part = _strip_markup(part)
        part = re.sub(r"[^A-Za-z0-9_ ]+", " ", part).strip()
        if part:
            names.append(Identifier(part))
    return names


def _parse_constraint_line(line: str, declared: tuple[Identifier, ...]) -> Constraint:
    m = _REL_RE.search(line)
    if m is None:
        raise ExprSyntax("no relation operator", offset=0)
    lhs = parse_expr(line[: m.start()], declared)
    rhs = parse_expr(line[m.end():], declared)
    return Constraint(lhs=lhs, relation=_REL_MAP[m.group()], rhs=rhs)


def parse_ir(text: str) -> ParseOutcome:
    """Parse the first complete IR block out of raw completion text.

    Tolerates surrounding markup (quotes, backticks, "### Solution",
    "Example Response:"). A second block (looping output) yields ExtraBlock
    and is ignored; non-IR text after the block yields TrailingNoise; a
    constraint line that ends mid-expression yields TruncatedLine and is
    dropped; exact-duplicate constraints yield RepeatedConstraint but are
    retained (deduplication is a scoring policy). validate_ir findings are
    appended. Never raises.
    """
    diagnostics: list[Diagnostic] = []
    n = len(text)

    # prefer colon-anchored headers; fall back to colonless ones so
    # "Variables\n..." still parses, without tripping on prose mentions
    var_m = _VAR_RE.search(text) or _VAR_RE_LOOSE.search(text)
    if var_m is None:
        diagnostics.append(Diagnostic("MissingSection", (0, 0), "no Variables section", "Variables"))
        return ParseOutcome(None, tuple(diagnostics), 0)

    cons_m = _CONS_RE.search(text, var_m.end()) or _CONS_RE_LOOSE.search(text, var_m.end())
    obj_start = cons_m.end() if cons_m else var_m.end()
    obj_m = _OBJ_RE.search(text, obj_start) or _OBJ_RE_LOOSE.search(text, obj_start)
    if obj_m is None:
        diagnostics.append(Diagnostic("MissingSection", (0, 0), "no Objective Function section", "Objective Function"))
        return ParseOutcome(None, tuple(diagnostics), 0)

    var_end = cons_m.start() if cons_m else obj_m.start()
    variables = tuple(_parse_variables(text[var_m.end():var_end]))
    if not variables:
        diagnostics.append(Diagnostic("MissingSection", (var_m.start(), var_end), "Variables section declares no names", "Variables"))
        return ParseOutcome(None, tuple(diagnostics), 0)

    constraints: list[Constraint] = []
    if cons_m is None:
        diagnostics.append(Diagnostic("MissingSection", (0, 0), "no Constraints section", "Constraints"))
    else:
        seg_start = cons_m.end()
        offset = seg_start
        for raw_line in text[seg_start:obj_m.start()].split("\n"):
            line_start = offset
            offset += len(raw_line) + 1
            line = _strip_markup(raw_line)
            if not line or _MARKUP_LINE_RE.match(line):
                continue
            span = (line_start, min(line_start + len(raw_line), n))
            try:
                c = _parse_constraint_line(line, variables)
            except (ExprSyntax, NumberSyntax):
                diagnostics.append(Diagnostic("TruncatedLine", span, f"constraint line ends mid-expression: {line!r}"))
                continue
            if c in constraints:
                diagnostics.append(Diagnostic("RepeatedConstraint", span, f"exact duplicate constraint: {line!r}"))
            constraints.append(c)

    dir_m = _DIR_RE.search(text, obj_m.end())
    objective = None
    consumed = 0
    if dir_m is not None:
        line_end = text.find("\n", dir_m.end())
        if line_end == -1:
            line_end = n
        expr_text = _strip_markup(text[dir_m.end():line_end])
        try:
            expr = parse_expr(expr_text, variables) if expr_text else None
        except (ExprSyntax, NumberSyntax):
            expr = None
        if expr is not None and expr.terms:
            direction = Direction.MIN if dir_m.group(1).lower() == "minimize" else Direction.MAX
            objective = Objective(direction=direction, expr=expr)
            consumed = line_end
    if objective is None:
        diagnostics.append(Diagnostic("MissingSection", (obj_m.start(), min(obj_m.end(), n)), "Objective Function section has no parseable objective", "Objective Function"))
        return ParseOutcome(None, tuple(diagnostics), 0)

    remainder = text[consumed:]
    extra_m = _VAR_RE.search(remainder)
    if extra_m is not None:
        diagnostics.append(Diagnostic("ExtraBlock", (consumed + extra_m.start(), n), "second IR block after the first complete block; ignored"))
    noise_region = remainder[: extra_m.start()] if extra_m else remainder
    for raw_line in noise_region.split("\n"):
        stripped = raw_line.strip()
        if stripped and not _MARKUP_LINE_RE.match(stripped):
            start = consumed + noise_region.find(raw_line)
            diagnostics.append(Diagnostic("TrailingNoise", (start, min(start + len(raw_line), n)), f"non-IR text after block: {stripped[:60]!r}"))
            break

    model = IRModel(variables=variables, constraints=tuple(constraints), objective=objective)
    diagnostics.extend(validate_ir(model))
    return ParseOutcome(model, tuple(diagnostics), consumed)


# --- JSON shapes for the CLI ----------------------------------------------

def diagnostic_to_dict(d: Diagnostic) -> dict:
    return {"kind": d.kind, "span": list(d.span), "message": d.message, "subject": d.subject}


def diagnostic_from_dict(d: dict) -> Diagnostic:
    return Diagnostic(kind=d["kind"], span=tuple(d.get("span", (0, 0))), message=d.get("message", ""), subject=d.get("subject", ""))


def outcome_to_dict(outcome: ParseOutcome) -> dict:
    from .ir import model_to_dict

    return {
        "model": model_to_dict(outcome.model) if outcome.model is not None else None,
        "diagnostics": [diagnostic_to_dict(d) for d in outcome.diagnostics],
        "consumed": outcome.consumed,
    }


def outcome_from_dict(d: dict) -> ParseOutcome:
    from .ir import model_from_dict

    model = model_from_dict(d["model"]) if d.get("model") is not None else None
    return ParseOutcome(
        model=model,
        diagnostics=tuple(diagnostic_from_dict(x) for x in d.get("diagnostics", [])),
        consumed=int(d.get("consumed", 0)),
    )
