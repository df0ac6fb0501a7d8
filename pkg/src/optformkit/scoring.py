"""
Declaration-level matching of predicted vs gold canonical forms and F1
computation.

A "declaration" is one scorable unit: a constraint row or the objective
vector. Predicted and gold rows are paired by maximum-cardinality bipartite
matching under a per-coefficient tolerance; the objective counts as one
extra declaration on each side. Both macro (mean of per-problem F1) and
micro (pooled counts) aggregates are reported.

This reconstructs the NL4Opt-style declaration scoring from its published
description; the exact competition formula lives in the competition report
and may differ in details such as whether variables themselves count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .canonical import CanonicalForm, Row, scale_normalize_row
from .ir import Diagnostic

__all__ = [
    "MatchConfig",
    "ProblemScore",
    "ProblemResult",
    "ScoreReport",
    "Alignment",
    "align_variables",
    "rows_match",
    "match_declarations",
    "score_problem",
    "aggregate",
    "EmptyRun",
]


class EmptyRun(ValueError):
    """Aggregation over zero problems."""


@dataclass(frozen=True)
class MatchConfig:
    """Knobs for row matching.

    tolerance: max absolute per-coefficient (and rhs) difference.
    scale_normalize: compare rows after dividing by the max |coefficient|.
    dedupe_predictions: collapse exact-duplicate predicted rows before
        matching, so looping output is penalized once via recall rather
        than repeatedly via precision.
    """

    tolerance: float = 1e-4
    scale_normalize: bool = False
    dedupe_predictions: bool = True

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")


@dataclass(frozen=True)
class ProblemScore:
    precision: float
    recall: float
    f1: float
    matched: int
    pred_count: int
    gold_count: int


@dataclass(frozen=True)
class ProblemResult:
    """Per-problem scoring record carried into aggregation."""

    problem_id: str
    score: ProblemScore
    diagnostics: tuple[Diagnostic, ...] = ()
    parsed: bool = True


@dataclass(frozen=True)
class ScoreReport:
    per_problem: tuple[ProblemResult, ...]
    macro_f1: float
    micro_precision: float
    micro_recall: float
    micro_f1: float
    parse_fail_rate: float
    hallucination_rate: float
    loop_rate: float


@dataclass(frozen=True)
class Alignment:
    """Column mapping from gold variable positions to predicted columns
    (None = no predicted column; treated as all-zero)."""

    columns: tuple[int | None, ...]
    notes: tuple[str, ...] = ()


def align_variables(pred: CanonicalForm, gold: CanonicalForm) -> Alignment:
    """Map gold columns to predicted columns by name equivalence first,
    then by declaration position for whatever is left. Extra predicted
    columns are dropped; missing ones become all-zero columns. Any fallback
    produces a VariableMismatch note."""
    notes: list[str] = []
    pred_index = {v: i for i, v in enumerate(pred.variable_order)}
    columns: list[int | None] = []
    used: set[int] = set()
    unmatched_gold: list[int] = []
    for gi, gv in enumerate(gold.variable_order):
        pi = pred_index.get(gv)
        if pi is not None and pi not in used:
            columns.append(pi)
            used.add(pi)
        else:
            columns.append(None)
            unmatched_gold.append(gi)
    leftover_pred = [i for i in range(len(pred.variable_order)) if i not in used]
    if unmatched_gold:
        for gi, pi in zip(unmatched_gold, leftover_pred):
            columns[gi] = pi
            used.add(pi)
            notes.append(
                f"VariableMismatch: gold {gold.variable_order[gi].text!r} aligned "
                f"positionally to predicted {pred.variable_order[pi].text!r}"
            )
        still_missing = [gi for gi in unmatched_gold if columns[gi] is None]
        for gi in still_missing:
            notes.append(f"VariableMismatch: gold {gold.variable_order[gi].text!r} has no predicted column")
    dropped = [i for i in range(len(pred.variable_order)) if i not in used]
    for pi in dropped:
        notes.append(f"VariableMismatch: predicted {pred.variable_order[pi].text!r} dropped")
    return Alignment(columns=tuple(columns), notes=tuple(notes))


def _remap_row(row: Row, columns: tuple[int | None, ...]) -> Row:
    coeffs, rhs = row
    return (tuple(coeffs[c] if c is not None else 0.0 for c in columns), rhs)


def _remap_vector(vec: tuple[float, ...], columns: tuple[int | None, ...]) -> tuple[float, ...]:
    return tuple(vec[c] if c is not None else 0.0 for c in columns)


def rows_match(a: Row, b: Row, cfg: MatchConfig) -> bool:
    """True iff every coefficient and the rhs of the two (aligned) rows
    differ by at most cfg.tolerance, optionally after scale normalization."""
    if cfg.scale_normalize:
        a, b = scale_normalize_row(a), scale_normalize_row(b)
    (ca, ra), (cb, rb) = a, b
    if len(ca) != len(cb):
        return False
    return abs(ra - rb) <= cfg.tolerance and all(abs(x - y) <= cfg.tolerance for x, y in zip(ca, cb))


def _dedupe(rows: tuple[Row, ...]) -> tuple[Row, ...]:
    seen: set[Row] = set()
    out: list[Row] = []
    for r in rows:
        if r not in seen:
            seen.add(r)
            out.append(r)
    return tuple(out)


def match_declarations(pred: CanonicalForm, gold: CanonicalForm, cfg: MatchConfig | None = None) -> tuple[int, int, int]:
    """Return (matched, pred_count, gold_count) where matched is the size of
    a maximum bipartite matching between predicted and gold rows under
    rows_match, plus 1 if the objective vectors match under the same
    coefficient tolerance. Counts include the objective on each side."""
    cfg = cfg or MatchConfig()
    alignment = align_variables(pred, gold)
    pred_rows = tuple(_remap_row(r, alignment.columns) for r in pred.rows)
    if cfg.dedupe_predictions:
        pred_rows = _dedupe(pred_rows)
    gold_rows = gold.rows

    matched = 0
    if pred_rows and gold_rows:
        hit = np.array(
            [[rows_match(p, g, cfg) for g in gold_rows] for p in pred_rows],
            dtype=float,
        )
        ri, ci = linear_sum_assignment(hit, maximize=True)
        matched = int(hit[ri, ci].sum())

    pred_obj = _remap_vector(pred.objective, alignment.columns)
    if all(abs(x - y) <= cfg.tolerance for x, y in zip(pred_obj, gold.objective)):
        matched += 1
    return matched, len(pred_rows) + 1, len(gold_rows) + 1


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def score_problem(pred: CanonicalForm | None, gold: CanonicalForm, cfg: MatchConfig | None = None) -> ProblemScore:
    """Precision/recall/F1 for one problem. An absent prediction (parse or
    provider failure) scores all zeros rather than being excluded."""
    gold_count = len(gold.rows) + 1
    if pred is None:
        return ProblemScore(0.0, 0.0, 0.0, matched=0, pred_count=0, gold_count=gold_count)
    matched, pred_count, gold_count = match_declarations(pred, gold, cfg)
    p = matched / pred_count if pred_count else 0.0
    r = matched / gold_count if gold_count else 0.0
    return ProblemScore(p, r, _f1(p, r), matched=matched, pred_count=pred_count, gold_count=gold_count)


def aggregate(results: list[ProblemResult]) -> ScoreReport:
    """Fold per-problem results into macro/micro aggregates plus failure
    rates: parse_fail (absent model), hallucination (any UnknownVariable),
    loop (ExtraBlock or RepeatedConstraint)."""
    if not results:
        raise EmptyRun("no problems to aggregate")
    n = len(results)
    macro_f1 = sum(r.score.f1 for r in results) / n
    m = sum(r.score.matched for r in results)
    p_total = sum(r.score.pred_count for r in results)
    g_total = sum(r.score.gold_count for r in results)
    micro_p = m / p_total if p_total else 0.0
    micro_r = m / g_total if g_total else 0.0

    def rate(pred) -> float:
        return sum(1 for r in results if pred(r)) / n

    return ScoreReport(
        per_problem=tuple(results),
        macro_f1=macro_f1,
        micro_precision=micro_p,
        micro_recall=micro_r,
        micro_f1=_f1(micro_p, micro_r),
        parse_fail_rate=rate(lambda r: not r.parsed),
        hallucination_rate=rate(lambda r: any(d.kind == "UnknownVariable" for d in r.diagnostics)),
        loop_rate=rate(lambda r: any(d.kind in ("ExtraBlock", "RepeatedConstraint") for d in r.diagnostics)),
    )


# --- JSON shapes -----------------------------------------------------------

def score_to_dict(s: ProblemScore) -> dict:
    return {
        "precision": s.precision,
        "recall": s.recall,
        "f1": s.f1,
        "matched": s.matched,
        "pred_count": s.pred_count,
        "gold_count": s.gold_count,
    }


def score_from_dict(d: dict) -> ProblemScore:
    return ProblemScore(
        precision=float(d["precision"]),
        recall=float(d["recall"]),
        f1=float(d["f1"]),
        matched=int(d["matched"]),
        pred_count=int(d["pred_count"]),
        gold_count=int(d["gold_count"]),
    )


def report_to_dict(report: ScoreReport) -> dict:
    from .parsing import diagnostic_to_dict

    return {
        "per_problem": [
            {
                "id": r.problem_id,
                "score": score_to_dict(r.score),
                "diagnostics": [diagnostic_to_dict(d) for d in r.diagnostics],
                "parsed": r.parsed,
            }
            for r in report.per_problem
        ],
        "aggregate": {
            "macro_f1": report.macro_f1,
            "micro_precision": report.micro_precision,
            "micro_recall": report.micro_recall,
            "micro_f1": report.micro_f1,
            "parse_fail_rate": report.parse_fail_rate,
            "hallucination_rate": report.hallucination_rate,
            "loop_rate": report.loop_rate,
        },
    }


def report_from_dict(d: dict) -> ScoreReport:
    from .parsing import diagnostic_from_dict

    results = [
        ProblemResult(
            problem_id=entry["id"],
            score=score_from_dict(entry["score"]),
            diagnostics=tuple(diagnostic_from_dict(x) for x in entry.get("diagnostics", [])),
            parsed=bool(entry.get("parsed", True)),
        )
        for entry in d["per_problem"]
    ]
    agg = d["aggregate"]
    return ScoreReport(
        per_problem=tuple(results),
        macro_f1=float(agg["macro_f1"]),
        micro_precision=float(agg["micro_precision"]),
        micro_recall=float(agg["micro_recall"]),
        micro_f1=float(agg["micro_f1"]),
        parse_fail_rate=float(agg["parse_fail_rate"]),
        hallucination_rate=float(agg["hallucination_rate"]),
        loop_rate=float(agg["loop_rate"]),
    )
