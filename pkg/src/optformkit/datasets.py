"""
Loading and writing evaluation data.

Datasets are JSONL, one problem per line:
    {"id": "p001", "description": "...", "gold_ir": {...}}
or  {"id": "p001", "description": "...",
     "gold_canonical": {"variables": [...], "rows": [[...]], "objective": [...]}}

Exactly one of gold_ir / gold_canonical per record; gold supplied as IR is
validated and canonicalized at load time, and any gold defect aborts the
load with the offending line number.

Prediction files are JSONL records preserving the raw completion text
byte-exactly alongside the parse outcome and the canonical form (if any).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .canonical import CanonicalForm, canonical_from_dict, canonical_to_dict, to_canonical
from .ir import IRModel, model_from_dict, validate_ir
from .parsing import ParseOutcome, outcome_from_dict, outcome_to_dict

__all__ = [
    "ProblemInstance",
    "Dataset",
    "PredictionRecord",
    "load_dataset",
    "write_predictions",
    "load_predictions",
    "SchemaError",
    "GoldInvalid",
]


class SchemaError(ValueError):
    """A JSONL record does not match the documented schema."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class GoldInvalid(ValueError):
    """A gold formulation fails validation (e.g. undeclared variable)."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class ProblemInstance:
    """One evaluation problem: description plus gold formulation. After
    load, gold_canonical is always present (computed from gold_ir when the
    record supplied IR)."""

    id: str
    description: str
    gold_canonical: CanonicalForm
    gold_ir: IRModel | None = None


@dataclass(frozen=True)
class Dataset:
    split_name: str
    problems: tuple[ProblemInstance, ...]


def load_dataset(path: str | Path, split_name: str | None = None) -> Dataset:
    """Load and validate a JSONL dataset. Deterministic and
    order-preserving; ids must be unique within the file."""
    path = Path(path)
    problems: list[ProblemInstance] = []
    seen_ids: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(lineno, f"invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise SchemaError(lineno, "record is not an object")
            pid = record.get("id")
            description = record.get("description")
            if not pid or not isinstance(pid, str):
                raise SchemaError(lineno, "missing or invalid 'id'")
            if not description or not isinstance(description, str):
                raise SchemaError(lineno, "missing or empty 'description'")
            if pid in seen_ids:
                raise SchemaError(lineno, f"duplicate id {pid!r}")
            seen_ids.add(pid)
            has_ir = "gold_ir" in record
            has_canonical = "gold_canonical" in record
            if has_ir == has_canonical:
                raise SchemaError(lineno, "record must carry exactly one of gold_ir / gold_canonical")
            if has_ir:
                try:
                    gold_ir = model_from_dict(record["gold_ir"])
                except (KeyError, ValueError, TypeError) as exc:
                    raise SchemaError(lineno, f"malformed gold_ir: {exc}") from exc
                findings = validate_ir(gold_ir)
                fatal = [d for d in findings if d.kind in ("UnknownVariable", "DuplicateVariable")]
                if fatal:
                    raise GoldInvalid(lineno, fatal[0].message)
                try:
                    gold_canonical = to_canonical(gold_ir)
                except ValueError as exc:
                    raise GoldInvalid(lineno, str(exc)) from exc
            else:
                gold_ir = None
                try:
                    gold_canonical = canonical_from_dict(record["gold_canonical"])
                except (KeyError, ValueError, TypeError) as exc:
                    raise SchemaError(lineno, f"malformed gold_canonical: {exc}") from exc
            problems.append(ProblemInstance(id=pid, description=description, gold_canonical=gold_canonical, gold_ir=gold_ir))
    return Dataset(split_name=split_name or path.stem, problems=tuple(problems))


@dataclass(frozen=True)
class PredictionRecord:
    """One problem's raw completion plus everything derived from it."""

    id: str
    raw_text: str
    outcome: ParseOutcome
    canonical: CanonicalForm | None = None
    error: str | None = None  # provider-level failure, if any


def _prediction_to_dict(record: PredictionRecord) -> dict:
    return {
        "id": record.id,
        "raw": record.raw_text,
        "parse": outcome_to_dict(record.outcome),
        "canonical": canonical_to_dict(record.canonical) if record.canonical is not None else None,
        "error": record.error,
    }


def _prediction_from_dict(d: dict, lineno: int) -> PredictionRecord:
    try:
        return PredictionRecord(
            id=d["id"],
            raw_text=d["raw"],
            outcome=outcome_from_dict(d["parse"]),
            canonical=canonical_from_dict(d["canonical"]) if d.get("canonical") is not None else None,
            error=d.get("error"),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise SchemaError(lineno, f"malformed prediction record: {exc}") from exc


def write_predictions(path: str | Path, records: list[PredictionRecord]) -> None:
    """Lossless JSONL round trip; raw completion text is preserved
    byte-exactly for audit."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(_prediction_to_dict(record), ensure_ascii=False, sort_keys=True) + "\n")


def load_predictions(path: str | Path) -> list[PredictionRecord]:
    path = Path(path)
    out: list[PredictionRecord] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                d = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(lineno, f"invalid JSON: {exc}") from exc
            out.append(_prediction_from_dict(d, lineno))
    return out
