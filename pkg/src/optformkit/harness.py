"""
End-to-end orchestration: dataset -> prompts -> completions -> parse ->
canonicalize -> score -> report, plus the report writers and two setup
utilities (the carbon estimator and the fine-tune manifest emitter).

Numbers in reports print with 4 decimal places. Report content contains no
timestamps, so fully cached runs are bit-reproducible.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .canonical import to_canonical
from .datasets import Dataset, PredictionRecord, load_dataset, write_predictions
from .gateway import (
    CompletionRequest,
    MockProvider,
    HttpProvider,
    Provider,
    ProviderConfig,
    ReplayOnlyProvider,
    run_batch,
)
from .ir import render_ir
from .parsing import ParseOutcome, parse_ir
from .prompts import PromptKind, build_prompt
from .scoring import (
    EmptyRun,
    MatchConfig,
    ProblemResult,
    ScoreReport,
    aggregate,
    report_to_dict,
    score_problem,
)

__all__ = [
    "RunConfig",
    "CarbonParams",
    "FinetuneManifest",
    "run_eval",
    "score_predictions",
    "write_report",
    "estimate_carbon",
    "emit_finetune_manifest",
    "InvalidParams",
    "UnknownField",
    "EmptyRun",
]


class InvalidParams(ValueError):
    """Carbon parameters outside their valid ranges."""


class UnknownField(ValueError):
    """A fine-tune manifest override names a field that does not exist."""


@dataclass(frozen=True)
class RunConfig:
    dataset_path: str
    output_dir: str
    prompt_kind: PromptKind = PromptKind.ZERO_SHOT
    provider: str = "mock"  # mock | replay | http
    model_id: str = "mock"
    provider_config: ProviderConfig = field(default_factory=ProviderConfig)
    match_config: MatchConfig = field(default_factory=MatchConfig)
    cache_dir: str | None = None
    max_tokens: int = 512
    temperature: float = 0.0

    def __post_init__(self):
        if self.prompt_kind is PromptKind.FINE_TUNE:
            raise ValueError("fine-tune prompts are export-only; evaluation runs use zero or one shot")


def _k_shot(kind: PromptKind) -> int:
    return 1 if kind is PromptKind.ONE_SHOT else 0


def _gold_oracle(dataset: Dataset) -> MockProvider:
    """Mock provider answering every prompt with its problem's gold IR text,
    matched by the description the prompt ends with."""
    by_suffix = {}
    for p in dataset.problems:
        if p.gold_ir is None:
            raise ValueError(f"problem {p.id}: mock oracle provider needs gold_ir in the dataset")
        by_suffix[p.description] = render_ir(p.gold_ir)

    def respond(request: CompletionRequest) -> str:
        for description, ir_text in by_suffix.items():
            if request.prompt.endswith("\n" + description):
                return ir_text
        return ""

    return MockProvider(respond)


def _pipeline_record(pid: str, text: str | None, error: str | None) -> PredictionRecord:
    if text is None:
        outcome = ParseOutcome(model=None, diagnostics=(), consumed=0)
        return PredictionRecord(id=pid, raw_text="", outcome=outcome, canonical=None, error=error)
    outcome = parse_ir(text)
    canonical = None
    if outcome.model is not None and not any(d.kind == "UnknownVariable" for d in outcome.diagnostics):
        canonical = to_canonical(outcome.model)
    return PredictionRecord(id=pid, raw_text=text, outcome=outcome, canonical=canonical, error=error)


def score_predictions(records: list[PredictionRecord], dataset: Dataset, cfg: MatchConfig | None = None) -> ScoreReport:
    """Score prediction records against a dataset's gold canonical forms.
    Records missing for a problem, or with absent models, score zero."""
    by_id = {r.id: r for r in records}
    results = []
    for p in dataset.problems:
        record = by_id.get(p.id)
        if record is None:
            results.append(ProblemResult(p.id, score_problem(None, p.gold_canonical, cfg), (), parsed=False))
            continue
        score = score_problem(record.canonical, p.gold_canonical, cfg)
        parsed = record.outcome.model is not None
        results.append(ProblemResult(p.id, score, record.outcome.diagnostics, parsed=parsed))
    return aggregate(results)


def run_eval(config: RunConfig, provider: Provider | None = None) -> ScoreReport:
    """Run the full pipeline and write predictions.jsonl, report.json,
    report.md, and report.csv under output_dir. Per-problem provider errors
    are recorded as parse failures and never abort the run. Idempotent when
    fully cached."""
    dataset = load_dataset(config.dataset_path)
    if not dataset.problems:
        raise EmptyRun(f"dataset {config.dataset_path} has no problems")

    if provider is None:
        if config.provider == "mock":
            provider = _gold_oracle(dataset)
        elif config.provider == "replay":
            if config.cache_dir is None:
                raise ValueError("replay provider requires cache_dir")
            provider = ReplayOnlyProvider(config.cache_dir)
        elif config.provider == "http":
            provider = HttpProvider(config.provider_config)
        else:
            raise ValueError(f"unknown provider {config.provider!r}")

    batch = [
        (
            p.id,
            CompletionRequest(
                model_id=config.model_id,
                prompt=build_prompt(config.prompt_kind, p.description),
                temperature=config.temperature,
                max_tokens=config.max_tokens,
            ),
        )
        for p in dataset.problems
    ]
    results = run_batch(batch, provider, config.provider_config, cache_dir=config.cache_dir)

    records = [
        _pipeline_record(r.request_id, r.response.text if r.response is not None else None, r.error)
        for r in results
    ]
    report = score_predictions(records, dataset, config.match_config)

    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_predictions(out / "predictions.jsonl", records)
    for fmt in ("json", "markdown", "csv"):
        write_report(report, fmt, out / f"report.{ {'json': 'json', 'markdown': 'md', 'csv': 'csv'}[fmt] }",
                     model=config.model_id, k_shot=_k_shot(config.prompt_kind))
    return report


def _fmt4(x: float) -> str:
    return f"{x:.4f}"


def write_report(report: ScoreReport, fmt: str, path: str | Path, model: str = "-", k_shot: int = 0) -> Path:
    """Write a ScoreReport as json, csv, or a markdown table whose headline
    columns are (Model, k-Shot, F1), plus a diagnostics-rate table."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        payload = {"model": model, "k_shot": k_shot, **report_to_dict(report)}
        path.write_text(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    elif fmt == "markdown":
        lines = [
            "| Model | k-Shot | F1 |",
            "|---|---|---|",
            f"| {model} | {k_shot} | {_fmt4(report.macro_f1)} |",
            "",
            "| Metric | Value |",
            "|---|---|",
            f"| micro precision | {_fmt4(report.micro_precision)} |",
            f"| micro recall | {_fmt4(report.micro_recall)} |",
            f"| micro F1 | {_fmt4(report.micro_f1)} |",
            f"| parse-fail rate | {_fmt4(report.parse_fail_rate)} |",
            f"| hallucination rate | {_fmt4(report.hallucination_rate)} |",
            f"| loop rate | {_fmt4(report.loop_rate)} |",
        ]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["model", "k_shot", "macro_f1", "micro_precision", "micro_recall", "micro_f1",
                         "parse_fail_rate", "hallucination_rate", "loop_rate"])
        writer.writerow([model, k_shot, _fmt4(report.macro_f1), _fmt4(report.micro_precision),
                         _fmt4(report.micro_recall), _fmt4(report.micro_f1), _fmt4(report.parse_fail_rate),
                         _fmt4(report.hallucination_rate), _fmt4(report.loop_rate)])
        writer.writerow([])
        writer.writerow(["problem_id", "precision", "recall", "f1", "matched", "pred_count", "gold_count"])
        for r in report.per_problem:
            s = r.score
            writer.writerow([r.problem_id, _fmt4(s.precision), _fmt4(s.recall), _fmt4(s.f1),
                             s.matched, s.pred_count, s.gold_count])
        path.write_text(buf.getvalue(), encoding="utf-8")
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return path


@dataclass(frozen=True)
class CarbonParams:
    runtime_h: float
    power_kw: float
    usage_factor: float
    pue: float
    carbon_intensity_g_per_kwh: float

    def __post_init__(self):
        if self.runtime_h < 0 or self.power_kw <= 0 or self.carbon_intensity_g_per_kwh <= 0:
            raise InvalidParams("runtime, power, and carbon intensity must be positive")
        if not 0 < self.usage_factor <= 1:
            raise InvalidParams("usage_factor must be in (0, 1]")
        if self.pue < 1:
            raise InvalidParams("PUE must be >= 1")
        for v in asdict(self).values():
            if not math.isfinite(v):
                raise InvalidParams("parameters must be finite")


def estimate_carbon(p: CarbonParams) -> float:
    """Grams of CO2: runtime_h * power_kw * usage_factor * pue *
    carbon_intensity_g_per_kwh."""
    return p.runtime_h * p.power_kw * p.usage_factor * p.pue * p.carbon_intensity_g_per_kwh


@dataclass(frozen=True)
class FinetuneManifest:
    """Hyperparameters for an external fine-tuning stack; defaults are the
    configuration this toolchain targets."""

    epochs: int = 7
    batch_size: int = 4
    gradient_accumulation: int = 1
    optimizer: str = "AdamW"
    learning_rate: float = 3e-4
    weight_decay: float = 0.001
    neftune_noise_alpha: int = 5
    max_response_length: int = 200
    gradient_checkpointing: bool = True
    stages: tuple[str, ...] = ("GSM8K", "NL4Opt")


def emit_finetune_manifest(path: str | Path, overrides: dict | None = None) -> FinetuneManifest:
    """Write the fine-tune manifest JSON, applying any overrides. Override
    keys must be existing manifest fields (UnknownField otherwise)."""
    overrides = dict(overrides or {})
    valid = {f.name for f in fields(FinetuneManifest)}
    unknown = set(overrides) - valid
    if unknown:
        raise UnknownField(f"unknown manifest field(s): {', '.join(sorted(unknown))}")
    if "stages" in overrides:
        overrides["stages"] = tuple(overrides["stages"])
    manifest = replace(FinetuneManifest(), **overrides)
    payload = asdict(manifest)
    payload["stages"] = list(manifest.stages)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest
