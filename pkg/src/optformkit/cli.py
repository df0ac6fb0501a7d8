"""
Command-line front end: optformkit parse|canon|score|prompt|run|carbon|ft-config.

Exit codes: 0 on success, 1 on run-level errors, 2 on usage errors
(argparse's convention).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .canonical import canonical_to_dict, to_canonical
from .datasets import load_dataset, load_predictions
from .gateway import ProviderConfig
from .harness import (
    CarbonParams,
    RunConfig,
    emit_finetune_manifest,
    estimate_carbon,
    run_eval,
    score_predictions,
    write_report,
)
from .ir import model_from_dict
from .parsing import outcome_to_dict, parse_ir
from .prompts import PromptKind, build_prompt
from .scoring import MatchConfig


def _read_input(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _cmd_parse(args) -> int:
    outcome = parse_ir(_read_input(args.input))
    json.dump(outcome_to_dict(outcome), sys.stdout, indent=2, ensure_ascii=False)
    sys.stdout.write("\n")
    return 0


def _cmd_canon(args) -> int:
    model = model_from_dict(json.loads(_read_input(args.input)))
    notes: list[str] = []
    form = to_canonical(model, notes)
    payload = canonical_to_dict(form)
    if notes:
        payload["notes"] = notes
    json.dump(payload, sys.stdout, indent=2, ensure_ascii=False)
    sys.stdout.write("\n")
    return 0


def _cmd_score(args) -> int:
    dataset = load_dataset(args.gold)
    records = load_predictions(args.pred)
    cfg = MatchConfig(tolerance=args.tolerance, scale_normalize=args.scale_normalize,
                      dedupe_predictions=not args.no_dedupe)
    report = score_predictions(records, dataset, cfg)
    suffix = {"json": "json", "markdown": "md", "csv": "csv"}[args.format]
    if args.out:
        write_report(report, args.format, args.out, model=args.model, k_shot=args.k_shot)
    else:
        import tempfile

        with tempfile.TemporaryDirectory() as tmp:
            path = write_report(report, args.format, Path(tmp) / f"report.{suffix}",
                                model=args.model, k_shot=args.k_shot)
            sys.stdout.write(path.read_text(encoding="utf-8"))
    return 0


def _cmd_prompt(args) -> int:
    kind = PromptKind(args.kind)
    dataset = load_dataset(args.dataset)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        for p in dataset.problems:
            fh.write(json.dumps({"id": p.id, "prompt": build_prompt(kind, p.description)}, ensure_ascii=False) + "\n")
    print(f"wrote {len(dataset.problems)} prompts to {out}")
    return 0


def _cmd_run(args) -> int:
    config_data = {}
    if args.config:
        config_data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.dataset:
        config_data["dataset_path"] = args.dataset
    if args.output_dir:
        config_data["output_dir"] = args.output_dir
    if args.provider:
        config_data["provider"] = args.provider
    if args.cache_dir:
        config_data["cache_dir"] = args.cache_dir
    if args.kind:
        config_data["prompt_kind"] = args.kind
    if "dataset_path" not in config_data or "output_dir" not in config_data:
        print("run: dataset and output_dir are required (via flags or --config)", file=sys.stderr)
        return 2
    provider_cfg = ProviderConfig(**config_data.pop("provider_config", {}))
    match_cfg = MatchConfig(**config_data.pop("match_config", {}))
    kind = config_data.pop("prompt_kind", "zero")
    config = RunConfig(
        prompt_kind=PromptKind(kind) if isinstance(kind, str) else kind,
        provider_config=provider_cfg,
        match_config=match_cfg,
        **config_data,
    )
    report = run_eval(config)
    print(f"macro F1 {report.macro_f1:.4f} over {len(report.per_problem)} problems; reports in {config.output_dir}")
    return 0


def _cmd_carbon(args) -> int:
    grams = estimate_carbon(CarbonParams(
        runtime_h=args.runtime_h,
        power_kw=args.power_kw,
        usage_factor=args.usage_factor,
        pue=args.pue,
        carbon_intensity_g_per_kwh=args.intensity,
    ))
    print(f"{grams:.4f} g CO2")
    return 0


def _cmd_ft_config(args) -> int:
    overrides = {}
    for item in args.set or []:
        key, _, value = item.partition("=")
        try:
            overrides[key] = json.loads(value)
        except json.JSONDecodeError:
            overrides[key] = value
    emit_finetune_manifest(args.out, overrides)
    print(f"wrote manifest to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="optformkit", description="LP formulation parsing, canonicalization, scoring, and evaluation runs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse IR text into a model + diagnostics (JSON)")
    p.add_argument("input", nargs="?", help="input file, or - for stdin")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("canon", help="canonicalize an IRModel JSON into matrix form")
    p.add_argument("input", nargs="?", help="input file, or - for stdin")
    p.set_defaults(func=_cmd_canon)

    p = sub.add_parser("score", help="score predictions against a gold dataset")
    p.add_argument("--pred", required=True, help="predictions JSONL")
    p.add_argument("--gold", required=True, help="gold dataset JSONL")
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.add_argument("--scale-normalize", action="store_true")
    p.add_argument("--no-dedupe", action="store_true")
    p.add_argument("--format", choices=["json", "csv", "markdown"], default="json")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--model", default="-", help="model label for the report table")
    p.add_argument("--k-shot", type=int, default=0)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("prompt", help="write one prompt per problem to JSONL")
    p.add_argument("--kind", choices=[k.value for k in PromptKind], required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_prompt)

    p = sub.add_parser("run", help="end-to-end evaluation run")
    p.add_argument("--config", help="JSON config file (RunConfig fields)")
    p.add_argument("--dataset")
    p.add_argument("--output-dir")
    p.add_argument("--provider", choices=["mock", "replay", "http"])
    p.add_argument("--cache-dir")
    p.add_argument("--kind", choices=["zero", "one"])
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("carbon", help="estimate grams of CO2 for a compute session")
    p.add_argument("--runtime-h", type=float, required=True)
    p.add_argument("--power-kw", type=float, required=True)
    p.add_argument("--usage-factor", type=float, default=1.0)
    p.add_argument("--pue", type=float, default=1.0)
    p.add_argument("--intensity", type=float, required=True, help="grams CO2 per kWh")
    p.set_defaults(func=_cmd_carbon)

    p = sub.add_parser("ft-config", help="emit the fine-tune hyperparameter manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a manifest field")
    p.set_defaults(func=_cmd_ft_config)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
