"""Build prompts and run the whole evaluation pipeline offline.

The mock provider answers every prompt with the problem's own gold
formulation, so the run scores a perfect macro F1 — a deterministic
smoke test of the full loop: dataset -> prompts -> completions ->
parse -> canonicalize -> score -> report.
"""

import json
import tempfile
from pathlib import Path

from optformkit import PromptKind, RunConfig, build_prompt, run_eval

DATASET = [
    {
        "id": "fruit",
        "description": "A grocer stocks apples and pears; shelf space and budget are limited.",
        "gold_ir": {
            "variables": ["apples", "pears"],
            "constraints": [
                {"lhs": {"terms": [[1.0, "apples"], [1.0, "pears"]], "constant": 0.0},
                 "relation": "LE",
                 "rhs": {"terms": [], "constant": 50.0}},
                {"lhs": {"terms": [[2.0, "apples"], [3.0, "pears"]], "constant": 0.0},
                 "relation": "LE",
                 "rhs": {"terms": [], "constant": 120.0}},
            ],
            "objective": {"direction": "MAX",
                          "terms": [[3.0, "apples"], [4.0, "pears"]], "constant": 0.0},
        },
    },
]


def main():
    prompt = build_prompt(PromptKind.ONE_SHOT, DATASET[0]["description"])
    print("one-shot prompt, first 3 lines:")
    for line in prompt.splitlines()[:3]:
        print("  ", line)
    print("   ...")
    print("prompt length:", len(prompt), "chars\n")

    with tempfile.TemporaryDirectory() as tmp:
        dataset_path = Path(tmp) / "dataset.jsonl"
        dataset_path.write_text("\n".join(json.dumps(r) for r in DATASET) + "\n")
        out_dir = Path(tmp) / "out"
        report = run_eval(RunConfig(dataset_path=str(dataset_path), output_dir=str(out_dir)))
        print(f"mock-oracle run: macro F1 {report.macro_f1:.4f} "
              f"over {len(report.per_problem)} problem(s)")
        print("artifacts written:")
        for f in sorted(out_dir.iterdir()):
            print("  ", f.name)
        print("\nreport.md:")
        print((out_dir / "report.md").read_text())


if __name__ == "__main__":
    main()
