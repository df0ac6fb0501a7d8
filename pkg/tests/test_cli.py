import json
import random

import pytest

from conftest import HOTEL_OBJECTIVE, HOTEL_ROWS, random_model, write_dataset
from optformkit.cli import main
from optformkit.ir import model_to_dict


@pytest.fixture
def dataset(tmp_path):
    rng = random.Random(3)
    models = [(f"p{i}", random_model(rng)) for i in range(3)]
    return write_dataset(tmp_path / "dataset.jsonl", models)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestParse:
    def test_file_input(self, tmp_path, capsys, hotel_ir_text):
        src = tmp_path / "ir.txt"
        src.write_text(hotel_ir_text)
        code, out, _ = run_cli(capsys, "parse", str(src))
        assert code == 0
        payload = json.loads(out)
        assert payload["diagnostics"] == []
        assert payload["model"]["variables"] == ["cleaners", "receptionists"]

    def test_stdin(self, capsys, monkeypatch, hotel_ir_text):
        import io

        monkeypatch.setattr("sys.stdin", io.StringIO(hotel_ir_text))
        code, out, _ = run_cli(capsys, "parse", "-")
        assert code == 0
        assert json.loads(out)["model"] is not None

    def test_garbage_still_exits_zero(self, tmp_path, capsys):
        src = tmp_path / "bad.txt"
        src.write_text("nothing resembling a formulation")
        code, out, _ = run_cli(capsys, "parse", str(src))
        assert code == 0
        payload = json.loads(out)
        assert payload["model"] is None
        assert payload["diagnostics"]


class TestCanon:
    def test_hotel(self, tmp_path, capsys, hotel_model):
        src = tmp_path / "model.json"
        src.write_text(json.dumps(model_to_dict(hotel_model)))
        code, out, _ = run_cli(capsys, "canon", str(src))
        assert code == 0
        payload = json.loads(out)
        assert [tuple(r[:-1]) for r in payload["rows"]] == [r for r, _ in HOTEL_ROWS]
        assert tuple(payload["objective"]) == HOTEL_OBJECTIVE

    def test_bad_json_is_error_exit(self, tmp_path, capsys):
        src = tmp_path / "model.json"
        src.write_text("{not json")
        code, _, err = run_cli(capsys, "canon", str(src))
        assert code == 1
        assert "error:" in err


class TestRunAndScore:
    def test_run_then_score(self, tmp_path, capsys, dataset):
        out_dir = tmp_path / "out"
        code, out, _ = run_cli(
            capsys, "run", "--dataset", str(dataset), "--output-dir", str(out_dir),
            "--provider", "mock",
        )
        assert code == 0
        assert "macro F1 1.0000" in out
        code, out, _ = run_cli(
            capsys, "score", "--pred", str(out_dir / "predictions.jsonl"),
            "--gold", str(dataset), "--format", "markdown", "--model", "mock",
        )
        assert code == 0
        assert "| mock | 0 | 1.0000 |" in out

    def test_run_config_file_with_flag_override(self, tmp_path, capsys, dataset):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"dataset_path": str(dataset), "output_dir": str(tmp_path / "a")}))
        code, out, _ = run_cli(
            capsys, "run", "--config", str(cfg), "--output-dir", str(tmp_path / "b"),
        )
        assert code == 0
        assert (tmp_path / "b" / "report.json").exists()
        assert not (tmp_path / "a").exists()

    def test_run_missing_args(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "run", "--dataset", "x.jsonl")
        assert code == 2
        assert "output_dir" in err

    def test_score_writes_file(self, tmp_path, capsys, dataset):
        out_dir = tmp_path / "out"
        run_cli(capsys, "run", "--dataset", str(dataset), "--output-dir", str(out_dir))
        report = tmp_path / "report.csv"
        code, _, _ = run_cli(
            capsys, "score", "--pred", str(out_dir / "predictions.jsonl"),
            "--gold", str(dataset), "--format", "csv", "--out", str(report),
        )
        assert code == 0
        assert report.read_text().splitlines()[1].split(",")[2] == "1.0000"


class TestPrompt:
    def test_writes_jsonl(self, tmp_path, capsys, dataset):
        out = tmp_path / "prompts.jsonl"
        code, stdout, _ = run_cli(capsys, "prompt", "--kind", "one", "--dataset", str(dataset), "--out", str(out))
        assert code == 0
        assert "wrote 3 prompts" in stdout
        lines = [json.loads(l) for l in out.read_text().splitlines()]
        assert [l["id"] for l in lines] == ["p0", "p1", "p2"]
        assert all("Example Problem Description:" in l["prompt"] for l in lines)

    def test_finetune_kind_allowed_for_export(self, tmp_path, capsys, dataset):
        out = tmp_path / "prompts.jsonl"
        code, _, _ = run_cli(capsys, "prompt", "--kind", "finetune", "--dataset", str(dataset), "--out", str(out))
        assert code == 0


class TestCarbon:
    def test_prints_grams(self, capsys):
        code, out, _ = run_cli(
            capsys, "carbon", "--runtime-h", "1", "--power-kw", "0.3",
            "--pue", "1.67", "--intensity", "475",
        )
        assert code == 0
        assert out.strip() == "237.9750 g CO2"

    def test_invalid_params_exit_one(self, capsys):
        code, _, err = run_cli(
            capsys, "carbon", "--runtime-h", "1", "--power-kw", "0.3",
            "--pue", "0.2", "--intensity", "475",
        )
        assert code == 1
        assert "error:" in err


class TestFtConfig:
    def test_emit_with_override(self, tmp_path, capsys):
        out = tmp_path / "ft.json"
        code, _, _ = run_cli(capsys, "ft-config", "--out", str(out), "--set", "epochs=2")
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["epochs"] == 2
        assert payload["optimizer"] == "AdamW"

    def test_unknown_field_exit_one(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "ft-config", "--out", str(tmp_path / "ft.json"), "--set", "bogus=1")
        assert code == 1
        assert "bogus" in err


def test_unknown_subcommand_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
