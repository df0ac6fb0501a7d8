import hashlib

import pytest

from conftest import HOTEL_OBJECTIVE, HOTEL_ROWS
from optformkit.canonical import to_canonical
from optformkit.parsing import parse_ir
from optformkit.prompts import (
    EmptyDescription,
    ExamplePair,
    PromptKind,
    build_prompt,
    default_example,
    load_template,
)

# frozen sha256 of the stored instruction templates; any byte drift fails here
TEMPLATE_SHA256 = {
    PromptKind.FINE_TUNE: "12b9e256af66b528c2ee7857c52f4b9b9723c83d7c34a842b87194b6ae9a1914",
    PromptKind.ZERO_SHOT: "c562305152b9836bbff12413fe42fe79a14a6f885fab33692f1231aa439caa82",
    PromptKind.ONE_SHOT: "362a64b40d4ea0bf2fb1b8ece503e9aa17a81296a4ad3a1a27e3ae5128cd7cec",
}


class TestTemplates:
    @pytest.mark.parametrize("kind", list(PromptKind))
    def test_byte_exact(self, kind):
        digest = hashlib.sha256(load_template(kind).encode("utf-8")).hexdigest()
        assert digest == TEMPLATE_SHA256[kind]

    def test_one_shot_contains_zero_shot_response_block(self):
        ex = default_example()
        one = load_template(PromptKind.ONE_SHOT)
        assert ex.response in load_template(PromptKind.ZERO_SHOT)
        assert ex.response in one
        assert ex.description in one


class TestDefaultExample:
    def test_parses_cleanly(self):
        out = parse_ir(default_example().response)
        assert out.diagnostics == ()
        assert out.model is not None

    def test_canonicalizes_to_hotel(self):
        form = to_canonical(parse_ir(default_example().response).model)
        assert form.rows == HOTEL_ROWS
        assert form.objective == HOTEL_OBJECTIVE


class TestBuildPrompt:
    def test_zero_shot(self):
        p = build_prompt(PromptKind.ZERO_SHOT, "Some problem.")
        assert p.startswith("Imagine you are a combinatorial optimization problem solver.")
        assert "Variables: cleaners, receptionists" in p
        assert "Example Problem Description:" not in p
        assert p.endswith("Problem description to solve:\nSome problem.")

    def test_one_shot(self):
        p = build_prompt(PromptKind.ONE_SHOT, "Some problem.")
        assert "Example Problem Description:" in p
        assert "Example Response for the given example problem:" in p
        assert p.endswith("\nSome problem.")

    def test_fine_tune_concatenation_arithmetic(self):
        instruction = load_template(PromptKind.FINE_TUNE)
        p = build_prompt(PromptKind.FINE_TUNE, "x")
        assert p == instruction + "\nx"
        assert len(p) == len(instruction) + 1 + 1

    def test_deterministic(self):
        a = build_prompt(PromptKind.ONE_SHOT, "desc")
        assert a == build_prompt(PromptKind.ONE_SHOT, "desc")

    def test_custom_example_substitution(self):
        ex = ExamplePair(description="Two jars.", response="Variables: a\nConstraints:\n(1.0) * a <= 2.0\nObjective Function:\nminimize (1.0) * a")
        p = build_prompt(PromptKind.ONE_SHOT, "desc", example=ex)
        assert "Two jars." in p
        assert ex.response in p
        assert default_example().response not in p

    def test_fine_tune_ignores_example(self):
        ex = ExamplePair(description="d", response="r")
        assert build_prompt(PromptKind.FINE_TUNE, "x", example=ex) == build_prompt(PromptKind.FINE_TUNE, "x")

    def test_empty_description_rejected(self):
        with pytest.raises(EmptyDescription):
            build_prompt(PromptKind.ZERO_SHOT, "")
