"""Tour the parser's fault tolerance on realistic model-output pathologies.

Model completions rarely arrive as a clean three-section block. The parser
is total: it always returns an outcome, attaching diagnostics instead of
raising, and salvages whatever structure it can.
"""

from optformkit import parse_ir

CASES = {
    "duplicated block": """\
Variables: apple, pear
Constraints:
(1.0) * apple + (1.0) * pear <= (10.0)
Objective Function:
maximize (2.0) * apple + (3.0) * pear
Variables: apple, pear
Constraints:
(1.0) * apple + (1.0) * pear <= (10.0)
""",
    "hallucinated variable": """\
Variables: apple, pear
Constraints:
(1.0) * x1 <= (5.0)
Objective Function:
maximize (2.0) * apple
""",
    "truncated mid-constraint": """\
Variables: apple, pear
Constraints:
(1.0) * apple + (1.0) * pear <= (10.0)
(2.0) * apple +
Objective Function:
maximize (2.0) * apple
""",
    "trailing chatter": """\
Variables: apple, pear
Constraints:
(1.0) * apple <= (4.0)
Objective Function: maximize (1.0) * apple
I hope this helps! Let me know if you need anything else.
""",
    "no formulation at all": "Sure! Here is a poem about fruit instead.",
}


def main():
    for label, text in CASES.items():
        outcome = parse_ir(text)
        status = "parsed" if outcome.model is not None else "no model"
        kinds = sorted({d.kind for d in outcome.diagnostics}) or ["clean"]
        print(f"{label:28s} -> {status:9s} {', '.join(kinds)}")
        for d in outcome.diagnostics:
            subject = f" ({d.subject})" if d.subject else ""
            print(f"    {d.kind}{subject}: {d.message}")


if __name__ == "__main__":
    main()
