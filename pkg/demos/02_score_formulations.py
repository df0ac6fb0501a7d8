"""Score a predicted formulation against a gold one.

Declarations (constraint rows plus the objective) are matched by maximum
bipartite matching, so row order and variable order never matter. F1 is
computed over matched declarations.
"""

from optformkit import MatchConfig, parse_ir, score_problem, to_canonical

GOLD = """\
Variables: thin jar, stubby jar
Constraints:
(1.0) * thin jar + (2.0) * stubby jar <= (100.0)
(3.0) * thin jar + (1.0) * stubby jar <= (120.0)
(1.0) * thin jar <= (30.0)
Objective Function:
maximize (5.0) * thin jar + (4.0) * stubby jar
"""

# The prediction reorders rows, swaps variable order, and misses the
# single-variable cap on thin jars.
PRED = """\
Variables: stubby jar, thin jar
Constraints:
(1.0) * stubby jar + (3.0) * thin jar <= (120.0)
(2.0) * stubby jar + (1.0) * thin jar <= (100.0)
Objective Function:
maximize (4.0) * stubby jar + (5.0) * thin jar
"""


def main():
    gold = to_canonical(parse_ir(GOLD).model)
    pred = to_canonical(parse_ir(PRED).model)

    score = score_problem(pred, gold)
    print(f"matched {score.matched} of {score.gold_count} gold declarations")
    print(f"precision {score.precision:.4f}  recall {score.recall:.4f}  f1 {score.f1:.4f}")

    # Tighten or loosen numeric comparison with MatchConfig.
    strict = score_problem(pred, gold, MatchConfig(tolerance=1e-12))
    print(f"with a tight 1e-12 tolerance the score is unchanged here: f1 {strict.f1:.4f}")

    # A perfect prediction scores 1.0 regardless of ordering.
    perfect = score_problem(gold, gold)
    assert perfect.f1 == 1.0
    print("gold vs itself: f1 1.0000")


if __name__ == "__main__":
    main()
