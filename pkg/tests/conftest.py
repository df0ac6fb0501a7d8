import json
import random
from pathlib import Path

import pytest

from optformkit.ir import (
    Constraint,
    Direction,
    Identifier,
    IRModel,
    LinearExpr,
    Objective,
    Relation,
    model_to_dict,
)

FIXTURES = Path(__file__).parent / "fixtures"

HOTEL_ROWS = (
    ((-1.0, -1.0), -100.0),
    ((0.0, -1.0), -20.0),
    ((0.33, -1.0), 0.0),
    ((500.0, 350.0), 30000.0),
)
HOTEL_OBJECTIVE = (500.0, 350.0)


def expr(*terms, constant=0.0):
    return LinearExpr(terms=tuple((float(c), Identifier(v)) for c, v in terms), constant=constant)


def const(x):
    return LinearExpr(constant=float(x))


@pytest.fixture
def hotel_model():
    c, r = "cleaners", "receptionists"
    return IRModel(
        variables=(Identifier(c), Identifier(r)),
        constraints=(
            Constraint(expr((-1, c), (-1, r)), Relation.LE, const(-100)),
            Constraint(expr((0, c), (-1, r)), Relation.LE, const(-20)),
            Constraint(expr((0.33, c), (-1, r)), Relation.LE, const(0)),
            Constraint(expr((500, c), (350, r)), Relation.LE, const(30000)),
        ),
        objective=Objective(Direction.MIN, expr((500, c), (350, r))),
    )


@pytest.fixture
def hotel_ir_text():
    # the worked-example response shipped with the prompt templates is the
    # canonical transcription of the hotel IR
    from optformkit.prompts import default_example

    return default_example().response


def fixture_text(name):
    return (FIXTURES / name).read_text(encoding="utf-8")


# --- randomized model generator for round-trip / property tests ------------

_NAME_POOL = [
    "cleaners", "receptionists", "apple", "pear", "thin jar", "stubby jar",
    "large_ships", "small_ships", "x1", "x2", "trucks", "vans", "gold bars",
]


def random_model(rng: random.Random) -> IRModel:
    n_vars = rng.randint(1, 4)
    names = rng.sample(_NAME_POOL, n_vars)
    variables = tuple(Identifier(n) for n in names)

    def rand_coef():
        if rng.random() < 0.15:
            return 0.0
        return rng.uniform(-1000, 1000)

    def rand_expr(min_terms=0):
        k = rng.randint(min_terms, n_vars)
        chosen = rng.sample(names, k) if k else []
        constant = rng.uniform(-100, 100) if rng.random() < 0.3 else 0.0
        return LinearExpr(
            terms=tuple((rand_coef(), Identifier(v)) for v in chosen),
            constant=constant,
        )

    constraints = []
    for _ in range(rng.randint(1, 5)):
        lhs = rand_expr(min_terms=1)
        if rng.random() < 0.3:
            rhs = rand_expr()
        else:
            rhs = LinearExpr(constant=rng.uniform(-500, 500))
        rel = rng.choice(list(Relation))
        constraints.append(Constraint(lhs, rel, rhs))

    obj_vars = rng.sample(names, rng.randint(1, n_vars))
    objective = Objective(
        rng.choice([Direction.MIN, Direction.MAX]),
        LinearExpr(terms=tuple((rand_coef(), Identifier(v)) for v in obj_vars)),
    )
    return IRModel(variables=variables, constraints=tuple(constraints), objective=objective)


def write_dataset(path: Path, models_with_ids, descriptions=None):
    """Write a gold-IR dataset JSONL from (id, IRModel) pairs."""
    with path.open("w", encoding="utf-8") as fh:
        for i, (pid, model) in enumerate(models_with_ids):
            desc = descriptions[i] if descriptions else f"Problem {pid}: choose activity levels."
            fh.write(json.dumps({"id": pid, "description": desc, "gold_ir": model_to_dict(model)}) + "\n")
    return path
