"""Walk one formulation from raw text to canonical matrix form.

A hotel staffing problem: hire cleaners and receptionists, cover at least
100 staff, at least 20 receptionists, receptionists at least a third of
cleaners (written as 0.33*cleaners <= receptionists), and keep the wage
bill under $30,000 while minimizing it.
"""

from optformkit import parse_ir, to_canonical

IR_TEXT = """\
Variables: cleaners, receptionists
Constraints:
(-1.0) * cleaners + (-1.0) * receptionists <= (-100.0)
(0.0) * cleaners + (-1.0) * receptionists <= (-20.0)
(0.33) * cleaners + (-1.0) * receptionists <= (0.0)
(500.0) * cleaners + (350.0) * receptionists <= (30000.0)
Objective Function:
minimize (500.0) * cleaners + (350.0) * receptionists
"""


def main():
    outcome = parse_ir(IR_TEXT)
    print("diagnostics:", list(outcome.diagnostics) or "none")
    model = outcome.model
    print("variables: ", ", ".join(v.text for v in model.variables))
    print("constraints:", len(model.constraints))

    form = to_canonical(model)
    print("\ncanonical rows (a . x <= b):")
    for coeffs, rhs in form.rows:
        print("  ", list(coeffs), "<=", rhs)
    print("objective (minimize):", list(form.objective))

    # The canonical form is side-invariant: moving a term across the
    # relation changes nothing downstream.
    moved = IR_TEXT.replace(
        "(0.33) * cleaners + (-1.0) * receptionists <= (0.0)",
        "(0.33) * cleaners <= (1.0) * receptionists",
    )
    assert to_canonical(parse_ir(moved).model) == form
    print("\nside-invariance check: moving a term across <= gives the same rows")


if __name__ == "__main__":
    main()
