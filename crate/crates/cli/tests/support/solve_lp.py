"""Solve a CPLEX-LP file written by `lad export-lp` with scipy's HiGHS MILP.

Usage: solve_lp.py MODEL.lp OUT.txt

Writes `name value` lines for every nonzero variable plus an
`objective <value>` line. Only the LP subset the exporter emits is
supported: Minimize / Subject To / Bounds / Binary / End, explicit
coefficients on every term, and <= >= = comparators.
"""

import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp


def tokenize(text):
    tokens = []
    for line in text.splitlines():
        cut = line.find("\\")
        if cut >= 0:
            line = line[:cut]
        tokens.extend(line.split())
    return tokens


def is_number(tok):
    try:
        float(tok)
        return True
    except ValueError:
        return False


def parse(tokens):
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def advance():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def parse_expr(stop):
        """Reads `[+-] coef var` terms until a stop token or comparator."""
        terms = []
        sign = 1.0
        while True:
            tok = peek()
            if tok is None or tok in stop or tok in ("<=", ">=", "="):
                return terms
            tok = advance()
            if tok == "+":
                sign = 1.0
                continue
            if tok == "-":
                sign = -1.0
                continue
            coef = sign * float(tok)
            var = advance()
            terms.append((coef, var))
            sign = 1.0

    assert advance() == "Minimize"
    assert advance() == "obj:"
    sections = {"Subject", "Bounds", "Binary", "End"}
    objective = parse_expr(sections)

    assert advance() == "Subject" and advance() == "To"
    constraints = []
    while peek() not in ("Bounds", "Binary", "End"):
        name = advance()
        assert name.endswith(":"), f"expected a constraint label, got {name}"
        expr = parse_expr(sections)
        op = advance()
        rhs = float(advance())
        constraints.append((name[:-1], expr, op, rhs))

    explicit_bounds = []
    if peek() == "Bounds":
        advance()
        while peek() not in ("Binary", "End"):
            lo = float(advance())
            assert advance() == "<="
            var = advance()
            assert advance() == "<="
            hi = float(advance())
            explicit_bounds.append((var, lo, hi))

    binaries = set()
    if peek() == "Binary":
        advance()
        while peek() != "End":
            binaries.add(advance())

    return objective, constraints, explicit_bounds, binaries


def main():
    model_path, out_path = sys.argv[1], sys.argv[2]
    objective, constraints, explicit_bounds, binaries = parse(tokenize(open(model_path).read()))

    names = []
    index = {}

    def var_id(name):
        if name not in index:
            index[name] = len(names)
            names.append(name)
        return index[name]

    for _, var in objective:
        var_id(var)
    for _, expr, _, _ in constraints:
        for _, var in expr:
            var_id(var)
    for var, _, _ in explicit_bounds:
        var_id(var)
    for var in binaries:
        var_id(var)

    n = len(names)
    c = np.zeros(n)
    for coef, var in objective:
        c[index[var]] += coef

    rows, lbs, ubs = [], [], []
    for _, expr, op, rhs in constraints:
        row = np.zeros(n)
        for coef, var in expr:
            row[index[var]] += coef
        rows.append(row)
        if op == "<=":
            lbs.append(-np.inf)
            ubs.append(rhs)
        elif op == ">=":
            lbs.append(rhs)
            ubs.append(np.inf)
        else:
            lbs.append(rhs)
            ubs.append(rhs)

    lower = np.zeros(n)
    upper = np.full(n, np.inf)
    for var, lo, hi in explicit_bounds:
        lower[index[var]] = lo
        upper[index[var]] = hi
    integrality = np.zeros(n)
    for var in binaries:
        integrality[index[var]] = 1
        lower[index[var]] = 0.0
        upper[index[var]] = 1.0

    result = milp(
        c=c,
        constraints=LinearConstraint(np.array(rows), np.array(lbs), np.array(ubs)),
        integrality=integrality,
        bounds=Bounds(lower, upper),
        options={"mip_rel_gap": 0.0},
    )
    if not result.success:
        sys.stderr.write(f"milp failed: {result.message}\n")
        sys.exit(1)

    with open(out_path, "w") as out:
        for name, value in zip(names, result.x):
            if abs(value) > 1e-9:
                out.write(f"{name} {value}\n")
        out.write(f"objective {result.fun}\n")


if __name__ == "__main__":
    main()
