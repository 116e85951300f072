import itertools
import random

import pytest

from mctscube.cnf import CnfFormula

# (x1 v x2) & (-x1 v x2) & (-x2 v x3)
F_A_CLAUSES = [[1, 2], [-1, 2], [-2, 3]]

ACCEPTANCE_LINES = []


@pytest.fixture
def f_a():
    return CnfFormula.from_clauses(F_A_CLAUSES)


def naive_propagate(clauses, assumptions):
    """Rescan every clause until nothing is unit.  Returns (conflict, assignment dict)."""
    assign = {}
    for lit in assumptions:
        assign[abs(lit)] = lit > 0
    changed = True
    while changed:
        changed = False
        for clause in clauses:
            free = []
            sat = False
            for lit in clause:
                val = assign.get(abs(lit))
                if val is None:
                    free.append(lit)
                elif val == (lit > 0):
                    sat = True
                    break
            if sat:
                continue
            if not free:
                return True, assign
            if len(free) == 1:
                assign[abs(free[0])] = free[0] > 0
                changed = True
    return False, assign


def naive_failed_literal_closure(clauses, num_vars, base):
    """Probe every free variable in both directions until nothing is forced.

    Returns (refuted, set of assigned literals).
    """
    lits = list(base)
    while True:
        conflict, assign = naive_propagate(clauses, lits)
        if conflict:
            return True, None
        forced = None
        for v in range(1, num_vars + 1):
            if v in assign:
                continue
            pos = naive_propagate(clauses, lits + [v])[0]
            neg = naive_propagate(clauses, lits + [-v])[0]
            if pos and neg:
                return True, None
            if pos or neg:
                forced = -v if pos else v
                break
        if forced is None:
            return False, {v if b else -v for v, b in assign.items()}
        lits.append(forced)


def brute_force_sat(formula, assumptions=()):
    fixed = {abs(l): l > 0 for l in assumptions}
    free = [v for v in range(1, formula.num_vars + 1) if v not in fixed]
    for bits in itertools.product((False, True), repeat=len(free)):
        model = dict(fixed)
        model.update(zip(free, bits))
        if all(any(model[abs(l)] == (l > 0) for l in c) for c in formula.clauses):
            return True
    return False


def random_formula(rng: random.Random, max_vars=12, max_clauses=40, widths=(1, 4)):
    nv = rng.randint(1, max_vars)
    clauses = []
    for _ in range(rng.randint(0, max_clauses)):
        w = rng.randint(min(widths[0], nv), min(widths[1], nv))
        clauses.append([v if rng.random() < 0.5 else -v for v in rng.sample(range(1, nv + 1), w)])
    return CnfFormula.from_clauses(clauses, nv)


def random_assumptions(rng: random.Random, num_vars, max_len=4):
    if num_vars == 0:
        return []
    k = rng.randint(0, min(max_len, num_vars))
    return [v if rng.random() < 0.5 else -v for v in rng.sample(range(1, num_vars + 1), k)]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def partition_violations(num_vars, cubes, samples, seed=0):
    """Count random total assignments not consistent with exactly one cube."""
    import numpy as np

    rng = np.random.default_rng(seed)
    alpha = rng.integers(0, 2, size=(samples, num_vars + 1)).astype(bool)
    hits = np.zeros(samples, dtype=np.int64)
    for cube in cubes:
        ok = np.ones(samples, dtype=bool)
        for lit in cube:
            ok &= alpha[:, abs(lit)] == (lit > 0)
        hits += ok
    return int(np.count_nonzero(hits != 1))


def recheck_cubes(formula, cubes, n):
    """Return the cubes whose recorded status cannot be reproduced from scratch."""
    from mctscube.bcp import failed_literal_fixpoint

    bad = []
    for cube in cubes.open:
        fx = failed_literal_fixpoint(formula, cube)
        if fx.refuted or not (len(fx.trail) >= n or not fx.probes):
            bad.append(("open", cube))
    for cube in cubes.refuted:
        if not failed_literal_fixpoint(formula, cube).refuted:
            bad.append(("refuted", cube))
    return bad
