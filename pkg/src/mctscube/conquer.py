"""Plain DPLL conquering solver and cube-and-conquer aggregation."""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import _kernels as K
from .bcp import Propagator
from .cnf import CnfFormula, Cube, CubeSet, emit_subformula

SAT = "SAT"
UNSAT = "UNSAT"
UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class Limits:
    decisions: int | None = None


@dataclass
class SolveResult:
    status: str
    model: dict[int, bool] | None = None
    decisions: int = 0
    propagations: int = 0
    reason: str = ""


@dataclass
class CubeOutcome:
    cube: Cube
    status: str
    decisions: int = 0
    propagations: int = 0
    refuted: bool = False


@dataclass
class CncResult:
    status: str
    model: dict[int, bool] | None = None
    cubes: list[CubeOutcome] = field(default_factory=list)

    @property
    def decisions(self) -> int:
        return sum(c.decisions for c in self.cubes)

    @property
    def propagations(self) -> int:
        return sum(c.propagations for c in self.cubes)


def verify_model(formula: CnfFormula, model: Mapping[int, bool]) -> bool:
    missing = [v for v in range(1, formula.num_vars + 1) if v not in model]
    if missing:
        raise ValueError(f"model leaves {len(missing)} variables unassigned (first: {missing[0]})")
    return all(any(model[abs(l)] == (l > 0) for l in clause) for clause in formula.clauses)


def solve(formula: CnfFormula, assumptions: Sequence[int] = (), limits: Limits = Limits()) -> SolveResult:
    """Complete DPLL: lowest active variable first, positive phase first, chronological backtracking.

    ``decisions`` counts branching variables chosen; the flipped second
    branch of a variable is not counted again.  ``propagations`` counts
    unit-implied literals, including those of the initial propagation.
    """
    engine = Propagator(formula)
    if engine.load(assumptions) is not None:
        return SolveResult(UNSAT, decisions=0, propagations=engine.propagations)
    cap = -1 if limits.decisions is None else limits.decisions
    status, decisions = K.dpll(engine.S, cap)
    decisions = int(decisions)
    if status == 1:
        model = {v: engine.value(v) == 1 for v in range(1, formula.num_vars + 1)}
        return SolveResult(SAT, model, decisions, engine.propagations)
    if status == 2:
        return SolveResult(UNKNOWN, None, decisions, engine.propagations, reason="decision limit")
    return SolveResult(UNSAT, None, decisions, engine.propagations)


def _solve_cube(args) -> SolveResult:
    formula, cube, limits = args
    return solve(formula, cube, limits)


def solve_cnc(formula: CnfFormula, cubes: CubeSet, limits: Limits = Limits(), jobs: int = 1) -> CncResult:
    """Solve ``formula`` under each open cube; refuted cubes count as UNSAT unsolved.

    Cubes are scanned in order and the table stops at the first SAT cube,
    so the effort totals do not depend on ``jobs``.
    """
    outcomes = [CubeOutcome(c, UNSAT, refuted=True) for c in cubes.refuted]
    if jobs > 1 and len(cubes.open) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_solve_cube, [(formula, c, limits) for c in cubes.open]))
    else:
        results = None
    model = None
    unknown = False
    for i, cube in enumerate(cubes.open):
        res = results[i] if results is not None else solve(formula, cube, limits)
        outcomes.append(CubeOutcome(cube, res.status, res.decisions, res.propagations))
        if res.status == SAT:
            model = res.model
            break
        if res.status == UNKNOWN:
            unknown = True
    if model is not None:
        status = SAT
    elif unknown:
        status = UNKNOWN
    else:
        status = UNSAT
    return CncResult(status, model, outcomes)


def solve_external(formula: CnfFormula, cube: Sequence[int], command: str, timeout: float | None = None) -> str:
    """Run an external solver on ``formula`` with ``cube`` as unit clauses.

    ``command`` is a shell-style template where ``{}`` is replaced by the
    DIMACS file path (appended when absent).  Exit code 10 means SAT,
    20 means UNSAT, anything else UNKNOWN.
    """
    fd, path = tempfile.mkstemp(suffix=".cnf")
    try:
        with os.fdopen(fd, "w") as fh:
            emit_subformula(formula, cube, fh)
        argv = shlex.split(command.replace("{}", shlex.quote(path))) if "{}" in command \
            else shlex.split(command) + [path]
        proc = subprocess.run(argv, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL, timeout=timeout)
    finally:
        os.unlink(path)
    return {10: SAT, 20: UNSAT}.get(proc.returncode, UNKNOWN)


def solve_cnc_external(formula: CnfFormula, cubes: CubeSet, command: str) -> CncResult:
    outcomes = [CubeOutcome(c, UNSAT, refuted=True) for c in cubes.refuted]
    unknown = False
    for cube in cubes.open:
        status = solve_external(formula, cube, command)
        outcomes.append(CubeOutcome(cube, status))
        if status == SAT:
            return CncResult(SAT, None, outcomes)
        unknown |= status == UNKNOWN
    return CncResult(UNKNOWN if unknown else UNSAT, None, outcomes)
