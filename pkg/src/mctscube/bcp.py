"""Unit propagation, literal probing, and failed-literal reasoning.

The :class:`Propagator` owns mutable assignment state over one shared,
immutable :class:`~mctscube.cnf.CnfFormula`; use one per worker.  The
module-level functions are convenience wrappers that build a fresh engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels as K
from ._kernels import DECISION, FORCED
from .cnf import CnfFormula


@dataclass(frozen=True)
class Trail:
    """Assigned literals in assignment order, each tagged assumption or implied."""

    literals: tuple[int, ...]
    assumed: tuple[bool, ...]

    @property
    def num_assumptions(self) -> int:
        return sum(self.assumed)

    @property
    def num_implied(self) -> int:
        return len(self.literals) - self.num_assumptions

    @property
    def implied(self) -> tuple[int, ...]:
        return tuple(l for l, a in zip(self.literals, self.assumed) if not a)

    def assigned_vars(self) -> set[int]:
        return {abs(l) for l in self.literals}

    def value(self, var: int) -> bool | None:
        if var in self.literals:
            return True
        if -var in self.literals:
            return False
        return None

    def __len__(self) -> int:
        return len(self.literals)


@dataclass(frozen=True)
class PropagationOutcome:
    conflict: int | None
    trail: Trail | None = None

    @property
    def is_conflict(self) -> bool:
        return self.conflict is not None

    @property
    def implied(self) -> int:
        if self.trail is None:
            raise ValueError("conflicting outcome has no trail")
        return self.trail.num_implied


class ProbeResult(NamedTuple):
    """Marginal propagations of ``v`` and ``-v``; None marks a failed direction."""

    pos: int | None
    neg: int | None

    @property
    def conflict_free(self) -> bool:
        return self.pos is not None and self.neg is not None


@dataclass(frozen=True)
class FixpointResult:
    refuted: bool
    forced: tuple[int, ...]
    trail: Trail
    # probe results of the final, forcing-free round; empty when refuted
    probes: dict[int, ProbeResult]


class Propagator:
    """Counting-based BCP engine with incremental extend / backtrack.

    The hot loops live in :mod:`mctscube._kernels`; this class owns the
    arrays and translates results back to Python values.
    """

    def __init__(self, formula: CnfFormula):
        nv = formula.num_vars
        self.formula = formula
        self.num_vars = nv
        clauses = formula.clauses
        sizes = np.array([len(c) for c in clauses], dtype=np.int64)
        cstart = np.zeros(len(clauses) + 1, dtype=np.int64)
        np.cumsum(sizes, out=cstart[1:])
        clits = np.fromiter((l for c in clauses for l in c), dtype=np.int64, count=int(cstart[-1]))
        owner = np.repeat(np.arange(len(clauses), dtype=np.int64), sizes)
        order = np.argsort(clits + nv, kind="stable")
        olist = owner[order]
        counts = np.bincount(clits + nv, minlength=2 * nv + 1)
        ostart = np.zeros(2 * nv + 2, dtype=np.int64)
        np.cumsum(counts, out=ostart[1:])
        self._units_c = np.array([i for i, c in enumerate(clauses) if len(c) == 1], dtype=np.int64)
        self._units_l = np.array([c[0] for c in clauses if len(c) == 1], dtype=np.int64)
        self._empty = next((i for i, c in enumerate(clauses) if not c), -1)
        self._mask = np.zeros(nv + 1, dtype=np.int8)
        self._pos = np.zeros(nv + 1, dtype=np.int64)
        self._neg = np.zeros(nv + 1, dtype=np.int64)
        self._forced = np.zeros(nv + 1, dtype=np.int64)
        self.S = (
            cstart, clits, ostart, olist,
            np.zeros(2 * nv + 1, dtype=np.int8),      # val
            np.zeros(len(clauses), dtype=np.int64),   # nfalse
            np.zeros(nv + 1, dtype=np.int64),         # reason
            np.zeros(nv + 1, dtype=np.int64),         # trail
            np.zeros(4, dtype=np.int64),              # meta
        )

    # -- state -------------------------------------------------------------

    @property
    def calls(self) -> int:
        """Number of BCP invocations so far."""
        return int(self.S[8][3])

    @property
    def propagations(self) -> int:
        """Total literals implied by unit propagation so far."""
        return int(self.S[8][2])

    @property
    def trail(self) -> list[int]:
        return self.S[7][: self.S[8][0]].tolist()

    def trail_size(self) -> int:
        return int(self.S[8][0])

    def value(self, lit: int) -> int:
        return int(self.S[4][lit + self.num_vars])

    def backtrack(self, size: int) -> None:
        K.backtrack(self.S, size)

    def snapshot(self) -> Trail:
        n = self.S[8][0]
        lits = self.S[7][:n]
        return Trail(tuple(lits.tolist()), tuple((self.S[6][np.abs(lits)] == DECISION).tolist()))

    def _lits(self, lits: Sequence[int]) -> np.ndarray:
        arr = np.asarray(lits, dtype=np.int64).reshape(-1)
        if arr.size and (np.any(arr == 0) or np.abs(arr).max() > self.num_vars):
            bad = next(l for l in lits if l == 0 or abs(l) > self.num_vars)
            raise ValueError(f"literal {bad} out of range for {self.num_vars} variables")
        return arr

    # -- propagation -------------------------------------------------------

    def load(self, assumptions: Sequence[int]) -> int | None:
        """Reset, assert ``assumptions``, and propagate.  Returns a conflict clause index or None."""
        r = K.load(self.S, self._lits(assumptions), self._units_c, self._units_l, self._empty)
        if r == K.ERR_DUPLICATE:
            raise ValueError("duplicate assumption literal")
        if r == K.ERR_COMPLEMENT:
            raise ValueError("complementary assumption literals")
        return None if r < 0 else int(r)

    def extend(self, lits: Sequence[int], reason: int = DECISION) -> int | None:
        """Assert ``lits`` on top of the current fixed point and propagate.

        Returns the conflicting clause index (-1 when a literal clashes with
        an assumption) or None.
        """
        r = K.extend(self.S, self._lits(lits), reason)
        if r == K.CLASH:
            return -1
        return None if r < 0 else int(r)

    def propagate(self, assumptions: Sequence[int]) -> PropagationOutcome:
        conflict = self.load(assumptions)
        if conflict is not None:
            return PropagationOutcome(conflict)
        return PropagationOutcome(None, self.snapshot())

    def probe(self, lit: int) -> int | None:
        """Marginal implied count of ``lit`` over the current state, None on conflict."""
        r = K.probe(self.S, lit)
        return None if r < 0 else int(r)

    def active_vars(self) -> list[int]:
        """Unassigned variables occurring in a clause not yet satisfied, ascending."""
        K.active_vars(self.S, self._mask)
        return np.flatnonzero(self._mask).tolist()

    def fixpoint(self) -> FixpointResult:
        """Failed-literal closure of the current (conflict-free) state."""
        refuted, nforced = K.fixpoint(self.S, self._mask, self._forced, self._pos, self._neg)
        forced = tuple(self._forced[:nforced].tolist())
        probes = {}
        if not refuted:
            for v in np.flatnonzero(self._pos >= 0).tolist():
                probes[v] = ProbeResult(int(self._pos[v]), int(self._neg[v]))
        return FixpointResult(bool(refuted), forced, self.snapshot(), probes)

    def failed_literal_fixpoint(self, base: Sequence[int]) -> FixpointResult:
        if self.load(base) is not None:
            return FixpointResult(True, (), self.snapshot(), {})
        return self.fixpoint()

    def probe_pair(self, base: Sequence[int], var: int) -> ProbeResult:
        if self.load(base) is not None:
            raise ValueError("base assumptions are conflicting")
        self._lits([var])
        if self.value(var) != 0:
            raise ValueError(f"variable {var} is already assigned under the base")
        return ProbeResult(self.probe(var), self.probe(-var))

    def valid_actions(self, base: Sequence[int]) -> list[int]:
        if self.load(base) is not None:
            raise ValueError("base assumptions are conflicting")
        return self.active_vars()


def propagate(formula: CnfFormula, assumptions: Sequence[int] = ()) -> PropagationOutcome:
    return Propagator(formula).propagate(assumptions)


def probe_pair(formula: CnfFormula, base: Sequence[int], var: int) -> ProbeResult:
    return Propagator(formula).probe_pair(base, var)


def valid_actions(formula: CnfFormula, base: Sequence[int] = ()) -> list[int]:
    return Propagator(formula).valid_actions(base)


def failed_literal_fixpoint(formula: CnfFormula, base: Sequence[int] = ()) -> FixpointResult:
    return Propagator(formula).failed_literal_fixpoint(base)
