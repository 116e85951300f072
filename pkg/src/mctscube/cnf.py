"""CNF formulas, cubes, and the DIMACS / iCNF text formats.

Literals are plain signed integers in the DIMACS convention: ``v`` asserts
variable ``v`` true, ``-v`` asserts it false, and ``0`` is never a literal.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

log = logging.getLogger(__name__)

Cube = tuple[int, ...]


class DimacsError(ValueError):
    """Malformed DIMACS or iCNF input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def neg(lit: int) -> int:
    return -lit


def normalize_clause(lits: Iterable[int]) -> tuple[int, ...] | None:
    """Merge duplicate literals, keeping first occurrence order.

    Returns None for a tautology (clause holding both ``l`` and ``-l``).
    """
    seen: set[int] = set()
    out = []
    for lit in lits:
        if lit == 0:
            raise ValueError("0 is not a literal")
        if -lit in seen:
            return None
        if lit not in seen:
            seen.add(lit)
            out.append(lit)
    return tuple(out)


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        for clause in self.clauses:
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range for {self.num_vars} variables")

    @classmethod
    def from_clauses(cls, clauses: Iterable[Iterable[int]], num_vars: int | None = None) -> "CnfFormula":
        """Build a normalized formula (duplicates merged, tautologies dropped)."""
        kept = []
        top = 0
        for raw in clauses:
            raw = list(raw)
            top = max([top] + [abs(l) for l in raw])
            clause = normalize_clause(raw)
            if clause is not None:
                kept.append(clause)
        if num_vars is None or num_vars < top:
            num_vars = top
        return cls(num_vars, tuple(kept))

    @property
    def has_empty_clause(self) -> bool:
        return any(len(c) == 0 for c in self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)


def check_cube(cube: Sequence[int], num_vars: int | None = None) -> Cube:
    """Validate a cube: distinct variables, no complementary pair, in range."""
    seen = set()
    for lit in cube:
        var = abs(lit)
        if lit == 0:
            raise ValueError("0 is not a literal")
        if var in seen:
            raise ValueError(f"variable {var} occurs twice in cube")
        if num_vars is not None and var > num_vars:
            raise ValueError(f"cube literal {lit} exceeds {num_vars} variables")
        seen.add(var)
    return tuple(cube)


@dataclass
class CubeSet:
    open: list[Cube] = field(default_factory=list)
    refuted: list[Cube] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.open) + len(self.refuted)

    def all_cubes(self) -> list[Cube]:
        return list(self.open) + list(self.refuted)


# -- DIMACS ----------------------------------------------------------------


def parse_dimacs(text: str | TextIO) -> CnfFormula:
    if not isinstance(text, str):
        text = text.read()
    header = None
    declared_clauses = 0
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            # SATLIB trailer
            break
        if line.startswith("p"):
            if header is not None:
                raise DimacsError("duplicate header", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"malformed header {line!r}", lineno)
            try:
                nv, nc = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"malformed header {line!r}", lineno) from None
            if nv < 0 or nc < 0:
                raise DimacsError(f"negative count in header {line!r}", lineno)
            header = nv
            declared_clauses = nc
            continue
        if header is None:
            raise DimacsError("clause before 'p cnf' header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"non-integer token {tok!r}", lineno) from None
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                current.append(lit)
    if header is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        log.warning("last clause is not terminated by 0; accepting it")
        clauses.append(current)
    if len(clauses) != declared_clauses:
        log.warning("header declares %d clauses, found %d", declared_clauses, len(clauses))
    formula = CnfFormula.from_clauses(clauses, header)
    if formula.num_vars > header:
        log.warning("header declares %d variables, found variable %d", header, formula.num_vars)
    return formula


def read_dimacs(path) -> CnfFormula:
    with open(path) as fh:
        return parse_dimacs(fh.read())


def write_dimacs(formula: CnfFormula, sink: TextIO, extra_units: Sequence[int] = (), comment: str | None = None) -> None:
    if comment:
        for line in comment.splitlines():
            sink.write(f"c {line}\n")
    sink.write(f"p cnf {formula.num_vars} {len(formula.clauses) + len(extra_units)}\n")
    for clause in formula.clauses:
        sink.write(" ".join(map(str, clause + (0,))) + "\n")
    for lit in extra_units:
        sink.write(f"{lit} 0\n")


def emit_subformula(formula: CnfFormula, cube: Sequence[int], sink: TextIO) -> None:
    """Write ``formula`` conjoined with ``cube`` (one unit clause per literal)."""
    check_cube(cube, formula.num_vars)
    write_dimacs(formula, sink, extra_units=tuple(cube))


# -- iCNF ------------------------------------------------------------------


def _cube_line(cube: Sequence[int]) -> str:
    return " ".join(["a", *map(str, cube), "0"])


def write_icnf(cubes: CubeSet, sink: TextIO) -> None:
    sink.write("p inccnf\n")
    for cube in cubes.open:
        sink.write(_cube_line(cube) + "\n")
    for cube in cubes.refuted:
        sink.write("c refuted " + _cube_line(cube) + "\n")


def _parse_cube_tokens(tokens: list[str], lineno: int) -> Cube:
    if not tokens or tokens[0] != "a" or tokens[-1] != "0":
        raise DimacsError("cube line must look like 'a <lits> 0'", lineno)
    try:
        lits = [int(t) for t in tokens[1:-1]]
    except ValueError:
        raise DimacsError("non-integer literal in cube", lineno) from None
    try:
        return check_cube(lits)
    except ValueError as exc:
        raise DimacsError(str(exc), lineno) from None


def parse_icnf(text: str | TextIO) -> CubeSet:
    """Read cubes written by :func:`write_icnf`.

    Only assumption lines are accepted after the header; ``c refuted a ... 0``
    comments are read back as refuted cubes, other comments are skipped.
    """
    if not isinstance(text, str):
        text = text.read()
    cubes = CubeSet()
    seen_header = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        if tokens[0] == "c":
            if seen_header and tokens[1:2] == ["refuted"]:
                cubes.refuted.append(_parse_cube_tokens(tokens[2:], lineno))
            continue
        if tokens[0] == "p":
            if seen_header or tokens != ["p", "inccnf"]:
                raise DimacsError(f"malformed header {line.strip()!r}", lineno)
            seen_header = True
            continue
        if not seen_header:
            raise DimacsError("missing 'p inccnf' header", lineno)
        cubes.open.append(_parse_cube_tokens(tokens, lineno))
    if not seen_header:
        raise DimacsError("missing 'p inccnf' header")
    return cubes
