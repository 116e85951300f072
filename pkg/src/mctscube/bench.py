"""Ablation harness: MCTS cubing against the greedy baseline on random k-SAT."""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .cnf import CnfFormula, read_dimacs
from .conquer import Limits, solve_cnc
from .cuber import CubingConfig, cube_episode


def random_ksat(num_vars: int, ratio: float = 4.26, k: int = 3, seed=0) -> CnfFormula:
    """Uniform random k-SAT with ``round(ratio * num_vars)`` clauses over distinct variables."""
    if num_vars < k:
        raise ValueError("need at least k variables")
    rng = random.Random(seed)
    clauses = []
    for _ in range(round(ratio * num_vars)):
        clauses.append([v if rng.random() < 0.5 else -v for v in rng.sample(range(1, num_vars + 1), k)])
    return CnfFormula.from_clauses(clauses, num_vars)


def random_instances(count: int, num_vars: int, ratio: float, seed: int) -> list[tuple[str, CnfFormula]]:
    return [(f"rand-v{num_vars}-s{seed}-{i}", random_ksat(num_vars, ratio, seed=f"{seed}:{i}"))
            for i in range(count)]


def dir_instances(path) -> list[tuple[str, CnfFormula]]:
    files = sorted(p for p in Path(path).iterdir() if p.suffix in (".cnf", ".dimacs"))
    return [(p.name, read_dimacs(p)) for p in files]


@dataclass
class BenchRow:
    instance: str
    seed: int
    mode: str
    cubes: int
    refuted: int
    cubing_seconds: float
    result: str
    decisions: int


def run_instance(name: str, formula: CnfFormula, seed: int, n: int, budget: int = 30, c_puct: float = 5.0,
                 jobs: int = 1, limits: Limits = Limits()) -> list[BenchRow]:
    rows = []
    for mode in ("mcts", "greedy"):
        cfg = CubingConfig(n=n, budget=budget, c_puct=c_puct, mode=mode, seed=seed, jobs=jobs)
        start = time.perf_counter()
        cubes, stats = cube_episode(formula, cfg)
        elapsed = time.perf_counter() - start
        res = solve_cnc(formula, cubes, limits, jobs=jobs)
        rows.append(BenchRow(name, seed, mode, stats.cubes, stats.refuted_cubes, elapsed, res.status, res.decisions))
    return rows


def effort_ratios(rows: Iterable[BenchRow]) -> list[float]:
    """Per-instance (mcts decisions + 1) / (greedy decisions + 1)."""
    by_key: dict[tuple[str, int], dict[str, int]] = {}
    for r in rows:
        by_key.setdefault((r.instance, r.seed), {})[r.mode] = r.decisions
    return [(d["mcts"] + 1) / (d["greedy"] + 1) for d in by_key.values() if len(d) == 2]


def geometric_mean(values: Sequence[float]) -> float:
    if not values:
        raise ValueError("geometric mean of an empty sequence")
    return math.exp(sum(math.log(v) for v in values) / len(values))


def format_table(rows: Sequence[BenchRow]) -> str:
    head = f"{'instance':<24} {'seed':>5} {'mode':<6} {'cubes':>6} {'refuted':>7} {'cube_s':>8} {'result':<7} {'decisions':>10}"
    lines = [head, "-" * len(head)]
    for r in rows:
        lines.append(f"{r.instance:<24} {r.seed:>5} {r.mode:<6} {r.cubes:>6} {r.refuted:>7} "
                     f"{r.cubing_seconds:>8.2f} {r.result:<7} {r.decisions:>10}")
    ratios = effort_ratios(rows)
    lines.append("")
    for mode in ("mcts", "greedy"):
        sel = [r for r in rows if r.mode == mode]
        lines.append(f"{mode:<6} total decisions {sum(r.decisions for r in sel):>12}  "
                     f"cubing seconds {sum(r.cubing_seconds for r in sel):>9.2f}")
    lines.append(f"geomean effort ratio (mcts/greedy) over {len(ratios)} instances: {geometric_mean(ratios):.4f}")
    return "\n".join(lines)
