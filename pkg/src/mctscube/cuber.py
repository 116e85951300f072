"""Cubing episodes: grow a splitting tree and collect its leaves as cubes."""

from __future__ import annotations

import time
from collections import Counter
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from concurrent.futures.process import BrokenProcessPool
from dataclasses import dataclass, field
from typing import Mapping

from .bcp import ProbeResult, Propagator
from .cnf import CnfFormula, Cube, CubeSet
from .mcts import SearchConfig, root_from_probes, run_search
from .scoring import pair_score

PENDING = "pending"
SPLIT = "split"
LEAF_OPEN = "leaf_open"
LEAF_REFUTED = "leaf_refuted"

MODES = ("mcts", "greedy")


class CubingError(RuntimeError):
    pass


@dataclass(frozen=True)
class CubingConfig:
    n: int
    budget: int = 30
    c_puct: float = 5.0
    mode: str = "mcts"
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("cutoff n must be positive")
        if self.budget < 1 or self.jobs < 1:
            raise ValueError("budget and jobs must be positive")
        if not self.c_puct > 0:
            raise ValueError("c_puct must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    @property
    def search(self) -> SearchConfig:
        return SearchConfig(c_puct=self.c_puct, budget=self.budget)


@dataclass
class SplitNode:
    cube_prefix: Cube
    literals: tuple[int, ...] = ()  # every assigned literal: decisions, implied, forced
    status: str = PENDING
    refuted: bool = False
    var: int | None = None
    probes: dict[int, ProbeResult] = field(default_factory=dict)
    children: tuple[int, int] | None = None

    @property
    def eliminated(self) -> int:
        return len(self.literals)


@dataclass
class EpisodeStats:
    open_cubes: int = 0
    refuted_cubes: int = 0
    split_nodes: int = 0
    depth_histogram: dict[int, int] = field(default_factory=dict)
    bcp_calls: int = 0
    wall_time: float = 0.0

    @property
    def cubes(self) -> int:
        return self.open_cubes + self.refuted_cubes


def should_terminate(node: SplitNode, n: int) -> bool:
    return node.refuted or node.eliminated >= n or not node.probes


def greedy_pick(probes: Mapping[int, ProbeResult]) -> int:
    """Variable with the highest pair score; failed probes are skipped."""
    scored = [(pair_score(p, q), -v) for v, (p, q) in probes.items() if p is not None and q is not None]
    if not scored:
        raise ValueError("no splittable candidates")
    return -max(scored)[1]


def evaluate_node(engine: Propagator, cfg: CubingConfig, prefix: Cube, base: tuple[int, ...]) -> SplitNode:
    """Close ``base`` under failed literals and pick a split variable if needed."""
    fx = engine.failed_literal_fixpoint(base)
    node = SplitNode(prefix, fx.trail.literals, refuted=fx.refuted, probes=fx.probes)
    if should_terminate(node, cfg.n):
        node.status = LEAF_REFUTED if node.refuted else LEAF_OPEN
        return node
    if cfg.mode == "greedy":
        node.var = greedy_pick(node.probes)
    else:
        root = root_from_probes(node.literals, node.probes, cfg.n, engine.num_vars)
        node.var = run_search(root, engine, cfg.search, cutoff=cfg.n)
    node.status = SPLIT
    node.probes = {}
    return node


_worker_engine: Propagator | None = None
_worker_cfg: CubingConfig | None = None


def _init_worker(formula: CnfFormula, cfg: CubingConfig) -> None:
    global _worker_engine, _worker_cfg
    _worker_engine = Propagator(formula)
    _worker_cfg = cfg


def _work(prefix: Cube, base: tuple[int, ...]) -> tuple[SplitNode, int]:
    before = _worker_engine.calls
    node = evaluate_node(_worker_engine, _worker_cfg, prefix, base)
    return node, _worker_engine.calls - before


def _children(node: SplitNode) -> list[tuple[Cube, tuple[int, ...]]]:
    v = node.var
    return [(node.cube_prefix + (lit,), node.literals + (lit,)) for lit in (v, -v)]


def _attach(tree: list[SplitNode], idx: int) -> list[tuple[int, Cube, tuple[int, ...]]]:
    node = tree[idx]
    if node.status != SPLIT:
        return []
    jobs = []
    ids = []
    for prefix, base in _children(node):
        tree.append(SplitNode(prefix))
        ids.append(len(tree) - 1)
        jobs.append((len(tree) - 1, prefix, base))
    node.children = (ids[0], ids[1])
    return jobs


def run_sequential(formula: CnfFormula, cfg: CubingConfig) -> tuple[list[SplitNode], int]:
    engine = Propagator(formula)
    tree = [SplitNode(())]
    stack = [(0, (), ())]
    while stack:
        idx, prefix, base = stack.pop()
        tree[idx] = evaluate_node(engine, cfg, prefix, base)
        stack.extend(reversed(_attach(tree, idx)))
    return tree, engine.calls


def run_parallel(formula: CnfFormula, cfg: CubingConfig) -> tuple[list[SplitNode], int]:
    """Evaluate pending splitting-tree nodes on a pool of ``cfg.jobs`` processes."""
    tree = [SplitNode(())]
    calls = 0
    with ProcessPoolExecutor(cfg.jobs, initializer=_init_worker, initargs=(formula, cfg)) as pool:
        pending = {pool.submit(_work, (), ()): 0}
        try:
            while pending:
                done, _ = wait(pending, return_when=FIRST_COMPLETED)
                for fut in done:
                    idx = pending.pop(fut)
                    tree[idx], used = fut.result()
                    calls += used
                    for child, prefix, base in _attach(tree, idx):
                        pending[pool.submit(_work, prefix, base)] = child
        except BrokenProcessPool as exc:
            raise CubingError(f"cubing worker died: {exc}") from exc
    return tree, calls


def collect(tree: list[SplitNode]) -> tuple[CubeSet, Counter]:
    """Leaves in depth-first order, positive branch first."""
    cubes = CubeSet()
    depths: Counter = Counter()
    stack = [0]
    while stack:
        node = tree[stack.pop()]
        if node.status == SPLIT:
            stack.extend(reversed(node.children))
            continue
        depths[len(node.cube_prefix)] += 1
        (cubes.refuted if node.status == LEAF_REFUTED else cubes.open).append(node.cube_prefix)
    return cubes, depths


def cube_episode(formula: CnfFormula, cfg: CubingConfig) -> tuple[CubeSet, EpisodeStats]:
    start = time.perf_counter()
    if cfg.jobs > 1:
        tree, calls = run_parallel(formula, cfg)
    else:
        tree, calls = run_sequential(formula, cfg)
    cubes, depths = collect(tree)
    stats = EpisodeStats(
        open_cubes=len(cubes.open),
        refuted_cubes=len(cubes.refuted),
        split_nodes=sum(1 for node in tree if node.status == SPLIT),
        depth_histogram=dict(sorted(depths.items())),
        bcp_calls=calls,
        wall_time=time.perf_counter() - start,
    )
    return cubes, stats
