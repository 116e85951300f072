"""PUCT tree search over splitting decisions.

Every action (a variable) spawns two children, one per polarity.  Leaves
are scored by their propagation rate instead of rolling out, and values are
recombined pairwise on the way back to the root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .bcp import Propagator
from .scoring import pair_score, priors, prop_rate

OPEN = "open"
REFUTED = "refuted"
TERMINAL = "terminal"


@dataclass(frozen=True)
class SearchConfig:
    c_puct: float = 5.0
    budget: int = 30

    def __post_init__(self):
        if not self.c_puct > 0:
            raise ValueError("c_puct must be positive")
        if self.budget < 1:
            raise ValueError("budget must be a positive integer")


class MctsNode:
    """One state of the search tree together with its outgoing edge statistics."""

    def __init__(self, path: Sequence[int], literals: Sequence[int], status: str = OPEN,
                 prior: dict[int, float] | None = None, gain: int = 0, base_size: int = 0,
                 refuted_value: float = 0.0):
        self.path = tuple(path)
        self.literals = tuple(literals)
        self.status = status
        self.gain = gain
        self.base_size = base_size
        self.refuted_value = refuted_value
        self.P = dict(prior or {})
        self.candidates = sorted(self.P)
        self.N = {a: 0 for a in self.candidates}
        self.W = {a: 0.0 for a in self.candidates}
        self.best = {a: 0.0 for a in self.candidates}
        self.children: dict[int, tuple[MctsNode, MctsNode]] = {}
        self.refuted_actions: set[int] = set()
        self.value = 0.0
        self.visits = 0
        self.closed = status != OPEN or not self.candidates

    @property
    def eliminated(self) -> int:
        return len(self.literals)

    def Q(self, a: int) -> float:
        n = self.N[a]
        return self.W[a] / n if n else 0.0

    def exhausted(self, a: int) -> bool:
        kids = self.children.get(a)
        return kids is not None and kids[0].closed and kids[1].closed

    def refresh_closed(self) -> None:
        self.closed = self.status != OPEN or all(self.exhausted(a) for a in self.candidates)

    def __repr__(self):
        return f"MctsNode(path={self.path}, status={self.status}, value={self.value:g})"


def make_root(engine: Propagator, assumptions: Sequence[int], cutoff: int | None = None) -> MctsNode:
    """Search root for the state reached by propagating ``assumptions``.

    Candidates are the active variables whose probes fail in neither
    direction; pass a failed-literal closed state to keep them all.
    """
    if engine.load(assumptions) is not None:
        return MctsNode((), assumptions, REFUTED, refuted_value=engine.num_vars)
    probes = {}
    for v in engine.active_vars():
        pos, neg = engine.probe(v), engine.probe(-v)
        if pos is not None and neg is not None:
            probes[v] = (pos, neg)
    literals = tuple(engine.trail)
    return root_from_probes(literals, probes, cutoff, engine.num_vars)


def root_from_probes(literals, probes, cutoff: int | None, num_vars: int) -> MctsNode:
    terminal = not probes or (cutoff is not None and len(literals) >= cutoff)
    return MctsNode((), literals, TERMINAL if terminal else OPEN,
                    prior=None if terminal else priors(probes),
                    base_size=len(literals), refuted_value=num_vars)


def puct_value(node: MctsNode, a: int, c_puct: float) -> float:
    if a not in node.P:
        raise KeyError(f"{a} is not a candidate action of {node!r}")
    scale = c_puct * math.sqrt(max(node.visits, 1))
    return node.Q(a) + scale * node.P[a] / (1 + node.N[a])


def leaf_reward(node: MctsNode) -> float:
    if not node.path:
        raise ValueError("the search root has no leaf reward")
    if node.status == REFUTED:
        return float(node.refuted_value)
    return prop_rate(node.gain, len(node.path))


def select(root: MctsNode, cfg: SearchConfig, rng=None) -> list[tuple[MctsNode, int, int]]:
    """Walk from ``root`` to a node with an unexpanded action.

    Returns ``(node, action, polarity)`` steps; the last step names the
    action to expand.  An empty list means the tree is exhausted.
    """
    path = []
    node = root
    while not node.closed:
        scale = cfg.c_puct * math.sqrt(max(node.visits, 1))
        P, N, W = node.P, node.N, node.W
        best = None
        for b in node.candidates:
            if node.children and node.exhausted(b):
                continue
            n = N[b]
            key = ((W[b] / n if n else 0.0) + scale * P[b] / (1 + n), P[b], -b)
            if best is None or key > best:
                best = key
        a = -best[2]
        if a not in node.children:
            path.append((node, a, 1))
            return path
        pos, neg = node.children[a]
        options = [(c, s) for c, s in ((pos, 1), (neg, -1)) if not c.closed]
        child, sign = min(options, key=lambda t: (t[0].visits, -t[1]))
        path.append((node, a, sign))
        node = child
    return path


def expand(node: MctsNode, a: int, engine: Propagator, cutoff: int | None = None) -> tuple[MctsNode, MctsNode]:
    if node.status != OPEN:
        raise ValueError("cannot expand a closed node")
    if a in node.children:
        raise ValueError(f"action {a} is already expanded")
    if a not in node.P:
        raise KeyError(f"{a} is not a candidate action")
    kids = []
    for lit in (a, -a):
        path = node.path + (lit,)
        fx = engine.failed_literal_fixpoint(node.literals + (lit,))
        if fx.refuted:
            child = MctsNode(path, fx.trail.literals, REFUTED, base_size=node.base_size,
                             refuted_value=node.refuted_value)
        else:
            size = len(fx.trail)
            terminal = not fx.probes or (cutoff is not None and size >= cutoff)
            child = MctsNode(path, fx.trail.literals, TERMINAL if terminal else OPEN,
                             prior=None if terminal else priors(fx.probes),
                             gain=size - node.base_size - len(path), base_size=node.base_size,
                             refuted_value=node.refuted_value)
        child.value = leaf_reward(child)
        kids.append(child)
    pos, neg = kids
    node.children[a] = (pos, neg)
    if pos.status == REFUTED and neg.status == REFUTED:
        node.refuted_actions.add(a)
    return pos, neg


def _record(node: MctsNode, a: int, r: float) -> None:
    node.value = r
    node.visits += 1
    node.N[a] += 1
    node.W[a] += r
    if r > node.best[a]:
        node.best[a] = r
    node.refresh_closed()


def backup(path: list[tuple[MctsNode, int, int]], leaves: tuple[MctsNode, MctsNode]) -> None:
    """Recombine child values with the pair score up to the root."""
    pos, neg = leaves
    node, a, _ = path[-1]
    _record(node, a, pair_score(pos.value, neg.value))
    for parent, pa, _ in reversed(path[:-1]):
        left, right = parent.children[pa]
        _record(parent, pa, pair_score(left.value, right.value))


def best_action(root: MctsNode) -> int:
    return max(root.candidates, key=lambda a: (root.best[a], root.N[a], -a))


def run_search(root: MctsNode, engine: Propagator, cfg: SearchConfig = SearchConfig(),
               cutoff: int | None = None, rng=None) -> int:
    """Run up to ``cfg.budget`` simulations and return the highest-reward action."""
    if not root.candidates:
        raise ValueError("search root has no candidate actions")
    for _ in range(cfg.budget):
        path = select(root, cfg, rng)
        if not path:
            break
        node, a, _ = path[-1]
        leaves = expand(node, a, engine, cutoff)
        backup(path, leaves)
    return best_action(root)
