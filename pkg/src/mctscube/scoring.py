"""Propagation-rate rewards and the lookahead pair score."""

from __future__ import annotations

from typing import Mapping

from .bcp import ProbeResult


def prop_rate(implied: int, cube_size: int) -> float:
    """Implied literals per cube literal."""
    if cube_size <= 0:
        raise ValueError("propagation rate is undefined for an empty cube")
    if implied < 0:
        raise ValueError("implied count must be non-negative")
    return implied / cube_size


def pair_score(a: float, b: float) -> float:
    """Combine the two branch scores of a variable: ``a*b + a + b``."""
    return a * b + a + b


def raw_scores(probes: Mapping[int, ProbeResult]) -> dict[int, float]:
    out = {}
    for var, (pos, neg) in probes.items():
        if pos is None or neg is None:
            raise ValueError(f"probe of variable {var} has a failed direction")
        out[var] = pair_score(pos, neg)
    return out


def priors(probes: Mapping[int, ProbeResult]) -> dict[int, float]:
    """Sum-normalized pair scores; uniform when every score is zero."""
    if not probes:
        raise ValueError("no candidate actions to score")
    raw = raw_scores(probes)
    total = sum(raw.values())
    if total == 0:
        p = 1.0 / len(raw)
        return {v: p for v in raw}
    return {v: s / total for v, s in raw.items()}
