"""Logarithmic scoring of superstate marginals against exact elementary ones.

Superstate probabilities are spread uniformly over their elementary states
before scoring.  ``relscore`` is ``score(o) / score(a)``: both scores are
nonpositive and ``score(a) <= score(o)``, so the ratio lands in [0, 1] with 1
for a perfect approximation.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .network import MarginalSet


def spread(superstate_dist, blocks: Sequence) -> np.ndarray:
    """Elementary distribution with each block's mass shared equally by its states."""
    dist = np.asarray(superstate_dist, dtype=float)
    if dist.shape != (len(blocks),):
        raise ValueError(f"distribution has {dist.size} entries, partition has {len(blocks)} superstates")
    out = np.empty(blocks[-1][1] + 1)
    for p, (lo, hi) in zip(dist, blocks):
        out[lo:hi + 1] = p / (hi - lo + 1)
    return out


def log_score(o, a) -> float:
    """Sum of o_i ln a_i, skipping o_i = 0 terms; -inf if some o_i > 0 meets a_i = 0."""
    o = np.asarray(o, dtype=float)
    a = np.asarray(a, dtype=float)
    if o.shape != a.shape:
        raise ValueError(f"length mismatch: {o.size} vs {a.size}")
    live = o > 0
    if np.any(a[live] <= 0):
        return -math.inf
    return float(np.sum(o[live] * np.log(a[live])))


def relscore(o, a) -> float:
    so = log_score(o, o)
    sa = log_score(o, a)
    if sa == -math.inf:
        return 0.0
    if so == 0.0:
        return 1.0 if sa == 0.0 else 0.0
    return min(1.0, max(0.0, so / sa))


def node_relscores(exact: MarginalSet, approx: MarginalSet, partition,
                   exclude_evidence: bool = True) -> dict[str, float]:
    out = {}
    for name in exact:
        if exclude_evidence and (exact.is_evidence(name) or approx.is_evidence(name)):
            continue
        blocks = partition[name]
        a = spread(approx[name], blocks)
        if a.shape != exact[name].shape:
            raise ValueError(f"shape mismatch for {name!r}")
        out[name] = relscore(exact[name], a)
    return out


def avg_relscore(exact: MarginalSet, approx: MarginalSet, partition,
                 exclude_evidence: bool = True) -> float:
    """Unweighted mean of per-variable relscores."""
    scores = node_relscores(exact, approx, partition, exclude_evidence)
    if not scores:
        raise ValueError("no variables to score")
    return float(np.mean(list(scores.values())))
