"""Average-vs-CF policy comparison on random a -> b -> c chains."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .abstraction import (Partition, Superstate, WeightingPolicy, build_apn, select_splits,
                          split)
from .inference import evaluate_exact, marginals_by_enumeration
from .models import gen_chain
from .network import Network

BENCH_COLUMNS = ["trial", "granularity", "policy", "rel_error"]


def trial_seeds(seed: int, trials: int) -> list[np.random.SeedSequence]:
    """One independent seed per trial, derived from ``seed`` by trial index."""
    return np.random.SeedSequence(seed).spawn(trials)


def refine_chain(net: Network, policy: WeightingPolicy) -> list[tuple[int, float]]:
    """Relative error of Pr(c = c0) while b goes from one superstate to elementary.

    a and c stay elementary; b's most probable superstate is split each step.
    """
    exact = marginals_by_enumeration(net)["c"][0]
    n = net.card("b")
    partition = Partition({"a": ((0, 0), (1, 1)), "b": (Superstate(0, n - 1),), "c": ((0, 0), (1, 1))})
    out = []
    while True:
        apn = build_apn(net, partition, policy)
        marg = evaluate_exact(apn.network)
        out.append((len(partition["b"]), float(abs(marg["c"][0] - exact) / exact)))
        if partition.is_elementary("b"):
            return out
        for var, pos in select_splits(marg, partition, net=net):
            partition = split(partition, var, pos)


def bench_policies(trials: int, n_states: int, root_prior: Sequence[float], seed: int,
                   policies=("average", "cf")) -> list[tuple[int, int, str, float]]:
    rows = []
    for t, ss in enumerate(trial_seeds(seed, trials)):
        net = gen_chain(n_states, ss, root_prior)
        for name in policies:
            for gran, err in refine_chain(net, WeightingPolicy.named(name, net)):
                rows.append((t, gran, name, err))
    return rows


def mean_errors(rows) -> dict[str, dict[int, float]]:
    """Mean rel_error per policy per granularity."""
    acc: dict[str, dict[int, list[float]]] = {}
    for _, gran, pol, err in rows:
        acc.setdefault(pol, {}).setdefault(gran, []).append(err)
    return {p: {g: float(np.mean(v)) for g, v in sorted(d.items())} for p, d in acc.items()}
