"""Coarse-to-fine anytime evaluation.

Start from one superstate per variable, evaluate, split the most probable
superstates, rebuild the abstract network from the original and evaluate
again, until every state is elementary or a limit is hit.  The returned
trace's last record is always the latest completed evaluation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .abstraction import (Partition, Strategy, WeightingPolicy, build_apn, initial_partition,
                          map_evidence, select_splits, split)
from .inference import FACTOR_LIMIT, evaluate_exact
from .network import MarginalSet, Network, ResourceGuardError, check_evidence
from .scoring import node_relscores

BUDGET = "budget"
ITERATION_CAP = "iteration-cap"
FULLY_REFINED = "fully-refined"
INTERRUPTED = "interrupted"


@dataclass
class AnytimeConfig:
    policy: WeightingPolicy = field(default_factory=WeightingPolicy.average)
    strategy: Strategy = Strategy.PER_NODE
    max_iterations: int | None = None
    budget: float | None = None  # seconds
    score_against: MarginalSet | None = None
    exclude_evidence: bool = True
    max_factor_size: int = FACTOR_LIMIT
    # when set, elapsed time reads as the iteration count (in ms) and eval time as 0
    fixed_clock: bool = False

    def __post_init__(self):
        self.strategy = Strategy(self.strategy)
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")
        if self.budget is not None and self.budget < 0:
            raise ValueError("budget must be >= 0")

    def echo(self) -> dict:
        return {
            "policy": self.policy.kind.value,
            "strategy": self.strategy.value,
            "max_iterations": self.max_iterations,
            "budget_s": self.budget,
            "scored": self.score_against is not None,
            "exclude_evidence": self.exclude_evidence,
            "fixed_clock": self.fixed_clock,
        }


@dataclass
class IterationRecord:
    iteration: int
    partition: Partition
    marginals: MarginalSet
    elapsed: float  # seconds since the run started, APN construction included
    eval_time: float
    relscores: dict[str, float] | None = None
    avg_relscore: float | None = None

    @property
    def states(self) -> dict[str, int]:
        return self.partition.counts()

    @property
    def total_superstates(self) -> int:
        return self.partition.total()


@dataclass
class AnytimeTrace:
    """Iteration records, 0-based: record 0 is the one-superstate network.

    Under a 1-based reading, record ``k`` is iteration ``k+1`` and per-node
    refinement gives it ``k+1`` states per variable.
    """

    records: list[IterationRecord]
    reason: str
    config: dict
    seeds: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def final(self) -> IterationRecord:
        return self.records[-1]

    def __len__(self):
        return len(self.records)


def abstract_iter(net: Network, evidence: Mapping[str, int] | None = None,
                  config: AnytimeConfig | None = None,
                  sink: Callable[[IterationRecord], object] | None = None,
                  seeds: Mapping | None = None) -> AnytimeTrace:
    """Run the refinement loop.

    ``sink`` is called with every record in order; returning ``False`` from
    it stops the run (reason ``interrupted``).  The budget is checked only
    between iterations, so a run can overshoot it by one evaluation.
    Resource-guard failures after iteration 0 end the run with the last good
    record and the error message on the trace.
    """
    config = config or AnytimeConfig()
    net.order
    evidence = check_evidence(net, evidence)
    if config.fixed_clock:
        start = 0.0
        clock = None
    else:
        clock = time.perf_counter
        start = clock()

    records: list[IterationRecord] = []
    partition = initial_partition(net)
    k = 0
    reason = None
    error = None
    while True:
        try:
            apn = build_apn(net, partition, config.policy)
            t0 = clock() if clock else 0.0
            marg = evaluate_exact(apn.network, map_evidence(evidence, partition),
                                  max_factor_size=config.max_factor_size)
            t1 = clock() if clock else 0.0
        except ResourceGuardError as exc:
            if not records:
                raise
            reason, error = INTERRUPTED, str(exc)
            break
        rec = IterationRecord(
            iteration=k,
            partition=partition,
            marginals=marg,
            elapsed=(t1 - start) if clock else k / 1000.0,
            eval_time=(t1 - t0) if clock else 0.0,
        )
        if config.score_against is not None:
            rec.relscores = node_relscores(config.score_against, marg, partition, config.exclude_evidence)
            if rec.relscores:
                rec.avg_relscore = sum(rec.relscores.values()) / len(rec.relscores)
        records.append(rec)
        stop = sink(rec) if sink is not None else None

        if partition.is_elementary():
            reason = FULLY_REFINED
        elif stop is False:
            reason = INTERRUPTED
        elif config.max_iterations is not None and k >= config.max_iterations:
            reason = ITERATION_CAP
        elif config.budget is not None and (
                (clock() - start) if clock else k / 1000.0) >= config.budget:
            reason = BUDGET
        if reason:
            break

        # at most one split per variable, so positions stay valid
        for var, pos in select_splits(marg, partition, config.strategy, net):
            partition = split(partition, var, pos)
        k += 1

    return AnytimeTrace(records, reason, config.echo(), dict(seeds or {}), error)

