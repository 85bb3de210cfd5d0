"""State-space partitions and abstract networks built from them.

A partition groups each variable's ordered elementary states into contiguous
blocks (superstates).  :func:`build_apn` turns an original network plus a
partition into a smaller network over those blocks; how elementary parent
states are weighted inside a parent block is the weighting policy.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, NamedTuple

import numpy as np

from .inference import ENUMERATION_LIMIT, marginals_by_enumeration
from .network import Cpt, MarginalSet, Network, ResourceGuardError, Variable


class PartitionError(ValueError):
    pass


class Superstate(NamedTuple):
    lo: int
    hi: int

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1

    @property
    def elementary(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, k) -> bool:
        return self.lo <= k <= self.hi

    def label(self, states) -> str:
        if self.elementary:
            return states[self.lo]
        return f"[{states[self.lo]}..{states[self.hi]}]"


@dataclass(frozen=True)
class Partition:
    blocks: dict[str, tuple[Superstate, ...]]

    def __post_init__(self):
        blocks = {}
        for name, seq in self.blocks.items():
            seq = tuple(Superstate(int(lo), int(hi)) for lo, hi in seq)
            nxt = 0
            for s in seq:
                if s.lo != nxt or s.hi < s.lo:
                    raise PartitionError(f"variable {name!r}: superstates must be contiguous, ordered and disjoint")
                nxt = s.hi + 1
            if not seq:
                raise PartitionError(f"variable {name!r}: empty partition")
            blocks[name] = seq
        object.__setattr__(self, "blocks", blocks)

    def __getitem__(self, name: str) -> tuple[Superstate, ...]:
        return self.blocks[name]

    def __iter__(self):
        return iter(self.blocks)

    def card(self, name: str) -> int:
        """Number of elementary states covered for ``name``."""
        return self.blocks[name][-1].hi + 1

    def counts(self) -> dict[str, int]:
        return {n: len(s) for n, s in self.blocks.items()}

    def total(self) -> int:
        return sum(len(s) for s in self.blocks.values())

    def is_elementary(self, name: str | None = None) -> bool:
        names = [name] if name is not None else list(self.blocks)
        return all(s.elementary for n in names for s in self.blocks[n])

    def locate(self, name: str, k: int) -> int:
        """Position of the superstate of ``name`` that contains elementary state ``k``."""
        for i, s in enumerate(self.blocks[name]):
            if k in s:
                return i
        raise PartitionError(f"state {k} outside partition of {name!r}")

    def matrix(self, name: str) -> np.ndarray:
        """0/1 membership matrix of shape (n_superstates, n_elementary)."""
        seq = self.blocks[name]
        m = np.zeros((len(seq), seq[-1].hi + 1))
        for i, s in enumerate(seq):
            m[i, s.lo:s.hi + 1] = 1.0
        return m

    def check(self, net: Network) -> None:
        if set(self.blocks) != set(net.names):
            raise PartitionError("partition variables do not match the network")
        for v in net.variables:
            if self.card(v.name) != v.card:
                raise PartitionError(f"partition of {v.name!r} covers {self.card(v.name)} states, variable has {v.card}")


def initial_partition(net: Network) -> Partition:
    return Partition({v.name: (Superstate(0, v.card - 1),) for v in net.variables})


def elementary_partition(net: Network) -> Partition:
    return Partition({v.name: tuple(Superstate(k, k) for k in range(v.card)) for v in net.variables})


def split(partition: Partition, var: str, index: int) -> Partition:
    """Replace superstate ``index`` of ``var`` by its two halves.

    The cut is after elementary state ``(lo + hi - 1) // 2``, so odd-width
    blocks give the smaller half on the left.
    """
    seq = partition[var]
    s = seq[index]
    if s.elementary:
        raise PartitionError(f"cannot split elementary state {s.lo} of {var!r}")
    k = (s.lo + s.hi - 1) // 2
    blocks = dict(partition.blocks)
    blocks[var] = seq[:index] + (Superstate(s.lo, k), Superstate(k + 1, s.hi)) + seq[index + 1:]
    return Partition(blocks)


def cf_weights(net: Network, var: str) -> np.ndarray:
    """Mean of ``var``'s CPT rows over all elementary parent configurations.

    For a root this is just its prior.
    """
    w = net.cpt(var).table.mean(axis=0)
    return w / w.sum()


class Policy(str, Enum):
    AVERAGE = "average"
    CF = "cf"
    EXACT = "exact"


@dataclass(frozen=True)
class WeightingPolicy:
    kind: Policy
    marginals: MarginalSet | None = None

    @classmethod
    def average(cls) -> WeightingPolicy:
        return cls(Policy.AVERAGE)

    @classmethod
    def cf(cls) -> WeightingPolicy:
        return cls(Policy.CF)

    @classmethod
    def exact_marginal(cls, net: Network, limit: int = ENUMERATION_LIMIT) -> WeightingPolicy:
        """Weights from the true prior marginals; needs the joint to be enumerable."""
        if net.joint_size() > limit:
            raise ResourceGuardError(
                f"exact-marginal policy needs enumeration of {net.joint_size()} configurations (limit {limit})")
        return cls(Policy.EXACT, marginals_by_enumeration(net, limit=limit))

    @classmethod
    def named(cls, name: str, net: Network | None = None) -> WeightingPolicy:
        kind = Policy(name)
        if kind is Policy.EXACT:
            if net is None:
                raise ValueError("exact policy needs the network")
            return cls.exact_marginal(net)
        return cls(kind)

    def weights(self, net: Network, var: str) -> np.ndarray:
        if self.kind is Policy.AVERAGE:
            return np.ones(net.card(var))
        if self.kind is Policy.CF:
            return cf_weights(net, var)
        return np.asarray(self.marginals[var], dtype=float)


def block_weights(partition: Partition, var: str, w: np.ndarray) -> np.ndarray:
    """Matrix mapping elementary states of ``var`` to superstates, rows normalised.

    Row ``t`` holds the weights of the elementary states in superstate ``t``,
    renormalised within it; an all-zero block falls back to uniform.
    """
    mat = partition.matrix(var) * w[None, :]
    sums = mat.sum(axis=1)
    for t in np.flatnonzero(sums <= 0.0):
        s = partition[var][t]
        mat[t, s.lo:s.hi + 1] = 1.0
        sums[t] = s.width
    return mat / sums[:, None]


@dataclass(frozen=True, eq=False)
class AbstractNetwork:
    network: Network
    source: Network
    partition: Partition
    policy: WeightingPolicy


def build_apn(net: Network, partition: Partition, policy: WeightingPolicy | None = None) -> AbstractNetwork:
    """Network over the superstates of ``partition``.

    Each child row is the child-block mass of the original CPT, averaged over
    the elementary parent states inside each parent block with per-parent
    policy weights (so joint parent weights factorise).  Roots keep their
    exact block masses.
    """
    policy = policy or WeightingPolicy.average()
    net.order
    partition.check(net)
    mats = {}
    for v in net.variables:
        w = np.ones(v.card) if not net.children(v.name) else policy.weights(net, v.name)
        mats[v.name] = block_weights(partition, v.name, w)
    variables, cpts = [], []
    for v in net.variables:
        seq = partition[v.name]
        variables.append(Variable(v.name, tuple(s.label(v.states) for s in seq), v.bounds, coarse=True))
        t = net.factor(v.name)
        # child axis: sum elementary states into blocks
        t = t @ partition.matrix(v.name).T
        for axis, p in enumerate(net.parents(v.name)):
            t = np.moveaxis(np.tensordot(mats[p], t, axes=([1], [axis])), 0, axis)
        # block sums can overshoot 1 by round-off
        cpts.append(Cpt(net.parents(v.name), np.minimum(t.reshape(-1, len(seq)), 1.0)))
    apn = Network(f"{net.name}", variables, cpts)
    return AbstractNetwork(apn, net, partition, policy)


def map_evidence(evidence: Mapping[str, int], partition: Partition) -> dict[str, int]:
    return {name: partition.locate(name, k) for name, k in evidence.items()}


class Strategy(str, Enum):
    PER_NODE = "per-node"
    SINGLE = "single"
    SKEW = "skew"


def skew_factor(net: Network, var: str, s: Superstate) -> float:
    """1 - H/H_max of the CPT mass inside ``s``, entropy averaged over parent rows."""
    rows = net.cpt(var).table[:, s.lo:s.hi + 1]
    mass = rows.sum(axis=1, keepdims=True)
    p = np.where(mass > 0, rows / np.where(mass > 0, mass, 1.0), 1.0 / s.width)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(p > 0, p * np.log(p), 0.0).sum(axis=1)
    return float(1.0 - h.mean() / np.log(s.width))


def select_splits(apn_marginals: MarginalSet, partition: Partition,
                  strategy: Strategy | str = Strategy.PER_NODE,
                  net: Network | None = None) -> list[tuple[str, int]]:
    """Superstates to split next, as (variable, position) pairs.

    ``per-node`` picks the most probable non-elementary superstate of every
    variable, ``single`` the best one overall, ``skew`` ranks by probability
    times the skew of the original CPT mass inside the block (needs ``net``).
    Ties go to the smaller ``lo``, then to the earlier variable.
    """
    strategy = Strategy(strategy)
    if strategy is Strategy.SKEW and net is None:
        raise ValueError("skew strategy needs the original network")
    best: list[tuple[float, str, int]] = []
    names = [n for n in net.names if n in partition.blocks] if net is not None else list(partition)
    for name in names:
        seq = partition[name]
        probs = apn_marginals[name]
        if len(probs) != len(seq):
            raise PartitionError(f"marginal of {name!r} has {len(probs)} entries, partition has {len(seq)}")
        top = None
        for i, s in enumerate(seq):
            if s.elementary:
                continue
            score = float(probs[i])
            if strategy is Strategy.SKEW:
                score *= skew_factor(net, name, s)
            if top is None or score > top[0]:
                top = (score, name, i)
        if top is not None:
            best.append(top)
    if strategy is Strategy.SINGLE and best:
        top = best[0]
        for cand in best[1:]:
            if cand[0] > top[0]:
                top = cand
        best = [top]
    return [(name, i) for _, name, i in best]

