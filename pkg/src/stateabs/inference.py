"""Exact marginals: brute-force enumeration (oracle) and variable elimination.

The two routes share nothing beyond the network accessors.  Enumeration builds
the full joint by broadcasting every CPT into one dense array; elimination
works on local factors with a min-degree order and never materialises the
joint.
"""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from .network import (MarginalSet, Network, ResourceGuardError, ZeroEvidenceError,
                      check_evidence)

ENUMERATION_LIMIT = 10**7
FACTOR_LIMIT = 10**8


def enumerate_joint(net: Network, evidence: Mapping[str, int] | None = None,
                    limit: int = ENUMERATION_LIMIT) -> tuple[np.ndarray, float]:
    """Dense joint over every elementary configuration.

    Axes follow ``net.variables``.  Configurations inconsistent with the
    evidence are zeroed, so the table sums to Pr(evidence), which is returned
    alongside it.
    """
    net.order
    evidence = check_evidence(net, evidence)
    size = net.joint_size()
    if size > limit:
        raise ResourceGuardError(f"joint has {size} entries, enumeration limit is {limit}")
    n = len(net)
    shape = tuple(v.card for v in net.variables)
    joint = np.ones(shape)
    for v in net.variables:
        axes = [net.position(p) for p in net.parents(v.name)] + [net.position(v.name)]
        f = net.factor(v.name)
        # move the factor's axes into joint-axis order, then broadcast
        perm = np.argsort(axes)
        f = np.transpose(f, perm)
        bshape = [1] * n
        for ax in axes:
            bshape[ax] = shape[ax]
        joint = joint * f.reshape(bshape)
    for name, idx in evidence.items():
        mask = np.zeros(net.card(name), dtype=bool)
        mask[idx] = True
        bshape = [1] * n
        bshape[net.position(name)] = net.card(name)
        joint = np.where(mask.reshape(bshape), joint, 0.0)
    pe = float(joint.sum())
    if pe <= 0.0:
        raise ZeroEvidenceError()
    return joint, pe


def marginals_by_enumeration(net: Network, evidence: Mapping[str, int] | None = None,
                             limit: int = ENUMERATION_LIMIT) -> MarginalSet:
    evidence = check_evidence(net, evidence)
    joint, pe = enumerate_joint(net, evidence, limit)
    probs = {}
    n = len(net)
    for i, v in enumerate(net.variables):
        if v.name in evidence:
            p = np.zeros(v.card)
            p[evidence[v.name]] = 1.0
        else:
            p = joint.sum(axis=tuple(j for j in range(n) if j != i)) / pe
        probs[v.name] = p
    return MarginalSet(probs, frozenset(evidence))


def elimination_order(scopes: Iterable[Iterable[str]], keep: Iterable[str],
                      rank: Mapping[str, int]) -> list[str]:
    """Greedy min-degree order over the interaction graph of ``scopes``.

    Degrees are recomputed after each elimination (eliminated variables'
    neighbours are connected).  Ties go to the variable with the smaller
    ``rank`` (declaration position).
    """
    adj: dict[str, set[str]] = {}
    for scope in scopes:
        scope = list(scope)
        for a in scope:
            adj.setdefault(a, set()).update(b for b in scope if b != a)
    keep = set(keep)
    todo = {v for v in adj if v not in keep}
    order = []
    while todo:
        v = min(todo, key=lambda x: (len(adj[x]), rank[x]))
        nbrs = adj.pop(v)
        for a in nbrs:
            adj[a].discard(v)
            adj[a].update(b for b in nbrs if b != a)
        todo.remove(v)
        order.append(v)
    return order


def _contract(factors, out_vars, max_size, stats=None):
    """Multiply ``factors`` and sum out everything not in ``out_vars``."""
    scope: list[str] = []
    cards: dict[str, int] = {}
    for vars_, table in factors:
        for v, c in zip(vars_, table.shape):
            if v not in cards:
                scope.append(v)
                cards[v] = c
    size = 1
    for v in scope:
        size *= cards[v]
    if size > max_size:
        raise ResourceGuardError(f"intermediate factor of {size} entries exceeds limit {max_size}")
    if stats is not None:
        stats["contractions"] = stats.get("contractions", 0) + 1
        stats["entries"] = stats.get("entries", 0) + size
        stats["max_factor"] = max(stats.get("max_factor", 0), size)
    keep = [v for v in out_vars if v in cards]
    # product axes: kept variables first (in out_vars order), then summed ones
    axes = keep + [v for v in scope if v not in keep]
    pos = {v: i for i, v in enumerate(axes)}
    prod = None
    for vars_, table in factors:
        if vars_:
            order = sorted(range(len(vars_)), key=lambda i: pos[vars_[i]])
            table = table.transpose(order)
            shape = [1] * len(axes)
            for i in order:
                shape[pos[vars_[i]]] = cards[vars_[i]]
            table = table.reshape(shape)
        prod = table if prod is None else prod * table
    if len(axes) > len(keep):
        prod = prod.sum(axis=tuple(range(len(keep), len(axes))))
    return tuple(keep), np.asarray(prod, dtype=float).reshape([cards[v] for v in keep])


def _query(net: Network, target: str | None, evidence: dict[str, int], max_size: int,
           stats: dict | None = None) -> np.ndarray:
    """Unnormalised Pr(target, evidence); a 0-d array when ``target`` is None."""
    seeds = list(evidence) + ([target] if target is not None else [])
    relevant = net.ancestors(seeds)
    rank = net._index
    factors = []
    for name in sorted(relevant, key=rank.__getitem__):
        vars_ = net.parents(name) + (name,)
        table = net.factor(name)
        if evidence and not evidence.keys().isdisjoint(vars_):
            table = table[tuple(evidence.get(v, slice(None)) for v in vars_)]
            vars_ = tuple(v for v in vars_ if v not in evidence)
        factors.append((vars_, table))
    keep = [target] if target is not None else []
    for v in elimination_order([f[0] for f in factors], keep, rank):
        touching = [f for f in factors if v in f[0]]
        factors = [f for f in factors if v not in f[0]]
        out = {u for f in touching for u in f[0]}
        out.discard(v)
        factors.append(_contract(touching, sorted(out, key=rank.__getitem__), max_size, stats))
    _, result = _contract(factors, keep, max_size, stats) if factors else ((), np.array(1.0))
    return result


def evaluate_exact(net: Network, evidence: Mapping[str, int] | None = None, *,
                   targets: Iterable[str] | None = None,
                   max_factor_size: int = FACTOR_LIMIT,
                   stats: dict | None = None) -> MarginalSet:
    """Exact posterior marginals by variable elimination.

    Each target gets its own elimination over the ancestors of itself and the
    evidence (barren descendants sum to one and are skipped).  ``targets``
    restricts the output; by default every variable is returned.  If ``stats``
    is a dict it accumulates ``contractions``, ``entries`` (summed sizes of
    the intermediate products) and ``max_factor``.
    """
    net.order
    evidence = check_evidence(net, evidence)
    names = net.names if targets is None else list(targets)
    probs: dict[str, np.ndarray] = {}
    checked_pe = False
    for name in names:
        if name in evidence:
            continue
        un = _query(net, name, evidence, max_factor_size, stats)
        z = un.sum()
        if not z > 0.0:
            raise ZeroEvidenceError()
        probs[name] = un / z
        checked_pe = True
    if evidence and not checked_pe and not _query(net, None, evidence, max_factor_size, stats) > 0.0:
        raise ZeroEvidenceError()
    for name in names:
        if name in evidence:
            p = np.zeros(net.card(name))
            p[evidence[name]] = 1.0
            probs[name] = p
    ordered = {n: probs[n] for n in names}
    return MarginalSet(ordered, frozenset(n for n in names if n in evidence))
