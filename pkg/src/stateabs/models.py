"""Seeded generators for the three experimental model families.

* ``gen_chain``: a -> b -> c with binary a, c and an n-state b.
* ``gen_commuter``: the 12-node commuting model (leave home, go to work, ...).
* ``gen_traffic``: a multistage q = u*k traffic model.

Every generator takes a ``seed`` accepted by ``numpy.random.default_rng``
(int, SeedSequence or Generator).  Structure never depends on the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .network import Cpt, Network, Variable, checked


@dataclass(frozen=True)
class ParamStyle:
    kind: str = "uniform"  # uniform | skewed | deterministic
    gamma: float = 5.0
    p: float = 0.5

    def __post_init__(self):
        if self.kind not in ("uniform", "skewed", "deterministic"):
            raise ValueError(f"unknown parameter style {self.kind!r}")
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")

    @classmethod
    def uniform(cls):
        return cls("uniform")

    @classmethod
    def skewed(cls, gamma: float = 5.0):
        return cls("skewed", gamma)

    @classmethod
    def deterministic(cls, p: float = 0.5, gamma: float = 5.0):
        return cls("deterministic", gamma, p)

    @classmethod
    def named(cls, name: str):
        return {"uniform": cls.uniform, "skewed": cls.skewed, "deterministic": cls.deterministic}[name]()


def sample_cpt_row(style: ParamStyle, m: int, rng: np.random.Generator) -> np.ndarray:
    if m < 2:
        raise ValueError("row length must be >= 2")
    if style.kind == "deterministic" and style.p > 0 and rng.random() < style.p:
        row = np.zeros(m)
        row[rng.integers(m)] = 1.0
        return row
    u = rng.random(m)
    if style.kind != "uniform":
        u = u ** style.gamma
    s = u.sum()
    if s <= 0.0:  # every draw underflowed; practically unreachable
        return np.full(m, 1.0 / m)
    return u / s


def discretized_row(mean: float, sd: float, bins: Sequence[float]) -> np.ndarray:
    """Gaussian bump around ``mean`` evaluated at bin midpoints, normalised.

    ``sd == 0`` (or a bump too narrow to register at any midpoint) gives a
    point mass on the nearest midpoint, ties to the lower bin.
    """
    x = np.asarray(bins, dtype=float)
    d2 = (x - mean) ** 2
    if sd > 0:
        z = (d2 - d2.min()) / (2.0 * sd * sd)
        w = np.exp(-z)
        return w / w.sum()
    row = np.zeros(x.size)
    row[int(np.argmin(d2))] = 1.0
    return row


def bin_of(value: float, lo: float, hi: float, m: int) -> int:
    """Index of the equal-width bin of [lo, hi] holding ``value``, clamped."""
    k = math.floor((value - lo) / (hi - lo) * m)
    return min(max(k, 0), m - 1)


def _labels(m: int) -> tuple[str, ...]:
    return tuple(f"s{i}" for i in range(m))


def _sum_table(child: Variable, parents: Sequence[Variable], offset=None) -> np.ndarray:
    """Point-mass rows: child bin containing the sum of parent midpoints."""
    grids = np.meshgrid(*[p.midpoints() for p in parents], indexing="ij")
    total = sum(grids) if offset is None else offset(*grids)
    lo, hi = child.bounds
    flat = np.ravel(total)
    table = np.zeros((flat.size, child.card))
    for r, v in enumerate(flat):
        table[r, bin_of(float(v), lo, hi, child.card)] = 1.0
    return table


def _random_table(rows: int, m: int, style: ParamStyle, rng) -> np.ndarray:
    return np.array([sample_cpt_row(style, m, rng) for _ in range(rows)])


def gen_chain(n_states_b: int, seed=None, root_prior: Sequence[float] = (0.5, 0.5)) -> Network:
    if n_states_b < 2:
        raise ValueError("b needs at least 2 states")
    prior = np.asarray(root_prior, dtype=float)
    if prior.shape != (2,):
        raise ValueError("root prior must have 2 entries")
    rng = np.random.default_rng(seed)
    style = ParamStyle.uniform()
    a = Variable("a", ("a0", "a1"))
    b = Variable("b", _labels(n_states_b))
    c = Variable("c", ("c0", "c1"))
    cpts = [
        Cpt((), prior[None, :]),
        Cpt(("a",), _random_table(2, n_states_b, style, rng)),
        Cpt(("b",), _random_table(n_states_b, 2, style, rng)),
    ]
    return checked(Network("chain", [a, b, c], cpts))


COMMUTER_BOUNDS = {
    "LH": (6.0, 8.0),
    "GW": (0.25, 1.25),
    "WL": (7.0, 8.0),
    "GH": (0.25, 1.5),
    "V1": (0.0, 1.0),
    "V2": (0.0, 1.0),
    "V3": (0.0, 1.0),
    "V4": (0.0, 1.0),
    "VAL": (0.0, 1.0),
}

# (name, parents, deterministic sum?)
COMMUTER_ARCS = [
    ("LH", (), False),
    ("GW", ("LH",), False),
    ("AW", ("LH", "GW"), True),
    ("WL", ("AW",), False),
    ("FW", ("AW", "WL"), True),
    ("GH", ("FW",), False),
    ("AH", ("FW", "GH"), True),
    ("V1", ("LH",), False),
    ("V2", ("AW",), False),
    ("V3", ("FW",), False),
    ("V4", ("AH",), False),
    ("VAL", ("V1", "V2", "V3", "V4"), False),
]


def gen_commuter(n_states: int, style: ParamStyle | None = None, seed=None,
                 bounds: Mapping[str, tuple[float, float]] | None = None) -> Network:
    """Commuter network; AW, FW and AH are sums of their parents.

    Sum nodes get the sum of their parents' bounds and deterministic rows.
    ``bounds`` overrides the defaults for any non-sum variable.
    """
    if n_states < 2:
        raise ValueError("need at least 2 states per node")
    style = style or ParamStyle.uniform()
    rng = np.random.default_rng(seed)
    b = dict(COMMUTER_BOUNDS)
    b.update(bounds or {})
    labels = _labels(n_states)
    variables: dict[str, Variable] = {}
    cpts = []
    for name, parents, is_sum in COMMUTER_ARCS:
        pv = [variables[p] for p in parents]
        if is_sum:
            lo = sum(p.bounds[0] for p in pv)
            hi = sum(p.bounds[1] for p in pv)
            var = Variable(name, labels, (lo, hi))
            table = _sum_table(var, pv)
        else:
            var = Variable(name, labels, b[name])
            rows = n_states ** len(parents)
            table = _random_table(rows, n_states, style, rng)
        variables[name] = var
        cpts.append(Cpt(parents, table))
    return checked(Network("commuter", list(variables.values()), cpts))


@dataclass(frozen=True)
class TrafficConfig:
    """Multistage traffic model settings.

    ``sd`` is the dispersion of the discretised conditionals as a fraction
    of the child variable's range.  Speed is distance per time unit; each
    stage covers ``distance``.
    """

    stages: int = 5
    states_per_node: int = 24
    sd: float = 0.1
    seed: int | None = 0
    distance: float = 1.0
    t_bounds: tuple[float, float] = (0.0, 2.0)
    k_bounds: tuple[float, float] = (1.0, 2.0)
    q_bounds: tuple[float, float] = (1.0, 3.0)
    u_bounds: tuple[float, float] = (0.5, 2.5)
    period: float = 4.0
    amplitude: float = 0.4

    def __post_init__(self):
        if self.stages < 1:
            raise ValueError("stages must be >= 1")
        if self.states_per_node < 2:
            raise ValueError("states_per_node must be >= 2")
        if self.sd < 0:
            raise ValueError("sd must be nonnegative")


def _wave(t: np.ndarray, lo: float, hi: float, amplitude: float, period: float, phase: float) -> np.ndarray:
    """Time-varying mean inside [lo, hi]."""
    return lo + (hi - lo) * (0.5 + amplitude * np.sin(2 * np.pi * t / period + phase))


def gen_traffic(config: TrafficConfig) -> Network:
    """Arrival times T1..T(n+1); per stage concentration K, flow Q, speed U.

    K_s and Q_s depend on T_s through seeded sinusoidal means; U_s centres on
    q/k (clamped into U's range); T_(s+1) is the bin of t + distance/u.
    """
    c = config
    m = c.states_per_node
    rng = np.random.default_rng(c.seed)
    labels = _labels(m)
    t_var = Variable("T1", labels, c.t_bounds)
    variables = [t_var]
    cpts = [Cpt((), sample_cpt_row(ParamStyle.uniform(), m, rng)[None, :])]
    ulo, uhi = c.u_bounds
    for s in range(1, c.stages + 1):
        k_phase, q_phase = rng.uniform(0, 2 * np.pi, size=2)
        k_var = Variable(f"K{s}", labels, c.k_bounds)
        q_var = Variable(f"Q{s}", labels, c.q_bounds)
        u_var = Variable(f"U{s}", labels, c.u_bounds)
        t_mid = t_var.midpoints()
        rows = []
        for var, phase in ((k_var, k_phase), (q_var, q_phase)):
            lo, hi = var.bounds
            means = _wave(t_mid, lo, hi, c.amplitude, c.period, phase)
            table = np.array([discretized_row(mu, c.sd * (hi - lo), var.midpoints()) for mu in means])
            rows.append(table)
        u_rows = []
        for kmid in k_var.midpoints():
            for qmid in q_var.midpoints():
                mu = min(max(qmid / kmid, ulo), uhi)
                u_rows.append(discretized_row(mu, c.sd * (uhi - ulo), u_var.midpoints()))
        nxt_lo = t_var.bounds[0] + c.distance / uhi
        nxt_hi = t_var.bounds[1] + c.distance / ulo
        nxt = Variable(f"T{s + 1}", labels, (nxt_lo, nxt_hi))
        t_table = _sum_table(nxt, [t_var, u_var], offset=lambda t, u: t + c.distance / u)
        variables += [k_var, q_var, u_var, nxt]
        cpts += [
            Cpt((t_var.name,), rows[0]),
            Cpt((t_var.name,), rows[1]),
            Cpt((k_var.name, q_var.name), np.array(u_rows)),
            Cpt((t_var.name, u_var.name), t_table),
        ]
        t_var = nxt
    return checked(Network(f"traffic{c.stages}x{m}", variables, cpts))
