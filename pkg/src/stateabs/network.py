"""Discrete Bayesian network containers and structural validation.

A network is an ordered collection of variables, each with an ordered list of
elementary states and a conditional probability table (CPT).  CPT rows are
stored as a 2-D array of shape ``(n_parent_configs, n_states)``; parent
configurations are enumerated with the first listed parent varying slowest,
which is exactly C-order for an array of shape ``(*parent_cards, n_states)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

ROW_TOLERANCE = 1e-6
# deviations at or below this are float round-off and left alone
ROUNDOFF = 1e-12


class NetworkError(ValueError):
    """Raised when a network (or a piece of one) violates its invariants."""

    def __init__(self, violations: str | Sequence[str]):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class EvidenceError(ValueError):
    pass


class ZeroEvidenceError(EvidenceError):
    def __init__(self, msg: str = "zero-probability evidence"):
        super().__init__(msg)


class ResourceGuardError(RuntimeError):
    """A computation would exceed a configured size limit."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Variable:
    name: str
    states: tuple[str, ...]
    bounds: tuple[float, float] | None = None
    # abstract variables may collapse to a single superstate
    coarse: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(str(s) for s in self.states))
        if len(self.states) < (1 if self.coarse else 2):
            raise NetworkError(f"variable {self.name!r}: needs at least 2 states (m >= 2), got {len(self.states)}")
        if len(set(self.states)) != len(self.states):
            raise NetworkError(f"variable {self.name!r}: duplicate state labels")
        if self.bounds is not None:
            lo, hi = (float(x) for x in self.bounds)
            if not lo < hi:
                raise NetworkError(f"variable {self.name!r}: bounds need lo < hi, got [{lo}, {hi}]")
            object.__setattr__(self, "bounds", (lo, hi))

    @property
    def card(self) -> int:
        return len(self.states)

    def index(self, label: str) -> int:
        try:
            return self.states.index(label)
        except ValueError:
            raise EvidenceError(f"variable {self.name!r} has no state {label!r}") from None

    def midpoints(self) -> np.ndarray:
        """Centres of the equal subintervals the states stand for."""
        if self.bounds is None:
            raise ValueError(f"variable {self.name!r} has no bounds")
        lo, hi = self.bounds
        width = (hi - lo) / self.card
        return lo + width * (np.arange(self.card) + 0.5)


@dataclass(frozen=True)
class Cpt:
    parents: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        t = np.array(self.table, dtype=float)
        if t.ndim == 1:
            t = t[None, :]
        if t.ndim != 2:
            raise NetworkError("CPT table must be a sequence of rows")
        object.__setattr__(self, "table", _readonly(t))

    def __eq__(self, other):
        if not isinstance(other, Cpt):
            return NotImplemented
        return (self.parents == other.parents and self.table.shape == other.table.shape
                and bool(np.array_equal(self.table, other.table)))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable DAG of discrete variables.

    Construction only checks that names line up; call :func:`validate_network`
    for the full structural and numerical check.  Accessing :attr:`order`
    raises :class:`NetworkError` on an invalid network.
    """

    name: str
    variables: tuple[Variable, ...]
    cpts: tuple[Cpt, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "cpts", tuple(self.cpts))
        if len(self.variables) != len(self.cpts):
            raise NetworkError("one CPT per variable required")
        names = [v.name for v in self.variables]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise NetworkError([f"duplicate variable name {n!r}" for n in dupes])
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    @classmethod
    def from_dict(cls, name: str, variables: Iterable[Variable], cpts: Mapping[str, Cpt]) -> Network:
        variables = tuple(variables)
        return cls(name, variables, tuple(cpts[v.name] for v in variables))

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (self.name == other.name and self.variables == other.variables
                and self.cpts == other.cpts)

    __hash__ = object.__hash__

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self.variables)

    def position(self, name: str) -> int:
        return self._index[name]

    def var(self, name: str) -> Variable:
        return self.variables[self._index[name]]

    def cpt(self, name: str) -> Cpt:
        return self.cpts[self._index[name]]

    def parents(self, name: str) -> tuple[str, ...]:
        return self.cpt(name).parents

    def card(self, name: str) -> int:
        return self.var(name).card

    def children(self, name: str) -> list[str]:
        return [v.name for v, c in zip(self.variables, self.cpts) if name in c.parents]

    def factor(self, name: str) -> np.ndarray:
        """CPT as an array of shape ``(*parent_cards, card)``."""
        return self._factors[name]

    @cached_property
    def _factors(self) -> dict[str, np.ndarray]:
        out = {}
        for v, c in zip(self.variables, self.cpts):
            shape = tuple(self.card(p) for p in c.parents) + (v.card,)
            out[v.name] = c.table.reshape(shape)
        return out

    def ancestors(self, names: Iterable[str]) -> set[str]:
        """The given variables together with all of their ancestors."""
        seen: set[str] = set()
        stack = list(names)
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            stack.extend(self.parents(n))
        return seen

    def joint_size(self) -> int:
        return int(np.prod([v.card for v in self.variables], dtype=object))

    @cached_property
    def order(self) -> tuple[str, ...]:
        report = validate_network(self)
        if not report.ok:
            raise NetworkError(report.errors)
        return report.order

    def with_tables(self, tables: Mapping[str, np.ndarray]) -> Network:
        cpts = tuple(replace(c, table=tables[v.name]) if v.name in tables else c
                     for v, c in zip(self.variables, self.cpts))
        return Network(self.name, self.variables, cpts)


@dataclass
class ValidationReport:
    ok: bool
    order: tuple[str, ...] = ()
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    network: Network | None = None

    def __str__(self):
        lines = [f"valid: {'yes' if self.ok else 'no'}"]
        if self.ok:
            lines.append("order: " + " ".join(self.order))
        lines += [f"warning: {w}" for w in self.warnings]
        lines += [f"error: {e}" for e in self.errors]
        return "\n".join(lines)


def _topological_order(net: Network) -> tuple[list[str], list[str]]:
    """Kahn's algorithm; ready nodes are taken in declaration order."""
    names = net.names
    indeg = {n: 0 for n in names}
    kids: dict[str, list[str]] = {n: [] for n in names}
    for n in names:
        for p in net.parents(n):
            if p in indeg:
                indeg[n] += 1
                kids[p].append(n)
    order = []
    ready = [n for n in names if indeg[n] == 0]
    while ready:
        n = ready.pop(0)
        order.append(n)
        for k in kids[n]:
            indeg[k] -= 1
            if indeg[k] == 0:
                ready.append(k)
        ready.sort(key=net.position)
    stuck = [n for n in names if n not in set(order)]
    return order, stuck


def validate_network(net: Network) -> ValidationReport:
    """Check parents, acyclicity, CPT dimensions and row sums.

    Rows off by at most ``ROW_TOLERANCE`` are renormalized in the returned
    ``report.network`` and reported as warnings; the input is left untouched.
    """
    errors: list[str] = []
    warnings: list[str] = []
    fixed: dict[str, np.ndarray] = {}

    for v, c in zip(net.variables, net.cpts):
        if len(set(c.parents)) != len(c.parents):
            errors.append(f"variable {v.name!r}: repeated parent")
        unknown = [p for p in c.parents if p not in net]
        for p in unknown:
            errors.append(f"variable {v.name!r}: unknown parent {p!r}")
        if v.name in c.parents:
            errors.append(f"cycle detected: {v.name!r} is its own parent")
        if unknown:
            continue
        rows = int(np.prod([net.card(p) for p in c.parents], dtype=np.int64))
        if c.table.shape != (rows, v.card):
            errors.append(f"variable {v.name!r}: dimension mismatch, CPT is {c.table.shape[0]}x{c.table.shape[1]}, "
                          f"expected {rows}x{v.card}")
            continue
        t = c.table
        if not np.all(np.isfinite(t)) or np.any(t < 0) or np.any(t > 1):
            errors.append(f"variable {v.name!r}: CPT entries must lie in [0, 1]")
            continue
        dev = np.abs(t.sum(axis=1) - 1.0)
        bad = np.flatnonzero(dev > ROW_TOLERANCE)
        if bad.size:
            errors.append(f"variable {v.name!r}: row {int(bad[0])} sums to {t[bad[0]].sum():.12g}, off by > 1e-6")
            continue
        off = np.flatnonzero(dev > ROUNDOFF)
        if off.size:
            fixed[v.name] = t / t.sum(axis=1, keepdims=True)
            warnings.append(f"variable {v.name!r}: renormalized {off.size} row(s) (max deviation {dev.max():.3g})")

    order, stuck = _topological_order(net)
    if stuck and not any("unknown parent" in e for e in errors):
        errors.append("cycle detected among " + ", ".join(repr(n) for n in stuck))

    if errors:
        return ValidationReport(False, errors=errors, warnings=warnings)
    out = net.with_tables(fixed) if fixed else net
    return ValidationReport(True, tuple(order), [], warnings, out)


def checked(net: Network) -> Network:
    """Validated (and, if needed, renormalized) copy of ``net``; raises on errors."""
    report = validate_network(net)
    if not report.ok:
        raise NetworkError(report.errors)
    return report.network


def check_evidence(net: Network, evidence: Mapping[str, int] | None) -> dict[str, int]:
    evidence = dict(evidence or {})
    for name, idx in evidence.items():
        if name not in net:
            raise EvidenceError(f"evidence on unknown variable {name!r}")
        card = net.card(name)
        if not (isinstance(idx, (int, np.integer)) and 0 <= idx < card):
            raise EvidenceError(f"evidence index {idx!r} out of range for variable {name!r} with {card} states")
        evidence[name] = int(idx)
    return evidence


def parse_evidence(net: Network, items: Iterable[str]) -> dict[str, int]:
    """Turn ``VAR=STATE`` strings (state labels) into an index mapping."""
    out: dict[str, int] = {}
    for item in items:
        name, sep, label = item.partition("=")
        if not sep or not name or not label:
            raise EvidenceError(f"bad evidence {item!r}, expected VAR=STATE")
        if name not in net:
            raise EvidenceError(f"evidence on unknown variable {name!r}")
        if name in out:
            raise EvidenceError(f"more than one evidence assignment for {name!r}")
        out[name] = net.var(name).index(label)
    return out


@dataclass(frozen=True)
class MarginalSet:
    """Per-variable probability vectors, plus which variables were observed."""

    probs: dict[str, np.ndarray]
    evidence: frozenset[str] = frozenset()

    def __getitem__(self, name: str) -> np.ndarray:
        return self.probs[name]

    def __iter__(self):
        return iter(self.probs)

    def __len__(self):
        return len(self.probs)

    def is_evidence(self, name: str) -> bool:
        return name in self.evidence

    def max_abs_diff(self, other: MarginalSet) -> float:
        return max(float(np.max(np.abs(self[n] - other[n]))) for n in self.probs)
