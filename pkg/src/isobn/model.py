"""Binary Bayesian networks: structure, parameters and exact joints."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from isobn.errors import NetworkError

Configuration = tuple[int, ...]

DEFAULT_JOINT_CAP = 24


def config_index(bits: Sequence[int]) -> int:
    """Position of a configuration in ascending bit-vector order (first parent most significant)."""
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    return idx


def config_from_index(idx: int, k: int) -> Configuration:
    return tuple((idx >> (k - 1 - i)) & 1 for i in range(k))


def format_config(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


@dataclass(frozen=True)
class Variable:
    name: str
    index: int


@dataclass(frozen=True, eq=True)
class Network:
    """A DAG over binary variables with optional CPTs.

    ``cpt[v]`` is either None or a tuple of ``p(v=1 | x)`` indexed by
    ``config_index(x)`` over the declared parent order of ``v``.
    """

    names: tuple[str, ...]
    parents: tuple[tuple[int, ...], ...]
    cpt: tuple[tuple[float, ...] | None, ...]

    @property
    def variables(self) -> tuple[Variable, ...]:
        return tuple(Variable(n, i) for i, n in enumerate(self.names))

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str | int) -> int:
        if isinstance(name, int):
            if not 0 <= name < len(self.names):
                raise NetworkError(f"variable index {name} out of range")
            return name
        try:
            return self._index_map[name]
        except KeyError:
            raise NetworkError(f"unknown variable {name!r}") from None

    @cached_property
    def _index_map(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.names)}

    def parent_names(self, v: str | int) -> tuple[str, ...]:
        return tuple(self.names[p] for p in self.parents[self.index(v)])

    def n_parents(self, v: str | int) -> int:
        return len(self.parents[self.index(v)])

    @cached_property
    def topological_order(self) -> tuple[int, ...]:
        order: list[int] = []
        state = [0] * len(self.names)

        def visit(v: int) -> None:
            state[v] = 1
            for p in self.parents[v]:
                if state[p] == 0:
                    visit(p)
            state[v] = 2
            order.append(v)

        for v in range(len(self.names)):
            if state[v] == 0:
                visit(v)
        return tuple(order)

    @property
    def is_complete(self) -> bool:
        return all(t is not None for t in self.cpt)

    def prob(self, v: str | int, config: Sequence[int]) -> float:
        i = self.index(v)
        table = self.cpt[i]
        if table is None:
            raise NetworkError(f"variable {self.names[i]!r} has no CPT")
        return table[config_index(config)]

    def with_cpts(self, cpt: Mapping[str, Sequence[float]] | Sequence[Sequence[float]]) -> Network:
        """Return a copy of this structure with the given parameter tables."""
        if isinstance(cpt, Mapping):
            tables = [cpt.get(n, self.cpt[i]) for i, n in enumerate(self.names)]
        else:
            tables = list(cpt)
        rows = {}
        for i, t in enumerate(tables):
            if t is not None:
                rows[self.names[i]] = {config_from_index(j, len(self.parents[i])): p for j, p in enumerate(t)}
        return validate_network(
            self.names, {n: self.parent_names(n) for n in self.names}, rows
        )

    def without_cpts(self) -> Network:
        return Network(self.names, self.parents, tuple(None for _ in self.names))


def _find_cycle(names: Sequence[str], parents: Sequence[Sequence[int]]) -> list[str] | None:
    state = [0] * len(names)
    stack: list[int] = []

    def visit(v: int) -> list[int] | None:
        state[v] = 1
        stack.append(v)
        for p in parents[v]:
            if state[p] == 1:
                return stack[stack.index(p):]
            if state[p] == 0:
                found = visit(p)
                if found:
                    return found
        stack.pop()
        state[v] = 2
        return None

    for v in range(len(names)):
        if state[v] == 0:
            cyc = visit(v)
            if cyc:
                # stack follows child -> parent links; report in arc direction
                return [names[i] for i in reversed(cyc)]
    return None


def validate_network(
    variables: Sequence[str],
    parents: Mapping[str, Sequence[str]] | None = None,
    cpt: Mapping[str, Mapping[Sequence[int], float]] | None = None,
) -> Network:
    """Build a :class:`Network` from names, parent lists and optional CPT rows.

    ``parents`` maps child name to its ordered parent names; the order fixes
    the bit positions of that child's configurations. ``cpt`` maps a child
    name to ``{configuration: p(child=1 | configuration)}``; a variable
    either has all ``2**k`` rows or none.
    """
    names = tuple(variables)
    seen: set[str] = set()
    for n in names:
        if not n or not isinstance(n, str):
            raise NetworkError(f"invalid variable name {n!r}")
        if n in seen:
            raise NetworkError(f"duplicate variable name {n!r}")
        seen.add(n)
    index = {n: i for i, n in enumerate(names)}
    parents = parents or {}
    for child in parents:
        if child not in index:
            raise NetworkError(f"unknown variable {child!r} in parent list")

    plist: list[tuple[int, ...]] = []
    for n in names:
        ps = list(parents.get(n, ()))
        for p in ps:
            if p not in index:
                raise NetworkError(f"unknown parent {p!r} of {n!r}")
        if len(set(ps)) != len(ps):
            raise NetworkError(f"duplicate parent in parent list of {n!r}")
        plist.append(tuple(index[p] for p in ps))

    cycle = _find_cycle(names, plist)
    if cycle:
        raise NetworkError("cycle detected: " + " -> ".join(cycle + [cycle[0]]))

    cpt = cpt or {}
    for child in cpt:
        if child not in index:
            raise NetworkError(f"CPT given for unknown variable {child!r}")
    tables: list[tuple[float, ...] | None] = []
    for i, n in enumerate(names):
        rows = cpt.get(n)
        if rows is None:
            tables.append(None)
            continue
        k = len(plist[i])
        values: list[float | None] = [None] * (1 << k)
        for bits, p in rows.items():
            bits = tuple(int(b) for b in bits)
            if len(bits) != k or any(b not in (0, 1) for b in bits):
                raise NetworkError(f"CPT row for {n!r} has configuration {bits} of wrong width (expected {k})")
            p = float(p)
            if not (0.0 <= p <= 1.0) or math.isnan(p):
                raise NetworkError(f"CPT probability {p} for {n!r} at {format_config(bits) or '-'} is outside [0, 1]")
            values[config_index(bits)] = p
        missing = [config_from_index(j, k) for j, p in enumerate(values) if p is None]
        if missing:
            raise NetworkError(
                f"CPT for {n!r} is missing row(s) "
                + ", ".join(format_config(m) or "-" for m in missing)
            )
        tables.append(tuple(values))  # type: ignore[arg-type]
    return Network(names, tuple(plist), tuple(tables))


def parent_configurations(net: Network, v: str | int) -> list[Configuration]:
    """All ``2**k`` parent configurations of ``v`` in ascending bit-vector order."""
    k = net.n_parents(v)
    return list(itertools.product((0, 1), repeat=k))


def joint_distribution(net: Network, cap: int = DEFAULT_JOINT_CAP) -> np.ndarray:
    """Dense joint over all ``2**V`` assignments.

    Assignment index ``a`` has variable ``j`` at bit ``V-1-j`` (the first
    variable is most significant), matching :func:`config_index`.
    """
    V = len(net)
    if V > cap:
        raise NetworkError(f"network has {V} variables; exact joint is capped at {cap}")
    for i, t in enumerate(net.cpt):
        if t is None:
            raise NetworkError(f"variable {net.names[i]!r} has no CPT")
    a = np.arange(1 << V, dtype=np.int64)
    joint = np.ones(1 << V, dtype=np.float64)
    for v in range(V):
        bit_v = (a >> (V - 1 - v)) & 1
        idx = np.zeros_like(a)
        for p in net.parents[v]:
            idx = (idx << 1) | ((a >> (V - 1 - p)) & 1)
        p1 = np.asarray(net.cpt[v], dtype=np.float64)[idx]
        joint *= np.where(bit_v == 1, p1, 1.0 - p1)
    return joint
