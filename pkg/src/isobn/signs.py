"""Qualitative influences and the order they induce on parent configurations.

Configurations are identified by their integer index (first parent most
significant, see :func:`isobn.model.config_index`). A pair ``(a, b)`` always
means ``p(y=1 | a) <= p(y=1 | b)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

from isobn.errors import SignError
from isobn.model import config_from_index, format_config


class Sign(enum.Enum):
    PLUS = "+"
    MINUS = "-"
    ZERO = "0"
    UNSIGNED = "?"

    @classmethod
    def parse(cls, text: str) -> Sign:
        text = text.strip()
        if text in ("−", "–"):
            text = "-"
        try:
            return cls(text)
        except ValueError:
            raise SignError(f"unknown sign {text!r}; expected one of + - 0 ?") from None


@dataclass(frozen=True)
class SignedInfluence:
    """``X_parent --sign--> child`` holding whenever the context matches.

    ``parent`` and the context keys are positions in the child's declared
    parent list; ``child`` is the network index of the child (informational).
    """

    parent: int
    sign: Sign
    context: tuple[tuple[int, int], ...] = ()
    child: int | None = None

    def __post_init__(self):
        if not isinstance(self.sign, Sign):
            object.__setattr__(self, "sign", Sign.parse(str(self.sign)))
        ctx = self.context
        if isinstance(ctx, Mapping):
            ctx = ctx.items()
        object.__setattr__(self, "context", tuple(sorted((int(i), int(b)) for i, b in ctx)))

    @property
    def is_signed(self) -> bool:
        return self.sign is not Sign.UNSIGNED


def validate_influences(influences: Iterable[SignedInfluence], k: int) -> None:
    seen: dict[tuple[int, tuple], Sign] = {}
    for inf in influences:
        if not 0 <= inf.parent < k:
            raise SignError(f"influence parent position {inf.parent} out of range for {k} parents")
        ctx_vars = [i for i, _ in inf.context]
        if len(set(ctx_vars)) != len(ctx_vars):
            raise SignError("context assigns the same parent twice")
        for i, b in inf.context:
            if not 0 <= i < k:
                raise SignError(f"context parent position {i} out of range for {k} parents")
            if i == inf.parent:
                raise SignError("context must not include the influencing parent itself")
            if b not in (0, 1):
                raise SignError(f"context value {b} is not binary")
        key = (inf.parent, inf.context)
        if key in seen and seen[key] is not inf.sign:
            raise SignError(
                f"conflicting signs {seen[key].value} and {inf.sign.value} on the same arc and context"
            )
        seen[key] = inf.sign


def immediate_order_pairs(influences: Sequence[SignedInfluence], k: int) -> list[tuple[int, int]]:
    """Generating pairs of the configuration order; no closure is taken."""
    validate_influences(influences, k)
    pairs: list[tuple[int, int]] = []
    for inf in influences:
        if inf.sign is Sign.UNSIGNED:
            continue
        bit = 1 << (k - 1 - inf.parent)
        for hi in range(1 << k):
            if not hi & bit:
                continue
            if any(((hi >> (k - 1 - i)) & 1) != b for i, b in inf.context):
                continue
            lo = hi & ~bit
            if inf.sign is Sign.PLUS:
                pairs.append((lo, hi))
            elif inf.sign is Sign.MINUS:
                pairs.append((hi, lo))
            else:
                pairs.append((hi, lo))
                pairs.append((lo, hi))
    return pairs


@dataclass(frozen=True)
class ConfigOrder:
    """Condensed configuration order of one variable.

    ``classes[c]`` lists the configuration indices merged by zero signs;
    ``edges`` are the condensation DAG edges between classes; ``components``
    partitions the classes into weakly connected pieces.
    """

    k: int
    classes: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[int, int], ...]
    components: tuple[tuple[int, ...], ...]
    pairs: tuple[tuple[int, int], ...] = field(default=(), compare=False)

    @cached_property
    def class_of(self) -> np.ndarray:
        out = np.empty(1 << self.k, dtype=np.int64)
        for c, members in enumerate(self.classes):
            out[list(members)] = c
        return out

    @cached_property
    def component_of(self) -> np.ndarray:
        out = np.empty(len(self.classes), dtype=np.int64)
        for ci, comp in enumerate(self.components):
            out[list(comp)] = ci
        return out

    def component_edges(self, ci: int) -> list[tuple[int, int]]:
        """Edges of component ``ci`` in local node numbering (position in the component)."""
        local = {c: j for j, c in enumerate(self.components[ci])}
        return [(local[a], local[b]) for a, b in self.edges if a in local]

    def chain_order(self, ci: int) -> list[int] | None:
        """Local node sequence if component ``ci`` is totally ordered, else None."""
        n = len(self.components[ci])
        edges = self.component_edges(ci)
        g = nx.DiGraph()
        g.add_nodes_from(range(n))
        g.add_edges_from(edges)
        topo = list(nx.topological_sort(g))
        if all(g.has_edge(topo[j], topo[j + 1]) for j in range(n - 1)):
            return topo
        return None

    def describe_class(self, c: int) -> str:
        if self.k == 0:
            return "{-}"
        return "{" + ",".join(format_config(config_from_index(m, self.k)) for m in self.classes[c]) + "}"


def condense(pairs: Iterable[tuple[int, int]], k: int) -> ConfigOrder:
    """Merge cycles of the pair relation into classes and split into components."""
    pairs = tuple(pairs)
    g = nx.DiGraph()
    g.add_nodes_from(range(1 << k))
    g.add_edges_from(pairs)
    sccs = [tuple(sorted(s)) for s in nx.strongly_connected_components(g)]
    sccs.sort(key=lambda s: s[0])
    class_of = {}
    for c, members in enumerate(sccs):
        for m in members:
            class_of[m] = c
    edges = sorted({(class_of[a], class_of[b]) for a, b in pairs if class_of[a] != class_of[b]})
    cg = nx.Graph()
    cg.add_nodes_from(range(len(sccs)))
    cg.add_edges_from(edges)
    comps = [tuple(sorted(c)) for c in nx.connected_components(cg)]
    comps.sort(key=lambda c: c[0])
    return ConfigOrder(k, tuple(sccs), tuple(edges), tuple(comps), pairs)


def build_order(influences: Sequence[SignedInfluence], k: int) -> ConfigOrder:
    return condense(immediate_order_pairs(influences, k), k)


def check_isotonic(values: Mapping[int, float] | Sequence[float], order: ConfigOrder, tol: float = 0.0) -> bool:
    """True iff ``values[a] <= values[b] + tol`` along every class edge."""
    for c in range(len(order.classes)):
        try:
            values[c]
        except (KeyError, IndexError):
            raise ValueError(f"no value for class {c} {order.describe_class(c)}") from None
    return all(values[a] <= values[b] + tol for a, b in order.edges)


def violated_pairs(config_values: Sequence[float], order: ConfigOrder, tol: float = 0.0) -> list[tuple[int, int]]:
    """Generating pairs ``(a, b)`` over configurations with ``value[a] > value[b] + tol``.

    Checking the generating pairs covers zero signs (both directions) as well
    as every ordering edge, because the order is their reflexive-transitive closure.
    """
    if len(config_values) != 1 << order.k:
        raise ValueError(f"expected {1 << order.k} configuration values, got {len(config_values)}")
    return [(a, b) for a, b in order.pairs if config_values[a] > config_values[b] + tol]


def check_config_values(config_values: Sequence[float], order: ConfigOrder, tol: float = 0.0) -> bool:
    return not violated_pairs(config_values, order, tol)
