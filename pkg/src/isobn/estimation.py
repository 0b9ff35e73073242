"""Count tables, basic estimates and order-constrained fitting."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from isobn.dataset import Dataset
from isobn.errors import FeasibilityError, InternalInvariantError, IsobnError, PriorError
from isobn.isotonic import (
    BOOLEAN_LATTICE_LOWER_SETS,
    DEFAULT_LOWER_SET_CAP,
    IsotonicProblem,
    lower_set_count,
    mls_solve,
    pav_solve,
)
from isobn.model import Network, config_from_index, format_config
from isobn.signs import ConfigOrder, SignedInfluence, build_order, violated_pairs

DEFAULT_EPSILON = 1e-9
FIT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CountTable:
    """``n[x]`` observations and ``n1[x]`` successes per configuration index."""

    n: np.ndarray
    n1: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.n, dtype=np.int64)
        n1 = np.asarray(self.n1, dtype=np.int64)
        if n.shape != n1.shape or np.any(n1 < 0) or np.any(n1 > n):
            raise ValueError("count table requires 0 <= n1 <= n per configuration")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "n1", n1)

    @property
    def k(self) -> int:
        return int(len(self.n)).bit_length() - 1

    def ml(self) -> np.ndarray:
        """Per-configuration relative frequencies, 0.5 where a cell is empty."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.n > 0, self.n1 / np.maximum(self.n, 1), 0.5)


@dataclass(frozen=True, eq=False)
class BetaPrior:
    """Per-configuration Beta prior given by its mode and precision ``h = a + b - 2``."""

    mode: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        mode = np.asarray(self.mode, dtype=np.float64)
        h = np.asarray(self.h, dtype=np.float64)
        if mode.shape != h.shape:
            raise PriorError("prior mode and precision must have equal length")
        if np.any((mode < 0) | (mode > 1)) or np.any(h < 0):
            raise PriorError("prior modes must lie in [0, 1] and precisions be non-negative")
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "h", h)

    @classmethod
    def from_beta(cls, k: int, a: float, b: float) -> BetaPrior:
        """The same Beta(a, b) on every one of the ``2**k`` configurations."""
        if a < 1 or b < 1:
            raise PriorError("Beta parameters below 1 have no interior mode")
        h = a + b - 2
        mode = (a - 1) / h if h > 0 else 0.5
        return cls(np.full(1 << k, mode), np.full(1 << k, float(h)))

    @classmethod
    def flat(cls, k: int) -> BetaPrior:
        return cls.from_beta(k, 1.0, 1.0)


def uniform_prior(net: Network, a: float, b: float) -> dict[str, BetaPrior]:
    return {name: BetaPrior.from_beta(net.n_parents(name), a, b) for name in net.names}


@dataclass(frozen=True, eq=False)
class BasicEstimates:
    """Pooled estimate ``g`` and weight ``w`` per class of a :class:`ConfigOrder`."""

    g: np.ndarray
    w: np.ndarray
    empty: np.ndarray
    config_basic: np.ndarray


@dataclass(frozen=True, eq=False)
class VariableFit:
    name: str
    parents: tuple[str, ...]
    order: ConfigOrder
    counts: CountTable
    basic: BasicEstimates
    fitted: np.ndarray
    class_fitted: np.ndarray
    block_of_class: np.ndarray
    method: str

    def component_of_config(self, x: int) -> int:
        return int(self.order.component_of[self.order.class_of[x]])

    def rows(self):
        """``(config bits, n, n1, basic, fitted)`` per configuration."""
        k = self.order.k
        for x in range(1 << k):
            yield (
                format_config(config_from_index(x, k)),
                int(self.counts.n[x]),
                int(self.counts.n1[x]),
                float(self.basic.config_basic[x]),
                float(self.fitted[x]),
            )


@dataclass(frozen=True)
class FittedNetwork:
    network: Network
    fits: dict[str, VariableFit]


def count_table(data: Dataset, net: Network, v: str | int) -> CountTable:
    i = net.index(v)
    name = net.names[i]
    parents = net.parent_names(i)
    k = len(parents)
    y = data.column(name).astype(np.int64)
    idx = np.zeros(len(data), dtype=np.int64)
    for p in parents:
        idx = (idx << 1) | data.column(p).astype(np.int64)
    n = np.bincount(idx, minlength=1 << k)
    n1 = np.bincount(idx, weights=y, minlength=1 << k).astype(np.int64)
    return CountTable(n, n1)


def ml_basic(counts: CountTable, order: ConfigOrder, epsilon: float = DEFAULT_EPSILON) -> BasicEstimates:
    """Class-pooled relative frequencies with the class counts as weights.

    A class without observations gets estimate 0.5 and weight ``epsilon``.
    """
    nc = len(order.classes)
    g = np.empty(nc)
    w = np.empty(nc)
    empty = np.zeros(nc, dtype=bool)
    for c, members in enumerate(order.classes):
        m = list(members)
        tot = float(counts.n[m].sum())
        if tot == 0:
            g[c], w[c], empty[c] = 0.5, epsilon, True
        else:
            g[c], w[c] = float(counts.n1[m].sum()) / tot, tot
    return BasicEstimates(g, w, empty, counts.ml())


def check_prior(prior: BetaPrior, order: ConfigOrder, tol: float = 1e-12) -> None:
    bad = violated_pairs(prior.mode, order, tol)
    if bad:
        a, b = bad[0]
        k = order.k
        raise PriorError(
            "prior modes are not isotonic: "
            f"mode({format_config(config_from_index(a, k))})={prior.mode[a]:.10g} > "
            f"mode({format_config(config_from_index(b, k))})={prior.mode[b]:.10g}"
        )


def map_basic(counts: CountTable, prior: BetaPrior, order: ConfigOrder, epsilon: float = DEFAULT_EPSILON) -> BasicEstimates:
    """Unconstrained MAP estimates ``(n1 + h*mode) / (n + h)`` with weights ``n + h``.

    Members of a zero-sign class are pooled with those weights. With ``h = 0``
    everywhere this reproduces :func:`ml_basic` exactly.
    """
    if len(prior.mode) != len(counts.n):
        raise PriorError(f"prior has {len(prior.mode)} entries, variable has {len(counts.n)} configurations")
    check_prior(prior, order)
    num_x = counts.n1 + prior.h * prior.mode
    den_x = counts.n + prior.h
    config_basic = np.where(den_x > 0, num_x / np.where(den_x > 0, den_x, 1.0), 0.5)
    nc = len(order.classes)
    g = np.empty(nc)
    w = np.empty(nc)
    empty = np.zeros(nc, dtype=bool)
    for c, members in enumerate(order.classes):
        m = list(members)
        den = float(den_x[m].sum())
        if den == 0:
            g[c], w[c], empty[c] = 0.5, epsilon, True
        else:
            g[c], w[c] = float(num_x[m].sum()) / den, den
    return BasicEstimates(g, w, empty, config_basic)


def _count_hint(influences: Sequence[SignedInfluence], k: int) -> str:
    k1 = len({inf.parent for inf in influences if inf.is_signed})
    if k1 >= len(BOOLEAN_LATTICE_LOWER_SETS):
        return f"{k1} signed parents; consider leaving some influences unsigned"
    whole, decomposed = lower_set_count(k1, k - k1)
    return (
        f"{k1} signed and {k - k1} unsigned parents give {whole} lower sets "
        f"({decomposed} if solved per unsigned context); consider leaving some influences unsigned"
    )


def fit_variable(
    net: Network,
    v: str | int,
    influences: Sequence[SignedInfluence],
    counts: CountTable,
    prior: BetaPrior | None = None,
    epsilon: float = DEFAULT_EPSILON,
    cap: int | None = DEFAULT_LOWER_SET_CAP,
) -> VariableFit:
    """Constrained estimates for one variable, solved component by component."""
    i = net.index(v)
    name = net.names[i]
    k = net.n_parents(i)
    order = build_order(list(influences), k)
    if prior is None:
        basic = ml_basic(counts, order, epsilon)
        method = "ml"
    else:
        basic = map_basic(counts, prior, order, epsilon)
        method = "map"

    class_fitted = np.empty(len(order.classes))
    block_of_class = np.empty(len(order.classes), dtype=np.int64)
    for ci, comp in enumerate(order.components):
        comp = list(comp)
        problem = IsotonicProblem(basic.g[comp], basic.w[comp], order.component_edges(ci))
        if len(comp) == 1:
            sol_fitted, blocks = problem.g.copy(), ((0,),)
        else:
            chain = order.chain_order(ci)
            try:
                sol = pav_solve(problem, chain) if chain is not None else mls_solve(problem, cap=cap)
            except FeasibilityError as exc:
                raise FeasibilityError(f"variable {name!r}: {exc}; {_count_hint(influences, k)}", exc.estimated, exc.cap) from exc
            sol_fitted, blocks = sol.fitted, sol.blocks
        class_fitted[comp] = sol_fitted
        for b, members in enumerate(blocks):
            for j in members:
                block_of_class[comp[j]] = b

    if np.any(class_fitted < 0) or np.any(class_fitted > 1):
        raise InternalInvariantError(f"variable {name!r}: fitted value outside [0, 1]")
    fitted = class_fitted[order.class_of]
    if violated_pairs(fitted, order, FIT_TOL):
        raise InternalInvariantError(f"variable {name!r}: fitted parameters violate the declared signs")
    return VariableFit(
        name, net.parent_names(i), order, counts, basic, fitted, class_fitted, block_of_class, method
    )


def group_influences(net: Network, influences: Iterable[SignedInfluence] | Mapping[str, Sequence[SignedInfluence]]) -> dict[str, list[SignedInfluence]]:
    if isinstance(influences, Mapping):
        out = {n: list(influences.get(n, ())) for n in net.names}
        unknown = set(influences) - set(net.names)
        if unknown:
            raise IsobnError(f"influences given for unknown variable(s) {sorted(unknown)}")
        return out
    out = {n: [] for n in net.names}
    for inf in influences:
        if inf.child is None:
            raise IsobnError("influence without a child variable")
        out[net.names[net.index(inf.child)]].append(inf)
    return out


def fit_network(
    net: Network,
    influences,
    data: Dataset,
    prior: Mapping[str, BetaPrior] | None = None,
    method: str = "ml",
    constrained: bool = True,
    epsilon: float = DEFAULT_EPSILON,
    cap: int | None = DEFAULT_LOWER_SET_CAP,
) -> FittedNetwork:
    """Fit every variable independently and assemble a fully parameterised network.

    ``method="map"`` requires ``prior`` (one :class:`BetaPrior` per variable);
    ``constrained=False`` ignores all influences.
    """
    if method not in ("ml", "map"):
        raise ValueError(f"unknown method {method!r}")
    if method == "map" and prior is None:
        raise PriorError("method 'map' needs a prior")
    grouped = group_influences(net, influences) if constrained else {n: [] for n in net.names}
    fits: dict[str, VariableFit] = {}
    errors: list[tuple[str, Exception]] = []
    for name in net.names:
        try:
            counts = count_table(data, net, name)
            var_prior = prior[name] if method == "map" else None
            fits[name] = fit_variable(net, name, grouped[name], counts, var_prior, epsilon, cap)
        except IsobnError as exc:
            errors.append((name, exc))
    if errors:
        if len(errors) == 1 and isinstance(errors[0][1], FeasibilityError):
            raise errors[0][1]
        msg = "; ".join(f"{n}: {e}" for n, e in errors)
        kinds = [type(e) for _, e in errors]
        if FeasibilityError in kinds:
            raise FeasibilityError(msg)
        if InternalInvariantError in kinds:
            raise InternalInvariantError(msg)
        raise IsobnError(msg) from errors[0][1]
    fitted_net = net.with_cpts({n: tuple(float(p) for p in f.fitted) for n, f in fits.items()})
    return FittedNetwork(fitted_net, fits)
