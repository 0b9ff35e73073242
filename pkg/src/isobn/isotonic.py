"""Weighted least-squares isotonic regression on a finite partial order.

Nodes are numbered ``0..n-1``; an edge ``(a, b)`` states ``a <= b`` in the
order (equivalently, fitted[a] <= fitted[b]). Edge sets need not be
transitively closed; they must be acyclic.

Subsets of nodes are handled internally as int bitmasks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from isobn.errors import FeasibilityError

TIE_TOL = 1e-12
DEFAULT_LOWER_SET_CAP = 10**7

# Number of non-empty antichains of subsets of a k-set (OEIS A014466), k = 0..7.
BOOLEAN_LATTICE_LOWER_SETS = (1, 2, 5, 19, 167, 7580, 7828353, 2414682040997)


@dataclass(frozen=True)
class IsotonicProblem:
    g: np.ndarray
    w: np.ndarray
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        g = np.asarray(self.g, dtype=np.float64)
        w = np.asarray(self.w, dtype=np.float64)
        if g.ndim != 1 or g.shape != w.shape:
            raise ValueError("g and w must be 1-d arrays of equal length")
        if not np.all(np.isfinite(g)):
            raise ValueError("basic estimates must be finite")
        if not np.all(w > 0):
            raise ValueError("weights must be strictly positive")
        n = len(g)
        edges = tuple((int(a), int(b)) for a, b in self.edges)
        for a, b in edges:
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge {(a, b)} references a node outside 0..{n - 1}")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "edges", edges)

    @property
    def n(self) -> int:
        return len(self.g)

    def loss(self, f: Sequence[float]) -> float:
        f = np.asarray(f, dtype=np.float64)
        return float(np.sum(self.w * (f - self.g) ** 2))


@dataclass(frozen=True)
class IsotonicSolution:
    fitted: np.ndarray
    blocks: tuple[tuple[int, ...], ...] = field(default=())

    def block_of(self) -> np.ndarray:
        out = np.empty(len(self.fitted), dtype=np.int64)
        for i, b in enumerate(self.blocks):
            out[list(b)] = i
        return out


def weighted_average(subset, problem: IsotonicProblem) -> float:
    idx = _as_indices(subset)
    if not idx:
        raise ValueError("weighted average of an empty set")
    g = problem.g[idx]
    if np.all(g == g[0]):
        return float(g[0])
    w = problem.w[idx]
    # correctly rounded sums keep averages of values in [0, 1] inside [0, 1]
    return math.fsum(w * g) / math.fsum(w)


def _as_indices(subset) -> list[int]:
    if isinstance(subset, int):
        return _mask_members(subset)
    return sorted(int(i) for i in subset)


def _mask_members(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _pred_masks(n: int, edges: Sequence[tuple[int, int]]) -> list[int]:
    preds = [0] * n
    for a, b in edges:
        preds[b] |= 1 << a
    return preds


def _topo_order(n: int, edges: Sequence[tuple[int, int]]) -> list[int]:
    succ: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    for a, b in edges:
        succ[a].append(b)
        indeg[b] += 1
    ready = [v for v in range(n) if indeg[v] == 0]
    ready.reverse()
    out = []
    while ready:
        v = ready.pop()
        out.append(v)
        for s in succ[v]:
            indeg[s] -= 1
            if indeg[s] == 0:
                ready.append(s)
    if len(out) != n:
        raise ValueError("order edges contain a cycle; condense zero-sign classes first")
    return out


def _closure_masks(n: int, edges: Sequence[tuple[int, int]]) -> tuple[list[int], list[int]]:
    """Down-sets and up-sets of every node (each including the node)."""
    topo = _topo_order(n, edges)
    preds = _pred_masks(n, edges)
    down = [0] * n
    for v in topo:
        m = 1 << v
        p = preds[v]
        while p:
            low = p & -p
            m |= down[low.bit_length() - 1]
            p ^= low
        down[v] = m
    up = [0] * n
    for v in range(n):
        d = down[v]
        while d:
            low = d & -d
            up[low.bit_length() - 1] |= 1 << v
            d ^= low
    return down, up


def count_lower_sets(n: int, edges: Sequence[tuple[int, int]], cap: int | None = None, active: int | None = None) -> int:
    """Number of non-empty lower sets, saturating at ``cap + 1`` when a cap is given.

    Uses the split ``L(S) = L(S minus up(v)) + L(S minus down(v))`` with
    memoisation, which is far cheaper than enumeration on lattice-like orders.
    """
    down, up = _closure_masks(n, edges)
    full = (1 << n) - 1 if active is None else active
    limit = math.inf if cap is None else cap + 2  # +1 for the empty set
    memo: dict[int, int] = {}

    def count(s: int) -> int:
        if s == 0:
            return 1
        if s & (s - 1) == 0:
            return 2
        hit = memo.get(s)
        if hit is not None:
            return hit
        best_v, best_score = -1, -1
        t = s
        while t:
            low = t & -t
            v = low.bit_length() - 1
            t ^= low
            score = min((up[v] & s).bit_count(), (down[v] & s).bit_count())
            if score > best_score:
                best_v, best_score = v, score
        total = count(s & ~up[best_v])
        if total < limit:
            total += count(s & ~down[best_v])
        total = min(total, limit)
        memo[s] = total
        return total

    result = count(full) - 1
    return result if cap is None else min(result, cap + 1)


def _iter_lower(n, edges, active, problem=None):
    """Stream (mask, sum_w, sum_wg) for every non-empty lower set of the active nodes."""
    edges_active = [(a, b) for a, b in edges if (active >> a) & 1 and (active >> b) & 1]
    topo = [v for v in _topo_order(n, edges_active) if (active >> v) & 1]
    preds = _pred_masks(n, edges_active)
    m = len(topo)
    if problem is not None:
        w = [float(x) for x in problem.w]
        wg = [float(a * b) for a, b in zip(problem.w, problem.g)]
    else:
        w = wg = [0.0] * n
    stack = [(0, 0, 0.0, 0.0)]
    pop, push = stack.pop, stack.append
    while stack:
        j, mask, sw, swg = pop()
        while j < m and preds[topo[j]] & ~mask:
            j += 1
        if j == m:
            if mask:
                yield mask, sw, swg
            continue
        v = topo[j]
        push((j + 1, mask, sw, swg))
        push((j + 1, mask | (1 << v), sw + w[v], swg + wg[v]))


def _check_cap(n, edges, cap, active=None):
    if cap is None:
        return
    est = count_lower_sets(n, edges, cap=cap, active=active)
    if est > cap:
        raise FeasibilityError(
            f"order component with {n} nodes has more than {cap} lower sets; "
            "minimum lower sets enumeration refused",
            estimated=est,
            cap=cap,
        )


def lower_sets(n: int, edges: Sequence[tuple[int, int]] = (), cap: int | None = DEFAULT_LOWER_SET_CAP) -> Iterator[frozenset[int]]:
    """Lazily yield every non-empty lower set exactly once."""
    edges = [tuple(e) for e in edges]
    _check_cap(n, edges, cap)
    for mask, _, _ in _iter_lower(n, edges, (1 << n) - 1):
        yield frozenset(_mask_members(mask))


def mls_solve(problem: IsotonicProblem, cap: int | None = DEFAULT_LOWER_SET_CAP, trace: list | None = None) -> IsotonicSolution:
    """Isotonic regression by repeatedly removing the minimum-average lower set.

    Ties within ``TIE_TOL`` are pooled into their union. After each removal
    the lower sets of the remaining nodes are re-enumerated; they coincide
    with the previous lower sets minus the removed block. If ``trace`` is a
    list, one dict ``{lower_set_mask: average}`` per round is appended.
    """
    n = problem.n
    edges = problem.edges
    _check_cap(n, edges, cap)
    active = (1 << n) - 1
    fitted = np.empty(n, dtype=np.float64)
    blocks = []
    while active:
        best = math.inf
        union = 0
        averages = {} if trace is not None else None
        for mask, sw, swg in _iter_lower(n, edges, active, problem):
            avg = swg / sw
            if averages is not None:
                averages[mask] = avg
            if avg < best - TIE_TOL:
                best, union = avg, mask
            elif avg <= best + TIE_TOL:
                union |= mask
        if trace is not None:
            trace.append(averages)
        members = _mask_members(union)
        value = weighted_average(members, problem)
        fitted[members] = value
        blocks.append(tuple(members))
        active &= ~union
    return IsotonicSolution(fitted, tuple(blocks))


def pav_solve(problem: IsotonicProblem, chain: Sequence[int] | None = None) -> IsotonicSolution:
    """Pool adjacent violators along a totally ordered component.

    ``chain`` lists the nodes from smallest to largest; when omitted it is
    recovered from the edges, which must then describe a chain.
    """
    n = problem.n
    if chain is None:
        chain = _topo_order(n, problem.edges)
    chain = [int(c) for c in chain]
    if sorted(chain) != list(range(n)):
        raise ValueError("chain must list every node exactly once")
    pos = {v: i for i, v in enumerate(chain)}
    succ = {(pos[a], pos[b]) for a, b in problem.edges}
    # a chain needs a direct edge between neighbours and no backward edge
    if any(a >= b for a, b in succ) or any((i, i + 1) not in succ for i in range(n - 1)):
        raise ValueError("component is not a chain")
    sw: list[float] = []
    swg: list[float] = []
    members: list[list[int]] = []
    for v in chain:
        sw.append(float(problem.w[v]))
        swg.append(float(problem.w[v] * problem.g[v]))
        members.append([v])
        while len(sw) > 1 and swg[-2] / sw[-2] > swg[-1] / sw[-1] + TIE_TOL:
            top_w, top_wg, top_m = sw.pop(), swg.pop(), members.pop()
            sw[-1] += top_w
            swg[-1] += top_wg
            members[-1].extend(top_m)
    fitted = np.empty(n, dtype=np.float64)
    for m in members:
        fitted[m] = weighted_average(m, problem)
    return IsotonicSolution(fitted, tuple(tuple(sorted(m)) for m in members))


def _set_partitions(n: int) -> Iterator[list[int]]:
    """Restricted growth strings: labels[i] is the block of node i."""
    labels = [0] * n

    def rec(i: int, top: int):
        if i == n:
            yield list(labels)
            return
        for b in range(top + 2):
            labels[i] = b
            yield from rec(i + 1, max(top, b))

    if n == 0:
        yield []
        return
    yield from rec(1, 0)


ORACLE_MAX_NODES = 8


def oracle_solve(problem: IsotonicProblem) -> IsotonicSolution:
    """Exhaustive search over set partitions; for testing only.

    Relies on the optimum being constant on the blocks of some partition,
    each block taking its weighted average. Every partition is tried and the
    feasible assignment with least weighted squared error is kept.
    """
    n = problem.n
    if n > ORACLE_MAX_NODES:
        raise ValueError(f"oracle limited to {ORACLE_MAX_NODES} nodes, got {n}")
    g, w = problem.g, problem.w
    best_loss = math.inf
    best = None
    for labels in _set_partitions(n):
        nb = max(labels) + 1
        sw = [0.0] * nb
        swg = [0.0] * nb
        for i, b in enumerate(labels):
            sw[b] += w[i]
            swg[b] += w[i] * g[i]
        f = [swg[labels[i]] / sw[labels[i]] for i in range(n)]
        if any(f[a] > f[b] + TIE_TOL for a, b in problem.edges):
            continue
        loss = sum(w[i] * (f[i] - g[i]) ** 2 for i in range(n))
        if loss < best_loss:
            best_loss, best = loss, (labels, f)
    labels, f = best
    blocks = {}
    for i, b in enumerate(labels):
        blocks.setdefault(b, []).append(i)
    ordered = sorted(blocks.values(), key=lambda m: (f[m[0]], m[0]))
    return IsotonicSolution(np.array(f, dtype=np.float64), tuple(tuple(m) for m in ordered))


def lower_set_count(k1: int, k2: int) -> tuple[int, int]:
    """Lower-set counts for ``k1`` signed and ``k2`` unsigned parents.

    Returns ``(whole order, sum over the 2**k2 components)``.
    """
    if not 0 <= k1 < len(BOOLEAN_LATTICE_LOWER_SETS):
        raise ValueError(f"k1={k1} outside tabulated range 0..{len(BOOLEAN_LATTICE_LOWER_SETS) - 1}")
    if k2 < 0:
        raise ValueError("k2 must be non-negative")
    per = BOOLEAN_LATTICE_LOWER_SETS[k1]
    return (per + 1) ** (2**k2) - 1, 2**k2 * per
