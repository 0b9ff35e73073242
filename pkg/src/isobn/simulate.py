"""Logic sampling, KL divergence and the repeated-sampling experiment."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

from isobn.dataset import Dataset
from isobn.errors import InternalInvariantError, NetworkError, SignError
from isobn.estimation import BetaPrior, fit_network, group_influences, uniform_prior
from isobn.model import Network, config_from_index, format_config, joint_distribution
from isobn.signs import Sign, SignedInfluence, build_order, violated_pairs

INF = math.inf


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def logic_sample(net: Network, n: int, seed=0) -> Dataset:
    """Draw ``n`` rows by forward sampling in topological order."""
    if not net.is_complete:
        missing = [name for name, t in zip(net.names, net.cpt) if t is None]
        raise NetworkError(f"cannot sample: no CPT for {', '.join(missing)}")
    rng = _rng(seed)
    V = len(net)
    rows = np.zeros((n, V), dtype=np.uint8)
    for v in net.topological_order:
        idx = np.zeros(n, dtype=np.int64)
        for p in net.parents[v]:
            idx = (idx << 1) | rows[:, p]
        p1 = np.asarray(net.cpt[v])[idx]
        rows[:, v] = rng.random(n) < p1
    prov = {"seed": seed if not isinstance(seed, np.random.Generator) else None, "n": n}
    return Dataset(net.names, rows, prov)


def kl_divergence(p: Sequence[float], q: Sequence[float]) -> float:
    """``sum p log(p/q)`` in nats; terms with ``p = 0`` vanish, ``q = 0 < p`` gives ``inf``."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError(f"distributions differ in length: {p.shape} vs {q.shape}")
    support = p > 0
    if np.any(q[support] == 0):
        return INF
    ps, qs = p[support], q[support]
    return float(np.sum(ps * (np.log(ps) - np.log(qs))))


def replicate_seed(master: int, n: int, rep: int) -> np.random.SeedSequence:
    """Per-replicate stream keyed on (master seed, sample size, replicate index)."""
    return np.random.SeedSequence([int(master), int(n), int(rep)])


@dataclass(frozen=True)
class Replicate:
    n: int
    rep: int
    kl_unconstrained: float
    kl_constrained: float
    kl_alternative: float | None = None
    used_prior: bool = False


@dataclass(frozen=True)
class SizeSummary:
    n: int
    mean_kl_unconstrained: float
    mean_kl_constrained: float
    reps_used: int
    reps_infinite: int
    mean_kl_alternative: float | None = None


@dataclass(frozen=True)
class ExperimentSummary:
    rows: tuple[SizeSummary, ...]
    replicates: tuple[Replicate, ...] = field(default=(), repr=False)

    def by_size(self) -> dict[int, SizeSummary]:
        return {r.n: r for r in self.rows}


def summarize(replicates: Sequence[Replicate]) -> tuple[SizeSummary, ...]:
    """Average per sample size over replicates whose unconstrained KL is finite."""
    sizes = sorted({r.n for r in replicates})
    out = []
    for n in sizes:
        reps = sorted((r for r in replicates if r.n == n), key=lambda r: r.rep)
        ok = [r for r in reps if math.isfinite(r.kl_unconstrained)]
        alt = None
        if ok and ok[0].kl_alternative is not None:
            alt = float(np.mean([r.kl_alternative for r in ok]))
        out.append(
            SizeSummary(
                n,
                float(np.mean([r.kl_unconstrained for r in ok])) if ok else math.nan,
                float(np.mean([r.kl_constrained for r in ok])) if ok else math.nan,
                len(ok),
                len(reps) - len(ok),
                alt,
            )
        )
    return tuple(out)


def check_truth(truth: Network, grouped: Mapping[str, Sequence[SignedInfluence]], tol: float = 1e-12) -> None:
    for name, infs in grouped.items():
        i = truth.index(name)
        k = truth.n_parents(i)
        order = build_order(list(infs), k)
        bad = violated_pairs(truth.cpt[i], order, tol)
        if bad:
            a, b = bad[0]
            raise SignError(
                f"true CPT of {name!r} violates its declared signs: "
                f"p({format_config(config_from_index(a, k))})={truth.cpt[i][a]:.10g} > "
                f"p({format_config(config_from_index(b, k))})={truth.cpt[i][b]:.10g}"
            )


def zeros_to_plus(influences: Sequence[SignedInfluence]) -> list[SignedInfluence]:
    """Replace every zero sign by a positive one, keeping its context."""
    return [
        SignedInfluence(inf.parent, Sign.PLUS, inf.context, inf.child) if inf.sign is Sign.ZERO else inf
        for inf in influences
    ]


def run_experiment(
    truth: Network,
    influences,
    sizes: Sequence[int],
    reps: int,
    seed: int = 0,
    prior: Mapping[str, BetaPrior] | tuple[float, float] | None = None,
    prior_threshold: int | None = None,
    alternative=None,
    epsilon: float = 1e-9,
) -> ExperimentSummary:
    """Repeated sampling from ``truth``; unconstrained vs constrained KL per size.

    The prior (a per-variable mapping or ``(a, b)`` for a uniform Beta) is used
    for sample sizes strictly below ``prior_threshold`` (always, if the
    threshold is None). ``alternative`` is an optional second sign set fitted
    on the same data, reported as ``mean_kl_alternative``.
    """
    grouped = group_influences(truth, influences)
    check_truth(truth, grouped)
    alt_grouped = None
    if alternative is not None:
        alt_grouped = group_influences(truth, alternative)
        check_truth(truth, alt_grouped)
    if isinstance(prior, tuple):
        prior = uniform_prior(truth, *prior)
    p_true = joint_distribution(truth)
    replicates = []
    for n in sizes:
        use_prior = prior is not None and (prior_threshold is None or n < prior_threshold)
        method = "map" if use_prior else "ml"
        pr = prior if use_prior else None
        for rep in range(reps):
            data = logic_sample(truth, n, np.random.default_rng(replicate_seed(seed, n, rep)))
            unc = fit_network(truth, grouped, data, pr, method, constrained=False, epsilon=epsilon)
            con = fit_network(truth, grouped, data, pr, method, constrained=True, epsilon=epsilon)
            kl_u = kl_divergence(p_true, joint_distribution(unc.network))
            kl_c = kl_divergence(p_true, joint_distribution(con.network))
            kl_a = None
            if alt_grouped is not None:
                alt = fit_network(truth, alt_grouped, data, pr, method, constrained=True, epsilon=epsilon)
                kl_a = kl_divergence(p_true, joint_distribution(alt.network))
            if math.isfinite(kl_u) and not (math.isfinite(kl_c) and (kl_a is None or math.isfinite(kl_a))):
                raise InternalInvariantError(
                    f"n={n} replicate {rep}: constrained KL infinite while unconstrained KL is finite"
                )
            replicates.append(Replicate(n, rep, kl_u, kl_c, kl_a, use_prior))
    return ExperimentSummary(summarize(replicates), tuple(replicates))


def reference_network():
    """The shipped 5-variable network with its declared signs.

    Returns ``(network, influences, prior)`` as parsed from ``reference.net``.
    """
    from isobn.io import parse_network

    text = resources.files("isobn.data").joinpath("reference.net").read_text()
    return parse_network(text, source="reference.net")
