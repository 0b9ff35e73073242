"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 validation or parse error,
3 feasibility-cap refusal, 4 internal invariant failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from isobn import io as fmt_io
from isobn.errors import InternalInvariantError, IsobnError
from isobn.estimation import DEFAULT_EPSILON, FIT_TOL, fit_network, group_influences, uniform_prior
from isobn.isotonic import BOOLEAN_LATTICE_LOWER_SETS, DEFAULT_LOWER_SET_CAP, count_lower_sets, lower_set_count
from isobn.model import joint_distribution
from isobn.signs import build_order, violated_pairs
from isobn.simulate import kl_divergence, logic_sample, run_experiment, zeros_to_plus

log = logging.getLogger("isobn")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _prior(args, net, file_prior):
    if getattr(args, "prior_beta", None):
        a, b = args.prior_beta
        return uniform_prior(net, a, b)
    return file_prior


def cmd_validate(args) -> int:
    net, influences, prior = fmt_io.load_network(args.network)
    grouped = group_influences(net, influences)
    for name in net.names:
        build_order(grouped[name], net.n_parents(name))
    print(f"variables: {len(net)}")
    print(f"arcs: {sum(len(p) for p in net.parents)}")
    print(f"signs: {len(influences)}")
    print(f"cpt: {'complete' if net.is_complete else 'partial' if any(net.cpt) else 'none'}")
    print(f"prior: {'yes' if prior is not None else 'no'}")
    print("ok")
    return 0


def cmd_order_info(args) -> int:
    net, influences, _ = fmt_io.load_network(args.network)
    grouped = group_influences(net, influences)
    names = [args.variable] if args.variable else list(net.names)
    refused = False
    for name in names:
        i = net.index(name)
        k = net.n_parents(i)
        order = build_order(grouped[net.names[i]], k)
        signed = {inf.parent for inf in grouped[net.names[i]] if inf.is_signed}
        k1, k2 = len(signed), k - len(signed)
        print(f"variable {net.names[i]} parents=({', '.join(net.parent_names(i))})")
        print(f"  classes: {len(order.classes)}  components: {len(order.components)}  edges: {len(order.edges)}")
        print("  classes: " + _clip([order.describe_class(c) for c in range(len(order.classes))]))
        if order.edges:
            print("  edges: " + _clip([f"{order.describe_class(a)}<={order.describe_class(b)}" for a, b in order.edges]))
        if k1 < len(BOOLEAN_LATTICE_LOWER_SETS):
            whole, decomposed = lower_set_count(k1, k2)
            print(f"  signed parents k1={k1}, unsigned k2={k2}: lower sets whole={whole} decomposed={decomposed}")
        else:
            print(f"  signed parents k1={k1}, unsigned k2={k2}: beyond tabulated lower-set counts")
        counts = []
        for ci in range(len(order.components)):
            c = count_lower_sets(len(order.components[ci]), order.component_edges(ci), cap=args.cap)
            counts.append(c)
        worst = max(counts)
        verdict = "feasible" if worst <= args.cap else "infeasible"
        refused |= worst > args.cap
        over = worst > args.cap
        shown = f">{args.cap}" if over else str(worst)
        total = f">{args.cap}" if over else str(sum(counts))
        print(f"  lower sets per component: max={shown} total={total}  verdict: {verdict}")
    return 3 if refused else 0


def _clip(items: list[str], limit: int = 32) -> str:
    if len(items) <= limit:
        return " ".join(items)
    return " ".join(items[:limit]) + f" ... ({len(items) - limit} more)"


def _self_check(text: str, net, grouped) -> None:
    table = fmt_io.parse_param_table(text)
    for name in net.names:
        k = net.n_parents(name)
        rows = table[name]
        values = [rows[tuple((x >> (k - 1 - j)) & 1 for j in range(k))]["fitted"] for x in range(1 << k)]
        order = build_order(grouped[name], k)
        # printed values carry 10 significant digits
        if violated_pairs(values, order, FIT_TOL + 1e-9):
            raise InternalInvariantError(f"emitted parameters for {name!r} violate the declared signs")


def cmd_fit(args) -> int:
    net, influences, file_prior = fmt_io.load_network(args.network)
    data = fmt_io.load_data(args.data, net)
    prior = _prior(args, net, file_prior)
    if args.method == "map" and prior is None:
        raise UsageError("--method map needs a prior section or --prior-beta")
    fitted = fit_network(
        net,
        influences,
        data,
        prior=prior if args.method == "map" else None,
        method=args.method,
        constrained=args.constrained,
        epsilon=args.epsilon,
        cap=args.cap,
    )
    text = fmt_io.format_param_table(fitted)
    grouped = group_influences(net, influences) if args.constrained else {n: [] for n in net.names}
    _self_check(text, net, grouped)
    _write(text, args.out)
    if args.network_out:
        Path(args.network_out).write_text(fmt_io.emit_network(fitted.network, influences))
    return 0


def cmd_sample(args) -> int:
    net, _, _ = fmt_io.load_network(args.network)
    data = logic_sample(net, args.n, args.seed)
    _write(fmt_io.format_data(data), args.out)
    return 0


def cmd_kl(args) -> int:
    p_net, _, _ = fmt_io.load_network(args.p)
    q_net, _, _ = fmt_io.load_network(args.q)
    if p_net.names != q_net.names:
        raise UsageError("the two networks must declare the same variables in the same order")
    print(fmt_io.format_kl(kl_divergence(joint_distribution(p_net), joint_distribution(q_net))))
    return 0


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def cmd_experiment(args) -> int:
    net, influences, file_prior = fmt_io.load_network(args.network)
    prior = _prior(args, net, file_prior)
    alternative = zeros_to_plus(influences) if args.compare_zeros else None
    summary = run_experiment(
        net,
        influences,
        args.sizes,
        args.reps,
        seed=args.seed,
        prior=prior,
        prior_threshold=args.prior_threshold,
        alternative=alternative,
        epsilon=args.epsilon,
    )
    _write(fmt_io.format_experiment(summary), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="isobn", description="Order-constrained parameter learning for binary Bayesian networks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", help="parse a network spec and check it")
    s.add_argument("network")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("order-info", help="describe the configuration orders induced by the signs")
    s.add_argument("network")
    s.add_argument("--variable")
    s.add_argument("--cap", type=int, default=DEFAULT_LOWER_SET_CAP)
    s.set_defaults(func=cmd_order_info)

    s = sub.add_parser("fit", help="estimate parameters from data")
    s.add_argument("network")
    s.add_argument("--data", required=True)
    s.add_argument("--method", choices=("ml", "map"), default="ml")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--constrained", dest="constrained", action="store_true", default=True)
    g.add_argument("--unconstrained", dest="constrained", action="store_false")
    s.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="weight of empty cells")
    s.add_argument("--prior-beta", type=float, nargs=2, metavar=("A", "B"), help="Beta(A, B) on every parameter")
    s.add_argument("--cap", type=int, default=DEFAULT_LOWER_SET_CAP)
    s.add_argument("--out")
    s.add_argument("--network-out", help="also write the fitted network spec here")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("sample", help="draw data by logic sampling")
    s.add_argument("network")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("kl", help="KL divergence between the joints of two parameterised networks")
    s.add_argument("p")
    s.add_argument("q")
    s.set_defaults(func=cmd_kl)

    s = sub.add_parser("experiment", help="repeated sampling: unconstrained vs constrained KL")
    s.add_argument("network")
    s.add_argument("--sizes", type=_int_list, default=[20, 50, 150])
    s.add_argument("--reps", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--prior-beta", type=float, nargs=2, metavar=("A", "B"))
    s.add_argument("--prior-threshold", type=int, default=None, help="use the prior only for sizes below this")
    s.add_argument("--compare-zeros", action="store_true", help="also fit with zero signs replaced by +")
    s.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    s.add_argument("--out")
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"isobn: error: {exc}", file=sys.stderr)
        return 1
    except IsobnError as exc:
        print(f"isobn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"isobn: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
