"""Fit the three-parent example network to its small count table and show each MLS round."""

import numpy as np

from isobn.estimation import CountTable, fit_variable
from isobn.io import load_network
from isobn.isotonic import IsotonicProblem, mls_solve
from isobn.model import config_index
from pathlib import Path

NETWORK = Path(__file__).resolve().parent.parent / "tests" / "data" / "three_parent.net"

# (n, n1) per configuration of (X1, X2, X3)
COUNTS = {
    (0, 0, 0): (10, 4), (0, 0, 1): (5, 1), (1, 0, 0): (18, 6), (1, 0, 1): (5, 4),
    (0, 1, 0): (20, 10), (0, 1, 1): (0, 0), (1, 1, 0): (5, 2), (1, 1, 1): (10, 4),
}


def main():
    net, infs, _ = load_network(NETWORK)
    n = np.zeros(8, int)
    n1 = np.zeros(8, int)
    for bits, (a, b) in COUNTS.items():
        n[config_index(bits)], n1[config_index(bits)] = a, b
    fit = fit_variable(net, "Y", infs, CountTable(n, n1))
    order = fit.order

    for ci, comp in enumerate(order.components):
        comp = list(comp)
        label = {j: order.describe_class(c) for j, c in enumerate(comp)}
        print(f"component {ci}: {' '.join(label.values())}")
        if len(comp) == 1:
            continue
        trace = []
        mls_solve(IsotonicProblem(fit.basic.g[comp], fit.basic.w[comp], order.component_edges(ci)), trace=trace)
        for r, avgs in enumerate(trace, 1):
            print(f"  round {r}")
            for mask, v in sorted(avgs.items(), key=lambda t: (bin(t[0]).count("1"), t[0])):
                members = " ".join(label[j] for j in range(len(comp)) if mask >> j & 1)
                print(f"    {members:<40} {v:.6f}")

    print("\nconfig  n   n1  basic     fitted")
    for cfg, a, b, basic, fitted in fit.rows():
        print(f"{cfg:<7} {a:<3} {b:<3} {basic:<9.6f} {fitted:.6f}")


if __name__ == "__main__":
    main()
