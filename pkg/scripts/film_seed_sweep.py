#!/usr/bin/env python3
"""Sweep soap-film relaxation seeds and tabulate the local optima found.

For each seed, a random full topology is relaxed to a stationary wire
frame; the resulting energies cluster into a handful of distinct local
optima. The sweep prints one line per cluster (energy, hit count) plus the
exact optimum for comparison, and optionally dumps the best frame as SVG.
"""

import argparse
import collections
import sys

from exocomp import steiner
from exocomp.acceptance import DEFAULT_SEED
from exocomp.rng import spawn


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--seeds", type=int, default=50)
    parser.add_argument("--file", default=None, help="instance file (default: packaged demo)")
    parser.add_argument("--svg", default=None, help="write the exact tree as SVG here")
    args = parser.parse_args()

    if args.file:
        with open(args.file, encoding="utf-8") as handle:
            instance = steiner.parse_orlib(handle.read())
    else:
        instance = steiner.demo_instance()

    tree = steiner.exact_steiner(instance)
    print(f"terminals: {len(instance.terminals)}")
    print(f"exact optimum: {tree.total_length:.9f}")
    print(f"spanning-tree length: {steiner.mst_length(instance):.9f}")

    clusters: collections.Counter = collections.Counter()
    for i in range(args.seeds):
        config = steiner.relax_film(instance, rng=spawn(args.seed, "film-sweep", i))
        clusters[round(config.energy, 6)] += 1
    print(f"\nlocal optima over {args.seeds} random topologies:")
    for energy, hits in sorted(clusters.items()):
        marker = "  <- optimum" if abs(energy - tree.total_length) < 1e-4 else ""
        print(f"  {energy:.6f}  x{hits}{marker}")

    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as handle:
            handle.write(steiner.tree_to_svg(tree))
        print(f"\nwrote {args.svg}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
