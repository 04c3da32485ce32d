#!/usr/bin/env python3
"""Run every registered experiment at its defaults and save the records.

Writes one JSON record per experiment into the output directory (default
./records). Reuses the CLI registry, so the set of experiments and their
defaults stay in one place.
"""

import argparse
import pathlib
import sys
import time

from exocomp import cli
from exocomp.acceptance import DEFAULT_SEED


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--out-dir", default="records")
    args = parser.parse_args()

    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in cli.EXPERIMENTS:
        start = time.perf_counter()
        record = cli.run_experiment(name, {}, args.seed)
        elapsed = time.perf_counter() - start
        path = out_dir / f"{name}.json"
        path.write_text(cli.record_json(record), encoding="utf-8")
        print(f"{name:18s} {elapsed:7.2f}s -> {path}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
