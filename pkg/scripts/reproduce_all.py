#!/usr/bin/env python3
"""Run every experiment into an output tree.

Usage: python scripts/reproduce_all.py OUTDIR [--seed N] [--workers N]
       [--skip-long]

--skip-long leaves out fig5-n8 (~45 min single-core); everything else
finishes in roughly ten minutes.
"""

import argparse
import sys
import time
from pathlib import Path

from topobus import cli


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--skip-long", action="store_true")
    args = ap.parse_args()

    worst = 0
    for name, exp in cli.EXPERIMENTS.items():
        if args.skip_long and "long-running" in exp.runtime:
            print(f"{name:<14} skipped ({exp.runtime})")
            continue
        t0 = time.time()
        code = cli.run(cli.RunConfig(
            experiment=name, overrides={}, out_dir=args.outdir / name,
            master_seed=args.seed, workers=args.workers))
        verdict = "PASS" if code == 0 else "FAIL"
        print(f"{name:<14} {verdict}  [{time.time() - t0:.1f}s]")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
