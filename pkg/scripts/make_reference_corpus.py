#!/usr/bin/env python3
"""Build the reference corpus: all five measures per row plus the per-class
train/val/test dataset splits.

Writes corpus_measured.csv, theta0_*/thetaq_*.csv, quarantine.csv,
summary.json and manifest.json into --out-dir. Roughly an hour of CPU time
at the default recipe; rerun with the same seed reproduces every byte.
"""

import argparse
import sys
import time

from discordlab.cli import run_dataset_build
from discordlab.dataset import reference_recipe
from discordlab.dynamics import ModelParams


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="data/reference")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()

    t0 = time.time()

    def progress(done, total):
        if done % 200 == 0 or done == total:
            rate = (time.time() - t0) / done
            print(f"  {done}/{total} rows, {rate:.2f} s/row, "
                  f"eta {(total - done) * rate / 60:.0f} min", flush=True)

    summary = run_dataset_build(
        ModelParams(), reference_recipe(), args.seed, args.out_dir,
        threads=args.threads, with_ordering=True,
        command=["make_reference_corpus", f"seed={args.seed}"],
        progress=progress,
    )
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
