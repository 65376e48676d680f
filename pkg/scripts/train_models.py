#!/usr/bin/env python3
"""Train both theta-class networks on a built dataset and report test MSE."""

import argparse
import sys
from pathlib import Path

from discordlab import dataset, mlp
from discordlab.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data-dir", default="data/reference")
    ap.add_argument("--out-dir", default="data/models")
    ap.add_argument("--epochs", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for klass in ("theta0", "thetaq"):
        rc = cli_main([
            "train", "--data-dir", args.data_dir, "--class", klass,
            "--epochs", str(args.epochs), "--seed", str(args.seed),
            "--out", args.out_dir,
        ])
        if rc != 0:
            return rc
        net = mlp.load(Path(args.out_dir) / f"{klass}_checkpoint.json")
        test_rows = dataset.read_csv(Path(args.data_dir) / f"{klass}_test.csv")
        x, y = dataset.to_arrays(test_rows)
        print(f"{klass}: test MSE {mlp.evaluate(net, x, y):.6f} "
              f"on {len(test_rows)} rows", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
