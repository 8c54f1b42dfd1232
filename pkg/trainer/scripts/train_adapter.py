#!/usr/bin/env python3
"""Train one adapter from a mask-annotated instance JSONL file."""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from trainer_driver import Hyperparameters, TrainRun, train


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dataset", required=True, type=Path,
                        help="instance JSONL (all rows in the adapter's scope)")
    parser.add_argument("--adapter", required=True,
                        help="sel:<toolset> or arg:<toolset>:<tool>")
    parser.add_argument("--out", required=True, type=Path,
                        help="adapter artifact path (.pt)")
    parser.add_argument("--rank", type=int, default=4)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--epochs", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    run = TrainRun(
        adapter_id=args.adapter, dataset=args.dataset, output=args.out,
        hyperparameters=Hyperparameters(rank=args.rank, learning_rate=args.lr,
                                        epochs=args.epochs, seed=args.seed))
    metrics = train(run)
    print(json.dumps(metrics, indent=2))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
