"""Sweep the hidden-layer width on one synthetic family.

Wider mean-field networks are known to drift toward ignoring the data, so
accuracy is expected to degrade once the width gets far past the scale the
bivariate setting needs.

Example:
    python scripts/width_ablation.py AN-s --widths 10 20 50 100
"""

import argparse
import os

from comic.codelength import TrainConfig
from comic.data import GeneratorSpec, generate_dataset
from comic.evaluation import run_benchmark


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("family")
    parser.add_argument("--widths", type=int, nargs="+", default=[10, 20, 50, 100])
    parser.add_argument("--n-pairs", type=int, default=10)
    parser.add_argument("--n-samples", type=int, default=500)
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--map-epochs", type=int, default=1000)
    parser.add_argument("--vi-epochs", type=int, default=1000)
    parser.add_argument("--warmup-epochs", type=int, default=100)
    parser.add_argument("--parallelism", type=int, default=os.cpu_count() or 1)
    args = parser.parse_args()

    pairs = generate_dataset(GeneratorSpec(args.family, args.n_pairs,
                                           args.n_samples, seed=args.seed))
    print(f"{'width':>6} {'accuracy':>9} {'bi_auroc':>9}")
    for width in args.widths:
        cfg = TrainConfig(
            hidden_width=width,
            vi_epochs=args.vi_epochs,
            warmup_epochs=args.warmup_epochs,
            map_epochs=args.map_epochs,
            seed=args.seed,
        )
        result = run_benchmark(pairs, cfg, parallelism=args.parallelism)
        bi = "n/a" if result.bi_auroc is None else f"{result.bi_auroc:9.3f}"
        print(f"{width:>6} {result.accuracy:9.3f} {bi}")


if __name__ == "__main__":
    main()
