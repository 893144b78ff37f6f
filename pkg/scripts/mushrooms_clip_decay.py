#!/usr/bin/env python3
"""
Mushrooms clipping-decay experiment

Shrinking the clipping bound C as the critic converges lowers the noise added
per step (its std is sigma * C) without changing the privacy cost, which only
depends on sigma. This script trains with several decay factors under the same
noise scale and compares TSTR accuracy on the edible/poisonous label.

Prepare the CSV first:
    python scripts/prepare_uci.py --dataset mushrooms --raw agaricus-lepiota.data --out data/mushrooms.csv

Usage:
    python scripts/mushrooms_clip_decay.py --data data/mushrooms.csv [--decays 1.0,0.995,0.99]
"""

import sys
import argparse
from pathlib import Path

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from dpgan.data import balanced_split, encode, load_csv, load_schema
from dpgan.dp_optim import DpSgdConfig
from dpgan.errors import DpganError
from dpgan.forest import ForestConfig
from dpgan.gan import GanArchitecture
from dpgan.settings import configure_logging
from dpgan.training import TrainLoopConfig, train
from dpgan.utility import tstr_utility

LABEL = 'class'


def main():
    parser = argparse.ArgumentParser(description='Effect of clipping-bound decay on generator utility')
    parser.add_argument('--data', required=True, help='Prepared mushrooms CSV')
    parser.add_argument('--schema', default=str(PROJECT_ROOT / 'data' / 'schemas' / 'mushrooms.schema'))
    parser.add_argument('--decays', default='1.0,0.995,0.99', help='Comma-separated decay factors')
    parser.add_argument('--sigma', type=float, default=1.1)
    parser.add_argument('--clip', type=float, default=1.0, help='Initial clipping bound')
    parser.add_argument('--lot', type=int, default=64)
    parser.add_argument('--epsilon', type=float, default=8.0)
    parser.add_argument('--iterations', type=int, default=400)
    parser.add_argument('--seed', type=int, default=0)
    args = parser.parse_args()
    configure_logging()

    try:
        schema = load_schema(args.schema)
        train_rows, test_rows = balanced_split(load_csv(args.data, schema), LABEL, 0.3, args.seed)
    except DpganError as e:
        print(f"✗ {e}")
        sys.exit(e.exit_code)

    dataset = encode(train_rows, schema)
    arch = GanArchitecture(schema, noise_dim=32, hidden_sizes=(128,), critic_hidden_sizes=(128,))
    forest_cfg = ForestConfig(n_trees=50, seed=args.seed)

    print("=" * 80)
    print("Mushrooms Clipping-Decay Experiment")
    print("=" * 80)
    print(f"Train rows: {len(train_rows)}, test rows: {len(test_rows)}, sigma: {args.sigma}, C0: {args.clip}")
    print("=" * 80)
    print()

    results = []
    for decay in (float(d) for d in args.decays.split(',') if d.strip()):
        print(f"[decay {decay:g}]")
        cfg = TrainLoopConfig(
            dp=DpSgdConfig(clip_bound=args.clip, noise_scale=args.sigma, lot_size=args.lot, clip_decay=decay),
            epsilon_target=args.epsilon,
            max_generator_iterations=args.iterations,
            metrics_every=50,
        )
        try:
            model, trace, spent = train(dataset, arch, cfg, args.seed)
            report = tstr_utility(
                model, test_rows, forest_cfg, len(train_rows), args.seed, schema=schema, label=LABEL,
                epsilon=spent.epsilon,
            )
        except DpganError as e:
            print(f"  ✗ {type(e).__name__}: {e}")
            continue
        final_clip = trace.clip_bounds[-1] if len(trace) else args.clip
        print(f"  ✓ {len(trace)} iterations, final C {final_clip:.4f}, accuracy {report.tstr_accuracy:.4f}")
        results.append((decay, final_clip, spent.epsilon, report.tstr_accuracy))

    print()
    print("=" * 80)
    print(f"{'decay':>10s}{'final C':>12s}{'epsilon':>12s}{'accuracy':>12s}")
    print("-" * 80)
    for decay, final_clip, epsilon, accuracy in results:
        print(f"{decay:10g}{final_clip:12.4f}{epsilon:12.4f}{accuracy:12.4f}")
    print("=" * 80)
    epsilons = {round(r[2], 9) for r in results}
    print(f"  {'✓' if len(epsilons) <= 1 else '✗'} epsilon independent of the decay factor")
    print("=" * 80)


if __name__ == "__main__":
    main()
