#!/usr/bin/env python3
"""
Adult census utility experiment

Trains one generator per noise scale, then fits a random forest on generated
rows and scores it on held-out real rows (train on synthetic, test on real).
The table also lists a non-private GAN (epsilon = inf) and a forest trained on
the real training rows. Test rows are balanced 50/50 in income, so 0.5 is
chance.

Prepare the CSV first:
    python scripts/prepare_uci.py --dataset adult --raw adult.data --out data/adult.csv

Usage:
    python scripts/adult_tstr.py --data data/adult.csv [--sigmas 0.8,1.1,2.0] [--out runs/adult]
"""

import sys
import math
import argparse
from pathlib import Path

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from dpgan.data import balanced_split, encode, load_csv, load_schema
from dpgan.dp_optim import DpSgdConfig
from dpgan.errors import DpganError
from dpgan.forest import ForestConfig, classify, random_forest_train
from dpgan.gan import GanArchitecture
from dpgan.settings import configure_logging
from dpgan.training import TrainLoopConfig, train
from dpgan.utility import tstr_utility, write_report

LABEL = 'income'


def main():
    parser = argparse.ArgumentParser(description='TSTR utility of private generators on UCI adult')
    parser.add_argument('--data', required=True, help='Prepared adult CSV')
    parser.add_argument('--schema', default=str(PROJECT_ROOT / 'data' / 'schemas' / 'adult.schema'))
    parser.add_argument('--sigmas', default='0.8,1.1,2.0', help='Comma-separated noise scales')
    parser.add_argument('--epsilon', type=float, default=10.0, help='Budget cap for every private run')
    parser.add_argument('--iterations', type=int, default=500)
    parser.add_argument('--lot', type=int, default=64)
    parser.add_argument('--clip', type=float, default=1.0)
    parser.add_argument('--trees', type=int, default=100)
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--out', default=None, help='Write report.csv to this directory')
    args = parser.parse_args()
    configure_logging()

    try:
        schema = load_schema(args.schema)
        table = load_csv(args.data, schema)
        train_rows, test_rows = balanced_split(table, LABEL, 0.3, args.seed)
    except DpganError as e:
        print(f"✗ {e}")
        sys.exit(e.exit_code)

    forest_cfg = ForestConfig(n_trees=args.trees, seed=args.seed)
    arch = GanArchitecture(schema, noise_dim=32, hidden_sizes=(128, 128), critic_hidden_sizes=(128, 128))
    dataset = encode(train_rows, schema)

    print("=" * 80)
    print("Adult TSTR Experiment")
    print("=" * 80)
    print(f"Train rows: {len(train_rows)}, test rows: {len(test_rows)} (balanced)")
    print(f"C: {args.clip}, L: {args.lot}, budget cap: {args.epsilon}")
    print("=" * 80)
    print()

    real_forest = random_forest_train(train_rows, LABEL, forest_cfg, schema)
    _, real_accuracy = classify(real_forest, test_rows, LABEL, schema)
    rows = [('real data', math.inf, real_accuracy)]

    runs = [(float(s), True) for s in args.sigmas.split(',') if s.strip()] + [(0.0, False)]
    for sigma, private in runs:
        name = f"DP-GAN sigma={sigma:g}" if private else "GAN (non-private)"
        print(f"[{name}]")
        cfg = TrainLoopConfig(
            dp=DpSgdConfig(clip_bound=args.clip, noise_scale=sigma, lot_size=args.lot),
            epsilon_target=args.epsilon if private else math.inf,
            max_generator_iterations=args.iterations,
            metrics_every=50,
            private=private,
        )
        try:
            model, trace, spent = train(dataset, arch, cfg, args.seed)
            report = tstr_utility(
                model, test_rows, forest_cfg, len(train_rows), args.seed,
                schema=schema, label=LABEL, epsilon=spent.epsilon,
            )
        except DpganError as e:
            print(f"  ✗ {type(e).__name__}: {e}")
            rows.append((name, math.nan, math.nan))
            continue
        print(f"  ✓ {len(trace)} iterations, epsilon {spent.epsilon:.4f}, TSTR accuracy {report.tstr_accuracy:.4f}")
        rows.append((name, spent.epsilon, report.tstr_accuracy))

    print()
    print("=" * 80)
    print(f"{'model':28s}{'epsilon':>12s}{'accuracy':>12s}")
    print("-" * 80)
    for name, epsilon, accuracy in rows:
        print(f"{name:28s}{epsilon:12.4f}{accuracy:12.4f}")
    print("=" * 80)

    if args.out:
        metrics = {}
        for name, epsilon, accuracy in rows:
            key = name.replace(' ', '_')
            metrics[f"{key}/epsilon"] = epsilon
            metrics[f"{key}/accuracy"] = accuracy
        path = write_report(Path(args.out) / 'report.csv', 'adult_tstr', metrics)
        print(f"Report: {path}")


if __name__ == "__main__":
    main()
