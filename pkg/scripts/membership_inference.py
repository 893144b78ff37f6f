#!/usr/bin/env python3
"""
Membership-inference experiment

Trains a non-private and a private generator on a small member set, then asks
each critic to rank members above an equal number of unseen rows from the same
source. Accuracy near 0.5 means the critic gives the attacker nothing.

Usage:
    python scripts/membership_inference.py [--members 200] [--iterations 1000]
    python scripts/membership_inference.py --data data/adult.csv --schema data/schemas/adult.schema
"""

import sys
import math
import argparse
from pathlib import Path

import numpy as np

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from dpgan.attack import membership_attack
from dpgan.data import EncodedDataset, encode, gaussian_mixture_schema, load_csv, load_schema, make_gaussian_mixture
from dpgan.dp_optim import DpSgdConfig
from dpgan.errors import ConfigError, DataError, DpganError
from dpgan.gan import GanArchitecture
from dpgan.settings import configure_logging
from dpgan.training import TrainLoopConfig, train


def load_rows(args):
    """Members and non-members as encoded rows, plus the schema"""
    if args.data:
        if not args.schema:
            raise ConfigError("--data needs --schema")
        schema = load_schema(args.schema)
        table = load_csv(args.data, schema)
    else:
        schema = gaussian_mixture_schema()
        table = make_gaussian_mixture(4 * args.members, args.seed)
    if len(table) < 2 * args.members:
        raise DataError(f"Need at least {2 * args.members} rows, found {len(table)}")
    order = np.random.default_rng(args.seed).permutation(len(table))
    rows = encode(table, schema).rows[order]
    return schema, rows[:args.members], rows[args.members:2 * args.members]


def main():
    parser = argparse.ArgumentParser(description='Critic-score membership inference')
    parser.add_argument('--data', default=None, help='CSV to draw members from (default: six Gaussians)')
    parser.add_argument('--schema', default=None)
    parser.add_argument('--members', type=int, default=200)
    parser.add_argument('--iterations', type=int, default=1000)
    parser.add_argument('--sigma', type=float, default=1.1)
    parser.add_argument('--epsilon', type=float, default=8.0)
    parser.add_argument('--lot', type=int, default=32)
    parser.add_argument('--seed', type=int, default=0)
    args = parser.parse_args()
    configure_logging()

    try:
        schema, members, non_members = load_rows(args)
    except DpganError as e:
        print(f"✗ {e}")
        sys.exit(e.exit_code)

    arch = GanArchitecture(schema, noise_dim=16, hidden_sizes=(128, 128), critic_hidden_sizes=(256, 256))
    dataset = EncodedDataset(members, schema)

    print("=" * 80)
    print("Membership-Inference Experiment")
    print("=" * 80)
    print(f"Members: {len(members)}, non-members: {len(non_members)}, iterations: {args.iterations}")
    print("=" * 80)
    print()

    runs = [
        ('GAN (non-private)', DpSgdConfig(clip_bound=1.0, noise_scale=0.0, lot_size=args.lot), False, math.inf),
        (f"DP-GAN sigma={args.sigma:g}", DpSgdConfig(clip_bound=1.0, noise_scale=args.sigma, lot_size=args.lot),
         True, args.epsilon),
    ]
    results = []
    for name, dp, private, budget in runs:
        print(f"[{name}]")
        cfg = TrainLoopConfig(
            dp=dp, epsilon_target=budget, max_generator_iterations=args.iterations, metrics_every=100,
            private=private,
        )
        try:
            model, _, spent = train(dataset, arch, cfg, args.seed)
            result = membership_attack(model, members, non_members)
        except DpganError as e:
            print(f"  ✗ {type(e).__name__}: {e}")
            continue
        print(f"  ✓ accuracy {result.accuracy:.4f}, AUC {result.auc:.4f}")
        results.append((name, spent.epsilon, result))

    print()
    print("=" * 80)
    print(f"{'model':28s}{'epsilon':>10s}{'best acc':>10s}{'median acc':>12s}{'AUC':>8s}")
    print("-" * 80)
    for name, epsilon, result in results:
        print(f"{name:28s}{epsilon:10.4f}{result.accuracy:10.4f}{result.median_accuracy:12.4f}{result.auc:8.4f}")
    print("=" * 80)


if __name__ == "__main__":
    main()
