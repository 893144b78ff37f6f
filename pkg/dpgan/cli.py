#!/usr/bin/env python3
"""
Command-line interface

Subcommands: train, generate, evaluate, attack, accounting, synth-data.
Exit codes: 0 success, 1 config/usage, 2 data, 3 numeric failure.
"""

import argparse
import logging
import sys
from typing import Callable, List, Optional

try:
    from .errors import ConfigError, DpganError
    from .services.accounting_service import run_accounting
    from .services.attack_service import run_attack
    from .services.evaluation_service import DISTANCE, UTILITY, run_evaluation
    from .services.generation_service import run_generation
    from .services.synthetic_data_service import KINDS, run_synth_data
    from .services.training_service import resolve_config, run_training
    from .settings import DEFAULT_DELTA, LAMBDA_MAX, OUTPUT_DIR, configure_logging
except ImportError:
    from dpgan.errors import ConfigError, DpganError
    from dpgan.services.accounting_service import run_accounting
    from dpgan.services.attack_service import run_attack
    from dpgan.services.evaluation_service import DISTANCE, UTILITY, run_evaluation
    from dpgan.services.generation_service import run_generation
    from dpgan.services.synthetic_data_service import KINDS, run_synth_data
    from dpgan.services.training_service import resolve_config, run_training
    from dpgan.settings import DEFAULT_DELTA, LAMBDA_MAX, OUTPUT_DIR, configure_logging

# Create logger for this module
logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Usage errors become ConfigError so they exit with code 1"""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _guarded(action: Callable[[], None]) -> int:
    try:
        action()
        return 0
    except DpganError as e:
        logger.error(f"{type(e).__name__}: {e}", exc_info=True)
        return e.exit_code


def cmd_train(config, seed: Optional[int] = None, out: Optional[str] = None, strip_discriminator: bool = False) -> int:
    def action():
        outcome = run_training(resolve_config(config, seed, out), strip_discriminator)
        print(f"checkpoint: {outcome.checkpoint}")
        print(f"generator iterations: {len(outcome.trace)}")
        print(f"epsilon: {outcome.spent.epsilon!r} (delta {outcome.spent.delta!r})")
    return _guarded(action)


def cmd_generate(checkpoint, count: int, seed: int, out) -> int:
    def action():
        if count < 0:
            raise ConfigError(f"--count must be nonnegative, got {count}")
        print(run_generation(checkpoint, count, seed, out))
    return _guarded(action)


def cmd_evaluate(checkpoint, data, schema, mode: str, seed: int = 0, out=None, label=None, test=None,
                 count: Optional[int] = None, run_id: str = 'eval') -> int:
    def action():
        path, metrics = run_evaluation(
            checkpoint, data, schema, mode, seed, out or OUTPUT_DIR, run_id=run_id,
            label=label, test_csv=test, n_synthetic=count,
        )
        for name, value in metrics.items():
            print(f"{name}: {value!r}")
        print(f"report: {path}")
    return _guarded(action)


def cmd_attack(checkpoint, members, nonmembers, out=None, run_id: str = 'attack') -> int:
    def action():
        path, result = run_attack(checkpoint, members, nonmembers, out or OUTPUT_DIR, run_id)
        for name, value in result.summary().items():
            print(f"{name}: {value!r}")
        print(f"report: {path}")
    return _guarded(action)


def cmd_accounting(q: float, sigma: float, steps: int, delta: float = DEFAULT_DELTA,
                   lambda_max: int = LAMBDA_MAX) -> int:
    def action():
        spent = run_accounting(q, sigma, steps, delta, lambda_max)
        print(f"epsilon: {spent.epsilon!r}")
        print(f"best lambda: {spent.best_lambda}")
    return _guarded(action)


def cmd_synth_data(kind: str, n: int, seed: int, out, length: Optional[int] = None, regions: int = 4) -> int:
    def action():
        extra = {} if length is None else {'length': length}
        csv_path, schema_path = run_synth_data(kind, n, seed, out, n_regions=regions, **extra)
        print(f"data: {csv_path}")
        print(f"schema: {schema_path}")
    return _guarded(action)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='dpgan', description='Differentially private GAN toolkit')
    parser.add_argument('--log-level', default=None, help='Override DPGAN_LOG_LEVEL')
    commands = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)

    train = commands.add_parser('train', help='Train a generator from a run config')
    train.add_argument('--config', required=True)
    train.add_argument('--seed', type=int, default=None, help='Override [run] seed')
    train.add_argument('--out', default=None, help='Override [run] output_dir')
    train.add_argument('--strip-discriminator', action='store_true',
                       help='Write the checkpoint without critic parameters (release artifact)')

    generate = commands.add_parser('generate', help='Sample rows from a checkpoint')
    generate.add_argument('--checkpoint', required=True)
    generate.add_argument('--count', type=int, required=True)
    generate.add_argument('--seed', type=int, default=0)
    generate.add_argument('--out', required=True, help='Output CSV path')

    evaluate = commands.add_parser('evaluate', help='Distance or utility report for a checkpoint')
    evaluate.add_argument('--checkpoint', required=True)
    evaluate.add_argument('--data', required=True, help='Real data CSV')
    evaluate.add_argument('--schema', required=True)
    evaluate.add_argument('--mode', choices=[DISTANCE, UTILITY], default=DISTANCE)
    evaluate.add_argument('--seed', type=int, default=0)
    evaluate.add_argument('--out', default=None, help='Report directory')
    evaluate.add_argument('--label', default=None, help='Target column (utility mode)')
    evaluate.add_argument('--test', default=None, help='Held-out real CSV (utility mode)')
    evaluate.add_argument('--count', type=int, default=None, help='Synthetic rows to draw')
    evaluate.add_argument('--run-id', default='eval')

    attack = commands.add_parser('attack', help='Membership inference with the critic')
    attack.add_argument('--checkpoint', required=True)
    attack.add_argument('--members', required=True)
    attack.add_argument('--nonmembers', required=True)
    attack.add_argument('--out', default=None, help='Report directory')
    attack.add_argument('--run-id', default='attack')

    accounting = commands.add_parser('accounting', help='Epsilon for (q, sigma, steps, delta)')
    accounting.add_argument('--q', type=float, required=True)
    accounting.add_argument('--sigma', type=float, required=True)
    accounting.add_argument('--steps', type=int, required=True)
    accounting.add_argument('--delta', type=float, default=DEFAULT_DELTA)
    accounting.add_argument('--lambda-max', type=int, default=LAMBDA_MAX)

    synth = commands.add_parser('synth-data', help='Write a benchmark dataset and its schema')
    synth.add_argument('--kind', required=True, help=f"One of {', '.join(KINDS)}")
    synth.add_argument('--n', type=int, required=True)
    synth.add_argument('--seed', type=int, default=0)
    synth.add_argument('--out', required=True, help='Output CSV path')
    synth.add_argument('--length', type=int, default=None, help='Series length (timeseries)')
    synth.add_argument('--regions', type=int, default=4, help='Region labels (timeseries)')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        print(str(e), file=sys.stderr)
        return e.exit_code
    configure_logging(args.log_level)

    if args.command == 'train':
        return cmd_train(args.config, args.seed, args.out, args.strip_discriminator)
    if args.command == 'generate':
        return cmd_generate(args.checkpoint, args.count, args.seed, args.out)
    if args.command == 'evaluate':
        return cmd_evaluate(args.checkpoint, args.data, args.schema, args.mode, args.seed, args.out,
                            args.label, args.test, args.count, args.run_id)
    if args.command == 'attack':
        return cmd_attack(args.checkpoint, args.members, args.nonmembers, args.out, args.run_id)
    if args.command == 'accounting':
        return cmd_accounting(args.q, args.sigma, args.steps, args.delta, args.lambda_max)
    return cmd_synth_data(args.kind, args.n, args.seed, args.out, args.length, args.regions)


if __name__ == '__main__':
    sys.exit(main())
