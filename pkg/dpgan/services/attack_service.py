#!/usr/bin/env python3
"""
Attack service: membership inference against a checkpoint's critic
"""

import logging
from pathlib import Path
from typing import Tuple

try:
    from ..attack import AttackResult, membership_attack
    from ..checkpoint import load_checkpoint
    from ..data import encode, load_csv
    from ..run_config import write_command_config
    from ..utility import write_report
except ImportError:
    from dpgan.attack import AttackResult, membership_attack
    from dpgan.checkpoint import load_checkpoint
    from dpgan.data import encode, load_csv
    from dpgan.run_config import write_command_config
    from dpgan.utility import write_report

# Create logger for this module
logger = logging.getLogger(__name__)

REPORT_NAME = 'attack_report.csv'
ROC_NAME = 'roc.csv'
SCORES_NAME = 'scores.csv'


def run_attack(checkpoint, members_csv, non_members_csv, out_dir, run_id: str = 'attack') -> Tuple[Path, AttackResult]:
    """
    Score member and non-member CSVs with the critic

    Writes attack_report.csv (accuracy, median_accuracy, auc), roc.csv,
    scores.csv and the resolved settings under ``out_dir``.

    Raises:
        ConfigError: the checkpoint was released without its discriminator
    """
    model = load_checkpoint(checkpoint)
    model.require_critic()
    schema = model.schema
    members = encode(load_csv(members_csv, schema), schema).rows
    non_members = encode(load_csv(non_members_csv, schema), schema).rows

    result = membership_attack(model, members, non_members)
    out_dir = Path(out_dir)
    path = write_report(out_dir / REPORT_NAME, run_id, result.summary())
    result.write_roc(out_dir / ROC_NAME)
    result.write_scores(out_dir / SCORES_NAME)
    settings = {
        'checkpoint': Path(checkpoint).resolve(), 'members': Path(members_csv).resolve(),
        'nonmembers': Path(non_members_csv).resolve(), 'run_id': run_id,
    }
    write_command_config(out_dir, 'attack', settings, checkpoint)
    return path, result
