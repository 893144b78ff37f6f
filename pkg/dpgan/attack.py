#!/usr/bin/env python3
"""
White-box membership inference: rank records by critic output

Training members tend to receive higher critic scores than unseen records
when the critic has memorised them.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from sklearn.metrics import auc, roc_curve

try:
    from .errors import DataError
    from .gan import GanModel, critic_scores
except ImportError:
    from errors import DataError
    from gan import GanModel, critic_scores

# Create logger for this module
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AttackResult:
    """
    Attributes:
        scores: critic output per record
        labels: 1 for members, 0 for non-members
        accuracy: best balanced accuracy over all thresholds
        median_accuracy: balanced accuracy thresholding at the median score
        fpr, tpr: ROC points from (0, 0) to (1, 1)
        auc: trapezoidal area under the ROC
    """
    scores: np.ndarray
    labels: np.ndarray
    accuracy: float
    median_accuracy: float
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float

    @property
    def roc(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def summary(self) -> dict:
        return {'accuracy': self.accuracy, 'median_accuracy': self.median_accuracy, 'auc': self.auc}

    def write_roc(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame({'fpr': self.fpr, 'tpr': self.tpr}).to_csv(path, index=False, lineterminator='\n')
        return path

    def write_scores(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame({'member': self.labels, 'score': self.scores}).to_csv(path, index=False, lineterminator='\n')
        return path


def _balanced_accuracy(predicted: np.ndarray, labels: np.ndarray) -> float:
    tpr = np.mean(predicted[labels == 1])
    tnr = np.mean(~predicted[labels == 0])
    return float((tpr + tnr) / 2.0)


def attack_from_scores(member_scores, non_member_scores) -> AttackResult:
    """
    Evaluate a score-ranking attack

    Tied scores share one ROC point, so the area counts a tie as half a win.
    """
    member_scores = np.asarray(member_scores, dtype=np.float64).reshape(-1)
    non_member_scores = np.asarray(non_member_scores, dtype=np.float64).reshape(-1)
    if member_scores.size == 0 or non_member_scores.size == 0:
        raise DataError("Membership attack needs nonempty member and non-member sets")
    scores = np.concatenate([member_scores, non_member_scores])
    labels = np.concatenate([np.ones(member_scores.size, dtype=np.int64), np.zeros(non_member_scores.size, dtype=np.int64)])

    fpr, tpr, _ = roc_curve(labels, scores, drop_intermediate=False)
    area = float(auc(fpr, tpr))
    # Each ROC point is a threshold; balanced accuracy there is (tpr + 1 - fpr) / 2
    best = float(np.max((tpr + 1.0 - fpr) / 2.0))
    median = _balanced_accuracy(scores > np.median(scores), labels)
    return AttackResult(scores, labels, best, median, fpr, tpr, area)


def membership_attack(model: GanModel, members: np.ndarray, non_members: np.ndarray) -> AttackResult:
    """Score encoded member and non-member rows with the model's critic"""
    model.require_critic()
    members = np.asarray(members, dtype=np.float64)
    non_members = np.asarray(non_members, dtype=np.float64)
    width = model.architecture.output_width
    for name, rows in (('members', members), ('non-members', non_members)):
        if rows.ndim != 2 or rows.shape[1] != width:
            raise DataError(f"{name} have encoded shape {rows.shape}; the model expects width {width}")
    result = attack_from_scores(critic_scores(model, members), critic_scores(model, non_members))
    logger.info(
        f"Membership attack on {len(members)} + {len(non_members)} rows: "
        f"accuracy {result.accuracy:.4f}, AUC {result.auc:.4f}"
    )
    return result
