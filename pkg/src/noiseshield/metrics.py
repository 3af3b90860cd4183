"""Mask-quality metrics for spatial localization.

Both masks use the convention 1 = tampered. Degenerate denominators return
0, except when prediction and ground truth are both empty, which counts as
a perfect (all-ones) result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


class MetricsError(ValueError):
    """Raised on shape mismatches or degenerate inputs."""


@dataclass(frozen=True)
class MaskMetrics:
    f1: float
    precision: float
    recall: float
    auc: float
    iou: float

    @property
    def average(self) -> float:
        return (self.f1 + self.precision + self.recall + self.auc + self.iou) / 5.0

    def to_dict(self) -> dict:
        return {
            "f1": self.f1,
            "precision": self.precision,
            "recall": self.recall,
            "auc": self.auc,
            "iou": self.iou,
            "average": self.average,
        }


def binary_mask_metrics(
    pred: np.ndarray, gt: np.ndarray
) -> tuple[float, float, float, float]:
    """(f1, precision, recall, iou) between binary tamper masks."""
    pred = np.asarray(pred).astype(bool)
    gt = np.asarray(gt).astype(bool)
    if pred.shape != gt.shape:
        raise MetricsError(f"shape mismatch: {pred.shape} vs {gt.shape}")
    tp = int(np.sum(pred & gt))
    fp = int(np.sum(pred & ~gt))
    fn = int(np.sum(~pred & gt))
    if not pred.any() and not gt.any():
        return 1.0, 1.0, 1.0, 1.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    iou = tp / (tp + fp + fn) if tp + fp + fn else 0.0
    return f1, precision, recall, iou


def auc(pred_soft: np.ndarray, gt: np.ndarray) -> float:
    """Mann-Whitney AUC: probability a random tampered location outscores a
    random intact one, counting ties as half. Scores must be oriented so
    larger means more tampered."""
    scores = np.asarray(pred_soft, dtype=np.float64).reshape(-1)
    labels = np.asarray(gt).astype(bool).reshape(-1)
    if scores.shape != labels.shape:
        raise MetricsError(f"shape mismatch: {scores.shape} vs {labels.shape}")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricsError("AUC undefined: ground truth contains a single class")
    ranks = rankdata(scores)  # average ranks on ties
    rank_sum = float(ranks[labels].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def mask_metrics(
    pred_mask: np.ndarray, soft_tamper: np.ndarray, gt_mask: np.ndarray
) -> MaskMetrics:
    """Bundle the four binary metrics with AUC from the soft tamper scores."""
    f1, precision, recall, iou = binary_mask_metrics(pred_mask, gt_mask)
    return MaskMetrics(f1, precision, recall, auc(soft_tamper, gt_mask), iou)
