"""Mask-vs-ground-truth evaluation and optimal level selection.

Counts come from pixelwise comparison of a predicted mask against ground
truth. Precision, recall, and accuracy are reported in percent; the
Matthews correlation coefficient is the primary selection score because it
stays informative under the heavy class imbalance typical of sparse
foreground masks.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyInput

OVERLAY_TRUE_POSITIVE = (0, 255, 0)
OVERLAY_FALSE_POSITIVE = (255, 0, 0)
OVERLAY_FALSE_NEGATIVE = (0, 0, 255)


@dataclass(frozen=True)
class ConfusionCounts:
    """Pixel tallies from comparing a predicted mask with ground truth."""

    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self):
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class LevelMetrics:
    """Per-level scores; all four values are in percent."""

    level: int
    precision: float
    recall: float
    accuracy: float
    mcc: float


@dataclass
class LevelReport:
    """All per-level metrics plus the selected level and its mask."""

    per_level: list
    optimal_level: int
    optimal_mask: np.ndarray | None = None


def confusion(pred, gt):
    """Count TP/TN/FP/FN between two same-shaped boolean masks."""
    p = np.asarray(pred, dtype=bool)
    g = np.asarray(gt, dtype=bool)
    if p.shape != g.shape:
        raise DimensionMismatch(
            f"predicted mask is {p.shape[1]}x{p.shape[0]} but ground truth "
            f"is {g.shape[1]}x{g.shape[0]}"
        )
    return ConfusionCounts(
        tp=int(np.count_nonzero(p & g)),
        tn=int(np.count_nonzero(~p & ~g)),
        fp=int(np.count_nonzero(p & ~g)),
        fn=int(np.count_nonzero(~p & g)),
    )


def precision_recall_accuracy(counts):
    """Return (precision, recall, accuracy) in percent.

    A metric whose denominator is zero is defined as 0: a prediction with
    no positive pixels carries no retrieval signal.
    """
    if counts.total == 0:
        raise EmptyInput("confusion counts cover no pixels")
    tp, tn, fp, fn = counts.tp, counts.tn, counts.fp, counts.fn
    precision = 100.0 * tp / (tp + fp) if tp + fp else 0.0
    recall = 100.0 * tp / (tp + fn) if tp + fn else 0.0
    accuracy = 100.0 * (tp + tn) / counts.total
    return precision, recall, accuracy


def mcc(counts):
    """Matthews correlation coefficient in [-1, 1].

    Counts are promoted to double precision before any product so
    gigapixel tallies cannot overflow. If any factor under the square
    root is zero the coefficient is defined as 0 (a one-class prediction
    carries no correlation signal).
    """
    if counts.total == 0:
        raise EmptyInput("confusion counts cover no pixels")
    tp, tn = float(counts.tp), float(counts.tn)
    fp, fn = float(counts.fp), float(counts.fn)
    factors = (tp + fn) * (tp + fp) * (tn + fp) * (tn + fn)
    if factors == 0.0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(factors)


def best_level(scored_levels):
    """Pick the level with the highest score; ties go to the lowest level.

    `scored_levels` is an iterable of ``(level, score)`` pairs. The result
    does not depend on input order.
    """
    best = None
    for level, score in scored_levels:
        if best is None or score > best[1] or (score == best[1] and level < best[0]):
            best = (level, score)
    if best is None:
        raise EmptyInput("no levels to select from")
    return best[0]


def select_optimal(rows, masks=None):
    """Score every level and select the one with the highest MCC.

    Parameters
    ----------
    rows : iterable of (level, ConfusionCounts)
        One entry per candidate level.
    masks : mapping from level to mask, optional
        When given, the report carries the mask of the selected level.

    Returns
    -------
    LevelReport
    """
    rows = list(rows)
    if not rows:
        raise EmptyInput("no levels to select from")
    per_level = []
    for level, counts in rows:
        precision, recall, accuracy = precision_recall_accuracy(counts)
        per_level.append(
            LevelMetrics(
                level=level,
                precision=precision,
                recall=recall,
                accuracy=accuracy,
                mcc=100.0 * mcc(counts),
            )
        )
    optimal = best_level((m.level, m.mcc) for m in per_level)
    optimal_mask = None if masks is None else masks.get(optimal)
    return LevelReport(per_level=per_level, optimal_level=optimal, optimal_mask=optimal_mask)


def comparison_overlay(pred, gt):
    """Render prediction-vs-truth agreement as an RGB image.

    True positives are green, false positives red, false negatives blue,
    and true negatives black.
    """
    p = np.asarray(pred, dtype=bool)
    g = np.asarray(gt, dtype=bool)
    if p.shape != g.shape:
        raise DimensionMismatch(
            f"predicted mask is {p.shape[1]}x{p.shape[0]} but ground truth "
            f"is {g.shape[1]}x{g.shape[0]}"
        )
    out = np.zeros(p.shape + (3,), dtype=np.uint8)
    out[p & g] = OVERLAY_TRUE_POSITIVE
    out[p & ~g] = OVERLAY_FALSE_POSITIVE
    out[~p & g] = OVERLAY_FALSE_NEGATIVE
    return out
