"""Candidate segmentations from accumulated detail planes.

The two finest detail levels carry mostly noise and are always discarded;
levels three and up are accumulated into evidence maps, one per candidate
depth, and each map is binarized by a sign test around a configurable
threshold.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import TooFewLevels
from .starlet import decompose

# Detail levels below this are always dropped; not configurable, the
# accumulation rule starts at level 3 by definition of the method.
MIN_DETAIL_LEVEL = 3

POLARITIES = ("dark", "bright")


@dataclass(frozen=True)
class SegmentationConfig:
    """Sweep settings: decomposition depth, feature polarity, threshold.

    ``polarity="dark"`` marks pixels whose accumulated detail value falls
    below ``-threshold`` (features darker than their surroundings);
    ``"bright"`` marks values above ``+threshold``.
    """

    max_level: int = 9
    polarity: str = "dark"
    threshold: float = 0.0

    def __post_init__(self):
        if self.max_level < MIN_DETAIL_LEVEL:
            raise ValueError(
                f"max_level must be at least {MIN_DETAIL_LEVEL}, got {self.max_level}"
            )
        if self.polarity not in POLARITIES:
            raise ValueError(f"polarity must be one of {POLARITIES}, got {self.polarity!r}")
        if not math.isfinite(self.threshold):
            raise ValueError(f"threshold must be finite, got {self.threshold!r}")


class DetailSum(NamedTuple):
    """Accumulated detail planes from level 3 through `level`."""

    level: int
    plane: np.ndarray


def detail_sums(decomposition, config=SegmentationConfig()):
    """Accumulate detail planes into one evidence map per candidate level.

    Returns ``DetailSum`` records for levels 3 through ``config.max_level``,
    computed in a single running pass, so consecutive maps differ by
    exactly one detail plane.

    Raises
    ------
    TooFewLevels
        If the decomposition has fewer than 3 detail planes, or fewer than
        ``config.max_level``.
    """
    if decomposition.levels < MIN_DETAIL_LEVEL:
        raise TooFewLevels(
            f"need at least {MIN_DETAIL_LEVEL} detail planes, got {decomposition.levels}"
        )
    if config.max_level > decomposition.levels:
        raise TooFewLevels(
            f"config asks for level {config.max_level} but the decomposition "
            f"has only {decomposition.levels} planes"
        )
    sums = []
    acc = np.zeros_like(decomposition.details[0])
    for level in range(MIN_DETAIL_LEVEL, config.max_level + 1):
        acc = acc + decomposition.details[level - 1]
        sums.append(DetailSum(level=level, plane=acc))
    return sums


def binarize(detail, config=SegmentationConfig()):
    """Threshold an evidence map into a boolean mask.

    Accepts a ``DetailSum`` or a bare plane. The inequality is strict, so
    an all-zero plane yields an empty mask under either polarity.
    """
    plane = detail.plane if isinstance(detail, DetailSum) else np.asarray(detail)
    if config.polarity == "dark":
        return plane < -config.threshold
    return plane > config.threshold


def segment_sweep(image, config=SegmentationConfig()):
    """Decompose, accumulate, and binarize; one mask per candidate level.

    Returns a list of ``(level, mask)`` pairs for levels 3 through
    ``config.max_level``. Propagates ``ImageTooSmall`` from the
    decomposition and ``TooFewLevels`` from the accumulation.
    """
    dec = decompose(image, config.max_level)
    return [(s.level, binarize(s, config)) for s in detail_sums(dec, config)]
