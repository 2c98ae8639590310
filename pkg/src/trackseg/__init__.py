"""Multiscale segmentation of dark linear features in grayscale micrographs.

The pipeline decomposes an image into full-resolution detail planes with
the à-trous B3-spline transform, accumulates the noise-free planes into
candidate evidence maps, binarizes each, and selects the decomposition
depth whose mask best matches ground truth by Matthews correlation.
"""

__version__ = "0.1.0"

from .errors import (
    CorruptFile,
    CropTooLarge,
    DimensionMismatch,
    EmptyInput,
    ImageIOError,
    ImageTooSmall,
    InvalidLevel,
    PadTooLarge,
    TooFewLevels,
    TrackSegError,
    UnsupportedFormat,
)
from .imagecore import (
    crop_center,
    load_image,
    load_mask,
    mirror_pad,
    save_float_map,
    save_image,
    save_mask,
    to_grayscale,
)
from .metrics import (
    ConfusionCounts,
    LevelMetrics,
    LevelReport,
    best_level,
    comparison_overlay,
    confusion,
    mcc,
    precision_recall_accuracy,
    select_optimal,
)
from .segmentation import (
    MIN_DETAIL_LEVEL,
    DetailSum,
    SegmentationConfig,
    binarize,
    detail_sums,
    segment_sweep,
)
from .starlet import (
    BASE_FILTER_1D,
    Filter2D,
    StarletDecomposition,
    convolve_same,
    decompose,
    dilated_filter,
)
