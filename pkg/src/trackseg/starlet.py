"""Starlet decomposition: dilated B3-spline filters and the à-trous transform.

The transform repeatedly smooths an image with increasingly dilated
versions of the separable B3-spline kernel and keeps the difference
between successive smoothings as one full-resolution detail plane per
level. Summing the smooth residual and every detail plane reproduces the
input, so the decomposition is its own inverse.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ImageTooSmall, InvalidLevel

# 1-D B3-spline smoothing taps; the five dyadic fractions sum to exactly 1.0.
BASE_FILTER_1D = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0

# The dilated filter half-width may exceed the shortest image side by at
# most this factor; beyond it the tiled boundary reflection folds the image
# more than twice and the coarse planes are pure boundary artifact.
_MAX_HALFWIDTH_FACTOR = 4


@dataclass(frozen=True, eq=False)
class Filter2D:
    """Separable symmetric 2-D smoothing filter.

    Attributes
    ----------
    side : int
        Odd edge length of the square kernel.
    taps : numpy.ndarray
        Full 2-D kernel, the outer product of `taps_1d` with itself,
        normalized to unit total mass.
    taps_1d : numpy.ndarray
        The symmetric 1-D factor the kernel was built from.
    """

    side: int
    taps: np.ndarray
    taps_1d: np.ndarray

    @classmethod
    def from_separable(cls, taps_1d):
        factor = np.asarray(taps_1d, dtype=np.float64).copy()
        if factor.ndim != 1 or factor.size % 2 == 0:
            raise ValueError("1-D filter factor must have odd length")
        if not np.array_equal(factor, factor[::-1]):
            raise ValueError("1-D filter factor must be symmetric")
        outer = np.outer(factor, factor)
        taps = outer / outer.sum()
        taps.setflags(write=False)
        factor.setflags(write=False)
        return cls(side=factor.size, taps=taps, taps_1d=factor)

    @property
    def half_width(self):
        return (self.side - 1) // 2


@dataclass(frozen=True)
class StarletDecomposition:
    """Ordered detail planes plus the final smooth plane.

    ``details[j - 1]`` holds the level-``j`` detail plane; `smooth` holds
    what remains after the last smoothing pass. All planes share the input
    dimensions and ``smooth + sum(details)`` reconstructs the input.
    """

    details: tuple
    smooth: np.ndarray

    @property
    def levels(self):
        return len(self.details)

    def reconstruct(self):
        """Sum the smooth plane and every detail plane."""
        total = self.smooth.copy()
        for plane in self.details:
            total += plane
        return total


def dilated_filter(level):
    """Build the smoothing filter used at a given decomposition level.

    Parameters
    ----------
    level : int
        Decomposition level, 1-based. Level 1 uses the plain 5-tap
        B3-spline factor; level ``j`` spreads adjacent taps ``2**(j-1)``
        pixels apart, inserting zeros in between (the "holes" of the
        à-trous scheme), for a 1-D length of ``4 * 2**(j-1) + 1``.

    Returns
    -------
    Filter2D
        The dilated kernel, renormalized to unit mass. Renormalization is
        kept even though the taps already sum to 1, as a guard against
        accumulation drift at large dilations.

    Raises
    ------
    InvalidLevel
        If `level` is not a positive integer.
    """
    if not isinstance(level, (int, np.integer)) or isinstance(level, bool) or level < 1:
        raise InvalidLevel(f"decomposition level must be a positive integer, got {level!r}")
    step = 2 ** (level - 1)
    dilated = np.zeros(4 * step + 1)
    dilated[::step] = BASE_FILTER_1D
    return Filter2D.from_separable(dilated)


def convolve_same(image, filt):
    """Correlate an image with a separable symmetric kernel, same-size output.

    Semantics match mirror-padding the image by the kernel half-width,
    running a full correlation, and cropping back; with a symmetric kernel
    correlation and convolution coincide. When the half-width exceeds the
    image the reflection tiles (exactly like ``numpy.pad`` in symmetric
    mode).

    Raises
    ------
    ImageTooSmall
        If the kernel half-width exceeds four times the shortest image side.
    """
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {arr.shape}")
    if filt.half_width > _MAX_HALFWIDTH_FACTOR * min(arr.shape):
        raise ImageTooSmall(
            f"filter half-width {filt.half_width} too large for a "
            f"{arr.shape[0]}x{arr.shape[1]} image"
        )
    return _correlate_symmetric(arr, filt.taps_1d)


def decompose(image, levels):
    """Compute the undecimated multiscale decomposition of an image.

    Parameters
    ----------
    image : array_like (2-D)
        Input image; values must be finite.
    levels : int
        Number of detail planes to produce.

    Returns
    -------
    StarletDecomposition
        Detail planes for levels ``1..levels`` plus the final smooth plane.

    Raises
    ------
    InvalidLevel
        If `levels` is not a positive integer.
    ImageTooSmall
        If the level-`levels` filter half-width ``2**levels`` exceeds four
        times the shortest image side, i.e. the short side is below
        ``2**levels / 4``.
    """
    if not isinstance(levels, (int, np.integer)) or isinstance(levels, bool) or levels < 1:
        raise InvalidLevel(f"levels must be a positive integer, got {levels!r}")
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains NaN or infinite values")
    required = max(1, 2 ** levels // _MAX_HALFWIDTH_FACTOR)
    if min(arr.shape) < required:
        raise ImageTooSmall(
            f"{arr.shape[0]}x{arr.shape[1]} image is too small for {levels} "
            f"levels; need at least {required} pixels on the short side"
        )

    current = arr.copy()
    details = []
    for level in range(1, levels + 1):
        smoothed = convolve_same(current, dilated_filter(level))
        details.append(current - smoothed)
        current = smoothed
    return StarletDecomposition(details=tuple(details), smooth=current)


def _reflect_indices(length, offset):
    # Tiled half-sample symmetric reflection: the triangle-wave index map
    # of numpy.pad(mode="symmetric"), valid for offsets of any magnitude.
    idx = (np.arange(length) + offset) % (2 * length)
    return np.where(idx < length, idx, 2 * length - 1 - idx)


def _correlate_symmetric(image, taps_1d):
    # Correlation with the outer-product kernel of a symmetric 1-D factor.
    # Taps are gathered orbit by orbit of the kernel's 8-fold symmetry
    # group, and each orbit is summed as a fixed tree of pairs. A flip or
    # 90-degree rotation of the input then only ever swaps the two operands
    # of individual additions, so the result is bit-identical under those
    # transforms (float addition is commutative, though not associative).
    height, width = image.shape
    # Normalize the factor so the implied 2-D kernel has unit mass; for a
    # factor already summing to 1.0 this is a bit-exact no-op.
    taps_1d = taps_1d / taps_1d.sum()
    center = taps_1d.size // 2
    mags = [int(i) - center for i in np.flatnonzero(taps_1d) if i > center]
    value = {m: float(taps_1d[center + m]) for m in mags}
    v0 = float(taps_1d[center])

    rows = {0: np.arange(height)}
    cols = {0: np.arange(width)}
    for m in mags:
        rows[m] = _reflect_indices(height, m)
        rows[-m] = _reflect_indices(height, -m)
        cols[m] = _reflect_indices(width, m)
        cols[-m] = _reflect_indices(width, -m)

    def gather(dy, dx):
        return image[np.ix_(rows[dy], cols[dx])]

    out = (v0 * v0) * image
    for m in mags:
        axis_ring = (gather(m, 0) + gather(-m, 0)) + (gather(0, m) + gather(0, -m))
        out += (v0 * value[m]) * axis_ring
        diag_ring = (gather(m, m) + gather(-m, -m)) + (gather(-m, m) + gather(m, -m))
        out += (value[m] * value[m]) * diag_ring
    for i, ma in enumerate(mags):
        for mb in mags[i + 1:]:
            ring = (
                (gather(ma, mb) + gather(-ma, -mb))
                + (gather(-ma, mb) + gather(ma, -mb))
            ) + (
                (gather(mb, ma) + gather(-mb, -ma))
                + (gather(-mb, ma) + gather(mb, -ma))
            )
            out += (value[ma] * value[mb]) * ring
    return out
