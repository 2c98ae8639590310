"""Pixel containers, color conversion, boundary handling, and image file I/O.

Images are plain numpy arrays throughout the package:

* grayscale image -- 2-D ``float64`` array, values in [0, 255] right after
  loading, unbounded once transform arithmetic has been applied;
* RGB image -- 3-D ``uint8`` array of shape ``(height, width, 3)``;
* binary mask -- 2-D ``bool`` array, ``True`` marks foreground.

Supported file formats are 8-bit PNG (gray and RGB) and binary PGM/PPM.
All file writes are atomic (temp file + rename) so concurrent runs never
observe a partially written artifact.
"""

import io
import os
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    CorruptFile,
    CropTooLarge,
    ImageIOError,
    PadTooLarge,
    UnsupportedFormat,
)

# Rec. 601 luma weights for R, G, B.
GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114])

_READABLE_FORMATS = {"PNG", "PPM"}


def _require_gray(image):
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D grayscale array, got shape {arr.shape}")
    return arr


def _require_rgb(image):
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (h, w, 3) RGB array, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        raise ValueError(f"expected uint8 RGB channels, got {arr.dtype}")
    return arr


def to_grayscale(rgb):
    """Convert an RGB image to grayscale luminance (Rec. 601 weights)."""
    arr = _require_rgb(rgb)
    return arr.astype(np.float64) @ GRAY_WEIGHTS


def mirror_pad(image, pad):
    """Extend an image by `pad` pixels per side with half-sample reflection.

    The edge pixel is duplicated: a row ``[a, b, c]`` padded by 2 becomes
    ``[b, a, a, b, c, c, b]``. The reflection source must exist, so `pad`
    may not exceed the shortest image side.
    """
    arr = _require_gray(image)
    if pad < 0:
        raise ValueError(f"pad must be non-negative, got {pad}")
    if pad > min(arr.shape):
        raise PadTooLarge(
            f"pad {pad} exceeds the shortest image side {min(arr.shape)}"
        )
    if pad == 0:
        return arr.copy()
    return np.pad(arr, pad, mode="symmetric")


def crop_center(image, pad):
    """Remove `pad` pixels from each side; exact inverse of :func:`mirror_pad`."""
    arr = _require_gray(image)
    if pad < 0:
        raise ValueError(f"pad must be non-negative, got {pad}")
    height, width = arr.shape
    if height <= 2 * pad or width <= 2 * pad:
        raise CropTooLarge(
            f"cannot crop {pad} pixels per side from a {height}x{width} image"
        )
    return arr[pad:height - pad, pad:width - pad].copy()


def load_image(path):
    """Load a PNG or binary PGM/PPM file.

    Returns a float64 grayscale array for single-channel files and a uint8
    RGB array for color files.
    """
    path = Path(path)
    try:
        with Image.open(path) as img:
            img.load()
            fmt = img.format
            mode = img.mode
            if fmt not in _READABLE_FORMATS:
                raise UnsupportedFormat(f"{path}: unsupported file format {fmt}")
            if mode == "L":
                return np.asarray(img, dtype=np.float64)
            if mode == "RGB":
                return np.asarray(img, dtype=np.uint8)
            raise UnsupportedFormat(
                f"{path}: unsupported pixel mode {mode} (8-bit gray or RGB only)"
            )
    except FileNotFoundError as exc:
        raise ImageIOError(f"cannot read {path}: no such file") from exc
    except UnidentifiedImageError as exc:
        raise CorruptFile(f"{path} does not decode as an image") from exc
    except OSError as exc:
        raise ImageIOError(f"cannot read {path}: {exc}") from exc


def save_image(image, path):
    """Write an image as PNG (default) or binary PGM/PPM, chosen by suffix.

    Grayscale input is rounded and clipped to 8 bits at this point only;
    in-memory planes stay double precision.
    """
    path = Path(path)
    arr = np.asarray(image)
    if arr.ndim == 2:
        pil = Image.fromarray(_quantize_u8(arr), mode="L")
    else:
        pil = Image.fromarray(_require_rgb(arr), mode="RGB")

    suffix = path.suffix.lower()
    if suffix == ".png":
        fmt = "PNG"
    elif suffix in (".pgm", ".ppm"):
        if suffix == ".pgm" and pil.mode != "L":
            raise UnsupportedFormat(f"{path}: PGM holds grayscale data only")
        if suffix == ".ppm" and pil.mode != "RGB":
            raise UnsupportedFormat(f"{path}: PPM holds RGB data only")
        fmt = "PPM"
    else:
        raise UnsupportedFormat(f"{path}: cannot write {suffix or 'suffix-less'} files")

    buf = io.BytesIO()
    pil.save(buf, format=fmt)
    write_bytes_atomic(path, buf.getvalue())


def save_mask(mask, path):
    """Write a binary mask as a 0/255 single-channel PNG."""
    arr = np.asarray(mask, dtype=bool)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D mask, got shape {arr.shape}")
    save_image(np.where(arr, 255, 0).astype(np.uint8), path)


def load_mask(path):
    """Load a mask image; pixels brighter than 127 count as foreground."""
    arr = load_image(path)
    if arr.ndim == 3:
        arr = to_grayscale(arr)
    return arr > 127


def save_float_map(plane, path):
    """Write a raw detail plane as a little-endian grayscale PFM float map."""
    arr = _require_gray(plane)
    height, width = arr.shape
    header = f"Pf\n{width} {height}\n-1.0\n".encode("ascii")
    body = np.flipud(arr).astype("<f4").tobytes()
    write_bytes_atomic(Path(path), header + body)


def write_bytes_atomic(path, data):
    """Write bytes to `path` via a temp file and rename in the same directory."""
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_name, path)
    except OSError as exc:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise ImageIOError(f"cannot write {path}: {exc}") from exc


def _quantize_u8(arr):
    return np.clip(np.rint(arr), 0, 255).astype(np.uint8)
