"""Synthetic test images: dark line segments on a noisy bright background."""

import numpy as np

from trackseg import save_image, save_mask


def track_phantom(seed, size=256, n_tracks=(10, 30), background=200.0,
                  track_intensity=80.0, noise_sigma=10.0, half_width=(1.0, 2.0),
                  length=(10.0, 40.0)):
    """Render random dark capsule-shaped segments with exact ground truth.

    Returns an 8-bit-quantized float image and a boolean mask marking every
    painted pixel.
    """
    rng = np.random.default_rng(seed)
    base = np.full((size, size), background)
    gt = np.zeros((size, size), dtype=bool)
    yy, xx = np.mgrid[0:size, 0:size].astype(float)

    count = int(rng.integers(n_tracks[0], n_tracks[1] + 1))
    for _ in range(count):
        y0, x0 = rng.uniform(8, size - 8, 2)
        angle = rng.uniform(0.0, np.pi)
        seg_len = rng.uniform(*length)
        radius = rng.uniform(*half_width)
        uy, ux = np.sin(angle), np.cos(angle)
        t = np.clip((yy - y0) * uy + (xx - x0) * ux, 0.0, seg_len)
        dist2 = (yy - y0 - t * uy) ** 2 + (xx - x0 - t * ux) ** 2
        segment = dist2 <= radius ** 2
        base[segment] = track_intensity
        gt |= segment

    image = np.clip(base + rng.normal(0.0, noise_sigma, (size, size)), 0.0, 255.0)
    return np.rint(image), gt


def write_phantom_pair(directory, stem, seed, **kwargs):
    """Save a phantom and its ground truth as PNGs; returns the two paths."""
    image, gt = track_phantom(seed, **kwargs)
    image_path = directory / f"{stem}.png"
    gt_path = directory / f"{stem}_gt.png"
    save_image(image, image_path)
    save_mask(gt, gt_path)
    return image_path, gt_path
