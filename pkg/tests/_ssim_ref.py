"""Independent SSIM reference and the fixed pattern pairs it is checked on."""
import math

import numpy as np


def reference_ssim_map(a, b, window=11, sigma=1.5, k1=0.01, k2=0.03, data_range=255.0):
    """Direct per-pixel SSIM with a 2-D Gaussian window and mirrored borders.

    Written without separable filtering or scipy so it shares no code path
    with the package implementation.
    """
    a = _gray(a)
    b = _gray(b)
    r = window // 2
    taps = [math.exp(-(t * t) / (2 * sigma * sigma)) for t in range(-r, r + 1)]
    kern = np.outer(taps, taps)
    kern /= kern.sum()
    pa = np.pad(a, r, mode="symmetric")
    pb = np.pad(b, r, mode="symmetric")
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    out = np.empty(a.shape)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            wa = pa[i:i + window, j:j + window]
            wb = pb[i:i + window, j:j + window]
            ma = float((kern * wa).sum())
            mb = float((kern * wb).sum())
            va = float((kern * (wa - ma) ** 2).sum())
            vb = float((kern * (wb - mb) ** 2).sum())
            cov = float((kern * (wa - ma) * (wb - mb)).sum())
            out[i, j] = ((2 * ma * mb + c1) * (2 * cov + c2)
                         / ((ma * ma + mb * mb + c1) * (va + vb + c2)))
    return out


def _gray(img):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 3:
        img = 0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2]
    return img


def pattern_pairs(size=16):
    """Ten deterministic ``(a, b)`` uint8 pairs covering common degradations."""
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    rng = np.random.default_rng(1234)
    noise = rng.integers(0, 256, (size, size)).astype(np.float64)
    ramp = xx * (255.0 / (size - 1))
    checker = ((xx // 4 + yy // 4) % 2) * 255.0
    rings = 127.5 + 127.5 * np.cos(np.hypot(xx - 7.5, yy - 7.5) * 0.9)
    pairs = [
        (ramp, ramp[:, ::-1]),
        (checker, np.roll(checker, 1, axis=1)),
        (noise, np.clip(noise + rng.normal(0, 20, noise.shape), 0, 255)),
        (rings, rings * 0.6 + 40),
        (checker, np.full_like(checker, 127.0)),
        (noise, noise.T),
        (ramp, np.clip(ramp + 30, 0, 255)),
        (rings, np.clip(rings + rng.normal(0, 8, rings.shape), 0, 255)),
        (np.full((size, size), 90.0), np.full((size, size), 90.0)),
    ]
    pairs = [(np.rint(a).astype(np.uint8), np.rint(b).astype(np.uint8)) for a, b in pairs]
    rgb_a = np.stack([ramp, checker, rings], axis=-1)
    rgb_b = np.stack([rings, ramp, np.roll(checker, 2, axis=0)], axis=-1)
    pairs.append((np.rint(rgb_a).astype(np.uint8), np.rint(rgb_b).astype(np.uint8)))
    return pairs
