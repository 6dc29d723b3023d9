"""Image similarity used to self-check warps."""
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DimensionError, InputError
from .raster import as_mask

LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class SsimParams:
    window: int = 11
    gaussian_sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 255.0

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise InputError(f"SSIM window must be odd and >= 3, got {self.window}")


def gaussian_window(params):
    """Normalised 1-D Gaussian taps of length ``params.window``."""
    r = params.window // 2
    t = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-(t * t) / (2.0 * params.gaussian_sigma ** 2))
    return k / k.sum()


def to_gray(img):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return img
    if img.shape[2] == 1:
        return img[:, :, 0]
    return img[:, :, :3] @ LUMA


def _check_pair(a, b):
    if np.shape(a) != np.shape(b):
        raise DimensionError(f"image shapes differ: {np.shape(a)} vs {np.shape(b)}")


def ssim_map(a, b, params=SsimParams()):
    """Per-pixel SSIM; windows reflect at the image border."""
    _check_pair(a, b)
    x, y = to_gray(a), to_gray(b)
    k = gaussian_window(params)

    def blur(v):
        v = ndimage.correlate1d(v, k, axis=0, mode="reflect")
        return ndimage.correlate1d(v, k, axis=1, mode="reflect")

    c1 = (params.k1 * params.dynamic_range) ** 2
    c2 = (params.k2 * params.dynamic_range) ** 2
    mx, my = blur(x), blur(y)
    # same expression for all three moments so ssim(x, x) is exactly 1
    vx = blur(x * x) - mx * mx
    vy = blur(y * y) - my * my
    cxy = blur(x * y) - mx * my
    num = (2.0 * mx * my + c1) * (2.0 * cxy + c2)
    den = (mx * mx + my * my + c1) * (vx + vy + c2)
    return num / den


def ssim(a, b, params=SsimParams(), roi=None):
    """Mean SSIM over ``roi`` (window centres inside it) or the whole frame."""
    m = ssim_map(a, b, params)
    if roi is None:
        return float(m.mean())
    roi = as_mask(roi)
    if roi.shape != m.shape:
        raise DimensionError(f"roi {roi.shape} does not match images {m.shape}")
    if not roi.any():
        raise InputError("SSIM roi is empty")
    return float(m[roi].mean())


def pixel_stats(a, b, roi=None):
    """Mean absolute error, RMSE and PSNR (dB, inf for identical inputs)."""
    _check_pair(a, b)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if roi is not None:
        roi = as_mask(roi)
        if roi.shape != a.shape[:2]:
            raise DimensionError(f"roi {roi.shape} does not match images {a.shape[:2]}")
        a, b = a[roi], b[roi]
    if a.size == 0:
        raise InputError("pixel_stats over an empty region")
    d = a - b
    mse = float(np.mean(d * d))
    psnr = math.inf if mse == 0 else 10.0 * math.log10(255.0 ** 2 / mse)
    return {"mae": float(np.mean(np.abs(d))), "rmse": math.sqrt(mse), "psnr": psnr}
