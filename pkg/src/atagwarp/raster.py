"""Backward resampling, hole tracking, mask algebra and layer compositing.

Images are ``uint8`` numpy arrays shaped ``(H, W)`` or ``(H, W, C)`` with
C in {1, 3, 4}; masks are ``bool`` arrays shaped ``(H, W)``.  Pixel (row i,
column j) has its centre at continuous coordinate ``(x=j, y=i)``.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _accel
from ._accel import njit
from .errors import DimensionError, InputError

# a source position may sit up to half a pixel outside the outermost
# pixel centres before it counts as out of bounds
EDGE_MARGIN = 0.5


def as_image(img):
    img = np.asarray(img)
    if img.dtype != np.uint8:
        raise InputError(f"images must be uint8, got {img.dtype}")
    if img.ndim == 3 and img.shape[2] not in (1, 3, 4):
        raise InputError(f"images need 1, 3 or 4 channels, got {img.shape[2]}")
    if img.ndim not in (2, 3):
        raise InputError(f"image must be 2-D or 3-D, got shape {img.shape}")
    return img


def as_mask(mask):
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise InputError(f"mask must be 2-D, got shape {mask.shape}")
    return mask.astype(bool, copy=False)


def check_same_frame(*arrays, what="rasters"):
    shapes = {tuple(np.shape(a)[:2]) for a in arrays if a is not None}
    if len(shapes) > 1:
        raise DimensionError(f"{what} have mismatched dimensions: {sorted(shapes)}")


def pixel_centers(region):
    """x and y coordinates of the set pixels of ``region``, row-major order."""
    ys, xs = np.nonzero(region)
    return xs.astype(np.float64), ys.astype(np.float64)


@dataclass
class SourceMap:
    """Backward warp: for each target pixel, the source position it reads.

    ``coords[i, j]`` is an ``(x, y)`` pair, valid only where ``defined[i, j]``;
    every other entry is a hole and holds NaN.
    """

    coords: np.ndarray
    defined: np.ndarray

    def __post_init__(self):
        self.defined = as_mask(self.defined)
        if self.coords.shape != self.defined.shape + (2,):
            raise DimensionError(
                f"coords {self.coords.shape} do not match defined {self.defined.shape}")
        if not np.all(np.isfinite(self.coords[self.defined])):
            raise InputError("source map has non-finite entries outside its holes")

    @property
    def shape(self):
        return self.defined.shape

    @property
    def holes(self):
        return ~self.defined

    @classmethod
    def empty(cls, shape):
        coords = np.full(tuple(shape) + (2,), np.nan)
        return cls(coords, np.zeros(shape, dtype=bool))

    @classmethod
    def from_points(cls, region, xy):
        """Scatter ``(n, 2)`` source points onto the set pixels of ``region``."""
        region = as_mask(region)
        out = cls.empty(region.shape)
        out.coords[region] = xy
        out.defined = region.copy()
        return out

    @classmethod
    def identity(cls, region):
        region = as_mask(region)
        xs, ys = pixel_centers(region)
        return cls.from_points(region, np.column_stack([xs, ys]))

    def displacement(self):
        """Source position minus target pixel centre (NaN at holes)."""
        h, w = self.shape
        jj, ii = np.meshgrid(np.arange(w, dtype=float), np.arange(h, dtype=float))
        return self.coords - np.stack([jj, ii], axis=-1)

    def points(self):
        """``(n, 2)`` source points of the defined pixels, row-major order."""
        return self.coords[self.defined]


def _round_half_up(v):
    return np.floor(v + 0.5)


def sample_bilinear(img, p):
    """Bilinear sample of ``img`` at continuous position ``p = (x, y)``.

    Positions within half a pixel of the border are clamped onto the edge.
    Returns the rounded colour (a scalar for single-channel 2-D images), or
    ``None`` when ``p`` lies beyond that margin.
    """
    img = as_image(img)
    h, w = img.shape[:2]
    x, y = float(p[0]), float(p[1])
    if not (-EDGE_MARGIN <= x <= w - 1 + EDGE_MARGIN
            and -EDGE_MARGIN <= y <= h - 1 + EDGE_MARGIN):
        return None
    cx = min(max(x, 0.0), w - 1.0)
    cy = min(max(y, 0.0), h - 1.0)
    x0, y0 = int(math.floor(cx)), int(math.floor(cy))
    x1, y1 = min(x0 + 1, w - 1), min(y0 + 1, h - 1)
    fx, fy = cx - x0, cy - y0
    data = img.astype(np.float64)
    v = ((1 - fx) * (1 - fy) * data[y0, x0] + fx * (1 - fy) * data[y0, x1]
         + (1 - fx) * fy * data[y1, x0] + fx * fy * data[y1, x1])
    out = np.clip(_round_half_up(v), 0, 255).astype(np.uint8)
    return out if out.ndim else int(out)


@njit
def _warp_kernel(src, src_mask, sx, sy, out, ok):
    h, w, nc = src.shape
    for k in range(sx.shape[0]):
        x = sx[k]
        y = sy[k]
        ok[k] = False
        if not (-0.5 <= x <= w - 0.5 and -0.5 <= y <= h - 0.5):
            continue
        ix = min(max(int(math.floor(x + 0.5)), 0), w - 1)
        iy = min(max(int(math.floor(y + 0.5)), 0), h - 1)
        if not src_mask[iy, ix]:
            continue
        cx = min(max(x, 0.0), w - 1.0)
        cy = min(max(y, 0.0), h - 1.0)
        x0 = int(math.floor(cx))
        y0 = int(math.floor(cy))
        x1 = min(x0 + 1, w - 1)
        y1 = min(y0 + 1, h - 1)
        fx = cx - x0
        fy = cy - y0
        w00 = (1.0 - fx) * (1.0 - fy) * src_mask[y0, x0]
        w01 = fx * (1.0 - fy) * src_mask[y0, x1]
        w10 = (1.0 - fx) * fy * src_mask[y1, x0]
        w11 = fx * fy * src_mask[y1, x1]
        wsum = w00 + w01 + w10 + w11
        for c in range(nc):
            v = (w00 * src[y0, x0, c] + w01 * src[y0, x1, c]
                 + w10 * src[y1, x0, c] + w11 * src[y1, x1, c]) / wsum
            out[k, c] = min(math.floor(v + 0.5), 255.0)
        ok[k] = True


def _warp_numpy(src, src_mask, sx, sy):
    h, w, nc = src.shape
    inside = (sx >= -0.5) & (sx <= w - 0.5) & (sy >= -0.5) & (sy <= h - 0.5)
    sx_i = np.where(inside, sx, 0.0)
    sy_i = np.where(inside, sy, 0.0)
    ix = np.clip(np.floor(sx_i + 0.5).astype(np.intp), 0, w - 1)
    iy = np.clip(np.floor(sy_i + 0.5).astype(np.intp), 0, h - 1)
    ok = inside & src_mask[iy, ix]

    cx = np.clip(sx_i, 0.0, w - 1.0)
    cy = np.clip(sy_i, 0.0, h - 1.0)
    x0 = np.floor(cx).astype(np.intp)
    y0 = np.floor(cy).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = cx - x0
    fy = cy - y0
    m = src_mask.astype(np.float64)
    w00 = (1.0 - fx) * (1.0 - fy) * m[y0, x0]
    w01 = fx * (1.0 - fy) * m[y0, x1]
    w10 = (1.0 - fx) * fy * m[y1, x0]
    w11 = fx * fy * m[y1, x1]
    wsum = np.where(ok, w00 + w01 + w10 + w11, 1.0)
    s = src.astype(np.float64)
    v = (w00[:, None] * s[y0, x0] + w01[:, None] * s[y0, x1]
         + w10[:, None] * s[y1, x0] + w11[:, None] * s[y1, x1]) / wsum[:, None]
    out = np.minimum(np.floor(v + 0.5), 255.0)
    out[~ok] = 0.0
    return out, ok


def backward_warp(src, src_mask, smap):
    """Fill every defined pixel of ``smap`` from ``src``.

    A pixel becomes a hole when its source position falls outside the image
    margin or its nearest source pixel is not in ``src_mask``.  Colours are
    bilinear over the in-mask neighbours only, so nothing outside the mask
    bleeds into the result.

    Returns ``(warped, valid, holes)``; ``valid`` and ``holes`` partition the
    defined pixels of ``smap``.
    """
    src = as_image(src)
    src_mask = as_mask(src_mask)
    check_same_frame(src, src_mask, what="source image and source mask")
    squeeze = src.ndim == 2
    src3 = src[:, :, None] if squeeze else src
    nc = src3.shape[2]

    defined = smap.defined
    pts = smap.coords[defined]
    sx = np.ascontiguousarray(pts[:, 0])
    sy = np.ascontiguousarray(pts[:, 1])
    if _accel.use_numba() and len(sx):
        vals = np.zeros((len(sx), nc))
        ok = np.zeros(len(sx), dtype=np.bool_)
        _warp_kernel(np.ascontiguousarray(src3), np.ascontiguousarray(src_mask),
                     sx, sy, vals, ok)
    else:
        vals, ok = _warp_numpy(src3, src_mask, sx, sy)

    warped = np.zeros(smap.shape + (nc,), dtype=np.uint8)
    valid = np.zeros(smap.shape, dtype=bool)
    holes = np.zeros(smap.shape, dtype=bool)
    valid[defined] = ok
    holes[defined] = ~ok
    warped[defined] = vals.astype(np.uint8)
    warped[~valid] = 0
    return (warped[:, :, 0] if squeeze else warped), valid, holes


# -- mask algebra -----------------------------------------------------------

def _pair(a, b):
    a, b = as_mask(a), as_mask(b)
    check_same_frame(a, b, what="masks")
    return a, b


def mask_and(a, b):
    a, b = _pair(a, b)
    return a & b


def mask_or(a, b):
    a, b = _pair(a, b)
    return a | b


def mask_not(a):
    return ~as_mask(a)


def mask_minus(a, b):
    """Pixels of ``a`` not in ``b``."""
    a, b = _pair(a, b)
    return a & ~b


def disc(radius):
    """Disc structuring element: all integer offsets within ``radius``."""
    r = int(math.floor(radius))
    yy, xx = np.mgrid[-r:r + 1, -r:r + 1]
    return xx * xx + yy * yy <= radius * radius


def dilate(mask, radius):
    mask = as_mask(mask)
    if radius < 0:
        raise InputError("dilation radius must be non-negative")
    if radius < 1:
        return mask.copy()
    return ndimage.binary_dilation(mask, structure=disc(radius))


def composite(layers, background=None):
    """Paint ``(image, mask)`` layers in order; later layers win on overlap.

    Pixels no layer covers keep ``background`` (zeros when omitted).
    """
    layers = list(layers)
    if not layers and background is None:
        raise InputError("composite needs at least one layer or a background")
    frames = [img for img, _ in layers] + [m for _, m in layers]
    if background is not None:
        frames.append(background)
    check_same_frame(*frames, what="composite layers")
    if background is None:
        out = np.zeros_like(as_image(layers[0][0]))
    else:
        out = as_image(background).copy()
    for img, mask in layers:
        img = as_image(img)
        if img.shape != out.shape:
            raise DimensionError(f"layer shape {img.shape} != canvas {out.shape}")
        m = as_mask(mask)
        out[m] = img[m]
    return out
