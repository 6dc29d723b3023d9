"""Thin plate spline registration from landmark correspondences.

The fitted map goes *backward*: it takes target (person) coordinates to
source (model) coordinates, so it can feed :func:`raster.backward_warp`
directly.  Kernel ``U(d) = d^2 log d`` with ``U(0) = 0``.
"""
from dataclasses import dataclass

import numpy as np

from . import _accel
from ._accel import njit
from .errors import FitError, InputError
from .geometry import Point2
from .raster import SourceMap, as_mask, pixel_centers

# relative singular-value floor below which target points count as collinear
COLLINEAR_TOL = 1e-9


@dataclass(frozen=True)
class Correspondence:
    target: Point2
    source: Point2

    def __post_init__(self):
        object.__setattr__(self, "target", Point2.of(self.target))
        object.__setattr__(self, "source", Point2.of(self.source))


@dataclass(frozen=True)
class TpsModel:
    control_points: np.ndarray   # (n, 2) target-space
    kernel_weights: np.ndarray   # (n, 2)
    affine: np.ndarray           # (2, 3): out = affine @ [x, y, 1]
    lam: float = 0.0

    def side_condition_residual(self):
        """Largest violation of sum(w) = 0, sum(w x) = 0, sum(w y) = 0."""
        P = np.column_stack([self.control_points, np.ones(len(self.control_points))])
        return float(np.abs(P.T @ self.kernel_weights).max())

    def __call__(self, xy):
        return tps_eval_many(self, xy)


def kernel_u(d):
    d = np.asarray(d, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(d > 0, d * d * np.log(np.where(d > 0, d, 1.0)), 0.0)


def _pairwise(a, b):
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt((diff * diff).sum(-1))


def tps_fit(corrs, lam=0.0):
    """Solve the augmented TPS system for ``corrs``.

    ``corrs`` is a sequence of :class:`Correspondence` or an ``(n, 2, 2)``
    array of ``(target, source)`` pairs.  ``lam`` is added to the kernel
    diagonal; ``lam = 0`` interpolates the control points exactly.
    """
    if lam < 0:
        raise InputError(f"TPS regularisation must be >= 0, got {lam}")
    if isinstance(corrs, np.ndarray):
        arr = np.asarray(corrs, dtype=np.float64)
        tgt, src = arr[:, 0, :], arr[:, 1, :]
    else:
        corrs = list(corrs)
        tgt = np.array([tuple(c.target) for c in corrs], dtype=np.float64).reshape(-1, 2)
        src = np.array([tuple(c.source) for c in corrs], dtype=np.float64).reshape(-1, 2)
    n = len(tgt)
    if n < 3:
        raise FitError(f"TPS needs at least 3 correspondences, got {n}")
    if not (np.all(np.isfinite(tgt)) and np.all(np.isfinite(src))):
        raise FitError("TPS correspondences contain non-finite coordinates")

    centred = tgt - tgt.mean(axis=0)
    sv = np.linalg.svd(centred, compute_uv=False)
    if sv[0] == 0 or sv[1] <= COLLINEAR_TOL * sv[0]:
        raise FitError(f"TPS target points are collinear (singular values {sv})")

    K = kernel_u(_pairwise(tgt, tgt)) + lam * np.eye(n)
    P = np.column_stack([tgt, np.ones(n)])
    L = np.zeros((n + 3, n + 3))
    L[:n, :n] = K
    L[:n, n:] = P
    L[n:, :n] = P.T
    rhs = np.zeros((n + 3, 2))
    rhs[:n] = src
    try:
        sol = np.linalg.solve(L, rhs)
    except np.linalg.LinAlgError as exc:
        raise FitError(f"TPS system is singular: {exc}") from exc
    if not np.all(np.isfinite(sol)):
        raise FitError("TPS solution is not finite")
    return TpsModel(tgt.copy(), sol[:n], sol[n:].T.copy(), float(lam))


@njit
def _tps_kernel(xs, ys, cp, w, aff, out):
    n = cp.shape[0]
    for k in range(xs.shape[0]):
        x = xs[k]
        y = ys[k]
        ox = aff[0, 0] * x + aff[0, 1] * y + aff[0, 2]
        oy = aff[1, 0] * x + aff[1, 1] * y + aff[1, 2]
        for i in range(n):
            dx = x - cp[i, 0]
            dy = y - cp[i, 1]
            d2 = dx * dx + dy * dy
            if d2 > 0.0:
                u = 0.5 * d2 * np.log(d2)
                ox += w[i, 0] * u
                oy += w[i, 1] * u
        out[k, 0] = ox
        out[k, 1] = oy


def _tps_numpy(xy, model, chunk=65536):
    out = np.empty_like(xy)
    for s in range(0, len(xy), chunk):
        part = xy[s:s + chunk]
        U = kernel_u(_pairwise(part, model.control_points))
        out[s:s + chunk] = (part @ model.affine[:, :2].T + model.affine[:, 2]
                            + U @ model.kernel_weights)
    return out


def tps_eval_many(model, xy):
    xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
    if _accel.use_numba():
        out = np.empty_like(xy)
        _tps_kernel(np.ascontiguousarray(xy[:, 0]), np.ascontiguousarray(xy[:, 1]),
                    np.ascontiguousarray(model.control_points),
                    np.ascontiguousarray(model.kernel_weights),
                    np.ascontiguousarray(model.affine), out)
        return out
    return _tps_numpy(xy, model)


def tps_eval(model, x):
    """Map one target point to its source position."""
    x = Point2.of(x)
    p = np.array([x.x, x.y])
    d = np.sqrt(((model.control_points - p) ** 2).sum(axis=1))
    out = model.affine @ np.array([x.x, x.y, 1.0]) + kernel_u(d) @ model.kernel_weights
    return Point2(float(out[0]), float(out[1]))


def tps_field(region, model):
    region = as_mask(region)
    xs, ys = pixel_centers(region)
    if not len(xs):
        return SourceMap.empty(region.shape)
    return SourceMap.from_points(region, tps_eval_many(model, np.column_stack([xs, ys])))
