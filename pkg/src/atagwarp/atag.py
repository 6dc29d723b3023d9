"""Anatomy-aware backward transform for sleeves.

For a target pixel X around the person's elbow B, the transform keeps X's
angular offset from whichever bone it is angularly closer to, blends the two
choices smoothly on the stretched (outer) side of the elbow and snaps to one
of them on the folded (inner) side, then rescales the radius by the matching
bone-length ratio.  The result is the source position X' in the model's arm
frame.

Three implementations exist: :func:`atag_point` (readable per-point
composition of the steps), a numba kernel and a vectorised numpy path; the
last two back :func:`atag_field`.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import _accel
from ._accel import njit
from .errors import InputError
from .geometry import (
    INNER, Point2, chain_orientation, rotate, wedge_angle_of_chain, wedge_coordinates,
)
from .raster import SourceMap, as_mask, pixel_centers


class FlexionWarning(UserWarning):
    """Target elbow is bent further than a human elbow normally allows."""


@dataclass(frozen=True)
class AtagParams:
    a: float = 8.0
    flexion_warn_limit: float = math.radians(145.0)

    def __post_init__(self):
        if not self.a > 0:
            raise InputError(f"logistic steepness must be positive, got {self.a}")


DEFAULT_PARAMS = AtagParams()


@dataclass(frozen=True)
class AtagCorrespondence:
    """Target (person) chain A, B, C and source (model) chain A', B', C'."""

    target: object
    source: object

    def __post_init__(self):
        if self.target.side != self.source.side:
            raise InputError(
                f"chains describe different arms: {self.target.side} vs {self.source.side}")

    def orientations(self):
        """Inner-wedge rotation sense for target and source.

        A straight chain inherits the other chain's bend; both straight
        falls back to +1.
        """
        t = chain_orientation(self.target, fallback=self.source.bend_sign)
        s = chain_orientation(self.source, fallback=t)
        return t, s


def _scalar_or_array(v):
    return float(v) if np.ndim(v) == 0 else v


def weight_f(phi1, phi2):
    """phi1^2 / (phi1^2 + phi2^2); 0.5 when both angles vanish."""
    p1 = np.asarray(phi1, dtype=np.float64)
    p2 = np.asarray(phi2, dtype=np.float64)
    if np.any(p1 < 0) or np.any(p2 < 0):
        raise InputError("wedge angles must be non-negative")
    s1, s2 = p1 * p1, p2 * p2
    den = s1 + s2
    with np.errstate(invalid="ignore", divide="ignore"):
        f = np.where(den > 0, s1 / np.where(den > 0, den, 1.0), 0.5)
    return _scalar_or_array(f)


def gate_g(phi, a=DEFAULT_PARAMS.a):
    """Logistic switch 1 / (1 + exp(a (pi - phi))): ~0 on the fold side."""
    if not a > 0:
        raise InputError("logistic steepness must be positive")
    return _scalar_or_array(expit(a * (np.asarray(phi, dtype=np.float64) - math.pi)))


def round_half_up(v):
    return _scalar_or_array(np.floor(np.asarray(v, dtype=np.float64) + 0.5))


def blend_h(phi1, phi2, params=DEFAULT_PARAMS):
    f = np.asarray(weight_f(phi1, phi2))
    g = np.asarray(gate_g(np.asarray(phi1) + np.asarray(phi2), params.a))
    return _scalar_or_array(g * f + (1.0 - g) * np.floor(f + 0.5))


def angular_map(phi1, phi2, phi_src, params=DEFAULT_PARAMS, h=None):
    """Angle of X' from ray B'A', given the source wedge angle ``phi_src``."""
    if h is None:
        h = blend_h(phi1, phi2, params)
    h = np.asarray(h)
    p1 = np.asarray(phi1, dtype=np.float64)
    return _scalar_or_array(p1 * (1.0 - h) + (np.asarray(phi_src) - np.asarray(phi2)) * h)


def radial_map(r, h, corr):
    """Distance of X' from B': r scaled by the blended bone-length ratio."""
    upper = corr.source.upper_length / corr.target.upper_length
    lower = corr.source.lower_length / corr.target.lower_length
    h = np.asarray(h, dtype=np.float64)
    return _scalar_or_array(np.asarray(r, dtype=np.float64) * ((1.0 - h) * upper + h * lower))


def check_flexion(corr, params):
    flex = corr.target.flexion
    if flex > params.flexion_warn_limit:
        warnings.warn(
            f"{corr.target.side} target elbow flexion {math.degrees(flex):.1f} deg exceeds "
            f"{math.degrees(params.flexion_warn_limit):.1f} deg",
            FlexionWarning, stacklevel=3)
        return True
    return False


def atag_point(x, corr, params=DEFAULT_PARAMS):
    """Source position X' for one target point X."""
    check_flexion(corr, params)
    tgt, src = corr.target, corr.source
    t_orient, s_orient = corr.orientations()

    w = wedge_coordinates(x, tgt, t_orient)
    if w.r == 0.0:
        return src.elbow
    h = blend_h(w.phi1, w.phi2, params)
    phi_src = wedge_angle_of_chain(src, w.side)
    phi1_src = angular_map(w.phi1, w.phi2, phi_src, params, h=h)
    r_src = radial_map(w.r, h, corr)

    # rotate from B'A' toward B'C' through the source wedge on X's side
    turn = s_orient if w.side == INNER else -s_orient
    u = src.upper
    scale = r_src / src.upper_length
    d = rotate(Point2(u.x * scale, u.y * scale), turn * phi1_src)
    return src.elbow + d


# -- field evaluation -------------------------------------------------------

def _chain_params(chain, orient):
    u = chain.upper
    n = chain.upper_length
    return [chain.elbow.x, chain.elbow.y, u.x / n, u.y / n,
            chain.interior_angle, float(orient), n, chain.lower_length]


def pack_correspondence(corr):
    """Flat float64 vector the kernels consume: target block then source block."""
    t_orient, s_orient = corr.orientations()
    return np.array(_chain_params(corr.target, t_orient)
                    + _chain_params(corr.source, s_orient), dtype=np.float64)


@njit
def _logistic(z):
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@njit
def _atag_kernel(xs, ys, prm, a, out):
    tbx, tby, tux, tuy, ttheta, torient, tla, tlc = prm[0], prm[1], prm[2], prm[3], prm[4], prm[5], prm[6], prm[7]
    sbx, sby, sux, suy, stheta, sorient, sla, slc = prm[8], prm[9], prm[10], prm[11], prm[12], prm[13], prm[14], prm[15]
    two_pi = 2.0 * math.pi
    for k in range(xs.shape[0]):
        dx = xs[k] - tbx
        dy = ys[k] - tby
        r = math.sqrt(dx * dx + dy * dy)
        if r == 0.0:
            out[k, 0] = sbx
            out[k, 1] = sby
            continue
        t = math.atan2(torient * (tux * dy - tuy * dx), tux * dx + tuy * dy)
        if t < 0.0:
            t += two_pi
        if t <= ttheta:
            inner = True
            p1 = t
            p2 = ttheta - t
        else:
            inner = False
            p1 = two_pi - t
            p2 = t - ttheta
        den = p1 * p1 + p2 * p2
        f = p1 * p1 / den if den > 0.0 else 0.5
        g = _logistic(a * (p1 + p2 - math.pi))
        h = g * f + (1.0 - g) * math.floor(f + 0.5)
        if inner:
            phi_src = stheta
            turn = sorient
        else:
            phi_src = two_pi - stheta
            turn = -sorient
        q1 = p1 * (1.0 - h) + (phi_src - p2) * h
        rs = r * ((1.0 - h) * sla / tla + h * slc / tlc)
        c = math.cos(turn * q1)
        s = math.sin(turn * q1)
        out[k, 0] = sbx + rs * (sux * c - suy * s)
        out[k, 1] = sby + rs * (sux * s + suy * c)


def _atag_numpy(xs, ys, prm, a):
    tbx, tby, tux, tuy, ttheta, torient, tla, tlc = prm[:8]
    sbx, sby, sux, suy, stheta, sorient, sla, slc = prm[8:]
    dx = xs - tbx
    dy = ys - tby
    r = np.hypot(dx, dy)
    t = np.arctan2(torient * (tux * dy - tuy * dx), tux * dx + tuy * dy)
    t = np.where(t < 0.0, t + 2 * math.pi, t)
    inner = t <= ttheta
    p1 = np.where(inner, t, 2 * math.pi - t)
    p2 = np.where(inner, ttheta - t, t - ttheta)
    at_elbow = r == 0.0
    p1[at_elbow] = 0.0
    p2[at_elbow] = 0.0
    h = np.asarray(blend_h(p1, p2, AtagParams(a=a)))
    phi_src = np.where(inner, stheta, 2 * math.pi - stheta)
    turn = np.where(inner, sorient, -sorient)
    q1 = p1 * (1.0 - h) + (phi_src - p2) * h
    rs = r * ((1.0 - h) * sla / tla + h * slc / tlc)
    c = np.cos(turn * q1)
    s = np.sin(turn * q1)
    return np.column_stack([sbx + rs * (sux * c - suy * s), sby + rs * (sux * s + suy * c)])


def atag_points(xy, corr, params=DEFAULT_PARAMS):
    """Vectorised :func:`atag_point` over an ``(n, 2)`` array of target points."""
    xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
    prm = pack_correspondence(corr)
    xs = np.ascontiguousarray(xy[:, 0])
    ys = np.ascontiguousarray(xy[:, 1])
    if _accel.use_numba():
        out = np.empty((len(xs), 2))
        _atag_kernel(xs, ys, prm, float(params.a), out)
        return out
    return _atag_numpy(xs, ys, prm, float(params.a))


def atag_field(region, corr, params=DEFAULT_PARAMS):
    """SourceMap holding X' for every set pixel of ``region``; the rest are holes."""
    region = as_mask(region)
    check_flexion(corr, params)
    xs, ys = pixel_centers(region)
    if not len(xs):
        return SourceMap.empty(region.shape)
    return SourceMap.from_points(region, atag_points(np.column_stack([xs, ys]), corr, params))
