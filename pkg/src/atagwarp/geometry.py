"""Points, arm chains and polar coordinates about the elbow.

Image convention throughout: x grows rightward, y grows downward, and the
origin sits on the centre of the top-left pixel.  Cross products are always
``u.x * v.y - u.y * v.x`` in that frame.

A point X is described relative to a chain (shoulder A, elbow B, wrist C)
by its distance to the elbow and by two angles measured *inside the wedge
that contains X*: ``phi1`` from ray BA to BX, ``phi2`` from BX to ray BC.
Their sum is therefore always the angle of that wedge, the interior angle
CBA on the inner (fold) side and its reflex complement on the outer side.
"""
import math
from dataclasses import dataclass

import numpy as np

from ._accel import njit
from .errors import DegenerateGeometryError, InputError

TWO_PI = 2.0 * math.pi

INNER = "inner"
OUTER = "outer"
LEFT = "left"
RIGHT = "right"


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InputError(f"non-finite point ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y

    def __sub__(self, other):
        return Point2(self.x - other.x, self.y - other.y)

    def __add__(self, other):
        return Point2(self.x + other.x, self.y + other.y)

    def norm(self):
        return math.hypot(self.x, self.y)

    def as_array(self):
        return np.array([self.x, self.y], dtype=np.float64)

    @classmethod
    def of(cls, p):
        """Coerce a Point2, 2-sequence or 2-array into a Point2."""
        if isinstance(p, Point2):
            return p
        x, y = p
        return cls(float(x), float(y))


def cross(u, v):
    return u.x * v.y - u.y * v.x


def dot(u, v):
    return u.x * v.x + u.y * v.y


def _sign(v):
    return (v > 0) - (v < 0)


@dataclass(frozen=True)
class ArmChain:
    """Shoulder, elbow and wrist of one arm in one image frame."""

    shoulder: Point2
    elbow: Point2
    wrist: Point2
    side: str = LEFT

    def __post_init__(self):
        for name in ("shoulder", "elbow", "wrist"):
            object.__setattr__(self, name, Point2.of(getattr(self, name)))
        if self.side not in (LEFT, RIGHT):
            raise InputError(f"arm side must be 'left' or 'right', got {self.side!r}")
        if self.upper_length == 0.0:
            raise DegenerateGeometryError("shoulder coincides with elbow")
        if self.lower_length == 0.0:
            raise DegenerateGeometryError("wrist coincides with elbow")

    @classmethod
    def from_points(cls, a, b, c, side=LEFT):
        return cls(Point2.of(a), Point2.of(b), Point2.of(c), side)

    @property
    def upper(self):
        """Elbow-to-shoulder vector (B -> A)."""
        return self.shoulder - self.elbow

    @property
    def lower(self):
        """Elbow-to-wrist vector (B -> C)."""
        return self.wrist - self.elbow

    @property
    def upper_length(self):
        return (self.shoulder - self.elbow).norm()

    @property
    def lower_length(self):
        return (self.wrist - self.elbow).norm()

    @property
    def bend_sign(self):
        """Sign of cross(A - B, C - B); 0 for a perfectly straight arm."""
        return _sign(cross(self.upper, self.lower))

    @property
    def interior_angle(self):
        """Unsigned angle CBA in [0, pi]."""
        return angle_between(self.upper, self.lower)

    @property
    def flexion(self):
        """Elbow flexion: 0 for a straight arm, growing as the arm folds."""
        return math.pi - self.interior_angle

    def as_array(self):
        return np.array([tuple(self.shoulder), tuple(self.elbow), tuple(self.wrist)])


@dataclass(frozen=True)
class WedgeCoordinates:
    r: float
    phi1: float
    phi2: float
    side: str

    @property
    def phi(self):
        return self.phi1 + self.phi2


def angle_between(u, v):
    """Unsigned angle between two vectors, in [0, pi]."""
    u, v = Point2.of(u), Point2.of(v)
    if u.norm() == 0.0 or v.norm() == 0.0:
        raise DegenerateGeometryError("angle with a zero-length vector")
    return math.atan2(abs(cross(u, v)), dot(u, v))


def chain_orientation(chain, fallback=0):
    """Rotation sense carrying ray BA onto ray BC through the inner wedge.

    A straight chain has no bend of its own; it borrows ``fallback`` (the
    other chain's bend) and finally defaults to +1.
    """
    s = chain.bend_sign
    if s == 0:
        s = fallback if fallback != 0 else 1
    return s


@njit
def polar_about_elbow(px, py, bx, by, ux, uy, theta, orient):
    """(r, phi1, phi2, is_inner) of point p about elbow b.

    ``(ux, uy)`` is the unit vector along BA, ``theta`` the interior angle CBA
    and ``orient`` the rotation sense from BA to BC through the inner wedge.
    """
    dx = px - bx
    dy = py - by
    r = math.sqrt(dx * dx + dy * dy)
    if r == 0.0:
        return 0.0, 0.0, 0.0, True
    t = math.atan2(orient * (ux * dy - uy * dx), ux * dx + uy * dy)
    if t < 0.0:
        t += 2.0 * math.pi
    if t <= theta:
        return r, t, theta - t, True
    return r, 2.0 * math.pi - t, t - theta, False


def _chain_frame(chain):
    u = chain.upper
    n = u.norm()
    return chain.elbow.x, chain.elbow.y, u.x / n, u.y / n


def wedge_coordinates(x, chain, orientation=None):
    """Polar description of ``x`` about the elbow of ``chain``.

    ``orientation`` overrides the chain's own bend sense; it only matters for
    a perfectly straight chain, where inner and outer are otherwise
    indistinguishable.
    """
    x = Point2.of(x)
    orient = orientation if orientation else chain_orientation(chain)
    bx, by, ux, uy = _chain_frame(chain)
    r, p1, p2, inner = polar_about_elbow(
        x.x, x.y, bx, by, ux, uy, chain.interior_angle, float(orient))
    return WedgeCoordinates(r, p1, p2, INNER if inner else OUTER)


def wedge_angle_of_chain(chain, side):
    """Angle of the inner wedge, or of the outer (reflex) wedge."""
    interior = chain.interior_angle
    if side == INNER:
        return interior
    if side == OUTER:
        return TWO_PI - interior
    raise InputError(f"side must be 'inner' or 'outer', got {side!r}")


def rotate(v, angle):
    c, s = math.cos(angle), math.sin(angle)
    return Point2(v.x * c - v.y * s, v.x * s + v.y * c)
