"""Shared generators for the test suite."""
import math

import numpy as np

from atagwarp.geometry import ArmChain, Point2


def chain_from_angles(shoulder, upper_len, heading, flexion, lower_len, bend=1, side="left"):
    """Chain whose forearm turns ``bend * flexion`` away from the upper-arm heading."""
    a = np.asarray(shoulder, dtype=float)
    u = np.array([math.cos(heading), math.sin(heading)])
    b = a + upper_len * u
    h2 = heading + bend * flexion
    c = b + lower_len * np.array([math.cos(h2), math.sin(h2)])
    return ArmChain(Point2.of(a), Point2.of(b), Point2.of(c), side)


def random_chain(rng, side="left", max_flexion_deg=145.0, min_flexion_deg=0.0,
                 lengths=(40.0, 120.0), centre=(100.0, 100.0), spread=50.0):
    flex = math.radians(rng.uniform(min_flexion_deg, max_flexion_deg))
    return chain_from_angles(
        np.asarray(centre) + rng.uniform(-spread, spread, 2),
        rng.uniform(*lengths), rng.uniform(0, 2 * math.pi), flex,
        rng.uniform(*lengths), bend=rng.choice([-1, 1]), side=side)


def random_rigid(rng):
    """(R, t, apply) for a random rotation plus translation."""
    ang = rng.uniform(0, 2 * math.pi)
    rot = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])
    t = rng.uniform(-200, 200, 2)

    def apply(p):
        return rot @ np.asarray(p, dtype=float) + t
    return rot, t, apply


def moved_chain(chain, apply):
    return ArmChain(*(Point2.of(apply(p.as_array())) for p in
                      (chain.shoulder, chain.elbow, chain.wrist)), side=chain.side)


def dist(p, q):
    return float(np.hypot(*(np.asarray(tuple(p), float) - np.asarray(tuple(q), float))))
