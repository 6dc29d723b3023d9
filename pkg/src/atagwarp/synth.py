"""Synthetic people, garments and sleeve rectangles for demos and tests.

Everything here is deterministic given a seed.  Figures are frontal: the
person's right arm appears on the image's left.
"""
import math

import numpy as np

from .geometry import ArmChain, Point2
from .pipeline import (
    BACKGROUND, KEYPOINT_INDEX, LEFT_ARM, OTHER, RIGHT_ARM, TORSO, LandmarkSet, TryOnInputs,
)

HEIGHT, WIDTH = 256, 192


def _grid(shape):
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w]
    return xx.astype(np.float64), yy.astype(np.float64)


def segment_distance(shape, p, q):
    """Per-pixel distance to segment pq and the clamped projection parameter."""
    xx, yy = _grid(shape)
    px, py = p
    dx, dy = q[0] - px, q[1] - py
    L2 = dx * dx + dy * dy
    t = np.clip(((xx - px) * dx + (yy - py) * dy) / L2, 0.0, 1.0)
    return np.hypot(xx - (px + t * dx), yy - (py + t * dy)), t


def capsule(shape, p, q, radius):
    d, _ = segment_distance(shape, p, q)
    return d <= radius


def polygon(shape, pts):
    """Even-odd fill of a closed polygon given as ``[(x, y), ...]``."""
    xx, yy = _grid(shape)
    inside = np.zeros(shape, dtype=bool)
    n = len(pts)
    for i in range(n):
        x1, y1 = pts[i]
        x2, y2 = pts[(i + 1) % n]
        if y1 == y2:
            continue
        crosses = (yy >= min(y1, y2)) & (yy < max(y1, y2))
        xint = x1 + (yy - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (xx < xint)
    return inside


def garment_texture(shape, seed, base=None):
    """Colourful pattern with structure at several scales (stripes, checks, blobs)."""
    rng = np.random.default_rng(seed)
    xx, yy = _grid(shape)
    base = np.array(base if base is not None else rng.uniform(60, 200, 3))
    ang = rng.uniform(0, math.pi)
    period = rng.uniform(7, 14)
    stripes = np.sin((xx * math.cos(ang) + yy * math.sin(ang)) * 2 * math.pi / period)
    checks = ((np.floor(xx / 9) + np.floor(yy / 9)) % 2) * 2 - 1
    blobs = np.zeros(shape)
    for _ in range(6):
        cx, cy = rng.uniform(0, shape[1]), rng.uniform(0, shape[0])
        s = rng.uniform(8, 25)
        blobs += rng.uniform(-1, 1) * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * s * s))
    tint = rng.uniform(-1, 1, (3, 3))
    fields = np.stack([stripes, checks, blobs], axis=-1)
    img = base + 35.0 * (fields @ tint)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def _arm(shoulder, upper_len, upper_angle, lower_len, bend, side):
    sx, sy = shoulder
    ex = sx + upper_len * math.cos(upper_angle)
    ey = sy + upper_len * math.sin(upper_angle)
    turn = -bend if side == "right" else bend
    wa = upper_angle + turn
    return (ex, ey), (ex + lower_len * math.cos(wa), ey + lower_len * math.sin(wa))


def random_pose(seed, shape=(HEIGHT, WIDTH)):
    """Keypoints (name -> (x, y)) for a frontal upper body."""
    rng = np.random.default_rng(seed)
    h, w = shape
    cx = w / 2 + rng.uniform(-6, 6)
    half = rng.uniform(30, 38)
    sh_y = h * 0.27 + rng.uniform(-4, 4)
    hip_y = h * 0.74 + rng.uniform(-4, 4)
    pts = {
        "neck": (cx, sh_y - 8),
        "nose": (cx + rng.uniform(-3, 3), sh_y - 38),
        "right_shoulder": (cx - half, sh_y),
        "left_shoulder": (cx + half, sh_y),
        "right_hip": (cx - half * 0.7, hip_y),
        "left_hip": (cx + half * 0.7, hip_y),
    }
    pts["right_eye"] = (pts["nose"][0] - 6, pts["nose"][1] - 6)
    pts["left_eye"] = (pts["nose"][0] + 6, pts["nose"][1] - 6)
    pts["right_ear"] = (pts["nose"][0] - 14, pts["nose"][1] - 2)
    pts["left_ear"] = (pts["nose"][0] + 14, pts["nose"][1] - 2)
    for side, sgn in (("right", -1), ("left", 1)):
        # arms hang down and slightly out; elbows bend inward toward the torso
        up_ang = math.pi / 2 - sgn * rng.uniform(0.15, 0.6)
        bend = rng.uniform(0.0, 1.6)
        e, wr = _arm(pts[f"{side}_shoulder"], rng.uniform(44, 54), up_ang,
                     rng.uniform(38, 48), bend, side)
        pts[f"{side}_elbow"], pts[f"{side}_wrist"] = e, wr
    return pts


def landmarks_from(pts, confidence=0.9):
    xy = np.zeros((18, 2))
    conf = np.zeros(18)
    for name, p in pts.items():
        xy[KEYPOINT_INDEX[name]] = p
        conf[KEYPOINT_INDEX[name]] = confidence
    return LandmarkSet(xy, conf)


def render_figure(pts, shape=(HEIGHT, WIDTH), seed=0, sleeve_fraction=0.6,
                  arm_radius=10.0, texture=None):
    """Person image, garment mask, part parse and upper-body mask for a pose.

    The garment covers the torso plus each arm up to ``sleeve_fraction`` of
    its shoulder-to-wrist length.
    """
    rng = np.random.default_rng(seed + 10_000)
    h, w = shape
    xx, yy = _grid(shape)
    parse = np.full(shape, BACKGROUND, dtype=np.uint8)

    rs, ls = pts["right_shoulder"], pts["left_shoulder"]
    rh, lh = pts["right_hip"], pts["left_hip"]
    torso = polygon(shape, [(rs[0] - 4, rs[1] - 4), (ls[0] + 4, ls[1] - 4),
                            (lh[0] + 6, lh[1]), (rh[0] - 6, rh[1])])
    torso |= capsule(shape, rs, ls, 8.0)
    neck = capsule(shape, pts["neck"], (pts["neck"][0], pts["nose"][1] + 12), 7.0)
    head = np.hypot(xx - pts["nose"][0], yy - (pts["nose"][1] - 4)) <= 17
    legs = (yy > min(rh[1], lh[1])) & (np.abs(xx - (rh[0] + lh[0]) / 2) < (lh[0] - rh[0]) / 2 + 8)

    parse[legs] = OTHER
    parse[torso] = TORSO
    parse[neck | head] = OTHER

    arms = {}
    sleeves = np.zeros(shape, dtype=bool)
    for side, label in (("right", RIGHT_ARM), ("left", LEFT_ARM)):
        a, b, c = pts[f"{side}_shoulder"], pts[f"{side}_elbow"], pts[f"{side}_wrist"]
        arm = capsule(shape, a, b, arm_radius) | capsule(shape, b, c, arm_radius * 0.85)
        arms[side] = arm
        parse[arm] = label
        lu = math.dist(a, b)
        lf = math.dist(b, c)
        cut = sleeve_fraction * (lu + lf)
        if cut <= lu:
            end = (a[0] + (b[0] - a[0]) * cut / lu, a[1] + (b[1] - a[1]) * cut / lu)
            sl = capsule(shape, a, end, arm_radius + 0.5)
        else:
            s = (cut - lu) / lf
            end = (b[0] + (c[0] - b[0]) * s, b[1] + (c[1] - b[1]) * s)
            sl = capsule(shape, a, b, arm_radius + 0.5) | capsule(shape, b, end, arm_radius * 0.85 + 0.5)
        sleeves |= sl & arm

    all_arms = arms["right"] | arms["left"]
    garment = (torso & ~all_arms) | sleeves
    upper = torso | all_arms | neck

    bg = np.stack([
        np.full(shape, 200.0) - 40 * yy / h,
        np.full(shape, 205.0) - 20 * xx / w,
        np.full(shape, 215.0),
    ], axis=-1)
    img = bg + rng.normal(0, 3, bg.shape)
    skin = np.array([224.0, 172.0, 140.0]) + rng.uniform(-20, 20, 3)
    img[legs] = [60, 70, 110]
    img[head | neck | all_arms] = skin
    tex = texture if texture is not None else garment_texture(shape, seed)
    img[garment] = tex[garment]
    img = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    return img, garment, parse, upper


def identity_sample(seed, shape=(HEIGHT, WIDTH), with_target_mask=True):
    """Self pair: model and person are the same synthetic image.

    The target clothing mask equals the garment silhouette, the setting in
    which a perfect warp leaves nothing occluded.
    """
    rng = np.random.default_rng(seed)
    pts = random_pose(seed, shape)
    img, garment, parse, upper = render_figure(
        pts, shape, seed, sleeve_fraction=rng.uniform(0.25, 0.9))
    lm = landmarks_from(pts)
    return TryOnInputs(
        img, img.copy(), lm, landmarks_from(pts), garment, parse, parse.copy(), upper,
        garment.copy() if with_target_mask else None)


def pose_pair(seed, shape=(HEIGHT, WIDTH), sleeve_fraction=0.6):
    """Model wearing a textured garment, person in another pose and plain top."""
    rng = np.random.default_rng(seed)
    mp, pp = random_pose(seed, shape), random_pose(seed + 7919, shape)
    m_img, m_garment, m_parse, _ = render_figure(mp, shape, seed, sleeve_fraction)
    plain = np.empty(shape + (3,), dtype=np.uint8)
    plain[:] = rng.integers(40, 120, 3).astype(np.uint8)
    p_img, p_garment, p_parse, p_upper = render_figure(pp, shape, seed + 1, 0.5, texture=plain)
    return TryOnInputs(m_img, p_img, landmarks_from(mp), landmarks_from(pp),
                       m_garment, m_parse, p_parse, p_upper, None)


# -- sleeve rectangle demo ----------------------------------------------------

def arm_rectangle(chain, shape, half_width=12.0, band=8.0):
    """A textured sleeve-like strip laid along both bones of ``chain``.

    Each pixel gets (along, across) coordinates from the nearer bone; the
    texture alternates bands every ``band`` px along the bone and paints the
    upper and lower strips in different hues, so magnification is visible.
    Returns ``(image, mask)``.
    """
    a, b, c = (tuple(p) for p in (chain.shoulder, chain.elbow, chain.wrist))
    du, tu = segment_distance(shape, b, a)
    dl, tl = segment_distance(shape, b, c)
    # flat ends at shoulder and wrist, rounded joint at the elbow
    elbow = np.hypot(*(g - v for g, v in zip(_grid(shape), b))) <= half_width
    upper = (du <= half_width) & ((tu < 1.0) | elbow)
    lower = (dl <= half_width) & ((tl < 1.0) | elbow)
    mask = upper | lower
    use_upper = upper & (~lower | (du <= dl))
    along = np.where(use_upper, tu * chain.upper_length, tl * chain.lower_length)
    stripe = (np.floor(along / band) % 2).astype(bool)
    img = np.zeros(shape + (3,), dtype=np.uint8)
    img[:] = (235, 235, 235)
    up_col = np.where(stripe[..., None], [200, 40, 40], [250, 170, 60])
    lo_col = np.where(stripe[..., None], [40, 60, 200], [90, 200, 220])
    col = np.where(use_upper[..., None], up_col, lo_col)
    cross_line = (np.abs(np.minimum(du, dl)) < 1.0)
    col = np.where(cross_line[..., None], [20, 20, 20], col)
    img[mask] = col[mask].astype(np.uint8)
    return img, mask


def band_length(valid, chain, bone="upper", step=0.25):
    """Extent of ``valid`` along a bone ray from the elbow (nearest-pixel test)."""
    b = chain.elbow
    d = chain.upper if bone == "upper" else chain.lower
    n = d.norm()
    ux, uy = d.x / n, d.y / n
    h, w = valid.shape
    r = 0.0
    last = 0.0
    while True:
        x, y = b.x + r * ux, b.y + r * uy
        ix, iy = int(math.floor(x + 0.5)), int(math.floor(y + 0.5))
        if not (0 <= ix < w and 0 <= iy < h) or not valid[iy, ix]:
            return last
        last = r
        r += step


def default_demo_chains():
    """Straight source arm; target with a doubled upper bone bent 90 degrees."""
    source = ArmChain(Point2(80, 70), Point2(120, 70), Point2(180, 70), "left")
    target = ArmChain(Point2(40, 70), Point2(120, 70), Point2(120, 130), "left")
    return source, target
