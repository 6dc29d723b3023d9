"""Part-based garment warping: split, warp, mask algebra, composition.

Frames: the *model* frame holds the garment to transfer (image M, garment
mask c, model landmarks and part parse); the *person* frame is the output
frame (image P, person landmarks and part parse, upper-body mask P_m and an
optional target clothing mask S).

Each garment part is warped over its own target region, obtained by
splitting S (or P_m when S is absent) with the person's part parse.  The
torso uses a landmark TPS; each sleeve uses the anatomy-aware transform
driven by the two arm chains.  Target pixels whose backward-mapped source
is not visible garment form the occluded mask s, and the warp mask is
S - s (or P_m - s).
"""
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .atag import AtagCorrespondence, AtagParams, atag_field
from .errors import AbsentLandmarkError, DimensionError, EmptyPartError, FitError, InputError
from .geometry import LEFT, RIGHT, ArmChain, Point2
from .metrics import ssim
from .raster import (
    SourceMap, as_image, as_mask, backward_warp, check_same_frame, composite, mask_minus,
)
from .tps import Correspondence, tps_field, tps_fit

log = logging.getLogger(__name__)

KEYPOINT_NAMES = (
    "nose", "neck",
    "right_shoulder", "right_elbow", "right_wrist",
    "left_shoulder", "left_elbow", "left_wrist",
    "right_hip", "right_knee", "right_ankle",
    "left_hip", "left_knee", "left_ankle",
    "right_eye", "left_eye", "right_ear", "left_ear",
)
KEYPOINT_INDEX = {name: i for i, name in enumerate(KEYPOINT_NAMES)}

# synthesised torso landmarks: name -> the two keypoints they bisect
MIDPOINTS = {
    "mid_shoulder": ("right_shoulder", "left_shoulder"),
    "mid_hip": ("right_hip", "left_hip"),
}
DEFAULT_TORSO_LANDMARKS = (
    "neck", "right_shoulder", "left_shoulder", "right_hip", "left_hip",
    "mid_shoulder", "mid_hip",
)

BACKGROUND, TORSO, LEFT_ARM, RIGHT_ARM, OTHER = 0, 1, 2, 3, 4
PART_LABELS = {"torso": TORSO, "lsleeve": LEFT_ARM, "rsleeve": RIGHT_ARM}
PARTS = ("torso", "lsleeve", "rsleeve")
SLEEVE_SIDE = {"lsleeve": LEFT, "rsleeve": RIGHT}

SLEEVES_OVER_TORSO = "sleeves-over-torso"
TORSO_OVER_SLEEVES = "torso-over-sleeves"
INPAINT_LITERAL = "literal"
INPAINT_EXTENDED = "extended"
CLEARED_VALUE = 128


@dataclass
class LandmarkSet:
    """18 pose keypoints ``(x, y)`` with confidences, in KEYPOINT_NAMES order."""

    xy: np.ndarray
    confidence: np.ndarray

    def __post_init__(self):
        self.xy = np.asarray(self.xy, dtype=np.float64).reshape(-1, 2)
        self.confidence = np.asarray(self.confidence, dtype=np.float64).reshape(-1)
        if self.xy.shape != (18, 2) or self.confidence.shape != (18,):
            raise InputError(f"expected 18 keypoints, got {self.xy.shape[0]}")
        if np.any(self.confidence < 0) or np.any(self.confidence > 1):
            raise InputError("keypoint confidences must lie in [0, 1]")
        if not np.all(np.isfinite(self.xy[self.confidence > 0])):
            raise InputError("keypoints with positive confidence must be finite")

    @classmethod
    def from_triples(cls, triples):
        arr = np.asarray(triples, dtype=np.float64)
        if arr.shape != (18, 3):
            raise InputError(f"keypoints must be 18 [x, y, confidence] triples, got shape {arr.shape}")
        return cls(arr[:, :2], arr[:, 2])

    def to_triples(self):
        return np.column_stack([self.xy, self.confidence]).tolist()

    def confidence_of(self, name):
        return float(self.confidence[KEYPOINT_INDEX[name]])

    def present(self, name, threshold):
        if name in MIDPOINTS:
            return all(self.present(p, threshold) for p in MIDPOINTS[name])
        return self.confidence_of(name) >= threshold

    def point(self, name):
        if name in MIDPOINTS:
            a, b = (self.point(p) for p in MIDPOINTS[name])
            return Point2((a.x + b.x) / 2.0, (a.y + b.y) / 2.0)
        x, y = self.xy[KEYPOINT_INDEX[name]]
        return Point2(float(x), float(y))

    def require(self, name, threshold):
        if not self.present(name, threshold):
            raise AbsentLandmarkError(name, self.confidence_of(name), threshold)
        return self.point(name)


@dataclass
class TryOnInputs:
    model_image: np.ndarray
    person_image: np.ndarray
    model_landmarks: LandmarkSet
    person_landmarks: LandmarkSet
    garment_mask: np.ndarray
    model_parse: np.ndarray
    person_parse: np.ndarray
    person_upper_mask: np.ndarray
    target_mask: np.ndarray = None

    def validate(self):
        as_image(self.model_image)
        as_image(self.person_image)
        check_same_frame(self.model_image, self.garment_mask, self.model_parse,
                         what="model-frame rasters")
        check_same_frame(self.person_image, self.person_parse, self.person_upper_mask,
                         self.target_mask, what="person-frame rasters")
        for name in ("model_parse", "person_parse"):
            labels = np.asarray(getattr(self, name))
            if labels.ndim != 2:
                raise InputError(f"{name} must be a single-channel label map")
            if labels.size and labels.max() > OTHER:
                raise InputError(f"{name} has label {labels.max()}; valid labels are 0-4")
        return self

    @property
    def target_region(self):
        """S when given, otherwise the upper-body mask (the no-S fallback)."""
        m = self.target_mask if self.target_mask is not None else self.person_upper_mask
        return as_mask(m)


@dataclass
class WarpConfig:
    atag: AtagParams = field(default_factory=AtagParams)
    lam: float = 1e-3
    conf_threshold: float = 0.3
    torso_landmarks: tuple = DEFAULT_TORSO_LANDMARKS
    composite_order: str = SLEEVES_OVER_TORSO
    inpaint_mode: str = INPAINT_LITERAL

    def __post_init__(self):
        if self.composite_order not in (SLEEVES_OVER_TORSO, TORSO_OVER_SLEEVES):
            raise InputError(f"unknown composite order {self.composite_order!r}")
        if self.inpaint_mode not in (INPAINT_LITERAL, INPAINT_EXTENDED):
            raise InputError(f"unknown inpaint mode {self.inpaint_mode!r}")
        if not 0.0 <= self.conf_threshold <= 1.0:
            raise InputError("confidence threshold must lie in [0, 1]")
        unknown = [n for n in self.torso_landmarks if n not in KEYPOINT_INDEX and n not in MIDPOINTS]
        if unknown:
            raise InputError(f"unknown torso landmarks: {unknown}")

    def as_dict(self):
        return {
            "a": self.atag.a,
            "flexion_warn_limit_deg": math.degrees(self.atag.flexion_warn_limit),
            "lambda": self.lam,
            "conf_threshold": self.conf_threshold,
            "torso_landmarks": list(self.torso_landmarks),
            "composite_order": self.composite_order,
            "inpaint_mode": self.inpaint_mode,
        }


@dataclass
class GarmentParts:
    image: np.ndarray
    torso: np.ndarray
    lsleeve: np.ndarray
    rsleeve: np.ndarray

    def mask(self, part):
        return getattr(self, part)

    def layer(self, part):
        """(image zeroed outside the part, part mask)."""
        m = self.mask(part)
        img = self.image.copy()
        img[~m] = 0
        return img, m


@dataclass
class PartWarp:
    part: str
    region: np.ndarray
    source_map: SourceMap
    image: np.ndarray
    valid: np.ndarray
    holes: np.ndarray
    skipped: str = None

    def stats(self):
        d = self.source_map.displacement()[self.source_map.defined]
        mag = np.hypot(d[:, 0], d[:, 1]) if len(d) else np.zeros(0)
        return {
            "region_px": int(self.region.sum()),
            "mapped_px": int(self.source_map.defined.sum()),
            "valid_px": int(self.valid.sum()),
            "hole_px": int(self.holes.sum()),
            "mean_displacement_px": float(mag.mean()) if len(mag) else 0.0,
            "max_displacement_px": float(mag.max()) if len(mag) else 0.0,
            "skipped": self.skipped,
        }


@dataclass
class WarpResult:
    warped_garment: np.ndarray
    warp_mask: np.ndarray
    occluded: np.ndarray
    inpaint_mask: np.ndarray
    per_part: dict
    part_masks: dict
    preview: np.ndarray
    warnings: list
    config: WarpConfig
    ssim_vs_source: float = None

    def report(self):
        return {
            "parameters": self.config.as_dict(),
            "parts": {p: w.stats() for p, w in self.per_part.items()},
            "warp_mask_px": int(self.warp_mask.sum()),
            "occluded_px": int(self.occluded.sum()),
            "inpaint_predict_px": int((~self.inpaint_mask).sum()),
            "ssim_vs_source_garment": self.ssim_vs_source,
            "warnings": list(self.warnings),
        }


def split_by_parse(region, parse, labels=PART_LABELS):
    """Split ``region`` into disjoint parts by label, nearest part for leftovers.

    Pixels of ``region`` whose label is not one of ``labels`` join the part
    whose labelled pixels (inside ``region``) are nearest in Euclidean
    distance; ties go to the earlier part in ``labels``.
    """
    region = as_mask(region)
    parse = np.asarray(parse)
    check_same_frame(region, parse, what="region and part parse")
    names = list(labels)
    masks = {n: region & (parse == labels[n]) for n in names}
    leftover = region.copy()
    for m in masks.values():
        leftover &= ~m
    if leftover.any():
        dists = []
        for n in names:
            if masks[n].any():
                dists.append(ndimage.distance_transform_edt(~masks[n]))
            else:
                dists.append(np.full(region.shape, np.inf))
        dists = np.stack(dists)
        if np.all(np.isinf(dists)):
            return masks
        nearest = np.argmin(dists, axis=0)
        for i, n in enumerate(names):
            masks[n] = masks[n] | (leftover & (nearest == i))
    return masks


def split_garment(model_image, garment_mask, model_parse):
    """Torso, left-sleeve and right-sleeve masks of the model's garment."""
    model_image = as_image(model_image)
    garment_mask = as_mask(garment_mask)
    check_same_frame(model_image, garment_mask, model_parse, what="model-frame rasters")
    if not garment_mask.any():
        raise EmptyPartError("garment mask is empty")
    masks = split_by_parse(garment_mask, model_parse)
    if not masks["torso"].any():
        raise EmptyPartError("garment has no torso part")
    return GarmentParts(model_image, masks["torso"], masks["lsleeve"], masks["rsleeve"])


def arm_chain_from(landmarks, side, threshold=0.3):
    names = [f"{side}_{j}" for j in ("shoulder", "elbow", "wrist")]
    pts = [landmarks.require(n, threshold) for n in names]
    return ArmChain(pts[0], pts[1], pts[2], side)


def torso_correspondences(model_lm, person_lm, names=DEFAULT_TORSO_LANDMARKS, threshold=0.3):
    """Backward pairs (person point -> model point) for the present landmarks."""
    out = []
    for n in names:
        if model_lm.present(n, threshold) and person_lm.present(n, threshold):
            out.append(Correspondence(person_lm.point(n), model_lm.point(n)))
    return out


def warp_torso(inputs, config, parts=None, region=None):
    parts = parts or split_garment(inputs.model_image, inputs.garment_mask, inputs.model_parse)
    if region is None:
        region = split_by_parse(inputs.target_region, inputs.person_parse)["torso"]
    corrs = torso_correspondences(inputs.model_landmarks, inputs.person_landmarks,
                                  config.torso_landmarks, config.conf_threshold)
    if len(corrs) < 3:
        raise FitError(f"only {len(corrs)} torso landmarks present in both images; TPS needs 3")
    model = tps_fit(corrs, config.lam)
    smap = tps_field(region, model)
    img, valid, holes = backward_warp(inputs.model_image, parts.torso, smap)
    return PartWarp("torso", region, smap, img, valid, holes)


def warp_sleeve(inputs, config, part, parts=None, region=None, notes=None):
    """Warp one sleeve; an absent arm landmark skips the sleeve with a note."""
    side = SLEEVE_SIDE[part]
    parts = parts or split_garment(inputs.model_image, inputs.garment_mask, inputs.model_parse)
    if region is None:
        region = split_by_parse(inputs.target_region, inputs.person_parse)[part]
    notes = notes if notes is not None else []
    try:
        target = arm_chain_from(inputs.person_landmarks, side, config.conf_threshold)
        source = arm_chain_from(inputs.model_landmarks, side, config.conf_threshold)
    except AbsentLandmarkError as exc:
        msg = f"{part} skipped: {exc}"
        notes.append(msg)
        log.warning(msg)
        empty = SourceMap.empty(region.shape)
        z = np.zeros(region.shape, dtype=bool)
        img = np.zeros(region.shape + np.shape(inputs.model_image)[2:], dtype=np.uint8)
        return PartWarp(part, region, empty, img, z, z.copy(), skipped=str(exc))
    corr = AtagCorrespondence(target, source)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        smap = atag_field(region, corr, config.atag)
    for w in caught:
        notes.append(f"{part}: {w.message}")
        log.warning("%s: %s", part, w.message)
    img, valid, holes = backward_warp(inputs.model_image, parts.mask(part), smap)
    return PartWarp(part, region, smap, img, valid, holes)


def warp_parts(inputs, config=None):
    """Warp torso and both sleeves; returns ``(parts, {part: PartWarp}, notes)``."""
    config = config or WarpConfig()
    inputs.validate()
    parts = split_garment(inputs.model_image, inputs.garment_mask, inputs.model_parse)
    regions = split_by_parse(inputs.target_region, inputs.person_parse)
    notes = []
    warps = {"torso": warp_torso(inputs, config, parts, regions["torso"])}
    for part in ("lsleeve", "rsleeve"):
        warps[part] = warp_sleeve(inputs, config, part, parts, regions[part], notes)
    return parts, warps, notes


def compute_occluded_s(region, warps):
    """Target pixels left without a visible source pixel.

    Covers both per-part holes and region pixels no part mapped at all.
    """
    region = as_mask(region)
    covered = np.zeros(region.shape, dtype=bool)
    for w in warps.values():
        check_same_frame(region, w.valid, what="target region and part warp")
        covered |= w.valid
    return region & ~covered


def inpaint_mask(upper_mask, occluded, warp_mask, mode=INPAINT_LITERAL):
    """True keeps the pixel, False marks it for synthesis.

    ``literal`` is NOT(P_m) OR NOT(s); ``extended`` additionally predicts
    upper-body pixels the warp does not cover.
    """
    upper_mask = as_mask(upper_mask)
    if mode == INPAINT_LITERAL:
        return ~upper_mask | ~as_mask(occluded)
    if mode == INPAINT_EXTENDED:
        return ~upper_mask | as_mask(warp_mask)
    raise InputError(f"unknown inpaint mode {mode!r}")


def compose_result(inputs, warps, occluded, config=None, notes=()):
    config = config or WarpConfig()
    base = inputs.target_region
    check_same_frame(base, occluded, what="target region and occluded mask")
    warp_mask = mask_minus(base, occluded)
    part_masks = {p: warps[p].valid & warp_mask for p in PARTS}

    person = as_image(inputs.person_image)
    model = as_image(inputs.model_image)
    if model.shape[2:] != person.shape[2:]:
        raise DimensionError(f"model and person images differ in channels: "
                             f"{model.shape} vs {person.shape}")
    order = ["torso", "lsleeve", "rsleeve"]
    if config.composite_order == TORSO_OVER_SLEEVES:
        order = ["lsleeve", "rsleeve", "torso"]
    warped = composite([(warps[p].image, part_masks[p]) for p in order],
                       background=np.zeros_like(person))
    warped[~warp_mask] = 0

    upper = as_mask(inputs.person_upper_mask)
    keep = inpaint_mask(upper, occluded, warp_mask, config.inpaint_mode)
    preview = person.copy()
    preview[upper] = CLEARED_VALUE
    preview[warp_mask] = warped[warp_mask]

    score = None
    if model.shape == person.shape and warp_mask.any():
        source = model.copy()
        source[~as_mask(inputs.garment_mask)] = 0
        score = ssim(warped, source, roi=warp_mask)

    return WarpResult(warped, warp_mask, occluded, keep, dict(warps), part_masks,
                      preview, list(notes), config, score)


def run_warp(inputs, config=None):
    """Full part-based warp of ``inputs``."""
    config = config or WarpConfig()
    _, warps, notes = warp_parts(inputs, config)
    occluded = compute_occluded_s(inputs.target_region, warps)
    return compose_result(inputs, warps, occluded, config, notes)
