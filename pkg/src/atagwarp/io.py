"""File formats.

* images: 8-bit RGB(A) PNG (greyscale is accepted and kept single-channel)
* masks: single-channel 8-bit PNG, any value >= 128 is set; written as 0/255
* part-parse label maps: single-channel 8-bit PNG with codes
  0 background, 1 torso, 2 left arm, 3 right arm, 4 other
* landmarks: JSON object ``{"keypoints": [[x, y, confidence], ...]}`` with 18
  triples in the order of ``pipeline.KEYPOINT_NAMES``; absent joints carry
  confidence 0
"""
import json
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InputError
from .pipeline import OTHER, LandmarkSet, TryOnInputs

SAMPLE_FILES = {
    "model_image": "model.png",
    "person_image": "person.png",
    "model_landmarks": "model_keypoints.json",
    "person_landmarks": "person_keypoints.json",
    "garment_mask": "garment_mask.png",
    "model_parse": "model_parse.png",
    "person_parse": "person_parse.png",
    "person_upper_mask": "person_upper_mask.png",
    "target_mask": "target_mask.png",
}
OPTIONAL_SAMPLE_FILES = {"target_mask"}


def _open(path):
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    try:
        return Image.open(path)
    except OSError as exc:
        raise InputError(f"cannot read image {path}: {exc}") from exc


def load_image(path):
    im = _open(path)
    if im.mode in ("RGB", "RGBA", "L"):
        return np.asarray(im, dtype=np.uint8).copy()
    if im.mode in ("LA", "PA") or "transparency" in im.info:
        return np.asarray(im.convert("RGBA"), dtype=np.uint8).copy()
    return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def save_image(path, img):
    img = np.asarray(img, dtype=np.uint8)
    if img.ndim == 3 and img.shape[2] == 1:
        img = img[:, :, 0]
    Image.fromarray(img).save(path, format="PNG")


def load_mask(path):
    im = _open(path)
    arr = np.asarray(im.convert("L"), dtype=np.uint8)
    return arr >= 128


def save_mask(path, mask):
    Image.fromarray(np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)).save(
        path, format="PNG")


def load_labels(path):
    im = _open(path)
    if im.mode not in ("L", "P"):
        raise InputError(f"label map {path} must be single-channel, got mode {im.mode}")
    arr = np.asarray(im, dtype=np.uint8).copy()
    if arr.size and arr.max() > OTHER:
        raise InputError(f"label map {path} has code {arr.max()}; valid codes are 0-4")
    return arr


def save_labels(path, labels):
    Image.fromarray(np.asarray(labels, dtype=np.uint8)).save(path, format="PNG")


def load_landmarks(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "keypoints" not in doc:
        raise InputError(f"{path} has no 'keypoints' array")
    return LandmarkSet.from_triples(doc["keypoints"])


def save_landmarks(path, landmarks):
    Path(path).write_text(json.dumps({"keypoints": landmarks.to_triples()}, indent=1))


_LOADERS = {
    "model_image": load_image,
    "person_image": load_image,
    "model_landmarks": load_landmarks,
    "person_landmarks": load_landmarks,
    "garment_mask": load_mask,
    "model_parse": load_labels,
    "person_parse": load_labels,
    "person_upper_mask": load_mask,
    "target_mask": load_mask,
}


def load_inputs(paths):
    """Build TryOnInputs from a ``{field: path}`` mapping (target_mask optional)."""
    kw = {}
    for name, loader in _LOADERS.items():
        p = paths.get(name)
        if p is None:
            if name in OPTIONAL_SAMPLE_FILES:
                continue
            raise InputError(f"missing input: {name}")
        kw[name] = loader(p)
    return TryOnInputs(**kw).validate()


def sample_paths(directory):
    """Standard file paths of a sample directory (absent optional files dropped)."""
    d = Path(directory)
    paths = {k: d / v for k, v in SAMPLE_FILES.items()}
    for k in OPTIONAL_SAMPLE_FILES:
        if not paths[k].exists():
            del paths[k]
    return paths


def load_sample(directory):
    return load_inputs(sample_paths(directory))


def save_sample(directory, inputs):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    save_image(d / SAMPLE_FILES["model_image"], inputs.model_image)
    save_image(d / SAMPLE_FILES["person_image"], inputs.person_image)
    save_landmarks(d / SAMPLE_FILES["model_landmarks"], inputs.model_landmarks)
    save_landmarks(d / SAMPLE_FILES["person_landmarks"], inputs.person_landmarks)
    save_mask(d / SAMPLE_FILES["garment_mask"], inputs.garment_mask)
    save_labels(d / SAMPLE_FILES["model_parse"], inputs.model_parse)
    save_labels(d / SAMPLE_FILES["person_parse"], inputs.person_parse)
    save_mask(d / SAMPLE_FILES["person_upper_mask"], inputs.person_upper_mask)
    if inputs.target_mask is not None:
        save_mask(d / SAMPLE_FILES["target_mask"], inputs.target_mask)
    return d
