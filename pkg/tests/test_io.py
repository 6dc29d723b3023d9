import json

import numpy as np
import pytest
from PIL import Image

from atagwarp import io, synth
from atagwarp.errors import DimensionError, InputError


def test_sample_round_trip(tmp_path):
    s = synth.identity_sample(7)
    io.save_sample(tmp_path, s)
    back = io.load_sample(tmp_path)
    np.testing.assert_array_equal(back.model_image, s.model_image)
    np.testing.assert_array_equal(back.garment_mask, s.garment_mask)
    np.testing.assert_array_equal(back.person_parse, s.person_parse)
    np.testing.assert_array_equal(back.target_mask, s.target_mask)
    np.testing.assert_allclose(back.person_landmarks.xy, s.person_landmarks.xy)


def test_target_mask_optional(tmp_path):
    io.save_sample(tmp_path, synth.identity_sample(8, with_target_mask=False))
    assert not (tmp_path / "target_mask.png").exists()
    assert io.load_sample(tmp_path).target_mask is None


def test_mask_threshold(tmp_path):
    Image.fromarray(np.array([[0, 127, 128, 255]], np.uint8)).save(tmp_path / "m.png")
    np.testing.assert_array_equal(io.load_mask(tmp_path / "m.png"), [[0, 0, 1, 1]])


def test_image_modes(tmp_path):
    Image.fromarray(np.zeros((3, 4, 4), np.uint8), "RGBA").save(tmp_path / "a.png")
    assert io.load_image(tmp_path / "a.png").shape == (3, 4, 4)
    Image.fromarray(np.zeros((3, 4), np.uint8)).convert("P").save(tmp_path / "p.png")
    assert io.load_image(tmp_path / "p.png").shape == (3, 4, 3)


def test_labels_rejects_bad_codes(tmp_path):
    Image.fromarray(np.array([[0, 9]], np.uint8)).save(tmp_path / "l.png")
    with pytest.raises(InputError):
        io.load_labels(tmp_path / "l.png")
    Image.fromarray(np.zeros((2, 2, 3), np.uint8)).save(tmp_path / "rgb.png")
    with pytest.raises(InputError):
        io.load_labels(tmp_path / "rgb.png")


@pytest.mark.parametrize("text", ["not json", '{"points": []}', '{"keypoints": [[1, 2, 0.5]]}'])
def test_bad_keypoint_files(tmp_path, text):
    (tmp_path / "k.json").write_text(text)
    with pytest.raises(InputError):
        io.load_landmarks(tmp_path / "k.json")


def test_keypoint_file_format(tmp_path):
    lm = synth.identity_sample(9).model_landmarks
    io.save_landmarks(tmp_path / "k.json", lm)
    doc = json.loads((tmp_path / "k.json").read_text())
    assert len(doc["keypoints"]) == 18 and len(doc["keypoints"][0]) == 3


def test_missing_files(tmp_path):
    with pytest.raises(InputError):
        io.load_image(tmp_path / "nope.png")
    with pytest.raises(InputError):
        io.load_sample(tmp_path)


def test_mismatched_frames_rejected(tmp_path):
    io.save_sample(tmp_path, synth.identity_sample(10))
    io.save_mask(tmp_path / "person_upper_mask.png", np.zeros((10, 10), bool))
    with pytest.raises(DimensionError):
        io.load_sample(tmp_path)


def test_real_fixtures_load():
    from pathlib import Path
    root = Path(__file__).parent / "fixtures" / "real"
    dirs = sorted(p for p in root.iterdir() if p.is_dir())
    assert len(dirs) >= 5
    for d in dirs:
        s = io.load_sample(d)
        assert s.model_image.shape == (256, 192, 3)
        assert s.garment_mask.any()
