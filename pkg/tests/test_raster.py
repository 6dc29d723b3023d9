import math

import numpy as np
import pytest

from atagwarp.errors import DimensionError, InputError
from atagwarp.raster import (
    SourceMap, backward_warp, composite, dilate, disc, mask_and, mask_minus, mask_not,
    mask_or, sample_bilinear,
)


def oracle_warp(src, src_mask, smap):
    """Per-pixel reference: nearest-pixel mask test, in-mask bilinear, round half up."""
    h, w = src_mask.shape
    out = np.zeros(smap.shape + src.shape[2:], dtype=np.uint8)
    valid = np.zeros(smap.shape, bool)
    for i, j in zip(*np.nonzero(smap.defined)):
        x, y = smap.coords[i, j]
        if not (-0.5 <= x <= w - 0.5 and -0.5 <= y <= h - 0.5):
            continue
        nx, ny = min(int(math.floor(x + 0.5)), w - 1), min(int(math.floor(y + 0.5)), h - 1)
        if not src_mask[ny, nx]:
            continue
        cx, cy = min(max(x, 0.0), w - 1.0), min(max(y, 0.0), h - 1.0)
        x0, y0 = int(math.floor(cx)), int(math.floor(cy))
        acc, tot = 0.0, 0.0
        for yy, wy in ((y0, 1 - (cy - y0)), (min(y0 + 1, h - 1), cy - y0)):
            for xx, wx in ((x0, 1 - (cx - x0)), (min(x0 + 1, w - 1), cx - x0)):
                if src_mask[yy, xx]:
                    acc = acc + wx * wy * src[yy, xx].astype(float)
                    tot += wx * wy
        out[i, j] = np.minimum(np.floor(acc / tot + 0.5), 255)
        valid[i, j] = True
    return out, valid


def random_case(rng, h=13, w=17, c=3):
    src = rng.integers(0, 256, (h, w, c), dtype=np.uint8)
    mask = rng.random((h, w)) < 0.7
    defined = rng.random((h, w)) < 0.8
    coords = np.full((h, w, 2), np.nan)
    coords[defined] = rng.uniform(-2, max(h, w) + 1, (defined.sum(), 2))
    return src, mask, SourceMap(coords, defined)


# -- sampling -----------------------------------------------------------------

def test_sample_at_pixel_centre():
    img = np.arange(12, dtype=np.uint8).reshape(3, 4) * 10
    assert sample_bilinear(img, (2, 1)) == img[1, 2]


def test_sample_midpoint_rounds_half_up():
    img = np.array([[0, 0], [255, 255]], dtype=np.uint8)
    assert sample_bilinear(img, (0.5, 0.5)) == 128


def test_sample_out_of_bounds():
    img = np.zeros((4, 4, 3), np.uint8)
    assert sample_bilinear(img, (-10, -10)) is None
    assert sample_bilinear(img, (3.51, 0)) is None
    assert sample_bilinear(img, (-0.5, 3.5)) is not None


def test_sample_rgb_vector():
    img = np.zeros((2, 2, 3), np.uint8)
    img[:, 1] = (10, 20, 30)
    np.testing.assert_array_equal(sample_bilinear(img, (0.5, 0)), [5, 10, 15])


# -- backward warp ------------------------------------------------------------

def test_identity_warp_reproduces_source(backend):
    rng = np.random.default_rng(30)
    src = rng.integers(0, 256, (9, 11, 3), dtype=np.uint8)
    full = np.ones((9, 11), bool)
    warped, valid, holes = backward_warp(src, full, SourceMap.identity(full))
    np.testing.assert_array_equal(warped, src)
    assert valid.all() and not holes.any()


def test_map_outside_mask_is_all_holes(backend):
    src = np.full((6, 6, 3), 200, np.uint8)
    mask = np.zeros((6, 6), bool)
    mask[:, :3] = True
    region = np.ones((6, 6), bool)
    coords = np.zeros((6, 6, 2))
    coords[..., 0] = 4.0
    coords[..., 1] = 2.0
    warped, valid, holes = backward_warp(src, mask, SourceMap(coords, region))
    assert not valid.any()
    np.testing.assert_array_equal(holes, region)
    assert not warped.any()


def test_translation_by_one_pixel(backend):
    src = (np.arange(16, dtype=np.uint8).reshape(4, 4) * 15)[..., None].repeat(3, 2)
    region = np.ones((4, 4), bool)
    smap = SourceMap.identity(region)
    smap.coords[..., 0] += 1.0
    warped, valid, holes = backward_warp(src, region, smap)
    np.testing.assert_array_equal(warped[:, :3], src[:, 1:])
    np.testing.assert_array_equal(holes[:, 3], True)
    assert not holes[:, :3].any()
    assert not warped[:, 3].any()


def test_greyscale_source(backend):
    src = np.array([[0, 100], [200, 255]], dtype=np.uint8)
    region = np.ones((2, 2), bool)
    warped, valid, _ = backward_warp(src, region, SourceMap.identity(region))
    assert warped.shape == (2, 2)
    np.testing.assert_array_equal(warped, src)


def test_no_colour_bleeds_across_mask_edge(backend):
    src = np.zeros((3, 4, 3), np.uint8)
    src[:, :2] = (250, 10, 10)
    src[:, 2:] = (0, 255, 0)
    mask = np.zeros((3, 4), bool)
    mask[:, :2] = True
    coords = np.array([[[1.4, 1.0]]])
    warped, valid, _ = backward_warp(src, mask, SourceMap(coords, np.ones((1, 1), bool)))
    assert valid[0, 0]
    np.testing.assert_array_equal(warped[0, 0], (250, 10, 10))


def test_matches_oracle_on_random_maps(backend):
    rng = np.random.default_rng(31)
    for _ in range(25):
        src, mask, smap = random_case(rng)
        warped, valid, holes = backward_warp(src, mask, smap)
        want, want_valid = oracle_warp(src, mask, smap)
        np.testing.assert_array_equal(valid, want_valid)
        np.testing.assert_array_equal(warped, want)
        assert not (valid & holes).any()
        np.testing.assert_array_equal(valid | holes, smap.defined)


def test_backends_agree():
    from atagwarp import _accel
    if not _accel.HAS_NUMBA:
        pytest.skip("numba not installed")
    rng = np.random.default_rng(32)
    src, mask, smap = random_case(rng, 60, 50)
    try:
        _accel.set_backend("numba")
        a = backward_warp(src, mask, smap)
        _accel.set_backend("numpy")
        b = backward_warp(src, mask, smap)
    finally:
        _accel.set_backend(None)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)


def test_warp_dimension_mismatch():
    src = np.zeros((4, 4, 3), np.uint8)
    with pytest.raises(DimensionError):
        backward_warp(src, np.ones((4, 5), bool), SourceMap.empty((4, 4)))


def test_source_map_rejects_nan_inside_defined():
    coords = np.full((2, 2, 2), np.nan)
    with pytest.raises(InputError):
        SourceMap(coords, np.ones((2, 2), bool))


def test_source_map_displacement():
    region = np.ones((3, 3), bool)
    smap = SourceMap.identity(region)
    smap.coords[..., 1] += 2.5
    d = smap.displacement()
    np.testing.assert_allclose(d[..., 0], 0)
    np.testing.assert_allclose(d[..., 1], 2.5)


# -- masks and compositing ----------------------------------------------------

def test_mask_ops_match_numpy():
    rng = np.random.default_rng(33)
    a, b = rng.random((2, 8, 9)) < 0.5
    np.testing.assert_array_equal(mask_and(a, b), a & b)
    np.testing.assert_array_equal(mask_or(a, b), a | b)
    np.testing.assert_array_equal(mask_not(a), ~a)
    np.testing.assert_array_equal(mask_minus(a, b), a & ~b)
    with pytest.raises(DimensionError):
        mask_and(a, b[:, :5])


def test_disc_offsets():
    assert disc(1).sum() == 5
    assert disc(1.5).sum() == 9
    assert disc(2).sum() == 13


def test_dilate_single_pixel_is_plus():
    m = np.zeros((5, 5), bool)
    m[2, 2] = True
    d = dilate(m, 1)
    want = np.zeros((5, 5), bool)
    want[2, 1:4] = True
    want[1:4, 2] = True
    np.testing.assert_array_equal(d, want)
    np.testing.assert_array_equal(dilate(m, 0), m)
    with pytest.raises(InputError):
        dilate(m, -1)


def _layer(value, mask):
    img = np.zeros(mask.shape + (3,), np.uint8)
    img[:] = value
    return img, mask


def test_composite_single_layer_over_background():
    m = np.zeros((4, 4), bool)
    m[1:3, 1:3] = True
    bg = np.full((4, 4, 3), 9, np.uint8)
    out = composite([_layer(200, m)], background=bg)
    assert (out[m] == 200).all() and (out[~m] == 9).all()


def test_composite_disjoint_layers_commute():
    a = np.zeros((4, 4), bool)
    a[:2] = True
    b = ~a
    x = composite([_layer(10, a), _layer(20, b)])
    y = composite([_layer(20, b), _layer(10, a)])
    np.testing.assert_array_equal(x, y)


def test_composite_top_layer_wins():
    a = np.ones((3, 3), bool)
    b = np.zeros((3, 3), bool)
    b[1, 1] = True
    out = composite([_layer(10, a), _layer(99, b)])
    assert out[1, 1, 0] == 99 and out[0, 0, 0] == 10


def test_composite_errors():
    with pytest.raises(InputError):
        composite([])
    with pytest.raises(DimensionError):
        composite([_layer(1, np.ones((3, 3), bool)), _layer(2, np.ones((3, 4), bool))])
