import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from sceneloc.geometry import Intrinsics, Pose, reprojection_error
from sceneloc.scene_map import (
    ResolutionMismatchError,
    masked_coordinate_loss,
    pixel_grid,
    scene_coords_from_depth,
    to_point_cloud,
)

from conftest import random_pose

SMALL = Intrinsics(50.0, 55.0, 8.0, 6.0, 16, 12)


def test_principal_point_identity_pose():
    K = Intrinsics(585.0, 585.0, 8.0, 6.0, 16, 12)
    depth = np.full((12, 16), 2000, dtype=np.uint16)
    coords, mask = scene_coords_from_depth(depth, Pose.identity(), K)
    np.testing.assert_array_equal(coords[6, 8], [0, 0, 2000])
    assert mask.all()


@pytest.mark.parametrize("code", [0, 65535])
def test_invalid_codes_masked_out(code):
    depth = np.full((12, 16), 1500, dtype=np.uint16)
    depth[3, 4] = code
    coords, mask = scene_coords_from_depth(depth, Pose.identity(), SMALL)
    assert not mask[3, 4] and mask.sum() == 12 * 16 - 1
    np.testing.assert_array_equal(coords[3, 4], 0.0)


def test_resolution_mismatch():
    with pytest.raises(ResolutionMismatchError):
        scene_coords_from_depth(np.ones((10, 10), np.uint16), Pose.identity(), SMALL)


def test_coordinates_reproject_to_pixel_centers(rng, K):
    pose = random_pose(rng)
    depth = rng.integers(0, 8000, size=K.shape).astype(np.uint16)
    coords, mask = scene_coords_from_depth(depth, pose, K)
    px = pixel_grid(*K.shape)
    err = reprojection_error(K, pose, coords[mask], px[mask])
    assert err.max() < 1e-6


def test_loss_hand_values():
    gt = np.zeros((3, 3, 3))
    pred = gt.copy()
    pred[1, 2] = [3, 4, 0]
    mask = np.zeros((3, 3), bool)
    mask[1, 2] = True
    loss = masked_coordinate_loss(pred, gt, mask)
    assert loss.total == 5.0 and loss.count == 1 and loss.mean == 5.0
    assert masked_coordinate_loss(pred, gt, np.zeros_like(mask)).total == 0.0
    assert masked_coordinate_loss(pred, gt, np.zeros_like(mask)).count == 0


def test_loss_shape_mismatch():
    with pytest.raises(ResolutionMismatchError):
        masked_coordinate_loss(np.zeros((3, 3, 3)), np.zeros((3, 3, 3)), np.ones((3, 4), bool))


coord_maps = hnp.arrays(np.float64, (4, 5, 3), elements=st.floats(-1e4, 1e4))
masks = hnp.arrays(np.bool_, (4, 5))


@given(coord_maps, coord_maps, coord_maps, masks)
def test_loss_metric_properties(a, b, c, m):
    assert masked_coordinate_loss(a, a, m).total == 0.0
    assert masked_coordinate_loss(a, b, m).total == masked_coordinate_loss(b, a, m).total
    ab, bc, ac = (masked_coordinate_loss(x, y, m).total for x, y in ((a, b), (b, c), (a, c)))
    assert ac <= ab + bc + 1e-6 * (1 + ab + bc)


@given(coord_maps, coord_maps, masks, st.integers(0, 19))
def test_loss_monotone_in_mask(a, b, m, k):
    bigger = m.copy()
    bigger.flat[k] = True
    assert masked_coordinate_loss(a, b, bigger).total >= masked_coordinate_loss(a, b, m).total


@given(coord_maps, masks)
def test_loss_zero_iff_equal_on_mask(a, m):
    b = a.copy()
    b[~m] += 1.0
    assert masked_coordinate_loss(a, b, m).total == 0.0
    if m.any():
        b[m] += 1.0
        assert masked_coordinate_loss(a, b, m).total > 0.0


def test_point_cloud_entries(rng):
    coords = rng.normal(size=(4, 5, 3))
    rgb = rng.integers(0, 256, size=(4, 5, 3), dtype=np.uint8)
    assert len(to_point_cloud(coords, np.zeros((4, 5), bool), rgb)) == 0

    one = np.zeros((4, 5), bool)
    one[2, 3] = True
    pc = to_point_cloud(coords, one, rgb)
    np.testing.assert_array_equal(pc.points[0], coords[2, 3])
    np.testing.assert_array_equal(pc.colors[0], rgb[2, 3])
    np.testing.assert_array_equal(pc.pixels[0], [3, 2])

    mask = rng.random((4, 5)) < 0.5
    pc = to_point_cloud(coords, mask, rgb)
    assert len(pc) == mask.sum()
    order = pc.pixels[:, 1] * 5 + pc.pixels[:, 0]
    assert np.all(np.diff(order) > 0)
