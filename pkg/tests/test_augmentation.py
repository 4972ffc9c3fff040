import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sceneloc.augmentation import (
    BRANCH_2D,
    BRANCH_3D,
    BRANCH_IDENTITY,
    AugmentationConfig,
    AugmentationParams,
    augment,
    apply_3d_reprojection,
    apply_affine_2d,
    render_point_cloud,
    sample_augmentation,
)
from sceneloc.geometry import Intrinsics, Pose, project, reprojection_error, transform_point
from sceneloc.scene_map import ResolutionMismatchError, pixel_grid


def max_consistency_error(sample):
    if not sample.mask.any():
        return 0.0
    px = pixel_grid(*sample.mask.shape)
    return float(reprojection_error(sample.intrinsics, sample.pose, sample.coords[sample.mask], px[sample.mask]).max())


def small_triple(rng, h=12, w=16):
    rgb = rng.integers(0, 256, (h, w, 3), dtype=np.uint8)
    coords = rng.normal(size=(h, w, 3)) * 100
    mask = rng.random((h, w)) < 0.8
    return rgb, coords, mask


def test_identity_2d_is_bit_exact(rng, frame):
    _, _, coords, rgb = frame
    mask = rng.random(coords.shape[:2]) < 0.9
    s = apply_affine_2d(rgb, coords, mask, AugmentationParams.identity_2d(), rng)
    assert s.rgb.tobytes() == rgb.tobytes()
    assert np.array_equal(s.mask, mask)
    assert np.array_equal(s.coords[mask], coords[mask])


def test_integer_translation(rng):
    rgb, coords, mask = small_triple(rng)
    s = apply_affine_2d(rgb, coords, mask, AugmentationParams(BRANCH_2D, shift_px=(10.0, 0.0)), rng)
    np.testing.assert_array_equal(s.rgb[:, 10:], rgb[:, :-10])
    np.testing.assert_array_equal(s.mask[:, 10:], mask[:, :-10])
    np.testing.assert_array_equal(s.coords[:, 10:][mask[:, :-10]], coords[:, :-10][mask[:, :-10]])
    assert not s.mask[:, :10].any()
    # one padding color for the whole sample
    assert len(np.unique(s.rgb[:, :10].reshape(-1, 3), axis=0)) == 1


def test_half_scale_nearest_neighbor_oracle(rng):
    rgb, coords, mask = small_triple(rng, 20, 30)
    p = AugmentationParams(BRANCH_2D, scale=0.5)
    s = apply_affine_2d(rgb, coords, mask, p, rng)
    c = np.array([(30 - 1) / 2, (20 - 1) / 2])
    for v in range(20):
        for u in range(30):
            src = c + (np.array([u, v]) - c) / 0.5
            nu, nv = (np.floor(src + 0.5)).astype(int)
            inside = 0 <= nu < 30 and 0 <= nv < 20
            assert s.mask[v, u] == (inside and mask[nv, nu])
            if s.mask[v, u]:
                np.testing.assert_array_equal(s.coords[v, u], coords[nv, nu])


def test_2d_branch_consistent_with_equivalent_camera(frame, K):
    pose, _, coords, rgb = frame
    mask = np.ones(K.shape, bool)
    rng = np.random.default_rng(1)
    for angle, scale, shift in [(30.0, 1.4, (50.0, -20.0)), (-45.0, 0.7, (0.0, 0.0)), (10.0, 1.5, (-90.0, 60.0))]:
        s = apply_affine_2d(rgb, coords, mask, AugmentationParams(BRANCH_2D, shift, angle, scale), rng, K, pose)
        assert s.mask.any()
        assert max_consistency_error(s) <= 1.0


def test_2d_without_square_pixels_has_no_camera(rng):
    K = Intrinsics(50.0, 60.0, 8.0, 6.0, 16, 12)
    rgb, coords, mask = small_triple(rng)
    s = apply_affine_2d(rgb, coords, mask, AugmentationParams(BRANCH_2D, angle_deg=5.0), rng, K, Pose.identity())
    assert s.pose is None and s.intrinsics is None
    s = apply_affine_2d(rgb, coords, mask, AugmentationParams(BRANCH_2D, scale=1.2), rng, K, Pose.identity())
    assert s.pose is not None


def test_resolution_mismatch(rng):
    rgb, coords, mask = small_triple(rng)
    with pytest.raises(ResolutionMismatchError):
        apply_affine_2d(rgb[:5], coords, mask, AugmentationParams.identity_2d(), rng)


def test_zero_perturbation_reproduces_input(frame, K, rng):
    pose, _, coords, rgb = frame
    mask = np.ones(K.shape, bool)
    s = apply_3d_reprojection(rgb, coords, mask, K, pose, Pose.identity(), rng)
    assert s.mask.sum() >= 0.99 * mask.sum()
    same = s.mask
    np.testing.assert_allclose(s.coords[same], coords[same], atol=1e-6)
    assert max_consistency_error(s) <= 0.5


def test_single_point_lands_at_projection(rng):
    K = Intrinsics(100.0, 100.0, 20.0, 15.0, 40, 30)
    gt = Pose.identity()
    pert = Pose.from_axis_angle([0.0, 0.05, 0.0], [30.0, -10.0, 5.0])
    rgb = np.zeros((30, 40, 3), np.uint8)
    coords = np.zeros((30, 40, 3))
    mask = np.zeros((30, 40), bool)
    coords[15, 20] = [40.0, 25.0, 1000.0]
    rgb[15, 20] = [1, 2, 3]
    mask[15, 20] = True
    s = apply_3d_reprojection(rgb, coords, mask, K, gt, pert, rng)
    new_pose = gt.compose(pert)
    u, v = np.floor(project(K, transform_point(new_pose.inverse(), coords[15, 20])) + 0.5).astype(int)
    assert s.mask.sum() == 1 and s.mask[v, u]
    np.testing.assert_array_equal(s.rgb[v, u], [1, 2, 3])
    assert s.pose.is_close(new_pose, 0, 0)


def test_points_behind_camera_give_empty_mask(frame, K, rng):
    pose, _, coords, rgb = frame
    turn = Pose.from_axis_angle([0.0, np.pi, 0.0])
    s = apply_3d_reprojection(rgb, coords, np.ones(K.shape, bool), K, pose, turn, rng)
    # nothing in front of the original camera can be in front of the reversed one at the same center
    assert not s.mask.any()


def test_z_buffer_keeps_nearest(rng):
    K = Intrinsics(100.0, 100.0, 5.0, 5.0, 10, 10)
    pts = np.array([[0.0, 0.0, 2000.0], [0.0, 0.0, 1000.0], [0.0, 0.0, 3000.0]])
    cols = np.array([[1, 1, 1], [2, 2, 2], [3, 3, 3]], np.uint8)
    rgb, coords, mask = render_point_cloud(pts, cols, Pose.identity(), K, rng)
    assert mask.sum() == 1 and coords[5, 5, 2] == 1000.0 and rgb[5, 5, 0] == 2


def test_3d_padding_varies_per_pixel(rng):
    K = Intrinsics(100.0, 100.0, 5.0, 5.0, 10, 10)
    rgb, _, mask = render_point_cloud(np.empty((0, 3)), np.empty((0, 3), np.uint8), Pose.identity(), K, rng)
    assert not mask.any() and len(np.unique(rgb.reshape(-1, 3), axis=0)) > 50


def test_3d_mask_count_never_grows(frame, K):
    pose, _, coords, rgb = frame
    rng = np.random.default_rng(5)
    mask = rng.random(K.shape) < 0.7
    for _ in range(5):
        p = sample_augmentation(AugmentationConfig(p_2d=0, p_3d=1, p_identity=0), rng)
        s = apply_3d_reprojection(rgb, coords, mask, K, pose, p.perturbation(), rng, p)
        assert s.mask.sum() <= mask.sum()
        assert max_consistency_error(s) <= 1.0


def test_p_identity_one():
    rng = np.random.default_rng(0)
    cfg = AugmentationConfig(p_2d=0.0, p_3d=0.0, p_identity=1.0)
    assert all(sample_augmentation(cfg, rng).branch == BRANCH_IDENTITY for _ in range(1000))


@given(st.integers(0, 2**63 - 1))
def test_sampled_parameters_in_range(seed):
    cfg = AugmentationConfig()
    rng = np.random.default_rng(seed)
    for _ in range(20):
        p = sample_augmentation(cfg, rng)
        if p.branch == BRANCH_2D:
            assert abs(p.shift_px[0]) <= 0.2 * 640 and abs(p.shift_px[1]) <= 0.2 * 480
            assert -45 <= p.angle_deg <= 45 and 0.7 <= p.scale <= 1.5
        elif p.branch == BRANCH_3D:
            assert 0 <= p.angle_deg <= 60 and np.linalg.norm(p.translation_mm) <= 200 + 1e-9
            assert np.linalg.norm(p.axis) == pytest.approx(1.0)


def test_sampling_deterministic():
    a = [sample_augmentation(AugmentationConfig(), np.random.default_rng(9)) for _ in range(3)]
    assert a[0] == a[1] == a[2]


def test_3d_axis_uniform_on_sphere():
    rng = np.random.default_rng(0)
    cfg = AugmentationConfig(p_2d=0, p_3d=1, p_identity=0)
    axes = np.array([sample_augmentation(cfg, rng).axis for _ in range(20000)])
    # each coordinate of a uniform unit vector is uniform on [-1, 1]
    for k in range(3):
        counts, _ = np.histogram(axes[:, k], bins=10, range=(-1, 1))
        assert ((counts - 2000) ** 2 / 2000).sum() < 27.88


def test_augment_deterministic(frame, K):
    pose, _, coords, rgb = frame
    mask = np.ones(K.shape, bool)
    runs = []
    for _ in range(2):
        rng = np.random.default_rng(42)
        runs.append([augment(rgb, coords, mask, K, pose, AugmentationConfig(), rng) for _ in range(3)])
    for a, b in zip(*runs):
        assert a.params == b.params
        assert a.rgb.tobytes() == b.rgb.tobytes() and a.coords.tobytes() == b.coords.tobytes()
        assert a.mask.tobytes() == b.mask.tobytes()


def test_config_validation():
    with pytest.raises(ValueError):
        AugmentationConfig(p_2d=0.5, p_3d=0.5, p_identity=0.5)
    with pytest.raises(ValueError):
        AugmentationConfig(scale_range=(1.5, 0.7))
