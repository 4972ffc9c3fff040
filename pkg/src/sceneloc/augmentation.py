"""2D affine and 3D reprojection augmentation of (RGB, coordinates, mask) triples.

Both branches keep labels exact: every masked-in pixel of an augmented sample
holds a world point that projects within one pixel of that pixel through the
sample's camera (``pose``, ``intrinsics``).

* The 2D branch warps the image with translation, rotation about the image
  center and scaling. For a camera with ``fx == fy`` such a warp is the same
  as rolling the camera about its optical axis and changing focal length and
  principal point, so the sample gets that equivalent camera.
* The 3D branch turns the labelled pixels into a point cloud, moves the camera
  by a random rigid motion expressed in its own frame and re-renders with a
  one-pixel z-buffer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import GeometryError, Intrinsics, Pose
from .scene_map import ResolutionMismatchError, to_point_cloud

BRANCH_2D = "2d"
BRANCH_3D = "3d"
BRANCH_IDENTITY = "identity"


@dataclass(frozen=True)
class AugmentationConfig:
    p_2d: float = 0.40
    p_3d: float = 0.50
    p_identity: float = 0.10
    trans_2d_frac: float = 0.20
    rot_2d_deg: float = 45.0
    scale_range: tuple[float, float] = (0.7, 1.5)
    rot_3d_deg_max: float = 60.0
    trans_3d_mm_max: float = 200.0
    # 2D labels whose nearest source pixel lands farther than this from the
    # output pixel (possible only for scale > sqrt(2)) are masked out.
    label_tolerance_px: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        probs = (self.p_2d, self.p_3d, self.p_identity)
        if min(probs) < 0 or abs(sum(probs) - 1.0) > 1e-9:
            raise ValueError(f"branch probabilities must be non-negative and sum to 1, got {probs}")
        lo, hi = self.scale_range
        if not 0 < lo < hi:
            raise ValueError("scale_range must satisfy 0 < low < high")
        if self.trans_2d_frac <= 0 or self.rot_2d_deg <= 0 or self.rot_3d_deg_max <= 0 or self.trans_3d_mm_max <= 0:
            raise ValueError("augmentation ranges must be non-degenerate")


@dataclass(frozen=True)
class AugmentationParams:
    branch: str
    shift_px: tuple[float, float] = (0.0, 0.0)
    angle_deg: float = 0.0
    scale: float = 1.0
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    translation_mm: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @classmethod
    def identity_2d(cls) -> AugmentationParams:
        return cls(BRANCH_2D)

    def perturbation(self) -> Pose:
        """Camera-frame rigid motion of the 3D branch."""
        return Pose.from_axis_angle(np.radians(self.angle_deg) * np.asarray(self.axis), self.translation_mm)

    def to_dict(self) -> dict:
        out = {"branch": self.branch}
        if self.branch == BRANCH_2D:
            out.update(shift_px=list(self.shift_px), angle_deg=self.angle_deg, scale=self.scale)
        elif self.branch == BRANCH_3D:
            out.update(axis=list(self.axis), angle_deg=self.angle_deg, translation_mm=list(self.translation_mm))
        return out


@dataclass
class AugmentedSample:
    rgb: np.ndarray
    coords: np.ndarray
    mask: np.ndarray
    pose: Pose | None
    intrinsics: Intrinsics | None
    params: AugmentationParams
    extra: dict = field(default_factory=dict)


def _unit_vector(rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.standard_normal(3)
        n = np.linalg.norm(v)
        if n > 1e-12:
            return v / n


def sample_augmentation(cfg: AugmentationConfig, rng: np.random.Generator, width: int = 640,
                        height: int = 480) -> AugmentationParams:
    """Draw a branch and its parameters.

    2D shifts are uniform in ``±trans_2d_frac`` of the image width and height;
    3D rotation axes and translation directions are uniform on the sphere.
    """
    u = rng.random()
    if u < cfg.p_2d:
        shift = rng.uniform(-cfg.trans_2d_frac, cfg.trans_2d_frac, size=2) * (width, height)
        angle = rng.uniform(-cfg.rot_2d_deg, cfg.rot_2d_deg)
        scale = rng.uniform(*cfg.scale_range)
        return AugmentationParams(BRANCH_2D, tuple(shift.tolist()), float(angle), float(scale))
    if u < cfg.p_2d + cfg.p_3d:
        axis = _unit_vector(rng)
        angle = rng.uniform(0.0, cfg.rot_3d_deg_max)
        direction = _unit_vector(rng)
        magnitude = rng.uniform(0.0, cfg.trans_3d_mm_max)
        return AugmentationParams(BRANCH_3D, angle_deg=float(angle), axis=tuple(axis.tolist()),
                                  translation_mm=tuple((direction * magnitude).tolist()))
    return AugmentationParams(BRANCH_IDENTITY)


def _check_triple(rgb, coords, mask):
    if not (rgb.shape[:2] == coords.shape[:2] == mask.shape):
        raise ResolutionMismatchError(f"rgb {rgb.shape}, coords {coords.shape}, mask {mask.shape}")


def _rot2(angle_deg):
    a = np.radians(angle_deg)
    return np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])


def affine_2d_matrix(params: AugmentationParams, width: int, height: int) -> np.ndarray:
    """Forward 2x3 map ``out = A[:, :2] @ in + A[:, 2]`` in pixel coordinates."""
    center = np.array([(width - 1) / 2.0, (height - 1) / 2.0])
    M = params.scale * _rot2(params.angle_deg)
    b = center + np.asarray(params.shift_px) - M @ center
    return np.hstack([M, b[:, None]])


def equivalent_camera_2d(params: AugmentationParams, K: Intrinsics, pose: Pose) -> tuple[Pose, Intrinsics] | None:
    """Camera that sees exactly the warped image, or ``None`` if none exists."""
    if params.angle_deg != 0.0 and K.fx != K.fy:
        return None
    A = affine_2d_matrix(params, K.width, K.height)
    c = A[:, :2] @ np.array([K.cx, K.cy]) + A[:, 2]
    roll = np.eye(3)
    roll[:2, :2] = _rot2(params.angle_deg)
    try:
        K2 = Intrinsics(K.fx * params.scale, K.fy * params.scale, float(c[0]), float(c[1]), K.width, K.height)
    except GeometryError:
        return None
    return pose.compose(Pose(roll.T, np.zeros(3))), K2


def apply_affine_2d(rgb: np.ndarray, coords: np.ndarray, mask: np.ndarray, params: AugmentationParams,
                    rng: np.random.Generator, K: Intrinsics | None = None, pose: Pose | None = None,
                    label_tolerance_px: float = 1.0) -> AugmentedSample:
    """Warp all three images with one affine map.

    RGB is sampled bilinearly, coordinates and mask by nearest neighbor. Pixels
    that fall outside the source are masked out and their RGB is one random
    color shared by the whole sample.
    """
    rgb, coords, mask = np.asarray(rgb), np.asarray(coords), np.asarray(mask, dtype=bool)
    _check_triple(rgb, coords, mask)
    h, w = mask.shape
    A = affine_2d_matrix(params, w, h)
    Minv = np.linalg.inv(A[:, :2])
    v, u = np.mgrid[0:h, 0:w]
    out_px = np.stack([u, v], axis=-1).astype(np.float64)
    src = (out_px - A[:, 2]) @ Minv.T
    su, sv = src[..., 0], src[..., 1]

    nu = np.floor(su + 0.5).astype(np.int64)
    nv = np.floor(sv + 0.5).astype(np.int64)
    inside = (nu >= 0) & (nu < w) & (nv >= 0) & (nv < h)
    nu_c, nv_c = np.clip(nu, 0, w - 1), np.clip(nv, 0, h - 1)

    u0 = np.clip(np.floor(su).astype(np.int64), 0, w - 1)
    v0 = np.clip(np.floor(sv).astype(np.int64), 0, h - 1)
    u1, v1 = np.minimum(u0 + 1, w - 1), np.minimum(v0 + 1, h - 1)
    fu = np.clip(su - u0, 0.0, 1.0)[..., None]
    fv = np.clip(sv - v0, 0.0, 1.0)[..., None]
    flat = rgb.reshape(h * w, -1).astype(np.float64)
    top = flat[v0 * w + u0] * (1 - fu) + flat[v0 * w + u1] * fu
    bottom = flat[v1 * w + u0] * (1 - fu) + flat[v1 * w + u1] * fu
    warped = np.clip(np.rint(top * (1 - fv) + bottom * fv), 0, 255).astype(rgb.dtype)

    pad = rng.integers(0, 256, size=rgb.shape[2:], dtype=np.int64).astype(rgb.dtype)
    out_rgb = np.where(inside[..., None], warped, pad)

    label_err = params.scale * np.hypot(nu - su, nv - sv)
    out_mask = inside & mask[nv_c, nu_c] & (label_err <= label_tolerance_px)
    out_coords = np.where(out_mask[..., None], coords[nv_c, nu_c], 0.0)

    cam = equivalent_camera_2d(params, K, pose) if K is not None and pose is not None else None
    new_pose, new_K = cam if cam is not None else (None, None)
    return AugmentedSample(out_rgb, out_coords, out_mask, new_pose, new_K, params)


def render_point_cloud(points: np.ndarray, colors: np.ndarray, pose: Pose, K: Intrinsics, rng: np.random.Generator,
                       channels: int = 3, dtype=np.uint8):
    """Splat world points into a camera with a nearest-depth z-buffer.

    Returns ``(rgb, coords, mask)``; unrendered pixels get independent random colors.
    """
    h, w = K.height, K.width
    rgb = rng.integers(0, 256, size=(h, w, channels), dtype=np.int64).astype(dtype)
    coords = np.zeros((h, w, 3))
    mask = np.zeros((h, w), dtype=bool)
    cam = (np.asarray(points, dtype=np.float64) - pose.t) @ pose.R
    front = cam[:, 2] > 0
    z = np.where(front, cam[:, 2], 1.0)
    u = np.floor(K.cx + K.fx * cam[:, 0] / z + 0.5)
    v = np.floor(K.cy + K.fy * cam[:, 1] / z + 0.5)
    ok = front & (u >= 0) & (u < w) & (v >= 0) & (v < h)
    idx = np.nonzero(ok)[0]
    if len(idx) == 0:
        return rgb, coords, mask
    lin = v[idx].astype(np.int64) * w + u[idx].astype(np.int64)
    order = np.lexsort((z[idx], lin))  # by pixel, then nearest first; stable for equal depths
    lin_sorted = lin[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = lin_sorted[1:] != lin_sorted[:-1]
    winners = idx[order[first]]
    pix = lin_sorted[first]
    rr, cc = pix // w, pix % w
    rgb[rr, cc] = colors[winners]
    coords[rr, cc] = points[winners]
    mask[rr, cc] = True
    return rgb, coords, mask


def apply_3d_reprojection(rgb: np.ndarray, coords: np.ndarray, mask: np.ndarray, K: Intrinsics, gt_pose: Pose,
                          perturbation: Pose, rng: np.random.Generator,
                          params: AugmentationParams | None = None) -> AugmentedSample:
    """Re-render the labelled pixels from ``gt_pose ∘ perturbation``."""
    rgb, coords, mask = np.asarray(rgb), np.asarray(coords), np.asarray(mask, dtype=bool)
    _check_triple(rgb, coords, mask)
    if mask.shape != K.shape:
        raise ResolutionMismatchError(f"images {mask.shape} do not match intrinsics {K.shape}")
    cloud = to_point_cloud(coords, mask, rgb)
    new_pose = gt_pose.compose(perturbation)
    out_rgb, out_coords, out_mask = render_point_cloud(cloud.points, cloud.colors, new_pose, K, rng,
                                                       channels=rgb.shape[2], dtype=rgb.dtype)
    if params is None:
        params = AugmentationParams(BRANCH_3D)
    return AugmentedSample(out_rgb, out_coords, out_mask, new_pose, K, params)


def augment(rgb: np.ndarray, coords: np.ndarray, mask: np.ndarray, K: Intrinsics, pose: Pose,
            cfg: AugmentationConfig, rng: np.random.Generator) -> AugmentedSample:
    """Draw a branch from ``cfg`` and apply it."""
    params = sample_augmentation(cfg, rng, width=mask.shape[1], height=mask.shape[0])
    if params.branch == BRANCH_2D:
        return apply_affine_2d(rgb, coords, mask, params, rng, K, pose, cfg.label_tolerance_px)
    if params.branch == BRANCH_3D:
        return apply_3d_reprojection(rgb, coords, mask, K, pose, params.perturbation(), rng, params)
    _check_triple(np.asarray(rgb), np.asarray(coords), np.asarray(mask))
    return AugmentedSample(np.array(rgb), np.array(coords, dtype=np.float64), np.array(mask, dtype=bool), pose, K, params)
