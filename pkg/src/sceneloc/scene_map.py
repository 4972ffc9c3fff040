"""Dense scene-coordinate images and the masked coordinate loss.

A scene-coordinate image is an ``(H, W, 3)`` float array of world points in
millimeters; its validity mask is an ``(H, W)`` boolean array. Masked-out
pixels hold ``(0, 0, 0)``. Depth images are ``(H, W)`` arrays in millimeters
where 0 and 65535 mean "no measurement".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Intrinsics, Pose

DEPTH_INVALID_CODES = (0, 65535)


class ResolutionMismatchError(ValueError):
    pass


def _check_shapes(*arrays):
    shapes = {a.shape[:2] for a in arrays}
    if len(shapes) != 1:
        raise ResolutionMismatchError(f"resolution mismatch: {[a.shape[:2] for a in arrays]}")


def valid_depth(depth: np.ndarray) -> np.ndarray:
    d = np.asarray(depth)
    valid = np.isfinite(d) & (d > 0)
    for code in DEPTH_INVALID_CODES:
        valid &= d != code
    return valid


def pixel_grid(height: int, width: int) -> np.ndarray:
    """Integer pixel-center coordinates ``(u, v)`` as an ``(H, W, 2)`` array."""
    v, u = np.mgrid[0:height, 0:width]
    return np.stack([u, v], axis=-1).astype(np.float64)


def scene_coords_from_depth(depth: np.ndarray, pose: Pose, K: Intrinsics) -> tuple[np.ndarray, np.ndarray]:
    """Ground-truth scene coordinates from a registered depth map.

    Each valid pixel ``(u, v)`` is backprojected at its integer coordinates and
    mapped to the world by the camera-to-world ``pose``.
    """
    depth = np.asarray(depth)
    if depth.shape != K.shape:
        raise ResolutionMismatchError(f"depth {depth.shape} does not match intrinsics {K.shape}")
    mask = valid_depth(depth)
    d = np.where(mask, depth, 0).astype(np.float64)
    grid = pixel_grid(*K.shape)
    cam = np.empty(K.shape + (3,))
    cam[..., 0] = (grid[..., 0] - K.cx) * d / K.fx
    cam[..., 1] = (grid[..., 1] - K.cy) * d / K.fy
    cam[..., 2] = d
    coords = cam @ pose.R.T + pose.t
    coords[~mask] = 0.0
    return coords, mask


@dataclass(frozen=True)
class CoordinateLoss:
    total: float  # mm, summed over masked-in pixels
    count: int

    @property
    def mean(self) -> float:
        return self.total / self.count if self.count else 0.0


def masked_coordinate_loss(pred: np.ndarray, gt: np.ndarray, mask: np.ndarray) -> CoordinateLoss:
    """Sum of per-pixel Euclidean distances over the masked-in pixels."""
    pred, gt, mask = np.asarray(pred), np.asarray(gt), np.asarray(mask, dtype=bool)
    _check_shapes(pred, gt, mask)
    if pred.shape != gt.shape:
        raise ResolutionMismatchError("prediction and ground truth differ in shape")
    dist = np.linalg.norm(pred[mask].astype(np.float64) - gt[mask], axis=-1)
    return CoordinateLoss(float(dist.sum()), int(mask.sum()))


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray  # (n, 3) world mm
    colors: np.ndarray  # (n, 3) uint8
    pixels: np.ndarray  # (n, 2) integer (u, v) of the source pixel

    def __len__(self) -> int:
        return len(self.points)


def to_point_cloud(coords: np.ndarray, mask: np.ndarray, rgb: np.ndarray) -> PointCloud:
    """One entry per masked-in pixel, in row-major order."""
    coords, mask, rgb = np.asarray(coords), np.asarray(mask, dtype=bool), np.asarray(rgb)
    _check_shapes(coords, mask, rgb)
    rows, cols = np.nonzero(mask)
    return PointCloud(
        points=coords[rows, cols].astype(np.float64),
        colors=rgb[rows, cols],
        pixels=np.stack([cols, rows], axis=-1),
    )
