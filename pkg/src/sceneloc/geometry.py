"""Rigid poses, the pinhole camera and pose-error metrics.

Conventions used throughout the package:

* A :class:`Pose` is a camera-to-world transform: ``X_world = R @ X_cam + t``.
  The camera center in world coordinates is therefore ``t``.
* Lengths are millimeters. Pixel coordinates are continuous, with integer
  values at pixel centers (``u`` along the width, ``v`` along the height).

All point functions accept arrays of shape ``(3,)`` or ``(..., 3)`` and
return arrays of matching leading shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GeometryError(ValueError):
    pass


class BehindCameraError(GeometryError):
    """A point with non-positive depth was projected."""


class InvalidDepthError(GeometryError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def skew(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    out = np.zeros(w.shape[:-1] + (3, 3))
    out[..., 0, 1] = -w[..., 2]
    out[..., 0, 2] = w[..., 1]
    out[..., 1, 0] = w[..., 2]
    out[..., 1, 2] = -w[..., 0]
    out[..., 2, 0] = -w[..., 1]
    out[..., 2, 1] = w[..., 0]
    return out


def rotation_from_axis_angle(axis_angle: np.ndarray) -> np.ndarray:
    """Rodrigues formula; broadcasts over leading dimensions of ``axis_angle``."""
    w = np.asarray(axis_angle, dtype=np.float64)
    theta = np.linalg.norm(w, axis=-1)[..., None, None]
    K = skew(w)
    small = theta < 1e-8
    safe = np.where(small, 1.0, theta)
    a = np.where(small, 1.0 - theta**2 / 6.0, np.sin(safe) / safe)
    b = np.where(small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(safe)) / safe**2)
    return np.eye(3) + a * K + b * (K @ K)


def quaternion_from_rotation(R: np.ndarray) -> np.ndarray:
    """Unit quaternion ``(w, x, y, z)`` with ``w >= 0`` for a rotation matrix."""
    R = np.asarray(R, dtype=np.float64)
    tr = np.trace(R)
    if tr > 0:
        s = 2.0 * np.sqrt(tr + 1.0)
        q = [0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = 2.0 * np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        q = [(R[2, 1] - R[1, 2]) / s, 0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s]
    elif R[1, 1] > R[2, 2]:
        s = 2.0 * np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2])
        q = [(R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s]
    else:
        s = 2.0 * np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1])
        q = [(R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s]
    q = np.array(q)
    q /= np.linalg.norm(q)
    return -q if q[0] < 0 else q


def rotation_from_quaternion(q: np.ndarray) -> np.ndarray:
    w, x, y, z = np.asarray(q, dtype=np.float64) / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def nearest_rotation(M: np.ndarray) -> np.ndarray:
    """Project a 3x3 matrix onto SO(3) in the Frobenius sense."""
    U, _, Vt = np.linalg.svd(np.asarray(M, dtype=np.float64))
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt))])
    return U @ D @ Vt


def rotation_angle(R: np.ndarray) -> float:
    """Rotation angle in radians, in ``[0, pi]``.

    Uses the quaternion half-angle form, which stays accurate for tiny angles
    where ``arccos((trace - 1) / 2)`` loses half its digits.
    """
    q = quaternion_from_rotation(R)
    return float(2.0 * np.arctan2(np.linalg.norm(q[1:]), abs(q[0])))


@dataclass(frozen=True)
class Pose:
    """Camera-to-world rigid transform with translation in millimeters."""

    R: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=np.float64)
        t = np.asarray(self.t, dtype=np.float64).reshape(-1)
        if R.shape != (3, 3) or t.shape != (3,):
            raise GeometryError(f"pose needs a 3x3 rotation and a 3-vector, got {R.shape}, {t.shape}")
        if not (np.all(np.isfinite(R)) and np.all(np.isfinite(t))):
            raise GeometryError("pose contains non-finite values")
        if np.abs(R @ R.T - np.eye(3)).max() > 1e-6 or np.linalg.det(R) < 0:
            raise GeometryError("rotation is not orthonormal with det +1")
        object.__setattr__(self, "R", _frozen(R))
        object.__setattr__(self, "t", _frozen(t))

    @classmethod
    def identity(cls) -> Pose:
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, T: np.ndarray) -> Pose:
        T = np.asarray(T, dtype=np.float64)
        return cls(T[:3, :3], T[:3, 3])

    @classmethod
    def from_quaternion(cls, q: np.ndarray, t: np.ndarray) -> Pose:
        return cls(rotation_from_quaternion(q), t)

    @classmethod
    def from_axis_angle(cls, axis_angle: np.ndarray, t: np.ndarray = (0.0, 0.0, 0.0)) -> Pose:
        return cls(rotation_from_axis_angle(axis_angle), t)

    @property
    def quaternion(self) -> np.ndarray:
        return quaternion_from_rotation(self.R)

    @property
    def center(self) -> np.ndarray:
        """Camera center in world coordinates."""
        return self.t

    def matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.R
        T[:3, 3] = self.t
        return T

    def inverse(self) -> Pose:
        return Pose(self.R.T, -self.R.T @ self.t)

    def compose(self, other: Pose) -> Pose:
        """``self ∘ other``: apply ``other`` first, then ``self``."""
        return Pose(self.R @ other.R, self.R @ other.t + self.t)

    def __matmul__(self, other: Pose) -> Pose:
        return self.compose(other)

    def apply(self, points: np.ndarray) -> np.ndarray:
        return transform_point(self, points)

    def is_close(self, other: Pose, rot_tol_deg: float = 1e-6, trans_tol_mm: float = 1e-6) -> bool:
        err = pose_error(self, other)
        return err.rotational <= rot_tol_deg and err.translational <= trans_tol_mm


def compose(a: Pose, b: Pose) -> Pose:
    return a.compose(b)


def inverse(p: Pose) -> Pose:
    return p.inverse()


def transform_point(pose: Pose, points: np.ndarray) -> np.ndarray:
    p = np.asarray(points, dtype=np.float64)
    return p @ pose.R.T + pose.t


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise GeometryError(f"focal lengths must be positive, got {self.fx}, {self.fy}")
        if not (0 < self.cx < self.width and 0 < self.cy < self.height):
            raise GeometryError("principal point must lie inside the image")

    @classmethod
    def seven_scenes(cls) -> Intrinsics:
        return cls(585.0, 585.0, 320.0, 240.0, 640, 480)

    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)


def project(K: Intrinsics, p_cam: np.ndarray) -> np.ndarray:
    """Pinhole projection of camera-frame points.

    Raises :class:`BehindCameraError` if any point has ``z <= 0``. The result
    may fall outside the image.
    """
    p = np.asarray(p_cam, dtype=np.float64)
    z = p[..., 2]
    if np.any(~(z > 0)):
        raise BehindCameraError("point has non-positive depth")
    u = K.cx + K.fx * p[..., 0] / z
    v = K.cy + K.fy * p[..., 1] / z
    return np.stack([u, v], axis=-1)


def backproject(K: Intrinsics, px: np.ndarray, depth) -> np.ndarray:
    px = np.asarray(px, dtype=np.float64)
    d = np.asarray(depth, dtype=np.float64)
    if np.any(~(d > 0)):
        raise InvalidDepthError("depth must be positive")
    x = (px[..., 0] - K.cx) * d / K.fx
    y = (px[..., 1] - K.cy) * d / K.fy
    return np.stack([x, y, np.broadcast_to(d, x.shape)], axis=-1)


def reprojection_error(K: Intrinsics, pose: Pose, scene_points: np.ndarray, px: np.ndarray) -> np.ndarray:
    """Pixel distance between ``px`` and the projection of world points.

    Points at or behind the camera get ``inf`` so that threshold tests treat
    them as outliers.
    """
    p = (np.asarray(scene_points, dtype=np.float64) - pose.t) @ pose.R
    px = np.asarray(px, dtype=np.float64)
    z = p[..., 2]
    front = z > 0
    zs = np.where(front, z, 1.0)
    du = K.cx + K.fx * p[..., 0] / zs - px[..., 0]
    dv = K.cy + K.fy * p[..., 1] / zs - px[..., 1]
    err = np.hypot(du, dv)
    return np.where(front, err, np.inf)


@dataclass(frozen=True)
class PoseError:
    translational: float  # mm
    rotational: float  # degrees

    @property
    def translational_cm(self) -> float:
        return self.translational / 10.0


def pose_error(estimate: Pose, ground_truth: Pose) -> PoseError:
    """Camera-center distance (mm) and relative rotation angle (degrees)."""
    t = float(np.linalg.norm(estimate.center - ground_truth.center))
    r = np.degrees(rotation_angle(estimate.R @ ground_truth.R.T))
    return PoseError(t, float(min(r, 180.0)))
