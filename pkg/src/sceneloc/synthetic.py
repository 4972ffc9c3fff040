"""Procedural indoor scenes for exercising the pipeline without a dataset.

A scene is an axis-aligned room with a few boxes standing inside it, rendered
by exact ray casting. Every pixel of a camera placed inside the room hits a
surface, so ground-truth coordinate maps are dense.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import Intrinsics, Pose, rotation_from_axis_angle
from .scene_map import pixel_grid


@dataclass(frozen=True)
class SceneConfig:
    """A cluttered room: columns and shelves of random footprint standing on the floor.

    Clutter at many depths matters: with only distant walls in view, small
    rotations and lateral translations are nearly indistinguishable.
    """

    room_min: tuple[float, float, float] = (-2500.0, -1500.0, -2500.0)
    room_max: tuple[float, float, float] = (2500.0, 1500.0, 2500.0)
    n_boxes: int = 40
    footprint: tuple[float, float] = (100.0, 400.0)
    height_fraction: tuple[float, float] = (0.5, 1.0)
    camera_region: float = 0.12  # cameras stay within this fraction of the room half-extent
    clearance_mm: float = 400.0
    texture_period_mm: float = 150.0
    seed: int = 0


@dataclass
class SyntheticScene:
    room_min: np.ndarray
    room_max: np.ndarray
    boxes: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    texture_period_mm: float = 150.0
    camera_region: float = 0.12

    @classmethod
    def generate(cls, cfg: SceneConfig = SceneConfig()) -> SyntheticScene:
        rng = np.random.default_rng(cfg.seed)
        lo = np.asarray(cfg.room_min, dtype=np.float64)
        hi = np.asarray(cfg.room_max, dtype=np.float64)
        center = (lo + hi) / 2
        keep_out = (hi - lo) / 2 * cfg.camera_region + cfg.clearance_mm
        boxes = []
        while len(boxes) < cfg.n_boxes:
            fp = rng.uniform(*cfg.footprint, size=2)
            xz = rng.uniform(lo[[0, 2]] + fp / 2, hi[[0, 2]] - fp / 2)
            if np.all(np.abs(xz - center[[0, 2]]) < keep_out[[0, 2]] + fp / 2):
                continue
            height = rng.uniform(*cfg.height_fraction) * (hi[1] - lo[1])
            # y points down: the floor is at room_max[1]
            bmin = np.array([xz[0] - fp[0] / 2, hi[1] - height, xz[1] - fp[1] / 2])
            bmax = np.array([xz[0] + fp[0] / 2, hi[1], xz[1] + fp[1] / 2])
            boxes.append((bmin, bmax))
        return cls(lo, hi, boxes, cfg.texture_period_mm, cfg.camera_region)

    @property
    def outlier_bounds(self):
        return tuple(self.room_min.tolist()), tuple(self.room_max.tolist())

    def random_poses(self, n: int, rng: np.random.Generator, max_tilt_deg: float = 20.0) -> list[Pose]:
        """Camera-to-world poses inside the clear central region of the room."""
        center = (self.room_min + self.room_max) / 2
        half = (self.room_max - self.room_min) / 2 * self.camera_region
        poses = []
        for _ in range(n):
            t = rng.uniform(center - half, center + half)
            yaw = rng.uniform(-np.pi, np.pi)
            tilt = np.radians(rng.uniform(-max_tilt_deg, max_tilt_deg, size=2))
            R = (rotation_from_axis_angle(np.array([0.0, yaw, 0.0]))
                 @ rotation_from_axis_angle(np.array([tilt[0], 0.0, 0.0]))
                 @ rotation_from_axis_angle(np.array([0.0, 0.0, tilt[1]])))
            poses.append(Pose(R, t))
        return poses

    def _room_exit(self, origin, inv):
        t_hit = np.full(inv.shape[:-1], np.inf)
        for k in range(3):
            far = np.where(inv[..., k] > 0, self.room_max[k], self.room_min[k])
            np.minimum(t_hit, (far - origin[k]) * inv[..., k], out=t_hit)
        return t_hit

    @staticmethod
    def _box_hit(origin, inv, bmin, bmax, t_hit):
        t_near = np.zeros_like(t_hit)
        t_far = t_hit.copy()
        for k in range(3):
            a = (bmin[k] - origin[k]) * inv[..., k]
            b = (bmax[k] - origin[k]) * inv[..., k]
            np.maximum(t_near, np.minimum(a, b), out=t_near)
            np.minimum(t_far, np.maximum(a, b), out=t_far)
        return np.where(t_near <= t_far, t_near, t_hit)

    @staticmethod
    def _inverse_dirs(dirs):
        return 1.0 / np.where(np.abs(dirs) < 1e-12, 1e-12, dirs)

    def raycast(self, origin: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        """Ray parameter of the first hit for rays ``origin + s * dirs`` (``origin`` inside the room)."""
        inv = self._inverse_dirs(dirs)
        t_hit = self._room_exit(origin, inv)
        for bmin, bmax in self.boxes:
            t_hit = self._box_hit(origin, inv, bmin, bmax, t_hit)
        return t_hit

    def render(self, pose: Pose, K: Intrinsics) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Depth (mm, float), world coordinates and RGB for a camera-to-world pose.

        Same result as :meth:`raycast` over all pixels; boxes are only tested
        against the pixels inside their projected bounding rectangle.
        """
        grid = pixel_grid(*K.shape)
        rays_cam = np.stack([(grid[..., 0] - K.cx) / K.fx, (grid[..., 1] - K.cy) / K.fy,
                             np.ones(K.shape)], axis=-1)
        rays = rays_cam @ pose.R.T
        inv = self._inverse_dirs(rays)
        origin = pose.t
        depth = self._room_exit(origin, inv)
        for bmin, bmax in self.boxes:
            corners = np.array(np.meshgrid(*zip(bmin, bmax), indexing="ij")).reshape(3, -1).T
            cam = (corners - origin) @ pose.R
            if np.all(cam[:, 2] <= 0):
                continue
            if np.all(cam[:, 2] > 0):
                u = K.cx + K.fx * cam[:, 0] / cam[:, 2]
                v = K.cy + K.fy * cam[:, 1] / cam[:, 2]
                c0, c1 = max(int(np.floor(u.min())), 0), min(int(np.ceil(u.max())) + 1, K.width)
                r0, r1 = max(int(np.floor(v.min())), 0), min(int(np.ceil(v.max())) + 1, K.height)
                if c0 >= c1 or r0 >= r1:
                    continue
            else:
                r0, r1, c0, c1 = 0, K.height, 0, K.width
            win = (slice(r0, r1), slice(c0, c1))
            depth[win] = self._box_hit(origin, inv[win], bmin, bmax, depth[win])
        # camera z equals the ray parameter because rays_cam has unit z
        coords = origin + depth[..., None] * rays
        return depth, coords, self.texture(coords)

    def texture(self, points: np.ndarray) -> np.ndarray:
        p = points / self.texture_period_mm
        cell = np.floor(p).astype(np.int64)
        checker = (cell.sum(axis=-1) & 1).astype(np.float64)
        shade = 0.5 + 0.5 * np.sin(p @ np.array([0.7, 1.3, 0.4]))
        rgb = np.stack([80 + 120 * checker, 60 + 150 * shade, 200 - 120 * checker * shade], axis=-1)
        return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


def write_seven_scenes_fixture(root: str | Path, scene: SyntheticScene, K: Intrinsics, sequences: dict[str, int],
                               rng: np.random.Generator, scene_name: str = "synthetic") -> list[Pose]:
    """Write rendered frames in the 7-Scenes directory layout.

    ``sequences`` maps a sequence name (``"seq-01"``) to its frame count. Depth
    is rounded to whole millimeters as in the real dataset.
    """
    from .dataset_io import write_color, write_depth, write_pose_file

    base = Path(root) / scene_name
    poses = []
    for seq, count in sequences.items():
        for i, pose in enumerate(scene.random_poses(count, rng)):
            depth, _, rgb = scene.render(pose, K)
            stem = base / seq / f"frame-{i:06d}"
            write_color(stem.with_name(stem.name + ".color.png"), rgb)
            write_depth(stem.with_name(stem.name + ".depth.png"), np.clip(np.rint(depth), 1, 65534).astype(np.uint16))
            write_pose_file(stem.with_name(stem.name + ".pose.txt"), pose)
            poses.append(pose)
    return poses
