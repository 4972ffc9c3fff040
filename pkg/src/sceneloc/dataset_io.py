"""7-Scenes style dataset ingestion and on-disk formats.

Layout::

    <root>/<scene>/seq-XX/frame-XXXXXX.color.png   8-bit RGB
    <root>/<scene>/seq-XX/frame-XXXXXX.depth.png   16-bit depth, millimeters
    <root>/<scene>/seq-XX/frame-XXXXXX.pose.txt    4x4 camera-to-world, meters

Split manifests are text files listing one sequence per line, either as
``seq-01`` (relative to a scene directory) or ``chess/seq-01``.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import cv2
import numpy as np

from .geometry import Intrinsics, Pose, nearest_rotation
from .predictor import load_prediction_map, write_prediction_map

log = logging.getLogger(__name__)

_FRAME_RE = re.compile(r"^frame-(\d+)\.color\.png$")
MAX_ROTATION_DRIFT = 1e-3


class DatasetError(ValueError):
    pass


class PoseFormatError(DatasetError):
    pass


class DepthFormatError(DatasetError):
    pass


@dataclass(frozen=True)
class FrameId:
    scene: str
    sequence: str
    index: int

    def __str__(self) -> str:
        return f"{self.scene}/{self.sequence}/frame-{self.index:06d}"

    @classmethod
    def parse(cls, text: str) -> FrameId:
        m = re.fullmatch(r"(.+)/([^/]+)/frame-(\d+)", text)
        if not m:
            raise DatasetError(f"bad frame id {text!r}")
        return cls(m.group(1), m.group(2), int(m.group(3)))


@dataclass
class FrameRecord:
    frame_id: FrameId
    rgb_path: Path
    depth_path: Path
    pose_path: Path
    intrinsics: Intrinsics

    def load_rgb(self) -> np.ndarray:
        return load_color(self.rgb_path)

    def load_depth(self) -> np.ndarray:
        return load_depth(self.depth_path)

    def load_pose(self) -> Pose:
        return load_pose_file(self.pose_path)


@dataclass
class SceneDataset:
    root: Path
    sequences: list[tuple[str, str]]  # (scene, sequence)
    intrinsics: dict[str, Intrinsics] = field(default_factory=dict)
    default_intrinsics: Intrinsics = field(default_factory=Intrinsics.seven_scenes)

    def intrinsics_for(self, scene: str) -> Intrinsics:
        return self.intrinsics.get(scene, self.default_intrinsics)


# ---------------------------------------------------------------------------
# poses


def parse_pose_text(text: str) -> Pose:
    """Parse a 4x4 camera-to-world matrix with translation in meters."""
    try:
        values = [float(tok) for tok in text.split()]
    except ValueError as exc:
        raise PoseFormatError(f"non-numeric pose entry: {exc}") from None
    if len(values) != 16:
        raise PoseFormatError(f"expected 16 values, found {len(values)}")
    T = np.array(values).reshape(4, 4)
    if not np.all(np.isfinite(T)):
        raise PoseFormatError("pose contains non-finite values")
    if np.abs(T[3] - [0, 0, 0, 1]).max() > 1e-6:
        raise PoseFormatError(f"last row must be 0 0 0 1, got {T[3].tolist()}")
    R = T[:3, :3]
    drift = np.abs(R @ R.T - np.eye(3)).max()
    if drift > MAX_ROTATION_DRIFT or np.linalg.det(R) <= 0:
        raise PoseFormatError(f"rotation is not rigid (orthonormality drift {drift:.2e})")
    return Pose(nearest_rotation(R), T[:3, 3] * 1000.0)


def load_pose_file(path: str | Path) -> Pose:
    return parse_pose_text(Path(path).read_text())


def format_pose(pose: Pose) -> str:
    T = pose.matrix()
    T[:3, 3] /= 1000.0
    return "".join("\t".join(f"{v:.17g}" for v in row) + "\n" for row in T)


def write_pose_file(path: str | Path, pose: Pose) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_pose(pose))


# ---------------------------------------------------------------------------
# images


def load_depth(path: str | Path) -> np.ndarray:
    """16-bit depth in millimeters; 0 and 65535 are the invalid codes."""
    path = Path(path)
    if not path.is_file():
        raise DepthFormatError(f"{path}: no such file")
    img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if img is None:
        raise DepthFormatError(f"{path}: cannot decode image")
    if img.dtype != np.uint16 or img.ndim != 2:
        raise DepthFormatError(f"{path}: expected single-channel 16-bit depth, got {img.dtype} {img.shape}")
    return img


def write_depth(path: str | Path, depth: np.ndarray) -> None:
    depth = np.asarray(depth)
    if depth.dtype != np.uint16 or depth.ndim != 2:
        raise DepthFormatError("depth must be a 2D uint16 array")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if not cv2.imwrite(str(path), depth):
        raise DatasetError(f"{path}: write failed")


def load_color(path: str | Path) -> np.ndarray:
    img = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if img is None:
        raise DatasetError(f"{path}: cannot decode color image")
    return cv2.cvtColor(img, cv2.COLOR_BGR2RGB)


def write_color(path: str | Path, rgb: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if not cv2.imwrite(str(path), cv2.cvtColor(np.ascontiguousarray(rgb), cv2.COLOR_RGB2BGR)):
        raise DatasetError(f"{path}: write failed")


def write_scene_coord_image(path: str | Path, coords: np.ndarray, mask: np.ndarray) -> None:
    write_prediction_map(path, coords, mask)


load_scene_coord_image = load_prediction_map


# ---------------------------------------------------------------------------
# dataset scanning


def read_split_manifest(path: str | Path) -> list[str]:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    entries = [ln for ln in lines if ln and not ln.startswith("#")]
    if not entries:
        raise DatasetError(f"{path}: empty split manifest")
    return entries


def _resolve_sequences(root: Path, entries: list[str]) -> list[tuple[str, str]]:
    resolved = []
    for entry in entries:
        parts = entry.strip("/").split("/")
        if len(parts) == 2:
            resolved.append((parts[0], parts[1]))
        elif len(parts) == 1:
            scenes = sorted(p.name for p in root.iterdir() if (p / parts[0]).is_dir())
            # an unmatched entry is kept so that iteration reports it
            resolved.extend((s, parts[0]) for s in scenes or ["?"])
        else:
            raise DatasetError(f"bad manifest entry {entry!r}")
    return resolved


def scan_dataset(root: str | Path, split_manifest: str | Path | list[str],
                 intrinsics: dict[str, Intrinsics] | None = None,
                 default_intrinsics: Intrinsics | None = None) -> SceneDataset:
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} does not exist")
    entries = split_manifest if isinstance(split_manifest, list) else read_split_manifest(split_manifest)
    if not entries:
        raise DatasetError("empty split manifest")
    ds = SceneDataset(root, _resolve_sequences(root, entries), dict(intrinsics or {}))
    if default_intrinsics is not None:
        ds.default_intrinsics = default_intrinsics
    return ds


@dataclass
class ScanIssue:
    where: str
    problem: str


def iterate(ds: SceneDataset, issues: list[ScanIssue] | None = None) -> Iterator[FrameRecord]:
    """Yield frames in (sequence, index) order.

    Frames with missing files and unknown sequences are skipped; each problem
    is logged and appended to ``issues`` when given.
    """
    def report(where, problem):
        log.warning("%s: %s", where, problem)
        if issues is not None:
            issues.append(ScanIssue(where, problem))

    for scene, seq in sorted(ds.sequences):
        seq_dir = ds.root / scene / seq
        if not seq_dir.is_dir():
            report(f"{scene}/{seq}", "unknown sequence")
            continue
        indices = sorted(int(m.group(1)) for p in seq_dir.iterdir() if (m := _FRAME_RE.match(p.name)))
        for idx in indices:
            stem = seq_dir / f"frame-{idx:06d}"
            paths = {kind: stem.with_name(f"{stem.name}.{kind}") for kind in ("color.png", "depth.png", "pose.txt")}
            missing = [k for k, p in paths.items() if not p.is_file()]
            fid = FrameId(scene, seq, idx)
            if missing:
                report(str(fid), f"missing {', '.join(missing)}")
                continue
            yield FrameRecord(fid, paths["color.png"], paths["depth.png"], paths["pose.txt"], ds.intrinsics_for(scene))
