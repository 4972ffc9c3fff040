"""Scene-coordinate prediction sources and correspondence sampling.

The regression network is not part of this package. Anything that turns an
RGB frame into a dense ``(H, W, 3)`` map of world coordinates can be plugged
in as a :class:`PredictionSource`; two are provided:

* :class:`OracleSource` perturbs ground-truth coordinates with Gaussian noise
  and uniform outliers.
* :class:`MapDirectorySource` reads precomputed maps in the SCRD format.

SCRD layout (little-endian)::

    b"SCRD" | u32 version=1 | u32 width | u32 height | u32 flags
    | float32[height*width*3] xyz, row-major
    | u8[height*width] mask          (present iff flags & 1)
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

SCRD_MAGIC = b"SCRD"
SCRD_VERSION = 1
SCRD_FLAG_MASK = 1
_HEADER = struct.Struct("<4sIIII")
# Refuse headers that would need more than 4 GiB of payload.
_MAX_PAYLOAD = 1 << 32


class SCRDFormatError(ValueError):
    pass


class BadMagicError(SCRDFormatError):
    pass


class TruncatedPayloadError(SCRDFormatError):
    pass


class DimensionOverflowError(SCRDFormatError):
    pass


@dataclass(frozen=True)
class CorrespondenceSet:
    pixels: np.ndarray  # (N, 2) pixel (u, v)
    points: np.ndarray  # (N, 3) world mm

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64).reshape(-1, 2)
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        if len(px) != len(pts):
            raise ValueError("pixels and points differ in length")
        object.__setattr__(self, "pixels", px)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.pixels)

    def subset(self, idx) -> CorrespondenceSet:
        return CorrespondenceSet(self.pixels[idx], self.points[idx])


def frame_seed(seed: int, frame_id: str) -> int:
    """64-bit seed for one frame: the first 8 bytes of BLAKE2b("<seed>:<frame_id>")."""
    digest = hashlib.blake2b(f"{seed}:{frame_id}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class PredictionSource(Protocol):
    def predict(self, frame_id: str, rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(coords, mask)`` at the resolution of ``rgb``."""
        ...


@dataclass(frozen=True)
class OracleConfig:
    noise_sigma_mm: float = 10.0
    outlier_fraction: float = 0.0
    outlier_bounds: tuple[tuple[float, float, float], tuple[float, float, float]] = (
        (-2000.0, -2000.0, -2000.0),
        (2000.0, 2000.0, 2000.0),
    )
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.outlier_fraction <= 1.0:
            raise ValueError("outlier_fraction must lie in [0, 1]")
        if self.noise_sigma_mm < 0:
            raise ValueError("noise_sigma_mm must be non-negative")
        lo, hi = np.asarray(self.outlier_bounds, dtype=np.float64)
        if lo.shape != (3,) or np.any(hi <= lo):
            raise ValueError("outlier_bounds must be a non-degenerate box")


def oracle_predict(
    cfg: OracleConfig, gt_coords: np.ndarray, gt_mask: np.ndarray, rng: np.random.Generator | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Noisy dense prediction from ground truth.

    Masked-in pixels become outliers (uniform in ``cfg.outlier_bounds``) with
    probability ``outlier_fraction`` and ``gt + N(0, sigma^2)`` otherwise.
    Masked-out pixels are always uniform draws. The output mask is all ones.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    gt_coords = np.asarray(gt_coords, dtype=np.float64)
    gt_mask = np.asarray(gt_mask, dtype=bool)
    lo, hi = np.asarray(cfg.outlier_bounds, dtype=np.float64)
    shape = gt_mask.shape

    noise = rng.standard_normal(shape + (3,)) * cfg.noise_sigma_mm
    uniform = lo + (hi - lo) * rng.random(shape + (3,))
    outlier = rng.random(shape) < cfg.outlier_fraction
    outlier |= ~gt_mask

    pred = np.where(outlier[..., None], uniform, gt_coords + noise)
    return pred, np.ones(shape, dtype=bool)


class OracleSource:
    """Ground-truth-backed prediction source with a per-frame RNG stream."""

    def __init__(self, cfg: OracleConfig, ground_truth):
        # ground_truth: callable frame_id -> (coords, mask)
        self.cfg = cfg
        self.ground_truth = ground_truth

    def predict(self, frame_id: str, rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        coords, mask = self.ground_truth(frame_id)
        if coords.shape[:2] != rgb.shape[:2]:
            raise ValueError("ground truth and image resolution differ")
        rng = np.random.default_rng(frame_seed(self.cfg.rng_seed, frame_id))
        return oracle_predict(self.cfg, coords, mask, rng)


class MapDirectorySource:
    """Reads ``<root>/<frame_id>.scrd`` for each queried frame."""

    def __init__(self, root: str | Path, suffix: str = ".scrd"):
        self.root = Path(root)
        self.suffix = suffix

    def path_for(self, frame_id: str) -> Path:
        return self.root / f"{frame_id}{self.suffix}"

    def predict(self, frame_id: str, rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        coords, mask = load_prediction_map(self.path_for(frame_id))
        if coords.shape[:2] != rgb.shape[:2]:
            raise ValueError(f"{self.path_for(frame_id)}: map resolution differs from image")
        return coords, mask


def encode_prediction_map(coords: np.ndarray, mask: np.ndarray | None = None) -> bytes:
    coords = np.asarray(coords)
    if coords.ndim != 3 or coords.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) coordinates, got {coords.shape}")
    h, w = coords.shape[:2]
    flags = SCRD_FLAG_MASK if mask is not None else 0
    parts = [_HEADER.pack(SCRD_MAGIC, SCRD_VERSION, w, h, flags), coords.astype("<f4").tobytes()]
    if mask is not None:
        mask = np.asarray(mask)
        if mask.shape != (h, w):
            raise ValueError("mask resolution differs from coordinates")
        parts.append(mask.astype(bool).astype(np.uint8).tobytes())
    return b"".join(parts)


def decode_prediction_map(buf: bytes) -> tuple[np.ndarray, np.ndarray]:
    if len(buf) < _HEADER.size:
        if not SCRD_MAGIC.startswith(buf[:4]):
            raise BadMagicError("not an SCRD file")
        raise TruncatedPayloadError("file shorter than the SCRD header")
    magic, version, w, h, flags = _HEADER.unpack_from(buf)
    if magic != SCRD_MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    if version != SCRD_VERSION:
        raise SCRDFormatError(f"unsupported SCRD version {version}")
    n_coord = w * h * 3 * 4
    n_mask = w * h if flags & SCRD_FLAG_MASK else 0
    if n_coord + n_mask > _MAX_PAYLOAD:
        raise DimensionOverflowError(f"{w}x{h} map exceeds the payload limit")
    if len(buf) < _HEADER.size + n_coord + n_mask:
        raise TruncatedPayloadError(f"expected {n_coord + n_mask} payload bytes, found {len(buf) - _HEADER.size}")
    off = _HEADER.size
    coords = np.frombuffer(buf, dtype="<f4", count=w * h * 3, offset=off).reshape(h, w, 3)
    if n_mask:
        mask = np.frombuffer(buf, dtype=np.uint8, count=w * h, offset=off + n_coord).reshape(h, w) != 0
    else:
        mask = np.ones((h, w), dtype=bool)
    return coords.astype(np.float64), mask


def write_prediction_map(path: str | Path, coords: np.ndarray, mask: np.ndarray | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_prediction_map(coords, mask))


def load_prediction_map(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    return decode_prediction_map(Path(path).read_bytes())


def grid_pixels(width: int, height: int, grid_w: int, grid_h: int) -> np.ndarray:
    """Integer ``(u, v)`` of the cell centers of a ``grid_w x grid_h`` lattice, row-major."""
    if not (1 <= grid_w <= width and 1 <= grid_h <= height):
        raise ValueError(f"grid {grid_w}x{grid_h} does not fit a {width}x{height} image")
    us = np.floor((np.arange(grid_w) + 0.5) * width / grid_w).astype(np.int64)
    vs = np.floor((np.arange(grid_h) + 0.5) * height / grid_h).astype(np.int64)
    vv, uu = np.meshgrid(vs, us, indexing="ij")
    return np.stack([uu.ravel(), vv.ravel()], axis=-1)


def sample_grid(pred: np.ndarray, mask: np.ndarray, grid_w: int = 40, grid_h: int = 40) -> CorrespondenceSet:
    """Correspondences at the lattice cell centers, masked-out pixels included."""
    pred = np.asarray(pred)
    h, w = pred.shape[:2]
    if np.asarray(mask).shape != (h, w):
        raise ValueError("mask resolution differs from prediction")
    px = grid_pixels(w, h, grid_w, grid_h)
    return CorrespondenceSet(px.astype(np.float64), pred[px[:, 1], px[:, 0]])
