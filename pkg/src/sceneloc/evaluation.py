"""Localization and scene-coordinate metrics, reports and the results file.

Conventions: a frame counts as accurate only if its errors are strictly
below 5 cm and 5 degrees; frames that could not be localized are failures and
enter medians and histograms with infinite error. Medians of even-sized
lists take the lower middle element.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .geometry import PoseError
from .scene_map import ResolutionMismatchError

RESULTS_FORMAT = "sceneloc-results"
RESULTS_VERSION = 1
COMPLETE = "Complete"
REPORT_COLUMNS = ["scene", "frames", "median_t_cm", "median_r_deg", "acc_5cm5deg"]


class EvaluationError(ValueError):
    pass


@dataclass
class FrameResult:
    frame_id: str
    pose_error: PoseError | None
    localized: bool = True
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.localized and self.pose_error is None:
            raise EvaluationError(f"{self.frame_id}: localized frame without a pose error")

    @property
    def scene(self) -> str:
        return self.frame_id.split("/", 1)[0]

    @property
    def t_err_mm(self) -> float:
        return self.pose_error.translational if self.localized else math.inf

    @property
    def r_err_deg(self) -> float:
        return self.pose_error.rotational if self.localized else math.inf


def _errors(results: Sequence[FrameResult]) -> tuple[np.ndarray, np.ndarray]:
    if not results:
        raise EvaluationError("no frame results")
    t = np.array([r.t_err_mm for r in results], dtype=np.float64)
    rot = np.array([r.r_err_deg for r in results], dtype=np.float64)
    return t, rot


def accuracy_5cm_5deg(results: Sequence[FrameResult], t_mm: float = 50.0, r_deg: float = 5.0) -> float:
    t, rot = _errors(results)
    return float(np.count_nonzero((t < t_mm) & (rot < r_deg))) / len(results)


def lower_median(values) -> float:
    v = np.sort(np.asarray(values, dtype=np.float64))
    if len(v) == 0:
        raise EvaluationError("median of an empty list")
    return float(v[math.ceil(len(v) / 2) - 1])


def median_pose_error(results: Sequence[FrameResult]) -> tuple[float, float]:
    """Component-wise lower medians: (centimeters, degrees)."""
    t, rot = _errors(results)
    return lower_median(t) / 10.0, lower_median(rot)


def _check_edges(edges) -> np.ndarray:
    e = np.asarray(edges, dtype=np.float64)
    if e.ndim != 1 or len(e) == 0 or np.any(np.diff(e) <= 0):
        raise EvaluationError("bin edges must be strictly increasing")
    return e


def cumulative_fraction(values, edges) -> np.ndarray:
    """Fraction of ``values`` that are ``<= edge`` for each edge."""
    e = _check_edges(edges)
    v = np.sort(np.asarray(values, dtype=np.float64))
    if len(v) == 0:
        raise EvaluationError("no values")
    return np.searchsorted(v, e, side="right") / len(v)


def cumulative_error_histogram(results: Sequence[FrameResult], translation_edges_cm, rotation_edges_deg
                               ) -> tuple[np.ndarray, np.ndarray]:
    """Normalized cumulative error counts for translation (cm) and rotation (deg)."""
    t, rot = _errors(results)
    return cumulative_fraction(t / 10.0, translation_edges_cm), cumulative_fraction(rot, rotation_edges_deg)


@dataclass(frozen=True)
class CoordinateStats:
    count: int
    inliers: int
    inlier_fraction: float
    mean_inlier_error_mm: float
    hist_edges: np.ndarray
    hist_fraction: np.ndarray


def default_coord_hist_edges() -> np.ndarray:
    return np.append(np.arange(0.0, 501.0, 10.0), np.inf)


def scene_coord_inlier_stats(pred: np.ndarray, gt: np.ndarray, mask: np.ndarray, threshold_mm: float = 100.0,
                             hist_edges=None) -> CoordinateStats:
    """Inlier share (error strictly below the threshold), mean inlier error and error histogram.

    Histogram bin ``i`` counts errors in ``[edges[i], edges[i+1])``, normalized
    by the number of masked-in pixels.
    """
    pred, gt, mask = np.asarray(pred), np.asarray(gt), np.asarray(mask, dtype=bool)
    if not (pred.shape == gt.shape and pred.shape[:2] == mask.shape):
        raise ResolutionMismatchError(f"pred {pred.shape}, gt {gt.shape}, mask {mask.shape}")
    n = int(mask.sum())
    if n == 0:
        raise EvaluationError("no masked-in pixels")
    d = pred[mask].astype(np.float64) - gt[mask]
    # elementwise and correctly rounded sums keep results independent of BLAS reduction order
    err = np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] + d[:, 2] * d[:, 2])
    inl = err < threshold_mm
    edges = _check_edges(default_coord_hist_edges() if hist_edges is None else hist_edges)
    idx = np.searchsorted(edges, err, side="right") - 1
    counts = np.bincount(idx[(idx >= 0) & (idx < len(edges) - 1)], minlength=len(edges) - 1)
    return CoordinateStats(
        count=n,
        inliers=int(np.count_nonzero(inl)),
        inlier_fraction=float(np.count_nonzero(inl)) / n,
        mean_inlier_error_mm=math.fsum(err[inl]) / int(inl.sum()) if inl.any() else math.nan,
        hist_edges=edges,
        hist_fraction=counts / n,
    )


def pool_coordinate_stats(stats: Sequence[CoordinateStats]) -> CoordinateStats:
    """Statistics of the union of the pixels behind ``stats`` (shared histogram edges)."""
    if not stats:
        raise EvaluationError("nothing to pool")
    edges = stats[0].hist_edges
    if any(not np.array_equal(s.hist_edges, edges) for s in stats):
        raise EvaluationError("histogram edges differ")
    n = sum(s.count for s in stats)
    k = sum(s.inliers for s in stats)
    err_sum = sum(s.mean_inlier_error_mm * s.inliers for s in stats if s.inliers)
    hist = sum(s.hist_fraction * s.count for s in stats) / n
    return CoordinateStats(n, k, k / n, err_sum / k if k else math.nan, edges, hist)


@dataclass(frozen=True)
class SceneMetrics:
    scene: str
    frames: int
    median_t_cm: float
    median_r_deg: float
    accuracy: float
    failures: int


@dataclass
class MetricReport:
    scenes: list[SceneMetrics]
    translation_edges_cm: np.ndarray
    rotation_edges_deg: np.ndarray
    translation_cumulative: np.ndarray
    rotation_cumulative: np.ndarray

    @property
    def complete(self) -> SceneMetrics:
        return self.scenes[-1]


def default_translation_edges_cm() -> np.ndarray:
    return np.append(np.round(np.arange(0.0, 50.01, 0.5), 10), np.inf)


def default_rotation_edges_deg() -> np.ndarray:
    return np.append(np.round(np.arange(0.0, 20.01, 0.25), 10), np.inf)


def scene_metrics(scene: str, results: Sequence[FrameResult]) -> SceneMetrics:
    t_cm, r_deg = median_pose_error(results)
    return SceneMetrics(scene, len(results), t_cm, r_deg, accuracy_5cm_5deg(results),
                        sum(1 for r in results if not r.localized))


def build_report(results: Sequence[FrameResult], translation_edges_cm=None, rotation_edges_deg=None) -> MetricReport:
    """Per-scene metrics in scene-name order followed by the combined set of all frames."""
    if not results:
        raise EvaluationError("no frame results")
    by_scene: dict[str, list[FrameResult]] = {}
    for r in results:
        by_scene.setdefault(r.scene, []).append(r)
    rows = [scene_metrics(s, by_scene[s]) for s in sorted(by_scene)]
    rows.append(scene_metrics(COMPLETE, results))
    te = _check_edges(default_translation_edges_cm() if translation_edges_cm is None else translation_edges_cm)
    re_ = _check_edges(default_rotation_edges_deg() if rotation_edges_deg is None else rotation_edges_deg)
    tc, rc = cumulative_error_histogram(results, te, re_)
    return MetricReport(rows, te, re_, tc, rc)


# ---------------------------------------------------------------------------
# files


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.6f}"


def write_report_csv(path: str | Path, report: MetricReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for s in report.scenes:
            w.writerow([s.scene, s.frames, _fmt(s.median_t_cm), _fmt(s.median_r_deg), _fmt(s.accuracy)])


def write_histogram_csv(path: str | Path, edges, fractions, value_column: str = "cumulative_fraction") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["edge", value_column])
        for e, f in zip(edges, fractions):
            w.writerow([_fmt(float(e)), _fmt(float(f))])


def read_report_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def result_to_record(r: FrameResult) -> dict:
    rec = {"frame": r.frame_id, "localized": r.localized}
    if r.pose_error is not None:
        rec["t_err_mm"] = r.pose_error.translational
        rec["r_err_deg"] = r.pose_error.rotational
    rec.update(r.diagnostics)
    return rec


def record_to_result(rec: dict) -> FrameResult:
    rec = dict(rec)
    frame = rec.pop("frame")
    localized = bool(rec.pop("localized"))
    t = rec.pop("t_err_mm", None)
    rot = rec.pop("r_err_deg", None)
    err = PoseError(float(t), float(rot)) if t is not None and rot is not None else None
    return FrameResult(frame, err, localized, rec)


def results_header(extra: dict | None = None) -> str:
    head = {"format": RESULTS_FORMAT, "version": RESULTS_VERSION}
    head.update(extra or {})
    return json.dumps(head, sort_keys=True)


def dump_record(rec: dict) -> str:
    return json.dumps(rec, sort_keys=True, allow_nan=False)


def write_results(path: str | Path, results: Iterable[FrameResult], header: dict | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(results_header(header) + "\n")
        for r in results:
            fh.write(dump_record(result_to_record(r)) + "\n")


def read_results(path: str | Path) -> list[FrameResult]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise EvaluationError(f"{path}: empty results file")
    head = json.loads(lines[0])
    if head.get("format") != RESULTS_FORMAT:
        raise EvaluationError(f"{path}: not a results file")
    if head.get("version") != RESULTS_VERSION:
        raise EvaluationError(f"{path}: unsupported results version {head.get('version')}")
    return [record_to_result(json.loads(ln)) for ln in lines[1:] if ln.strip()]
