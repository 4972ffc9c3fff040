"""Command-line driver: ``sceneloc {gen-gt,augment,localize,evaluate}``.

Every option can also be given in a ``--config`` file of ``key = value``
lines (keys are option names, dashes or underscores); command-line flags win.
List-valued options take ``;``-separated values in the config file.

Per-frame randomness comes from :func:`~sceneloc.predictor.frame_seed` of the
global seed and the frame id, so outputs do not depend on frame order or on
the number of workers.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .augmentation import AugmentationConfig, augment
from .dataset_io import (
    FrameRecord,
    ScanIssue,
    iterate,
    scan_dataset,
    write_color,
    write_pose_file,
)
from .evaluation import (
    COMPLETE,
    build_report,
    default_coord_hist_edges,
    dump_record,
    pool_coordinate_stats,
    read_results,
    results_header,
    scene_coord_inlier_stats,
    write_histogram_csv,
    write_report_csv,
)
from .geometry import Intrinsics, Pose, pose_error
from .pose_solver import NoPoseError, RansacConfig, ransac_localize
from .predictor import (
    MapDirectorySource,
    OracleConfig,
    OracleSource,
    frame_seed,
    load_prediction_map,
    sample_grid,
    write_prediction_map,
)
from .scene_map import scene_coords_from_depth

log = logging.getLogger("sceneloc")

RESULTS_FILE = "results.ndjson"
MANIFEST_FILE = "manifest.json"


class ConfigError(ValueError):
    pass


class InputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# option parsing helpers


def _floats(text: str, n: int | tuple[int, ...], what: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if len(vals) not in ((n,) if isinstance(n, int) else n):
        raise ConfigError(f"{what}: expected {n} values, got {len(vals)}")
    return vals


def parse_intrinsics(text: str) -> Intrinsics:
    """``fx,fy,cx,cy`` (640x480 assumed) or ``fx,fy,cx,cy,width,height``."""
    v = _floats(text, (4, 6), "intrinsics")
    w, h = (int(v[4]), int(v[5])) if len(v) == 6 else (640, 480)
    try:
        return Intrinsics(v[0], v[1], v[2], v[3], w, h)
    except ValueError as exc:
        raise ConfigError(f"intrinsics: {exc}") from None


def parse_scene_intrinsics(entries: list[str]) -> dict[str, Intrinsics]:
    out = {}
    for e in entries or []:
        scene, sep, spec = e.partition("=")
        if not sep or not scene:
            raise ConfigError(f"scene intrinsics must look like SCENE=fx,fy,cx,cy[,w,h], got {e!r}")
        out[scene] = parse_intrinsics(spec)
    return out


def read_config_file(path: str | Path) -> dict[str, str]:
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read config file {path}: {exc.strerror}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{n}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(parser: argparse.ArgumentParser, values: dict[str, str]) -> None:
    actions = {a.dest: a for a in parser._actions if a.dest not in ("help", "config", "command")}
    defaults = {}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
            defaults[key] = raw.lower() in ("true", "1", "yes")
        elif isinstance(action, argparse._AppendAction):
            defaults[key] = [v.strip() for v in raw.split(";") if v.strip()]
        else:
            conv = action.type or str
            try:
                defaults[key] = conv(raw)
            except (TypeError, ValueError):
                raise ConfigError(f"{key}: invalid value {raw!r}") from None
    parser.set_defaults(**defaults)


# ---------------------------------------------------------------------------
# run configuration


@dataclass
class RunConfig:
    command: str
    out: Path
    dataset: Path | None = None
    split: Path | None = None
    intrinsics: Intrinsics = field(default_factory=Intrinsics.seven_scenes)
    scene_intrinsics: dict[str, Intrinsics] = field(default_factory=dict)
    seed: int = 0
    workers: int = 1
    augmentation: AugmentationConfig | None = None
    samples_per_frame: int = 1
    ransac: RansacConfig | None = None
    oracle: OracleConfig | None = None
    map_dir: Path | None = None
    results: list[Path] = field(default_factory=list)
    pred_dir: Path | None = None
    gt_dir: Path | None = None
    inlier_threshold_mm: float = 100.0
    translation_edges_cm: list[float] | None = None
    rotation_edges_deg: list[float] | None = None

    def to_dict(self) -> dict:
        def conv(v):
            if isinstance(v, Path):
                return str(v)
            if isinstance(v, Intrinsics):
                return asdict(v)
            if isinstance(v, (AugmentationConfig, RansacConfig, OracleConfig)):
                return {k: conv(x) for k, x in asdict(v).items()}
            if isinstance(v, dict):
                return {k: conv(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [conv(x) for x in v]
            return v
        return {k: conv(v) for k, v in self.__dict__.items()}


def _add_common(p: argparse.ArgumentParser, dataset: bool = True) -> None:
    p.add_argument("--config", help="key = value file; flags take precedence")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--seed", type=int, default=0, help="global seed")
    p.add_argument("--workers", type=int, default=1, help="worker threads")
    if dataset:
        p.add_argument("--dataset", type=Path, help="7-Scenes style dataset root")
        p.add_argument("--split", type=Path, help="split manifest (one sequence per line)")
        p.add_argument("--intrinsics", type=str, default=None, help="fx,fy,cx,cy[,width,height] for all scenes")
        p.add_argument("--scene-intrinsics", action="append", default=[], metavar="SCENE=fx,fy,cx,cy[,w,h]",
                       help="per-scene intrinsics override (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sceneloc", description="Scene-coordinate camera relocalization toolkit")
    parser.add_argument("--version", action="version", version=f"sceneloc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-gt", help="write ground-truth scene coordinate maps from depth and pose")
    _add_common(p)

    p = sub.add_parser("augment", help="write augmented training samples")
    _add_common(p)
    d = AugmentationConfig()
    p.add_argument("--samples-per-frame", type=int, default=1)
    p.add_argument("--p-2d", type=float, default=d.p_2d)
    p.add_argument("--p-3d", type=float, default=d.p_3d)
    p.add_argument("--p-identity", type=float, default=d.p_identity)
    p.add_argument("--trans-2d-frac", type=float, default=d.trans_2d_frac)
    p.add_argument("--rot-2d-deg", type=float, default=d.rot_2d_deg)
    p.add_argument("--scale-range", type=str, default=f"{d.scale_range[0]},{d.scale_range[1]}")
    p.add_argument("--rot-3d-deg-max", type=float, default=d.rot_3d_deg_max)
    p.add_argument("--trans-3d-mm-max", type=float, default=d.trans_3d_mm_max)
    p.add_argument("--label-tolerance-px", type=float, default=d.label_tolerance_px)

    p = sub.add_parser("localize", help="estimate a pose for every frame of a split")
    _add_common(p)
    r = RansacConfig()
    p.add_argument("--oracle", action="store_true", help="predict with the noisy ground-truth oracle")
    p.add_argument("--map-dir", type=Path, help="read predictions from <map-dir>/<frame_id>.scrd")
    p.add_argument("--noise-sigma-mm", type=float, default=OracleConfig().noise_sigma_mm)
    p.add_argument("--outlier-fraction", type=float, default=0.0)
    p.add_argument("--outlier-bounds", type=str, default=None, help="xmin,ymin,zmin,xmax,ymax,zmax in mm")
    p.add_argument("--n-correspondences", type=int, default=r.n_correspondences,
                   help="square number; sampled on a regular grid")
    p.add_argument("--n-hypotheses", type=int, default=r.n_hypotheses)
    p.add_argument("--inlier-threshold-px", type=float, default=r.inlier_threshold_px)
    p.add_argument("--refine-steps", type=int, default=r.refine_steps)
    p.add_argument("--refine-inlier-cap", type=int, default=r.refine_inlier_cap)
    p.add_argument("--refine-min-inliers", type=int, default=r.refine_min_inliers)
    p.add_argument("--max-sampling-attempts", type=int, default=r.max_sampling_attempts_per_hypothesis)

    p = sub.add_parser("evaluate", help="metrics from results files and optional coordinate maps")
    _add_common(p, dataset=False)
    p.add_argument("--results", type=Path, action="append", default=[], help="results file (repeatable)")
    p.add_argument("--pred-dir", type=Path, help="predicted maps, <pred-dir>/<frame_id>.scrd")
    p.add_argument("--gt-dir", type=Path, help="ground-truth maps, <gt-dir>/<frame_id>.scrd")
    p.add_argument("--inlier-threshold-mm", type=float, default=100.0)
    p.add_argument("--translation-edges-cm", type=str, default=None)
    p.add_argument("--rotation-edges-deg", type=str, default=None)
    return parser


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            return a.choices[name]
    raise KeyError(name)


def parse_args(argv: list[str] | None = None) -> RunConfig:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = _subparser(parser, args.command)
        _apply_config(sub, read_config_file(args.config))
        flags = args
        args = parser.parse_args(argv)
        # repeatable flags replace config lists instead of extending them
        for a in sub._actions:
            if isinstance(a, argparse._AppendAction) and getattr(flags, a.dest):
                setattr(args, a.dest, getattr(flags, a.dest))
    return make_run_config(args)


def _edges(text: str | None, what: str) -> list[float] | None:
    if text is None:
        return None
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def make_run_config(args: argparse.Namespace) -> RunConfig:
    if args.out is None:
        raise ConfigError("--out is required")
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    cfg = RunConfig(command=args.command, out=args.out, seed=args.seed, workers=args.workers)
    if args.command != "evaluate":
        if args.dataset is None or args.split is None:
            raise ConfigError(f"{args.command} needs --dataset and --split")
        cfg.dataset, cfg.split = args.dataset, args.split
        if args.intrinsics:
            cfg.intrinsics = parse_intrinsics(args.intrinsics)
        cfg.scene_intrinsics = parse_scene_intrinsics(args.scene_intrinsics)

    try:
        if args.command == "augment":
            if args.samples_per_frame < 1:
                raise ConfigError("--samples-per-frame must be >= 1")
            cfg.samples_per_frame = args.samples_per_frame
            cfg.augmentation = AugmentationConfig(
                p_2d=args.p_2d, p_3d=args.p_3d, p_identity=args.p_identity, trans_2d_frac=args.trans_2d_frac,
                rot_2d_deg=args.rot_2d_deg, scale_range=tuple(_floats(args.scale_range, 2, "scale-range")),
                rot_3d_deg_max=args.rot_3d_deg_max, trans_3d_mm_max=args.trans_3d_mm_max,
                label_tolerance_px=args.label_tolerance_px, rng_seed=args.seed)
        elif args.command == "localize":
            if args.oracle == (args.map_dir is not None):
                raise ConfigError("select exactly one prediction source: --oracle or --map-dir")
            side = math.isqrt(args.n_correspondences)
            if side < 2 or side * side != args.n_correspondences:
                raise ConfigError("--n-correspondences must be a square number >= 4")
            cfg.ransac = RansacConfig(
                n_correspondences=args.n_correspondences, n_hypotheses=args.n_hypotheses,
                inlier_threshold_px=args.inlier_threshold_px, refine_steps=args.refine_steps,
                refine_inlier_cap=args.refine_inlier_cap, refine_min_inliers=args.refine_min_inliers,
                max_sampling_attempts_per_hypothesis=args.max_sampling_attempts, rng_seed=args.seed)
            if args.oracle:
                kw = dict(noise_sigma_mm=args.noise_sigma_mm, outlier_fraction=args.outlier_fraction, rng_seed=args.seed)
                if args.outlier_bounds:
                    b = _floats(args.outlier_bounds, 6, "outlier-bounds")
                    kw["outlier_bounds"] = (tuple(b[:3]), tuple(b[3:]))
                cfg.oracle = OracleConfig(**kw)
            else:
                cfg.map_dir = args.map_dir
        elif args.command == "evaluate":
            if not args.results and not (args.pred_dir and args.gt_dir):
                raise ConfigError("evaluate needs --results and/or both --pred-dir and --gt-dir")
            if (args.pred_dir is None) != (args.gt_dir is None):
                raise ConfigError("--pred-dir and --gt-dir must be given together")
            cfg.results, cfg.pred_dir, cfg.gt_dir = list(args.results), args.pred_dir, args.gt_dir
            cfg.inlier_threshold_mm = args.inlier_threshold_mm
            cfg.translation_edges_cm = _edges(args.translation_edges_cm, "translation-edges-cm")
            cfg.rotation_edges_deg = _edges(args.rotation_edges_deg, "rotation-edges-deg")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


# ---------------------------------------------------------------------------
# shared plumbing


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")


def write_manifest(cfg: RunConfig, extra: dict | None = None) -> None:
    payload = {"tool": "sceneloc", "version": __version__, "config": cfg.to_dict()}
    payload.update(extra or {})
    _write_json(cfg.out / MANIFEST_FILE, payload)


def _frames(cfg: RunConfig) -> tuple[list[FrameRecord], list[ScanIssue]]:
    try:
        ds = scan_dataset(cfg.dataset, cfg.split, cfg.scene_intrinsics, cfg.intrinsics)
    except OSError as exc:
        raise InputError(f"cannot read split manifest: {exc}") from None
    issues: list[ScanIssue] = []
    frames = list(iterate(ds, issues))
    return frames, issues


def _gt_coords(frame: FrameRecord) -> tuple[np.ndarray, np.ndarray, Pose]:
    depth = frame.load_depth()
    pose = frame.load_pose()
    coords, mask = scene_coords_from_depth(depth, pose, frame.intrinsics)
    return coords, mask, pose


def _run_frames(fn, frames, workers):
    """Apply ``fn`` to every frame; results come back in input order."""
    if workers == 1:
        return [fn(f) for f in frames]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, frames))


def _safe(fn, frame):
    try:
        return fn(frame), None
    except Exception as exc:  # a failing frame never aborts the run
        log.warning("%s: %s: %s", frame.frame_id, type(exc).__name__, exc)
        return None, f"{type(exc).__name__}: {exc}"


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_gt(cfg: RunConfig) -> dict:
    frames, issues = _frames(cfg)
    cfg.out.mkdir(parents=True, exist_ok=True)

    def work(frame: FrameRecord):
        coords, mask, _ = _gt_coords(frame)
        write_prediction_map(cfg.out / f"{frame.frame_id}.scrd", coords, mask)
        return int(mask.sum())

    outcomes = _run_frames(lambda f: _safe(work, f), frames, cfg.workers)
    failed = [str(f.frame_id) for f, (_, err) in zip(frames, outcomes) if err]
    summary = {"frames": len(frames), "written": len(frames) - len(failed), "failed": failed,
               "issues": [asdict(i) for i in issues]}
    write_manifest(cfg, {"summary": summary})
    return summary


def _augment_frame(cfg: RunConfig, frame: FrameRecord) -> list[dict]:
    rgb = frame.load_rgb()
    coords, mask, pose = _gt_coords(frame)
    rng = np.random.default_rng(frame_seed(cfg.seed, f"{frame.frame_id}#augment"))
    records = []
    for k in range(cfg.samples_per_frame):
        s = augment(rgb, coords, mask, frame.intrinsics, pose, cfg.augmentation, rng)
        stem = cfg.out / str(frame.frame_id) / f"aug-{k:03d}"
        write_color(stem.with_name(stem.name + ".color.png"), s.rgb)
        write_prediction_map(stem.with_name(stem.name + ".scrd"), s.coords, s.mask)
        if s.pose is not None:
            write_pose_file(stem.with_name(stem.name + ".pose.txt"), s.pose)
        rec = {
            "source_frame": str(frame.frame_id),
            "sample": k,
            "params": s.params.to_dict(),
            "pose_file": s.pose is not None,
            "intrinsics": asdict(s.intrinsics) if s.intrinsics is not None else None,
            "masked_in": int(s.mask.sum()),
            "seed": cfg.seed,
        }
        _write_json(stem.with_name(stem.name + ".json"), rec)
        records.append(rec)
    return records


def cmd_augment(cfg: RunConfig) -> dict:
    frames, issues = _frames(cfg)
    cfg.out.mkdir(parents=True, exist_ok=True)
    outcomes = _run_frames(lambda f: _safe(lambda fr: _augment_frame(cfg, fr), f), frames, cfg.workers)
    failed = [str(f.frame_id) for f, (_, err) in zip(frames, outcomes) if err]
    written = sum(len(r) for r, err in outcomes if not err)
    summary = {"frames": len(frames), "samples": written, "failed": failed, "issues": [asdict(i) for i in issues]}
    write_manifest(cfg, {"summary": summary})
    return summary


def _pose_record(pose: Pose) -> dict:
    return {"q_wxyz": pose.quaternion.tolist(), "t_mm": pose.t.tolist()}


def localize_frame(frame: FrameRecord, source, ransac: RansacConfig, seed: int) -> dict:
    """One results-file record; failures become unlocalized records."""
    fid = str(frame.frame_id)
    rec: dict = {"frame": fid, "localized": False}
    try:
        gt_pose = frame.load_pose()
        rgb = frame.load_rgb()
        coords, mask = source.predict(fid, rgb)
        side = math.isqrt(ransac.n_correspondences)
        corrs = sample_grid(coords, mask, side, side)
        frame_cfg = RansacConfig(**{**asdict(ransac), "rng_seed": frame_seed(seed, f"{fid}#ransac")})
        res = ransac_localize(corrs, frame.intrinsics, frame_cfg)
    except NoPoseError as exc:
        log.warning("%s: no pose: %s", fid, exc)
        rec.update(error=f"NoPoseError: {exc}", stop_reason=exc.diagnostics.get("reason", "no_pose"))
        return rec
    except Exception as exc:
        log.warning("%s: %s: %s", fid, type(exc).__name__, exc)
        rec["error"] = f"{type(exc).__name__}: {exc}"
        return rec
    err = pose_error(res.pose, gt_pose)
    rec.update(
        localized=True,
        t_err_mm=err.translational,
        r_err_deg=err.rotational,
        inliers=res.inlier_count,
        hypotheses=res.hypotheses_evaluated,
        refinement_rounds=res.refinement_rounds,
        best_hypothesis=res.best_hypothesis,
        stop_reason=res.diagnostics.get("stop_reason"),
        sampling_attempts=res.diagnostics.get("sampling_attempts"),
        pose=_pose_record(res.pose),
    )
    return rec


def cmd_localize(cfg: RunConfig) -> dict:
    frames, issues = _frames(cfg)
    cfg.out.mkdir(parents=True, exist_ok=True)
    if cfg.oracle is not None:
        by_id = {str(f.frame_id): f for f in frames}

        def ground_truth(fid):
            coords, mask, _ = _gt_coords(by_id[fid])
            return coords, mask

        source = OracleSource(cfg.oracle, ground_truth)
    else:
        if not cfg.map_dir.is_dir():
            raise InputError(f"prediction map directory {cfg.map_dir} does not exist")
        source = MapDirectorySource(cfg.map_dir)

    records = _run_frames(lambda f: localize_frame(f, source, cfg.ransac, cfg.seed), frames, cfg.workers)
    records.sort(key=lambda r: r["frame"])
    with open(cfg.out / RESULTS_FILE, "w") as fh:
        fh.write(results_header({"seed": cfg.seed}) + "\n")
        for rec in records:
            fh.write(dump_record(rec) + "\n")
    failed = [r["frame"] for r in records if not r["localized"]]
    summary = {"frames": len(records), "localized": len(records) - len(failed), "failed": failed,
               "issues": [asdict(i) for i in issues]}
    write_manifest(cfg, {"summary": summary})
    return summary


def _coord_stats(cfg: RunConfig) -> tuple[dict, list[str]]:
    """Per-scene pooled coordinate statistics over maps present in both directories."""
    edges = default_coord_hist_edges()
    per_scene: dict[str, list] = {}
    problems = []
    gt_files = sorted(cfg.gt_dir.rglob("*.scrd"))
    if not gt_files:
        raise InputError(f"no ground-truth maps under {cfg.gt_dir}")
    for gt_path in gt_files:
        rel = gt_path.relative_to(cfg.gt_dir)
        fid = rel.with_suffix("").as_posix()
        pred_path = cfg.pred_dir / rel
        try:
            gt, mask = load_prediction_map(gt_path)
            pred, _ = load_prediction_map(pred_path)
            stats = scene_coord_inlier_stats(pred, gt, mask, cfg.inlier_threshold_mm, edges)
        except Exception as exc:
            log.warning("%s: %s: %s", fid, type(exc).__name__, exc)
            problems.append(f"{fid}: {type(exc).__name__}: {exc}")
            continue
        per_scene.setdefault(fid.split("/", 1)[0], []).append(stats)
    if not per_scene:
        raise InputError("no coordinate map pair could be evaluated")
    pooled = {s: pool_coordinate_stats(v) for s, v in sorted(per_scene.items())}
    pooled[COMPLETE] = pool_coordinate_stats([x for v in per_scene.values() for x in v])
    frames = {s: len(v) for s, v in per_scene.items()}
    frames[COMPLETE] = sum(frames.values())
    return {"stats": pooled, "frames": frames}, problems


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.6f}"


def cmd_evaluate(cfg: RunConfig) -> dict:
    cfg.out.mkdir(parents=True, exist_ok=True)
    summary: dict = {}
    if cfg.results:
        results = []
        for path in cfg.results:
            if not path.is_file():
                raise InputError(f"results file {path} does not exist")
            results.extend(read_results(path))
        if not results:
            raise InputError("results files contain no frames")
        results.sort(key=lambda r: r.frame_id)
        report = build_report(results, cfg.translation_edges_cm, cfg.rotation_edges_deg)
        write_report_csv(cfg.out / "report.csv", report)
        write_histogram_csv(cfg.out / "hist_translation_cm.csv", report.translation_edges_cm,
                            report.translation_cumulative)
        write_histogram_csv(cfg.out / "hist_rotation_deg.csv", report.rotation_edges_deg,
                            report.rotation_cumulative)
        summary["scenes"] = [asdict(s) for s in report.scenes]
    if cfg.pred_dir is not None:
        coord, problems = _coord_stats(cfg)
        with open(cfg.out / "coord_stats.csv", "w") as fh:
            fh.write("scene,frames,pixels,inlier_fraction,mean_inlier_error_mm\n")
            for scene, st in coord["stats"].items():
                fh.write(f"{scene},{coord['frames'][scene]},{st.count},{_fmt(st.inlier_fraction)},"
                         f"{_fmt(st.mean_inlier_error_mm)}\n")
        complete = coord["stats"][COMPLETE]
        write_histogram_csv(cfg.out / "coord_error_hist.csv", complete.hist_edges[:-1], complete.hist_fraction,
                            value_column="fraction")
        summary["coordinates"] = {
            "threshold_mm": cfg.inlier_threshold_mm,
            "scenes": {s: {"frames": coord["frames"][s], "pixels": st.count, "inliers": st.inliers}
                       for s, st in coord["stats"].items()},
            "problems": problems,
        }
    _write_json(cfg.out / "report.json", summary)
    write_manifest(cfg)
    return summary


COMMANDS = {"gen-gt": cmd_gen_gt, "augment": cmd_augment, "localize": cmd_localize, "evaluate": cmd_evaluate}


def _error_line(kind: str, exc: Exception) -> None:
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}) + "\n")


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    except ConfigError as exc:
        _error_line("config", exc)
        return 2
    except InputError as exc:
        _error_line("input", exc)
        return 3
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
        COMMANDS[cfg.command](cfg)
    except (ConfigError, ValueError) as exc:
        _error_line("config" if isinstance(exc, ConfigError) else "input", exc)
        return 2 if isinstance(exc, ConfigError) else 3
    except OSError as exc:
        _error_line("io", exc)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
