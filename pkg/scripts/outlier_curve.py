"""5cm/5deg success rate as a function of the oracle outlier fraction.

Writes ``fraction,success_rate,median_t_mm,median_r_deg`` rows to stdout or --csv.

    python3 scripts/outlier_curve.py --frames 30 --fractions 0,0.2,0.4,0.5,0.6,0.7
"""

import argparse
import sys

import numpy as np

from sceneloc.evaluation import FrameResult, accuracy_5cm_5deg, median_pose_error
from sceneloc.geometry import Intrinsics, pose_error
from sceneloc.pose_solver import NoPoseError, RansacConfig, ransac_localize
from sceneloc.predictor import OracleConfig, frame_seed, oracle_predict, sample_grid
from sceneloc.synthetic import SyntheticScene


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--frames", type=int, default=30)
    ap.add_argument("--fractions", default="0,0.2,0.4,0.5,0.6")
    ap.add_argument("--sigma", type=float, default=10.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv", help="output path (default stdout)")
    args = ap.parse_args()

    K = Intrinsics.seven_scenes()
    scene = SyntheticScene.generate()
    poses = scene.random_poses(args.frames, np.random.default_rng(args.seed))
    views = [scene.render(p, K)[1] for p in poses]
    out = open(args.csv, "w") if args.csv else sys.stdout
    out.write("fraction,success_rate,median_t_mm,median_r_deg\n")
    for f in (float(v) for v in args.fractions.split(",")):
        oracle = OracleConfig(args.sigma, f, scene.outlier_bounds, args.seed)
        results = []
        for i, (pose, coords) in enumerate(zip(poses, views)):
            fid = f"synthetic/seq-01/frame-{i:06d}"
            pred, mask = oracle_predict(oracle, coords, np.ones(K.shape, bool),
                                        np.random.default_rng(frame_seed(args.seed, fid)))
            try:
                res = ransac_localize(sample_grid(pred, mask), K, RansacConfig(rng_seed=frame_seed(args.seed, fid + "#ransac")))
                results.append(FrameResult(fid, pose_error(res.pose, pose)))
            except NoPoseError:
                results.append(FrameResult(fid, None, localized=False))
        t_cm, r_deg = median_pose_error(results)
        out.write(f"{f:g},{accuracy_5cm_5deg(results):.4f},{t_cm * 10:.3f},{r_deg:.4f}\n")
        out.flush()


if __name__ == "__main__":
    main()
