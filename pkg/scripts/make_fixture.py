"""Write a synthetic dataset in the 7-Scenes layout for trying the CLI.

    python3 scripts/make_fixture.py /tmp/synth --frames 10
    sceneloc localize --dataset /tmp/synth --split /tmp/synth/test.txt --out /tmp/run --oracle
"""

import argparse
from pathlib import Path

import numpy as np

from sceneloc.geometry import Intrinsics
from sceneloc.synthetic import SceneConfig, SyntheticScene, write_seven_scenes_fixture


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("root", type=Path)
    ap.add_argument("--frames", type=int, default=10, help="frames per sequence")
    ap.add_argument("--scene-seed", type=int, default=0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    scene = SyntheticScene.generate(SceneConfig(seed=args.scene_seed))
    rng = np.random.default_rng(args.seed)
    write_seven_scenes_fixture(args.root, scene, Intrinsics.seven_scenes(),
                               {"seq-01": args.frames, "seq-02": args.frames}, rng)
    (args.root / "train.txt").write_text("synthetic/seq-01\n")
    (args.root / "test.txt").write_text("synthetic/seq-02\n")
    lo, hi = scene.outlier_bounds
    print(f"wrote {2 * args.frames} frames under {args.root}")
    print(f"oracle outlier box: --outlier-bounds={','.join(f'{v:g}' for v in lo + hi)}")


if __name__ == "__main__":
    main()
