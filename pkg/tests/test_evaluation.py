import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sceneloc.evaluation import (
    COMPLETE,
    EvaluationError,
    FrameResult,
    accuracy_5cm_5deg,
    build_report,
    cumulative_error_histogram,
    cumulative_fraction,
    lower_median,
    median_pose_error,
    pool_coordinate_stats,
    read_report_csv,
    read_results,
    scene_coord_inlier_stats,
    write_histogram_csv,
    write_report_csv,
    write_results,
)
from sceneloc.geometry import PoseError
from sceneloc.scene_map import ResolutionMismatchError


def fr(t_mm, r_deg, frame="s/seq-01/frame-000000"):
    return FrameResult(frame, PoseError(t_mm, r_deg))


def failed(frame="s/seq-01/frame-000009"):
    return FrameResult(frame, None, localized=False)


def test_accuracy_examples():
    assert accuracy_5cm_5deg([fr(0, 0), fr(0, 0)]) == 1.0
    assert accuracy_5cm_5deg([fr(40, 4), fr(60, 1)]) == 0.5
    assert accuracy_5cm_5deg([fr(50, 5)]) == 0.0
    assert accuracy_5cm_5deg([fr(49.999, 4.999), failed()]) == 0.5
    with pytest.raises(EvaluationError):
        accuracy_5cm_5deg([])


def test_median_examples():
    assert median_pose_error([fr(10, 1), fr(20, 2), fr(30, 3)]) == (2.0, 2.0)
    assert median_pose_error([fr(10, 4), fr(20, 3), fr(30, 2), fr(40, 1)]) == (2.0, 2.0)
    t, r = median_pose_error([fr(10, 1), failed(), failed()])
    assert math.isinf(t) and math.isinf(r)
    with pytest.raises(EvaluationError):
        median_pose_error([])


@given(st.lists(st.floats(0, 1e4), min_size=1, max_size=50))
def test_lower_median_matches_sort_and_index(xs):
    assert lower_median(xs) == sorted(xs)[(len(xs) + 1) // 2 - 1]


def test_histogram_examples():
    t, r = cumulative_error_histogram([fr(30, 2)], [1, 2, 5], [1, 2, 5])
    assert t.tolist() == [0, 0, 1] and r.tolist() == [0, 1, 1]
    same = [fr(25, 1)] * 4
    t, _ = cumulative_error_histogram(same, [1, 2, 2.5, 3], [1, 2])
    assert t.tolist() == [0, 0, 1, 1]
    with pytest.raises(EvaluationError):
        cumulative_error_histogram(same, [1, 3, 2], [1, 2])


def test_unlocalized_only_counted_at_infinity():
    t, r = cumulative_error_histogram([fr(10, 1), failed()], [1, 1e9, math.inf], [1, 1e9, math.inf])
    assert t.tolist() == [0.5, 0.5, 1.0] and r.tolist() == [0.5, 0.5, 1.0]


def random_results(rng, n):
    out = []
    for i in range(n):
        if rng.random() < 0.1:
            out.append(failed(f"s{i % 3}/seq-01/frame-{i:06d}"))
        else:
            # quantized errors put many values exactly on the thresholds
            t = float(rng.choice([rng.uniform(0, 120), 50.0, rng.integers(0, 12) * 10.0]))
            r = float(rng.choice([rng.uniform(0, 12), 5.0, float(rng.integers(0, 12))]))
            out.append(fr(t, r, f"s{i % 3}/seq-01/frame-{i:06d}"))
    return out


def test_metrics_match_brute_force(rng):
    for _ in range(200):
        res = random_results(rng, int(rng.integers(1, 40)))
        n = len(res)
        t = [r.pose_error.translational if r.localized else math.inf for r in res]
        rot = [r.pose_error.rotational if r.localized else math.inf for r in res]
        assert accuracy_5cm_5deg(res) == sum(a < 50 and b < 5 for a, b in zip(t, rot)) / n
        k = -(-n // 2) - 1
        assert median_pose_error(res) == (sorted(t)[k] / 10, sorted(rot)[k])
        edges = np.sort(rng.choice(np.arange(0.0, 15.0, 0.5), size=6, replace=False))
        ht, hr = cumulative_error_histogram(res, edges, edges)
        assert ht.tolist() == [sum(x / 10 <= e for x in t) / n for e in edges]
        assert hr.tolist() == [sum(x <= e for x in rot) / n for e in edges]


def test_accuracy_equals_joint_histogram_without_ties(rng):
    res = [fr(float(rng.uniform(0, 100)), float(rng.uniform(0, 10))) for _ in range(300)]
    joint = np.mean([r.pose_error.translational <= 50 and r.pose_error.rotational <= 5 for r in res])
    assert accuracy_5cm_5deg(res) == joint


@given(st.permutations(list(range(12))))
def test_permutation_invariance(perm):
    base = [fr(float(i * 7 % 13) * 10, float(i % 7), f"s/seq-01/frame-{i:06d}") for i in range(12)]
    shuffled = [base[i] for i in perm]
    assert accuracy_5cm_5deg(shuffled) == accuracy_5cm_5deg(base)
    assert median_pose_error(shuffled) == median_pose_error(base)


def test_complete_row_equals_concatenation(rng):
    res = random_results(rng, 60)
    rep = build_report(res)
    assert [s.scene for s in rep.scenes] == ["s0", "s1", "s2", COMPLETE]
    per_scene = rep.scenes[:-1]
    assert rep.complete.frames == sum(s.frames for s in per_scene) == 60
    weighted = sum(s.accuracy * s.frames for s in per_scene) / 60
    assert rep.complete.accuracy == pytest.approx(weighted, abs=1e-12)
    assert rep.complete.failures == sum(s.failures for s in per_scene)
    assert np.all(np.diff(rep.translation_cumulative) >= 0) and rep.translation_cumulative[-1] == 1.0
    assert np.all(np.diff(rep.rotation_cumulative) >= 0) and rep.rotation_cumulative[-1] == 1.0


def test_inlier_stats_examples():
    gt = np.random.default_rng(0).normal(size=(4, 6, 3)) * 1000
    mask = np.ones((4, 6), bool)
    s = scene_coord_inlier_stats(gt, gt, mask)
    assert (s.inlier_fraction, s.mean_inlier_error_mm) == (1.0, 0.0)
    pred = gt.copy()
    pred[:2] += [200.0, 0.0, 0.0]
    s = scene_coord_inlier_stats(pred, gt, mask, threshold_mm=100.0)
    assert (s.inlier_fraction, s.mean_inlier_error_mm) == (0.5, 0.0)
    assert s.hist_fraction.sum() == pytest.approx(1.0)
    with pytest.raises(EvaluationError):
        scene_coord_inlier_stats(pred, gt, np.zeros_like(mask))
    with pytest.raises(ResolutionMismatchError):
        scene_coord_inlier_stats(pred[:3], gt, mask)


def test_inlier_threshold_is_strict():
    gt = np.zeros((1, 2, 3))
    pred = np.array([[[100.0, 0, 0], [99.0, 0, 0]]])
    s = scene_coord_inlier_stats(pred, gt, np.ones((1, 2), bool), 100.0)
    assert s.inlier_fraction == 0.5 and s.mean_inlier_error_mm == 99.0


def test_inlier_stats_match_brute_force(rng):
    edges = np.array([0.0, 5, 10, 50, 100, 200, math.inf])
    for _ in range(100):
        h, w = rng.integers(1, 8, size=2)
        gt = rng.normal(size=(h, w, 3)) * 1000
        pred = gt + rng.normal(size=(h, w, 3)) * rng.uniform(1, 150)
        mask = rng.random((h, w)) < 0.7
        mask.flat[0] = True
        thr = float(rng.uniform(10, 200))
        s = scene_coord_inlier_stats(pred, gt, mask, thr, edges)
        errs = [float(np.linalg.norm(pred[i, j] - gt[i, j])) for i in range(h) for j in range(w) if mask[i, j]]
        inl = [e for e in errs if e < thr]
        assert s.inlier_fraction == len(inl) / len(errs)
        if inl:
            assert s.mean_inlier_error_mm == pytest.approx(sum(inl) / len(inl), rel=1e-12)
        hist = [sum(lo <= e < hi for e in errs) / len(errs) for lo, hi in zip(edges[:-1], edges[1:])]
        assert s.hist_fraction.tolist() == hist


@given(st.floats(1, 500), st.floats(1, 500))
def test_inlier_fraction_monotone_in_threshold(a, b):
    rng = np.random.default_rng(3)
    gt = rng.normal(size=(5, 5, 3)) * 500
    pred = gt + rng.normal(size=(5, 5, 3)) * 100
    mask = np.ones((5, 5), bool)
    lo, hi = sorted((a, b))
    assert scene_coord_inlier_stats(pred, gt, mask, lo).inlier_fraction <= \
        scene_coord_inlier_stats(pred, gt, mask, hi).inlier_fraction


def test_pooling_equals_concatenation(rng):
    gts = [rng.normal(size=(3, 4, 3)) * 1000 for _ in range(3)]
    preds = [g + rng.normal(size=g.shape) * 80 for g in gts]
    masks = [rng.random((3, 4)) < 0.8 for _ in gts]
    pooled = pool_coordinate_stats([scene_coord_inlier_stats(p, g, m) for p, g, m in zip(preds, gts, masks)])
    direct = scene_coord_inlier_stats(np.concatenate(preds), np.concatenate(gts), np.concatenate(masks))
    assert pooled.count == direct.count and pooled.inliers == direct.inliers
    assert pooled.mean_inlier_error_mm == pytest.approx(direct.mean_inlier_error_mm, rel=1e-12)
    np.testing.assert_allclose(pooled.hist_fraction, direct.hist_fraction, atol=1e-15)


def test_report_csv_hand_computed(tmp_path):
    res = [fr(12.0, 0.5, "chess/seq-03/frame-000000"), fr(80.0, 2.0, "chess/seq-03/frame-000001")]
    write_report_csv(tmp_path / "r.csv", build_report(res))
    assert (tmp_path / "r.csv").read_text() == (
        "scene,frames,median_t_cm,median_r_deg,acc_5cm5deg\n"
        "chess,2,1.200000,0.500000,0.500000\n"
        "Complete,2,1.200000,0.500000,0.500000\n")
    rows = read_report_csv(tmp_path / "r.csv")
    assert rows[0]["scene"] == "chess"


def test_histogram_csv(tmp_path):
    write_histogram_csv(tmp_path / "h.csv", [1.0, math.inf], [0.25, 1.0])
    assert (tmp_path / "h.csv").read_text() == "edge,cumulative_fraction\n1.000000,0.250000\ninf,1.000000\n"


def test_results_file_round_trip(tmp_path):
    res = [fr(1.5, 0.25, "a/seq-01/frame-000000"), failed("a/seq-01/frame-000001")]
    res[0].diagnostics["inliers"] = 1200
    write_results(tmp_path / "r.ndjson", res)
    back = read_results(tmp_path / "r.ndjson")
    assert back[0].pose_error == res[0].pose_error and back[0].diagnostics == {"inliers": 1200}
    assert not back[1].localized and back[1].pose_error is None
    (tmp_path / "bad.ndjson").write_text('{"format": "other"}\n')
    with pytest.raises(EvaluationError):
        read_results(tmp_path / "bad.ndjson")


def test_cumulative_fraction_rejects_empty():
    with pytest.raises(EvaluationError):
        cumulative_fraction([], [1.0])
