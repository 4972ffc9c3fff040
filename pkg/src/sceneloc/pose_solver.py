"""RANSAC pose estimation from 2D-3D correspondences.

Hypotheses come from a minimal four-point solver (Grunert's P3P on three of
the points, disambiguated and polished with the fourth). Each hypothesis is
scored by counting correspondences with reprojection error below ``tau``;
the best one is refined by Levenberg-Marquardt on sampled inliers.

Internally poses are handled as world-to-camera ``(R, t)`` pairs in batched
arrays; the public functions take and return camera-to-world :class:`Pose`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .geometry import Intrinsics, Pose, rotation_from_axis_angle
from .predictor import CorrespondenceSet

log = logging.getLogger(__name__)

STREAM_HYPOTHESES = 0
STREAM_REFINEMENT = 1


class PoseSolverError(ValueError):
    pass


class DegenerateConfigurationError(PoseSolverError):
    pass


class NoSolutionError(PoseSolverError):
    """No physically valid pose for a minimal problem."""


class NoPoseError(PoseSolverError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class RansacConfig:
    n_correspondences: int = 1600
    n_hypotheses: int = 256
    inlier_threshold_px: float = 10.0
    refine_steps: int = 8
    refine_inlier_cap: int = 100
    refine_min_inliers: int = 50
    max_sampling_attempts_per_hypothesis: int = 10000
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_hypotheses < 1:
            raise ValueError("n_hypotheses must be >= 1")
        if not self.inlier_threshold_px > 0:
            raise ValueError("inlier threshold must be positive")
        if self.refine_inlier_cap < 4 or self.refine_min_inliers < 4:
            raise ValueError("refinement needs at least 4 inliers")
        if self.max_sampling_attempts_per_hypothesis < 1:
            raise ValueError("max_sampling_attempts_per_hypothesis must be >= 1")


@dataclass(frozen=True)
class Hypothesis:
    pose: Pose
    score: int
    sample: tuple[int, int, int, int]


@dataclass
class LocalizationResult:
    pose: Pose
    inlier_count: int
    hypotheses_evaluated: int
    refinement_rounds: int
    best_hypothesis: int
    scores: np.ndarray
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# batched camera model


def _to_camera(R, t, X):
    # R (..., 3, 3), t (..., 3), X (..., n, 3) -> (..., n, 3)
    return np.matmul(X, np.swapaxes(R, -1, -2)) + t[..., None, :]


def _residuals(R, t, X, x, K: Intrinsics):
    p = _to_camera(R, t, X)
    z = p[..., 2]
    front = z > 0
    iz = 1.0 / np.where(front, z, 1.0)
    r = np.empty(p.shape[:-1] + (2,))
    r[..., 0] = K.cx + K.fx * p[..., 0] * iz - x[..., 0]
    r[..., 1] = K.cy + K.fy * p[..., 1] * iz - x[..., 1]
    return r, p, front


def _reproj_errors(R, t, X, x, K):
    r, _, front = _residuals(R, t, X, x, K)
    return np.where(front, np.hypot(r[..., 0], r[..., 1]), np.inf)


def _jacobian(p, K):
    # d(residual)/d(omega, dt) for the update R <- exp(omega) R, t <- exp(omega) t + dt,
    # under which camera points move as p <- p + omega x p + dt.
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    iz = 1.0 / z
    xz, yz = x * iz, y * iz
    J = np.empty(p.shape[:-1] + (2, 6))
    J[..., 0, 0] = -K.fx * xz * yz
    J[..., 0, 1] = K.fx * (1.0 + xz * xz)
    J[..., 0, 2] = -K.fx * yz
    J[..., 0, 3] = K.fx * iz
    J[..., 0, 4] = 0.0
    J[..., 0, 5] = -K.fx * xz * iz
    J[..., 1, 0] = -K.fy * (1.0 + yz * yz)
    J[..., 1, 1] = K.fy * xz * yz
    J[..., 1, 2] = K.fy * xz
    J[..., 1, 3] = 0.0
    J[..., 1, 4] = K.fy * iz
    J[..., 1, 5] = -K.fy * yz * iz
    return J.reshape(p.shape[:-2] + (-1, 6))


def _apply_update(R, t, delta):
    dR = rotation_from_axis_angle(delta[..., :3])
    R2 = dR @ R
    t2 = np.matmul(dR, t[..., None])[..., 0] + delta[..., 3:]
    return R2, t2


def _cost(R, t, X, x, K):
    r, _, front = _residuals(R, t, X, x, K)
    c = np.sum(r**2, axis=(-1, -2))
    return np.where(np.all(front, axis=-1), c, np.inf)


def _levenberg_marquardt(R, t, X, x, K, max_iter=50, lam0=1e-3, gtol=1e-9, xtol=1e-15, trace=None):
    """Batched LM on total squared reprojection error.

    Steps that do not lower the cost are rejected, so the cost sequence of every
    batch element is non-increasing. Returns ``(R, t, cost, iterations)``; the
    initial cost and the cost after each iteration are appended to ``trace`` if given.
    """
    R, t = R.copy(), t.copy()
    batch = R.shape[:-2]
    lam = np.full(batch, lam0)
    cost = _cost(R, t, X, x, K)
    if trace is not None:
        trace.append(cost.copy())
    active = np.isfinite(cost)
    it = 0
    for it in range(1, max_iter + 1):
        if not np.any(active):
            it -= 1
            break
        r, p, _ = _residuals(R, t, X, x, K)
        J = _jacobian(p, K)
        rv = r.reshape(batch + (-1,))
        Jt = np.swapaxes(J, -1, -2)
        g = np.matmul(Jt, rv[..., None])[..., 0]
        active &= np.linalg.norm(g, axis=-1) > gtol
        if not np.any(active):
            break
        A = Jt @ J
        diag = np.einsum("...ii->...i", A)
        A_damped = A + (lam[..., None] * np.maximum(diag, 1e-12))[..., None] * np.eye(6)
        try:
            delta = -np.linalg.solve(A_damped, g[..., None])[..., 0]
        except np.linalg.LinAlgError:
            delta = -np.einsum("...ij,...j->...i", np.linalg.pinv(A_damped), g)
        R_new, t_new = _apply_update(R, t, delta)
        new_cost = _cost(R_new, t_new, X, x, K)
        better = active & (new_cost < cost)
        R = np.where(better[..., None, None], R_new, R)
        t = np.where(better[..., None], t_new, t)
        cost = np.where(better, new_cost, cost)
        if trace is not None:
            trace.append(cost.copy())
        lam = np.where(better, np.maximum(lam / 10.0, 1e-12), lam * 10.0)
        # Steps below rounding level or damping this large cannot make progress.
        tiny = np.linalg.norm(delta, axis=-1) <= xtol * (1.0 + np.linalg.norm(t, axis=-1))
        active &= (lam < 1e12) & ~tiny
    return R, t, cost, it


# ---------------------------------------------------------------------------
# minimal solver


def _bearings(x, K):
    b = np.stack([(x[..., 0] - K.cx) / K.fx, (x[..., 1] - K.cy) / K.fy, np.ones(x.shape[:-1])], axis=-1)
    return b / np.linalg.norm(b, axis=-1, keepdims=True)


def _quartic_roots(coeffs):
    # coeffs (B, 5) highest degree first -> complex roots (B, 4)
    B = len(coeffs)
    roots = np.full((B, 4), np.nan + 0j)
    scale = np.abs(coeffs).max(axis=1)
    lead_ok = np.abs(coeffs[:, 0]) > 1e-10 * np.where(scale > 0, scale, 1.0)
    if np.any(lead_ok):
        c = coeffs[lead_ok] / coeffs[lead_ok, :1]
        comp = np.zeros((len(c), 4, 4))
        comp[:, 0, :] = -c[:, 1:]
        comp[:, 1, 0] = comp[:, 2, 1] = comp[:, 3, 2] = 1.0
        roots[lead_ok] = np.linalg.eigvals(comp)
    for i in np.nonzero(~lead_ok & (scale > 0))[0]:
        r = np.roots(coeffs[i])
        roots[i, : len(r)] = r
    return roots


def _kabsch(W, C):
    """Rigid ``(R, t)`` with ``C ≈ R W + t`` for batched point triples."""
    wc = W.mean(axis=-2, keepdims=True)
    cc = C.mean(axis=-2, keepdims=True)
    H = np.einsum("...ni,...nj->...ij", W - wc, C - cc)
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(np.einsum("...ij,...jk->...ik", Vt.transpose(0, 2, 1), U.transpose(0, 2, 1))))
    d = np.where(d == 0, 1.0, d)
    D = np.zeros_like(H)
    D[:, 0, 0] = D[:, 1, 1] = 1.0
    D[:, 2, 2] = d
    R = Vt.transpose(0, 2, 1) @ D @ U.transpose(0, 2, 1)
    t = cc[:, 0] - np.einsum("...ij,...j->...i", R, wc[:, 0])
    return R, t


_TRIPLES = np.array([[0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 3, 1], [1, 2, 3, 0]])

DEGENERATE = 1
NO_SOLUTION = 2


def solve_minimal_batch(x: np.ndarray, X: np.ndarray, K: Intrinsics, polish_steps: int = 10):
    """Solve ``B`` four-point problems at once.

    ``x`` is ``(B, 4, 2)`` pixels, ``X`` is ``(B, 4, 3)`` world points. Returns
    world-to-camera ``R (B, 3, 3)``, ``t (B, 3)`` and a status array
    (0 = ok, :data:`DEGENERATE`, :data:`NO_SOLUTION`).
    """
    x = np.asarray(x, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    B = len(X)
    status = np.zeros(B, dtype=np.int8)
    R_out = np.tile(np.eye(3), (B, 1, 1))
    t_out = np.zeros((B, 3))
    if B == 0:
        return R_out, t_out, status

    # Collinear or coincident scene points leave the pose undetermined.
    centered = X - X.mean(axis=1, keepdims=True)
    sv = np.linalg.svd(centered, compute_uv=False)
    extent = np.abs(X).max(axis=(1, 2)) + 1.0
    degenerate = sv[:, 1] <= 1e-6 * np.maximum(sv[:, 0], 1e-12 * extent)
    f_all = _bearings(x, K)
    cos_pairs = np.einsum("bni,bmi->bnm", f_all, f_all)
    np.einsum("bnn->bn", cos_pairs)[...] = -1.0
    degenerate |= cos_pairs.max(axis=(1, 2)) > 1.0 - 1e-14

    # P3P base: the triple spanning the largest triangle; the leftover point disambiguates.
    tri = X[:, _TRIPLES[:, :3]]
    area = np.linalg.norm(np.cross(tri[:, :, 1] - tri[:, :, 0], tri[:, :, 2] - tri[:, :, 0]), axis=-1)
    order = _TRIPLES[np.argmax(area, axis=1)]
    Xo = np.take_along_axis(X, order[:, :, None], axis=1)
    xo = np.take_along_axis(x, order[:, :, None], axis=1)
    f = np.take_along_axis(f_all, order[:, :, None], axis=1)

    P1, P2, P3 = Xo[:, 0], Xo[:, 1], Xo[:, 2]
    a2 = np.sum((P2 - P3) ** 2, axis=1)
    b2 = np.sum((P1 - P3) ** 2, axis=1)
    c2 = np.sum((P1 - P2) ** 2, axis=1)
    b2s = np.where(b2 > 0, b2, 1.0)
    ca = np.sum(f[:, 1] * f[:, 2], axis=1)
    cb = np.sum(f[:, 0] * f[:, 2], axis=1)
    cg = np.sum(f[:, 0] * f[:, 1], axis=1)

    amc = (a2 - c2) / b2s
    apc = (a2 + c2) / b2s
    coeffs = np.stack([
        (amc - 1) ** 2 - 4 * c2 / b2s * ca**2,
        4 * (amc * (1 - amc) * cb - (1 - apc) * ca * cg + 2 * c2 / b2s * ca**2 * cb),
        2 * (amc**2 - 1 + 2 * amc**2 * cb**2 + 2 * (b2 - c2) / b2s * ca**2
             - 4 * apc * ca * cb * cg + 2 * (b2 - a2) / b2s * cg**2),
        4 * (-amc * (1 + amc) * cb + 2 * a2 / b2s * cg**2 * cb - (1 - apc) * ca * cg),
        (1 + amc) ** 2 - 4 * a2 / b2s * cg**2,
    ], axis=1)
    coeffs[degenerate] = 0.0
    roots = _quartic_roots(coeffs)
    real = np.isfinite(roots) & (np.abs(roots.imag) <= 1e-6 * (1.0 + np.abs(roots.real)))
    v = np.where(real, roots.real, np.nan)
    for _ in range(2):
        pv = _polyval4(coeffs, v)
        dv = _polyval4_deriv(coeffs, v)
        step = np.where(np.abs(dv) > 0, pv / np.where(dv == 0, 1.0, dv), 0.0)
        v = v - step

    with np.errstate(divide="ignore", invalid="ignore"):
        den = 2 * (cg[:, None] - v * ca[:, None])
        u = ((-1 + amc[:, None]) * v**2 - 2 * amc[:, None] * cb[:, None] * v + 1 + amc[:, None]) / den
        s1 = np.sqrt(b2[:, None] / (1 + v**2 - 2 * v * cb[:, None]))
    ok = np.isfinite(u) & np.isfinite(s1) & (u > 0) & (v > 0) & (s1 > 0) & ~degenerate[:, None]

    s = np.stack([s1, u * s1, v * s1], axis=-1)  # (B, 4, 3) depths along the bearings
    s = np.where(ok[..., None], s, 1.0)
    C = s[..., None] * f[:, None, :3, :]  # (B, 4, 3, 3)
    W = np.broadcast_to(Xo[:, None, :3], C.shape)
    Rc, tc = _kabsch(W.reshape(-1, 3, 3), C.reshape(-1, 3, 3))
    Rc = Rc.reshape(B, 4, 3, 3)
    tc = tc.reshape(B, 4, 3)

    err = _reproj_errors(Rc, tc, np.broadcast_to(Xo[:, None], (B, 4, 4, 3)), np.broadcast_to(xo[:, None], (B, 4, 4, 2)), K)
    # all four points in front of the camera, ranked by the leftover point's error
    score = np.where(ok & np.all(np.isfinite(err), axis=-1), err[..., 3], np.inf)
    best = np.argmin(score, axis=1)
    found = np.isfinite(score[np.arange(B), best])

    status[degenerate] = DEGENERATE
    status[~degenerate & ~found] = NO_SOLUTION
    good = status == 0
    if np.any(good):
        R0 = Rc[np.arange(B), best][good]
        t0 = tc[np.arange(B), best][good]
        if polish_steps > 0:
            R0, t0, _, _ = _levenberg_marquardt(R0, t0, X[good], x[good], K, max_iter=polish_steps, lam0=1e-9, gtol=1e-12)
        R_out[good] = R0
        t_out[good] = t0
    return R_out, t_out, status


def _polyval4(c, v):
    return (((c[:, 0:1] * v + c[:, 1:2]) * v + c[:, 2:3]) * v + c[:, 3:4]) * v + c[:, 4:5]


def _polyval4_deriv(c, v):
    return ((4 * c[:, 0:1] * v + 3 * c[:, 1:2]) * v + 2 * c[:, 2:3]) * v + c[:, 3:4]


def _camera_to_world(R, t) -> Pose:
    return Pose(R.T, -R.T @ t)


def _world_to_camera(pose: Pose):
    return pose.R.T, -pose.R.T @ pose.t


def solve_pnp_minimal(pixels: np.ndarray, points: np.ndarray, K: Intrinsics) -> Pose:
    """Camera-to-world pose from exactly four 2D-3D correspondences."""
    pixels = np.asarray(pixels, dtype=np.float64)
    points = np.asarray(points, dtype=np.float64)
    if pixels.shape != (4, 2) or points.shape != (4, 3):
        raise ValueError("minimal PnP needs four correspondences")
    R, t, status = solve_minimal_batch(pixels[None], points[None], K)
    if status[0] == DEGENERATE:
        raise DegenerateConfigurationError("collinear or coincident correspondences")
    if status[0] == NO_SOLUTION:
        raise NoSolutionError("no pose keeps all four points in front of the camera")
    return _camera_to_world(R[0], t[0])


# ---------------------------------------------------------------------------
# scoring and refinement


def score_hypothesis(h: Pose, corrs: CorrespondenceSet, K: Intrinsics, tau: float) -> tuple[int, np.ndarray]:
    R, t = _world_to_camera(h)
    err = _reproj_errors(R, t, corrs.points, corrs.pixels, K)
    inliers = np.nonzero(err < tau)[0]
    return len(inliers), inliers


def _score_batch(R, t, corrs: CorrespondenceSet, K, tau, chunk=64):
    scores = np.empty(len(R), dtype=np.int64)
    for s in range(0, len(R), chunk):
        err = _reproj_errors(R[s:s + chunk], t[s:s + chunk], corrs.points[None], corrs.pixels[None], K)
        scores[s:s + chunk] = np.count_nonzero(err < tau, axis=1)
    return scores


def refine_pose(h: Pose, pixels: np.ndarray, points: np.ndarray, K: Intrinsics,
                max_iter: int = 50, gtol: float = 1e-9, trace: list | None = None) -> Pose:
    """Levenberg-Marquardt refinement of ``h`` on the given inlier correspondences.

    Non-convergence within ``max_iter`` returns the best iterate. ``trace``
    collects the total squared reprojection error after every iteration.
    """
    pixels = np.asarray(pixels, dtype=np.float64).reshape(-1, 2)
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(points) < 4:
        raise DegenerateConfigurationError(f"refinement needs at least 4 inliers, got {len(points)}")
    R, t = _world_to_camera(h)
    steps = [] if trace is not None else None
    R2, t2, cost, _ = _levenberg_marquardt(R[None], t[None], points[None], pixels[None], K,
                                           max_iter=max_iter, gtol=gtol, trace=steps)
    if trace is not None:
        trace.extend(float(c[0]) for c in steps)
    if not np.isfinite(cost[0]):
        return h
    U, _, Vt = np.linalg.svd(R2[0])
    return _camera_to_world(U @ Vt, t2[0])


# ---------------------------------------------------------------------------
# RANSAC


def _sample_distinct(rng: np.random.Generator, n: int, m: int, k: int = 4) -> np.ndarray:
    """``m`` rows of ``k`` distinct indices in ``[0, n)``, each row uniform."""
    r = rng.integers(0, n - np.arange(k), size=(m, k))
    out = np.empty_like(r)
    out[:, 0] = r[:, 0]
    for j in range(1, k):
        prev = np.sort(out[:, :j], axis=1)
        val = r[:, j].copy()
        for c in range(j):
            val += val >= prev[:, c]
        out[:, j] = val
    return out


def _slot_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, index)))


def _generate_hypotheses(corrs: CorrespondenceSet, K: Intrinsics, cfg: RansacConfig):
    n = len(corrs)
    n_slots = cfg.n_hypotheses
    tau = cfg.inlier_threshold_px
    rngs = [_slot_rng(cfg.rng_seed, STREAM_HYPOTHESES, s) for s in range(n_slots)]

    R_h = np.tile(np.eye(3), (n_slots, 1, 1))
    t_h = np.zeros((n_slots, 3))
    samples = np.full((n_slots, 4), -1)
    filled = np.zeros(n_slots, dtype=bool)
    exhausted = np.zeros(n_slots, dtype=bool)
    attempts = np.zeros(n_slots, dtype=np.int64)
    n_degenerate = 0
    n_no_solution = 0
    # fallback per slot: the solvable attempt with the most sample inliers, then smallest max error
    fb_key = np.full((n_slots, 2), [-1.0, np.inf])
    fb_R = np.tile(np.eye(3), (n_slots, 1, 1))
    fb_t = np.zeros((n_slots, 3))
    fb_sample = np.full((n_slots, 4), -1)

    batch = 4
    pending = np.arange(n_slots)
    while len(pending):
        sizes = np.minimum(batch, cfg.max_sampling_attempts_per_hypothesis - attempts[pending])
        idx = np.concatenate([_sample_distinct(rngs[s], n, m) for s, m in zip(pending, sizes)])
        owner = np.repeat(pending, sizes)
        R, t, status = solve_minimal_batch(corrs.pixels[idx], corrs.points[idx], K)
        n_degenerate += int(np.count_nonzero(status == DEGENERATE))
        n_no_solution += int(np.count_nonzero(status == NO_SOLUTION))
        err = _reproj_errors(R, t, corrs.points[idx], corrs.pixels[idx], K)
        n_in = np.count_nonzero(err < tau, axis=1)
        solvable = status == 0
        accepted = solvable & (n_in == 4)

        start = 0
        still = []
        for s, m in zip(pending, sizes):
            rows = slice(start, start + m)
            start += m
            acc = np.nonzero(accepted[rows])[0]
            if len(acc):
                i = rows.start + acc[0]
                R_h[s], t_h[s], samples[s] = R[i], t[i], idx[i]
                filled[s] = True
                attempts[s] += acc[0] + 1
                continue
            attempts[s] += m
            for i in np.nonzero(solvable[rows])[0] + rows.start:
                key = (float(n_in[i]), float(err[i].max()))
                if key[0] > fb_key[s, 0] or (key[0] == fb_key[s, 0] and key[1] < fb_key[s, 1]):
                    fb_key[s] = key
                    fb_R[s], fb_t[s], fb_sample[s] = R[i], t[i], idx[i]
            if attempts[s] >= cfg.max_sampling_attempts_per_hypothesis:
                exhausted[s] = True
                if fb_key[s, 0] >= 0:
                    R_h[s], t_h[s], samples[s] = fb_R[s], fb_t[s], fb_sample[s]
                    filled[s] = True
            else:
                still.append(s)
        pending = np.array(still, dtype=np.int64)
        batch = min(batch * 2, 256)

    diagnostics = {
        "sampling_attempts": int(attempts.sum()),
        "max_attempts_in_slot": int(attempts.max()),
        "exhausted_slots": int(exhausted.sum()),
        "degenerate_samples": n_degenerate,
        "unsolvable_samples": n_no_solution,
    }
    return R_h[filled], t_h[filled], samples[filled], np.nonzero(filled)[0], diagnostics


def ransac_localize(corrs: CorrespondenceSet, K: Intrinsics, cfg: RansacConfig = RansacConfig()) -> LocalizationResult:
    """Hypothesize, score by inlier count, pick the argmax, then refine."""
    n = len(corrs)
    if n < 4:
        raise PoseSolverError(f"need at least 4 correspondences, got {n}")
    X = corrs.points
    sv = np.linalg.svd(X - X.mean(axis=0), compute_uv=False)
    if sv[1] <= 1e-6 * max(sv[0], 1e-9):
        raise NoPoseError("all scene points are collinear or coincident", {"reason": "degenerate_scene"})

    R_h, t_h, samples, slots, diag = _generate_hypotheses(corrs, K, cfg)
    if len(slots) == 0:
        diag["reason"] = "no_solvable_sample"
        raise NoPoseError("no hypothesis could be generated", diag)

    tau = cfg.inlier_threshold_px
    scores = _score_batch(R_h, t_h, corrs, K, tau)
    best = int(np.argmax(scores))
    R, t = R_h[best], t_h[best]

    rounds = 0
    stop = "completed"
    for j in range(cfg.refine_steps):
        err = _reproj_errors(R, t, X, corrs.pixels, K)
        inliers = np.nonzero(err < tau)[0]
        if len(inliers) < cfg.refine_min_inliers:
            stop = "too_few_inliers"
            break
        rng = _slot_rng(cfg.rng_seed, STREAM_REFINEMENT, j)
        take = min(cfg.refine_inlier_cap, len(inliers))
        chosen = np.sort(rng.choice(inliers, size=take, replace=False))
        R2, t2, cost, _ = _levenberg_marquardt(R[None], t[None], X[chosen][None], corrs.pixels[chosen][None], K)
        if np.isfinite(cost[0]):
            U, _, Vt = np.linalg.svd(R2[0])
            R, t = U @ Vt, t2[0]
        rounds += 1

    final_err = _reproj_errors(R, t, X, corrs.pixels, K)
    diag["stop_reason"] = stop
    return LocalizationResult(
        pose=_camera_to_world(R, t),
        inlier_count=int(np.count_nonzero(final_err < tau)),
        hypotheses_evaluated=len(slots),
        refinement_rounds=rounds,
        best_hypothesis=int(slots[best]),
        scores=scores,
        diagnostics=diag,
    )
