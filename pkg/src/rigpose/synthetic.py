"""Synthetic rig scenarios, noise models, and the experiment drivers.

The simulated vehicle carries ``num_cameras`` outward-facing cameras on a
circle of diameter ``baseline`` (two cameras: side-looking at +-x), pinhole
intrinsics default to a KITTI-like 718 px focal over a 1241x376 image, and
scene points live at road-scene depths.  Matches are same-camera across two
frames, as the estimator expects.

Noise models, fixed here because the experiments need one concrete choice:

* Pixel noise: i.i.d. Gaussian per pixel coordinate, both frames, applied in
  the image plane and back-projected to unit bearings.
* Attitude noise: one Gaussian roll/pitch error pair shared by both frames
  (common mode).  Reference-direction error over a ~0.1 s frame interval is
  dominated by slowly varying bias, so the shared component is the physical
  one; independent per-frame errors would make the relative prior wrong by
  ~sqrt(2) sigma, which no estimator in this model class could undo.

Outliers come in two flavors: ``uniform-mismatch`` rewires frame-1 to a
random image location, ``rigid-independent-motion`` puts the outlier points
on one rigidly moving object per camera (consistent within that camera,
incompatible across cameras).  Labeled outliers are re-drawn until they
violate the inlier threshold under the true pose, so labels are trustworthy.

Trials are independent, seeded per (master seed, setting, trial), and may run
in a process pool; aggregation is order independent.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import InfeasibleSceneError
from .geometry import (
    AttitudePrior,
    CameraExtrinsics,
    Correspondence,
    RelativePose,
    RigCalibration,
    _pose_unchecked,
    attitude_from_angles,
    rot_x,
    rot_y,
    rotation_error,
    rotation_from_axis_angle,
    translation_direction_error,
    yaw_rotation,
    zyx_euler_angles,
)
from .quartic import DEFAULT_MAG_BOUND
from .ransac import (
    DEFAULT_INLIER_THRESHOLD,
    RansacConfig,
    _ResidualScorer,
    iteration_count,
    ransac_estimate,
)
from .solver import four_point_solve

BASE_ATTITUDE_STD_DEG = 1.0  # vehicle roll/pitch spread used when sampling motions
OUTLIER_RESIDUAL_MARGIN = 1.5  # labeled outliers must exceed margin * inlier threshold
MOTION_MODES = ("generic", "yaw", "zero-yaw")


@dataclass(frozen=True)
class ScenarioConfig:
    """Scene and noise parameters for one synthetic setting.

    Angles are degrees (converted internally), lengths meters, noise in
    pixels.  ``rotation_max_deg`` is both the cap for randomly drawn motion
    magnitudes and the exact magnitude when a driver pins the rotation.
    """

    num_cameras: int = 2
    baseline: float = 1.0
    num_points: int = 100
    rotation_max_deg: float = 5.0
    pixel_noise_stdv: float = 0.0
    attitude_noise_stdv_deg: float = 0.0
    outlier_ratio: float = 0.0
    outlier_model: str = "uniform-mismatch"
    focal: float = 718.0
    image_width: int = 1241
    image_height: int = 376
    depth_min: float = 5.0
    depth_max: float = 50.0
    translation_norm: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_cameras < 1:
            raise ValueError("num_cameras must be >= 1")
        if not 0.0 <= self.outlier_ratio < 1.0:
            raise ValueError("outlier_ratio must be in [0, 1)")
        if self.outlier_model not in ("uniform-mismatch", "rigid-independent-motion"):
            raise ValueError(f"unknown outlier model: {self.outlier_model}")
        for name in (
            "baseline",
            "rotation_max_deg",
            "pixel_noise_stdv",
            "attitude_noise_stdv_deg",
            "focal",
            "translation_norm",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if not 0 < self.depth_min <= self.depth_max:
            raise ValueError("need 0 < depth_min <= depth_max")


@dataclass(frozen=True)
class SyntheticInstance:
    rig: RigCalibration
    true_pose: RelativePose
    true_prior: AttitudePrior
    noisy_prior: AttitudePrior
    correspondences: tuple[Correspondence, ...]
    inlier_truth: np.ndarray

    def __post_init__(self):
        mask = np.array(self.inlier_truth, dtype=bool, copy=True)
        mask.setflags(write=False)
        object.__setattr__(self, "inlier_truth", mask)


def make_rig(num_cameras: int = 2, baseline: float = 1.0) -> RigCalibration:
    """Outward-facing cameras on a circle of diameter ``baseline``.

    Two cameras sit at +-baseline/2 on x looking outward along +-x, the
    non-overlapping side-camera layout.  Camera axes: z optical (outward),
    x tangential, y up (rig z).
    """
    cams = []
    for k in range(num_cameras):
        theta = 2.0 * math.pi * k / num_cameras
        c, s = math.cos(theta), math.sin(theta)
        rotation = np.column_stack([(-s, c, 0.0), (0.0, 0.0, 1.0), (c, s, 0.0)])
        cams.append(CameraExtrinsics(rotation, 0.5 * baseline * np.array([c, s, 0.0])))
    return RigCalibration(tuple(cams))


def _sample_motion(cfg: ScenarioConfig, rng, rotation_deg, motion_mode):
    """True pose ingredients: (true prior, rotation matrix, relative yaw in rad)."""
    base = math.radians(BASE_ATTITUDE_STD_DEG)
    roll0, pitch0 = rng.normal(0.0, base, size=2)
    if rotation_deg is None:
        angle = math.radians(rng.uniform(0.0, cfg.rotation_max_deg))
    else:
        angle = math.radians(rotation_deg)
    if motion_mode == "yaw":
        yaw = angle if rng.random() < 0.5 else -angle
        prior = attitude_from_angles(roll0, pitch0, roll0, pitch0)
        r_true = prior.r_pr_1.T @ yaw_rotation(yaw) @ prior.r_pr_0
        return prior, r_true, yaw
    if motion_mode == "zero-yaw":
        roll1, pitch1 = rng.normal(0.0, base, size=2)
        prior = attitude_from_angles(roll0, pitch0, roll1, pitch1)
        return prior, prior.r_pr_1.T @ prior.r_pr_0, 0.0
    if motion_mode != "generic":
        raise ValueError(f"unknown motion mode: {motion_mode}")
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    r_true = rotation_from_axis_angle(axis, angle)
    r_pr_0 = rot_y(pitch0) @ rot_x(roll0)
    gamma, beta, alpha = zyx_euler_angles(r_pr_0 @ r_true.T)
    prior = attitude_from_angles(roll0, pitch0, alpha, beta)
    return prior, r_true, -gamma


def _perturbed_prior(prior: AttitudePrior, noise_std_rad: float, rng) -> AttitudePrior:
    """Common-mode roll/pitch perturbation of both frames' priors."""
    if noise_std_rad == 0.0:
        return prior
    eps_roll, eps_pitch = rng.normal(0.0, noise_std_rad, size=2)
    _, pitch0, roll0 = zyx_euler_angles(prior.r_pr_0)
    _, pitch1, roll1 = zyx_euler_angles(prior.r_pr_1)
    return attitude_from_angles(
        roll0 + eps_roll, pitch0 + eps_pitch, roll1 + eps_roll, pitch1 + eps_pitch
    )


class _Projector:
    """Pinhole projection helpers bound to one config and rig."""

    def __init__(self, cfg: ScenarioConfig, rig: RigCalibration):
        self.cfg = cfg
        self.rig = rig
        self.cx = cfg.image_width / 2.0
        self.cy = cfg.image_height / 2.0

    def bearing(self, u: float, v: float) -> np.ndarray:
        d = np.array([(u - self.cx) / self.cfg.focal, (v - self.cy) / self.cfg.focal, 1.0])
        return d / np.linalg.norm(d)

    def sample_pixel(self, rng) -> tuple[float, float]:
        return rng.uniform(0.0, self.cfg.image_width), rng.uniform(0.0, self.cfg.image_height)

    def project(self, x_cam: np.ndarray):
        """Pixel coordinates, or None when behind the camera or out of frame."""
        if x_cam[2] < self.cfg.depth_min * 0.05 or x_cam[2] < 0.25:
            return None
        u = self.cfg.focal * x_cam[0] / x_cam[2] + self.cx
        v = self.cfg.focal * x_cam[1] / x_cam[2] + self.cy
        if 0.0 <= u < self.cfg.image_width and 0.0 <= v < self.cfg.image_height:
            return u, v
        return None

    def point_in_frustum(self, camera: int, rng) -> np.ndarray:
        u, v = self.sample_pixel(rng)
        depth = rng.uniform(self.cfg.depth_min, self.cfg.depth_max)
        ext = self.rig.cameras[camera]
        return ext.rotation @ (depth * self.bearing(u, v)) + ext.offset


def _outlier_indices(cameras: np.ndarray, ratio: float, rng) -> np.ndarray:
    """Exactly ceil(N*ratio) outlier slots, spread per camera by largest remainder."""
    n = len(cameras)
    total = int(math.ceil(n * ratio - 1e-9))
    if total == 0:
        return np.zeros(0, dtype=int)
    cam_ids, counts = np.unique(cameras, return_counts=True)
    quotas = {}
    fractions = []
    assigned = 0
    for cam, count in zip(cam_ids, counts):
        exact = count * ratio
        q = int(math.floor(exact + 1e-9))
        quotas[int(cam)] = q
        assigned += q
        fractions.append((-(exact - q), int(cam)))
    fractions.sort()
    for _, cam in fractions[: max(0, total - assigned)]:
        quotas[cam] += 1
    picked = []
    for cam in cam_ids:
        pool = np.flatnonzero(cameras == cam)
        take = min(quotas[int(cam)], len(pool))
        picked.extend(pool[rng.choice(len(pool), size=take, replace=False)])
    picked = np.array(sorted(picked), dtype=int)
    if len(picked) > total:
        picked = picked[rng.choice(len(picked), size=total, replace=False)]
        picked.sort()
    return picked


def generate_instance(
    cfg: ScenarioConfig,
    rng: np.random.Generator,
    *,
    rotation_deg: float | None = None,
    motion_mode: str = "generic",
    num_points: int | None = None,
) -> SyntheticInstance:
    """One synthetic two-frame problem with ground-truth labels.

    ``rotation_deg`` pins the motion magnitude exactly (sweeps); None draws
    it uniformly below ``cfg.rotation_max_deg``.  ``motion_mode``: "generic"
    (random axis), "yaw" (pure relative yaw about the reference direction),
    "zero-yaw" (attitude change only).  Deterministic per rng state.
    """
    n = cfg.num_points if num_points is None else num_points
    rig = make_rig(cfg.num_cameras, cfg.baseline)
    proj = _Projector(cfg, rig)
    prior, r_true, _ = _sample_motion(cfg, rng, rotation_deg, motion_mode)
    if cfg.translation_norm > 0.0:
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        t_true = cfg.translation_norm * direction
    else:
        t_true = np.zeros(3)
    true_pose = _pose_unchecked(r_true.copy(), t_true)
    noisy_prior = _perturbed_prior(prior, math.radians(cfg.attitude_noise_stdv_deg), rng)

    cameras = np.array([j % cfg.num_cameras for j in range(n)], dtype=int)
    sigma = cfg.pixel_noise_stdv

    def observe(camera: int, x_rig0, x_rig1):
        """Project a world pair into both frames; None when not co-visible."""
        ext = rig.cameras[camera]
        pix0 = proj.project(ext.rotation.T @ (x_rig0 - ext.offset))
        if pix0 is None:
            return None
        pix1 = proj.project(ext.rotation.T @ (x_rig1 - ext.offset))
        if pix1 is None:
            return None
        return pix0, pix1

    def noisy_corr(camera: int, pix0, pix1) -> Correspondence:
        u0, v0 = pix0
        u1, v1 = pix1
        if sigma > 0.0:
            u0 += rng.normal(0.0, sigma)
            v0 += rng.normal(0.0, sigma)
            u1 += rng.normal(0.0, sigma)
            v1 += rng.normal(0.0, sigma)
        return Correspondence(camera, camera, proj.bearing(u0, v0), proj.bearing(u1, v1))

    corrs: list[Correspondence | None] = [None] * n
    for j in range(n):
        cam = int(cameras[j])
        for _ in range(200):
            x0 = proj.point_in_frustum(cam, rng)
            pair = observe(cam, x0, r_true @ x0 + t_true)
            if pair is not None:
                corrs[j] = noisy_corr(cam, *pair)
                break
        else:
            raise InfeasibleSceneError(
                f"no co-visible point found for camera {cam}; check motion/depth config"
            )

    inlier_truth = np.ones(n, dtype=bool)
    out_idx = _outlier_indices(cameras, cfg.outlier_ratio, rng)
    if len(out_idx):
        inlier_truth[out_idx] = False
        threshold = OUTLIER_RESIDUAL_MARGIN * DEFAULT_INLIER_THRESHOLD
        if cfg.outlier_model == "rigid-independent-motion":
            objects = {}
            for cam in range(cfg.num_cameras):
                obj_yaw = math.radians(rng.uniform(1.5, 5.0)) * (1 if rng.random() < 0.5 else -1)
                heading = rng.uniform(0.0, 2.0 * math.pi)
                t_obj = rng.uniform(1.0, 3.0) * np.array(
                    [math.cos(heading), math.sin(heading), 0.0]
                )
                objects[cam] = (yaw_rotation(obj_yaw), t_obj)

            def draw_outlier(j: int) -> Correspondence:
                cam = int(cameras[j])
                r_obj, t_obj = objects[cam]
                for _ in range(200):
                    x0 = proj.point_in_frustum(cam, rng)
                    pair = observe(cam, x0, r_true @ (r_obj @ x0 + t_obj) + t_true)
                    if pair is not None:
                        return noisy_corr(cam, *pair)
                raise InfeasibleSceneError("moving object never co-visible; check config")

        else:

            def draw_outlier(j: int) -> Correspondence:
                # mismatch: frame-0 observation kept, frame-1 rewired elsewhere
                cam = int(cameras[j])
                u1, v1 = proj.sample_pixel(rng)
                return Correspondence(cam, cam, corrs[j].bearing_0, proj.bearing(u1, v1))

        for j in out_idx:
            corrs[j] = draw_outlier(int(j))
        # Labels must be trustworthy: redraw any outlier that the true pose
        # would still accept (within margin), so relabeling is never needed.
        for _ in range(100):
            res = _ResidualScorer([corrs[j] for j in out_idx], rig).residuals(true_pose)
            bad = np.flatnonzero(res < threshold)
            if len(bad) == 0:
                break
            for b in bad:
                corrs[int(out_idx[b])] = draw_outlier(int(out_idx[b]))
        else:
            raise InfeasibleSceneError("could not draw outliers violating the true pose")

    return SyntheticInstance(rig, true_pose, prior, noisy_prior, tuple(corrs), inlier_truth)


# ---------------------------------------------------------------------------
# Error bookkeeping
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorStats:
    """Per-trial errors for one experiment setting, NaN where undefined."""

    setting: str
    rot_err: np.ndarray
    trans_err: np.ndarray
    inlier_recall: np.ndarray | None = None
    inlier_precision: np.ndarray | None = None
    runtime_ns: np.ndarray | None = None

    @property
    def num_trials(self) -> int:
        return len(self.rot_err)

    @property
    def num_failures(self) -> int:
        return int(np.isnan(self.rot_err).sum())

    def median_rot_deg(self) -> float:
        return float(np.degrees(np.nanmedian(self.rot_err)))

    def median_trans_deg(self) -> float:
        return float(np.degrees(np.nanmedian(self.trans_err)))

    def quantiles(self, values: np.ndarray, qs=(0.1, 0.25, 0.5, 0.75, 0.9)):
        finite = values[~np.isnan(values)]
        if len(finite) == 0:
            return [math.nan] * len(qs)
        return [float(np.quantile(finite, q)) for q in qs]


def _best_candidate_errors(output, true_pose: RelativePose):
    """Errors of the candidate closest to ground truth (standard minimal-solver scoring)."""
    best_rot = math.nan
    best_trans = math.nan
    for cand in output.candidates:
        err = rotation_error(true_pose.rotation, cand.pose.rotation)
        if math.isnan(best_rot) or err < best_rot:
            best_rot = err
            if (
                float(np.linalg.norm(true_pose.translation)) > 1e-12
                and float(np.linalg.norm(cand.pose.translation)) > 1e-12
            ):
                best_trans = translation_direction_error(
                    true_pose.translation, cand.pose.translation
                )
            else:
                best_trans = math.nan
    return best_rot, best_trans


def _trial_rng(seed: int, setting_index: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(setting_index, trial))
    )


def _map_trials(fn: Callable, tasks: list, threads: int) -> list:
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (8 * threads))))


# ---------------------------------------------------------------------------
# Experiment drivers
# ---------------------------------------------------------------------------


def _minimal_solve_trial(args) -> tuple[float, float, int]:
    cfg, setting_index, trial, rotation_deg, motion_mode, bound = args
    rng = _trial_rng(cfg.seed, setting_index, trial)
    inst = generate_instance(
        cfg, rng, rotation_deg=rotation_deg, motion_mode=motion_mode, num_points=4
    )
    t0 = time.perf_counter_ns()
    output = four_point_solve(
        inst.correspondences, inst.rig, inst.noisy_prior, root_mag_bound=bound
    )
    elapsed = time.perf_counter_ns() - t0
    rot, trans = _best_candidate_errors(output, inst.true_pose)
    return rot, trans, elapsed


def _sweep(cfg, levels, trials, threads, make_level_cfg, setting_label, motion_for_level, bound):
    results = []
    for li, level in enumerate(levels):
        level_cfg = make_level_cfg(cfg, level)
        rotation_deg, mode = motion_for_level(cfg, level)
        rows = _map_trials(
            _minimal_solve_trial,
            [(level_cfg, li, j, rotation_deg, mode, bound) for j in range(trials)],
            threads,
        )
        arr = np.array(rows, dtype=float)
        results.append(
            ErrorStats(
                setting=setting_label(level),
                rot_err=arr[:, 0],
                trans_err=arr[:, 1],
                runtime_ns=arr[:, 2],
            )
        )
    return results


def run_pixel_noise_sweep(
    cfg: ScenarioConfig, noise_levels, trials: int, *, threads: int = 1
) -> list[ErrorStats]:
    """Minimal solves (no consensus) across image-noise levels, inliers only.

    Motion is a pure relative yaw of exactly ``cfg.rotation_max_deg`` degrees
    per trial (the driving scenario the noise experiments assume).
    """
    return _sweep(
        cfg,
        list(noise_levels),
        trials,
        threads,
        lambda c, lvl: replace(c, pixel_noise_stdv=float(lvl), outlier_ratio=0.0),
        lambda lvl: f"pixel_noise={float(lvl):g}",
        lambda c, lvl: (c.rotation_max_deg, "yaw"),
        DEFAULT_MAG_BOUND,
    )


def run_attitude_noise_sweep(
    cfg: ScenarioConfig, noise_levels_deg, trials: int, *, threads: int = 1
) -> list[ErrorStats]:
    """Minimal solves across reference-direction noise levels; pixel noise held at cfg."""
    return _sweep(
        cfg,
        list(noise_levels_deg),
        trials,
        threads,
        lambda c, lvl: replace(c, attitude_noise_stdv_deg=float(lvl), outlier_ratio=0.0),
        lambda lvl: f"attitude_noise_deg={float(lvl):g}",
        lambda c, lvl: (c.rotation_max_deg, "yaw"),
        DEFAULT_MAG_BOUND,
    )


def run_rotation_sweep(
    cfg: ScenarioConfig, angles_deg, trials: int, *, threads: int = 1
) -> list[ErrorStats]:
    """Minimal solves across true yaw magnitudes; widens the root bound to cover them."""
    angles = [float(a) for a in angles_deg]
    bound = max(DEFAULT_MAG_BOUND, 1.5 * math.radians(max(angles)) + 0.02)
    return _sweep(
        cfg,
        angles,
        trials,
        threads,
        lambda c, lvl: replace(c, rotation_max_deg=float(lvl), outlier_ratio=0.0),
        lambda lvl: f"rotation_deg={float(lvl):g}",
        lambda c, lvl: (float(lvl), "yaw"),
        bound,
    )


def _ransac_trial(args):
    cfg, setting_index, trial, iterations, confidence, threshold, sampling = args
    rng = _trial_rng(cfg.seed, setting_index, trial)
    inst = generate_instance(cfg, rng, rotation_deg=cfg.rotation_max_deg, motion_mode="generic")
    seed = int(
        np.random.SeedSequence(entropy=cfg.seed, spawn_key=(setting_index, trial, 7)).generate_state(1)[0]
    )
    config = RansacConfig(
        confidence=confidence,
        inlier_threshold=threshold,
        iterations=iterations,
        seed=seed,
        sampling=sampling,
    )
    t0 = time.perf_counter_ns()
    result = ransac_estimate(inst.correspondences, inst.rig, inst.noisy_prior, config)
    elapsed = time.perf_counter_ns() - t0
    if not result.success:
        return math.nan, math.nan, math.nan, math.nan, elapsed
    rot = rotation_error(inst.true_pose.rotation, result.best_pose.rotation)
    if float(np.linalg.norm(result.best_pose.translation)) > 1e-12:
        trans = translation_direction_error(
            inst.true_pose.translation, result.best_pose.translation
        )
    else:
        trans = math.nan
    truth = inst.inlier_truth
    hits = int((result.inlier_mask & truth).sum())
    recall = hits / max(1, int(truth.sum()))
    picked = int(result.inlier_mask.sum())
    precision = hits / picked if picked else math.nan
    return rot, trans, recall, precision, elapsed


def run_ransac_experiments(
    cfg: ScenarioConfig,
    mode: str,
    outlier_ratios,
    trials: int,
    *,
    iterations: int = 500,
    confidence: float = 0.9999,
    threshold: float = DEFAULT_INLIER_THRESHOLD,
    sampling: str = "cross-camera",
    threads: int = 1,
) -> list[ErrorStats]:
    """Consensus experiments over outlier ratios.

    ``fixed-confidence`` plans the iteration count from the known inlier
    ratio of each setting via the standard formula; ``fixed-iterations`` uses
    ``iterations`` everywhere.
    """
    if mode not in ("fixed-confidence", "fixed-iterations"):
        raise ValueError(f"unknown mode: {mode}")
    results = []
    for si, ratio in enumerate(float(r) for r in outlier_ratios):
        if mode == "fixed-confidence":
            k = iteration_count(confidence, 1.0 - ratio, 4)
        else:
            k = iterations
        setting_cfg = replace(cfg, outlier_ratio=ratio)
        rows = _map_trials(
            _ransac_trial,
            [(setting_cfg, si, j, k, confidence, threshold, sampling) for j in range(trials)],
            threads,
        )
        arr = np.array(rows, dtype=float)
        results.append(
            ErrorStats(
                setting=f"outlier_ratio={ratio:g},iterations={k}",
                rot_err=arr[:, 0],
                trans_err=arr[:, 1],
                inlier_recall=arr[:, 2],
                inlier_precision=arr[:, 3],
                runtime_ns=arr[:, 4],
            )
        )
    return results


def run_conjugate_motion_experiment(
    trials: int,
    *,
    seed: int = 0,
    iterations: int | None = None,
    pixel_noise_stdv: float = 1.0,
    points_per_camera: int = 100,
    background_fraction: float = 0.2,
    threshold: float = DEFAULT_INLIER_THRESHOLD,
    threads: int = 1,
) -> dict[str, ErrorStats]:
    """The two-camera moving-object scenario, cross-camera vs single-camera sampling.

    Each camera sees ``background_fraction`` static background matches and the
    rest on a rigidly moving object unique to that camera.  The object
    matches are self-consistent within their camera, so samples drawn from a
    single camera lock onto the object's motion; samples forced to span both
    cameras can only agree on the true ego-motion.  The default iteration
    count comes from the planning formula at the background inlier ratio.
    """
    cfg = ScenarioConfig(
        num_cameras=2,
        num_points=2 * points_per_camera,
        rotation_max_deg=1.0,
        pixel_noise_stdv=pixel_noise_stdv,
        outlier_ratio=1.0 - background_fraction,
        outlier_model="rigid-independent-motion",
        seed=seed,
    )
    if iterations is None:
        iterations = iteration_count(0.99, background_fraction, 4)
    results = {}
    for si, sampling in enumerate(("cross-camera", "single-camera")):
        rows = _map_trials(
            _ransac_trial,
            [(cfg, si, j, iterations, 0.9999, threshold, sampling) for j in range(trials)],
            threads,
        )
        arr = np.array(rows, dtype=float)
        results[sampling] = ErrorStats(
            setting=f"conjugate,{sampling},iterations={iterations}",
            rot_err=arr[:, 0],
            trans_err=arr[:, 1],
            inlier_recall=arr[:, 2],
            inlier_precision=arr[:, 3],
            runtime_ns=arr[:, 4],
        )
    return results


@dataclass(frozen=True)
class TimingStats:
    """Latency distribution of four_point_solve on random minimal instances."""

    samples_ns: np.ndarray
    zero_candidate_count: int
    mean_ns: float = field(init=False)
    median_ns: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "mean_ns", float(np.mean(self.samples_ns)))
        object.__setattr__(self, "median_ns", float(np.median(self.samples_ns)))

    @property
    def solves_per_second(self) -> float:
        return 1e9 / self.mean_ns

    def quantile_ns(self, q: float) -> float:
        return float(np.quantile(self.samples_ns, q))


def run_timing_bench(
    trials: int, *, seed: int = 0, warmup: int = 200, cfg: ScenarioConfig | None = None
) -> TimingStats:
    """Single-threaded latency of the minimal solver, after JIT/cache warmup.

    Solves with an empty candidate set are excluded from the per-solve
    latency samples and counted separately.
    """
    base = cfg if cfg is not None else ScenarioConfig(rotation_max_deg=2.0, seed=seed)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(99,)))
    pool = min(trials, 1000)
    instances = [
        generate_instance(base, rng, motion_mode="generic", num_points=4) for _ in range(pool)
    ]
    for inst in instances[: min(warmup, pool)]:
        four_point_solve(inst.correspondences, inst.rig, inst.noisy_prior)
    samples = np.empty(trials)
    zero = 0
    kept = 0
    for i in range(trials):
        inst = instances[i % pool]
        t0 = time.perf_counter_ns()
        out = four_point_solve(inst.correspondences, inst.rig, inst.noisy_prior)
        dt = time.perf_counter_ns() - t0
        if out.candidates:
            samples[kept] = dt
            kept += 1
        else:
            zero += 1
    return TimingStats(samples[:kept].copy(), zero)
