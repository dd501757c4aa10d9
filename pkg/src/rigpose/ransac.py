"""Consensus estimation: cross-camera sampling, angular residuals, iteration planning.

The sampling scheme requires every minimal 4-set to span at least two cameras,
which implicitly enforces rigid-motion consistency across the rig: matches on
an independently moving object seen in a single camera cannot dominate a
hypothesis that must also explain another camera's rays.

Residuals are angular and resolution independent: the two rays of a
correspondence are triangulated to the midpoint of their common perpendicular
(after moving the frame-1 ray into frame-0 coordinates with the candidate
pose), and the residual is the larger of the two angles between each observed
ray and the ray from its camera center to that midpoint.  Near-parallel pairs
fall back to the angle between the transformed ray and the epipolar plane
through the other ray.

Determinism: the per-iteration RNG stream is derived from (seed, iteration),
so results are independent of scheduling and thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InsufficientCameraDiversityError,
    InsufficientCorrespondencesError,
)
from .geometry import AttitudePrior, RelativePose, RigCalibration
from .quartic import DEFAULT_MAG_BOUND
from .solver import four_point_solve

DEFAULT_INLIER_THRESHOLD = math.radians(0.1)
_PARALLEL_EPS = 1e-12

SAMPLING_MODES = ("cross-camera", "single-camera", "unconstrained")


@dataclass(frozen=True)
class RansacConfig:
    """Knobs for :func:`ransac_estimate`.

    ``iterations`` fixes the loop count when set; otherwise the count is
    planned adaptively from the best inlier ratio seen so far, capped at
    ``max_iterations``.  ``sampling`` selects the minimal-set constraint:
    the default requires >= ``min_distinct_cameras`` cameras per sample,
    ``single-camera`` restricts each sample to one camera (the degraded
    baseline), and ``unconstrained`` is plain uniform sampling.
    """

    confidence: float = 0.9999
    inlier_threshold: float = DEFAULT_INLIER_THRESHOLD
    iterations: int | None = None
    min_distinct_cameras: int = 2
    seed: int = 0
    max_iterations: int = 100_000
    root_mag_bound: float = DEFAULT_MAG_BOUND
    sampling: str = "cross-camera"

    def __post_init__(self):
        if not 0.0 < self.confidence < 1.0:
            raise ValueError(f"confidence must be in (0, 1), got {self.confidence}")
        if self.inlier_threshold <= 0.0:
            raise ValueError("inlier_threshold must be positive")
        if self.min_distinct_cameras < 1:
            raise ValueError("min_distinct_cameras must be >= 1")
        if self.iterations is not None and self.iterations < 1:
            raise ValueError("iterations must be >= 1 when fixed")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.sampling not in SAMPLING_MODES:
            raise ValueError(f"sampling must be one of {SAMPLING_MODES}")


@dataclass(frozen=True)
class RansacResult:
    """Best consensus pose with its inlier classification.

    ``best_pose`` is None when no hypothesis was ever produced (explicit
    failure outcome); the mask is then all False.
    """

    best_pose: RelativePose | None
    inlier_mask: np.ndarray
    iterations_run: int
    best_inlier_count: int
    iterations_capped: bool = field(default=False)

    @property
    def success(self) -> bool:
        return self.best_pose is not None


def iteration_plan(p: float, w: float, n: int, cap: int | None = None) -> tuple[int, bool]:
    """RANSAC iteration count ceil(ln(1-p) / ln(1-w^n)) plus a capped flag."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"confidence p must be in (0, 1), got {p}")
    if not 0.0 < w <= 1.0:
        raise ValueError(f"inlier ratio w must be in (0, 1], got {w}")
    if n < 1:
        raise ValueError(f"sample size n must be >= 1, got {n}")
    if w == 1.0:
        return 1, False
    wn = w**n
    denom = math.log1p(-wn)
    if denom == 0.0:
        if cap is None:
            raise ValueError(f"w^n underflows for w={w}, n={n}; a cap is required")
        return cap, True
    k = max(1, math.ceil(math.log1p(-p) / denom))
    if cap is not None and k > cap:
        return cap, True
    return k, False


def iteration_count(p: float, w: float, n: int, cap: int | None = None) -> int:
    """Planned iteration count; see :func:`iteration_plan` for the capped flag."""
    return iteration_plan(p, w, n, cap)[0]


def preemptive_sample(
    num_correspondences: int,
    camera_of,
    rng: np.random.Generator,
    *,
    min_distinct_cameras: int = 2,
    max_attempts: int = 100_000,
) -> tuple[int, int, int, int]:
    """Four distinct indices spanning >= min_distinct_cameras cameras.

    Rejection sampling from uniform 4-subsets, hence uniform over the valid
    subsets.  Raises when the correspondence set cannot satisfy the camera
    constraint at all.
    """
    cams = np.asarray(camera_of)
    if num_correspondences < 4 or len(cams) != num_correspondences:
        raise InsufficientCorrespondencesError(
            f"need >= 4 correspondences with matching camera map, got {num_correspondences}"
        )
    if len(np.unique(cams)) < min_distinct_cameras:
        raise InsufficientCameraDiversityError(
            f"correspondences span {len(np.unique(cams))} camera(s); "
            f"sampling requires at least {min_distinct_cameras}"
        )
    for _ in range(max_attempts):
        idx = rng.choice(num_correspondences, size=4, replace=False)
        span = len({int(cams[i]) for i in idx})
        if span >= min_distinct_cameras:
            return tuple(int(i) for i in idx)
    raise InsufficientCameraDiversityError(
        f"no valid sample found in {max_attempts} attempts"
    )


def _single_camera_sample(cams: np.ndarray, rng: np.random.Generator) -> tuple[int, ...]:
    cameras, counts = np.unique(cams, return_counts=True)
    eligible = cameras[counts >= 4]
    if len(eligible) == 0:
        raise InsufficientCorrespondencesError("no camera has 4 correspondences")
    cam = int(eligible[rng.integers(len(eligible))])
    pool = np.flatnonzero(cams == cam)
    idx = rng.choice(len(pool), size=4, replace=False)
    return tuple(int(pool[i]) for i in idx)


class _ResidualScorer:
    """Precomputed rig-frame rays for scoring many poses against one match set."""

    def __init__(self, correspondences, rig: RigCalibration):
        n = len(correspondences)
        d0 = np.empty((n, 3))
        c0 = np.empty((n, 3))
        d1 = np.empty((n, 3))
        c1 = np.empty((n, 3))
        for k, c in enumerate(correspondences):
            cam0 = rig.cameras[rig.check_index(c.camera_index_0)]
            cam1 = rig.cameras[rig.check_index(c.camera_index_1)]
            d0[k] = cam0.rotation @ c.bearing_0
            c0[k] = cam0.offset
            d1[k] = cam1.rotation @ c.bearing_1
            c1[k] = cam1.offset
        self.d0, self.c0, self.d1_rig1, self.c1_rig1 = d0, c0, d1, c1

    def residuals(self, pose: RelativePose, return_flags: bool = False):
        r, t = pose.rotation, pose.translation
        d0, c0 = self.d0, self.c0
        d1 = self.d1_rig1 @ r  # row-wise R^T @ d
        c1 = (self.c1_rig1 - t) @ r
        b = np.einsum("ij,ij->i", d0, d1)
        w = c0 - c1
        dv = np.einsum("ij,ij->i", d0, w)
        ev = np.einsum("ij,ij->i", d1, w)
        denom = 1.0 - b * b
        parallel = denom <= _PARALLEL_EPS
        safe = np.where(parallel, 1.0, denom)
        s0 = (b * ev - dv) / safe
        s1 = (ev - b * dv) / safe
        mid = 0.5 * (c0 + s0[:, None] * d0 + c1 + s1[:, None] * d1)
        res = np.maximum(
            _view_angle(d0, mid - c0),
            _view_angle(d1, mid - c1),
        )
        if np.any(parallel):
            res = np.where(parallel, self._parallel_fallback(d0, d1, c0, c1), res)
        if return_flags:
            return res, parallel
        return res

    @staticmethod
    def _parallel_fallback(d0, d1, c0, c1):
        nrm = np.cross(d0, c1 - c0)
        nn = np.linalg.norm(nrm, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            sin_plane = np.abs(np.einsum("ij,ij->i", d1, nrm)) / nn
            plane_angle = np.arcsin(np.clip(sin_plane, 0.0, 1.0))
        ray_angle = np.arccos(np.clip(np.einsum("ij,ij->i", d0, d1), -1.0, 1.0))
        return np.where(nn > _PARALLEL_EPS, plane_angle, ray_angle)


def _view_angle(d, v):
    nv = np.linalg.norm(v, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cosang = np.einsum("ij,ij->i", d, v) / nv
    ang = np.arccos(np.clip(cosang, -1.0, 1.0))
    return np.where(nv > _PARALLEL_EPS, ang, math.pi / 2.0)


def residual_angles(pose: RelativePose, correspondences, rig: RigCalibration) -> np.ndarray:
    """Angular residual of every correspondence under a pose (radians)."""
    return _ResidualScorer(correspondences, rig).residuals(pose)


def residual_angle(pose: RelativePose, correspondence, rig: RigCalibration) -> float:
    """Angular residual of one correspondence under a pose (radians)."""
    return float(residual_angles(pose, [correspondence], rig)[0])


def residual_angle_with_flag(pose, correspondence, rig) -> tuple[float, bool]:
    """Residual plus a flag marking the near-parallel epipolar-plane fallback."""
    res, flags = _ResidualScorer([correspondence], rig).residuals(pose, return_flags=True)
    return float(res[0]), bool(flags[0])


def _iteration_rng(seed: int, iteration: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(iteration,)))


def ransac_estimate(
    correspondences,
    rig: RigCalibration,
    prior: AttitudePrior,
    config: RansacConfig,
) -> RansacResult:
    """Consensus-best relative pose over cross-camera minimal samples.

    Every candidate from every minimal solve is scored by counting residuals
    below the inlier threshold; the max-count pose wins, ties broken by lower
    summed inlier residual, then by earlier discovery.  Deterministic given
    (config.seed, inputs).
    """
    n = len(correspondences)
    if n < 4:
        raise InsufficientCorrespondencesError(f"RANSAC needs >= 4 correspondences, got {n}")
    cams = np.asarray([c.camera_index_0 for c in correspondences])
    if config.sampling == "cross-camera" and len(np.unique(cams)) < config.min_distinct_cameras:
        raise InsufficientCameraDiversityError(
            f"correspondences span {len(np.unique(cams))} camera(s); "
            f"need {config.min_distinct_cameras} for cross-camera sampling"
        )
    scorer = _ResidualScorer(correspondences, rig)
    corr_list = list(correspondences)

    if config.iterations is not None:
        planned, capped = config.iterations, False
    else:
        planned, capped = config.max_iterations, True

    best_key = None
    best_pose = None
    best_mask = np.zeros(n, dtype=bool)
    iteration = 0
    while iteration < planned:
        rng = _iteration_rng(config.seed, iteration)
        if config.sampling == "single-camera":
            sample = _single_camera_sample(cams, rng)
        elif config.sampling == "unconstrained":
            sample = tuple(int(i) for i in rng.choice(n, size=4, replace=False))
        else:
            sample = preemptive_sample(
                n, cams, rng, min_distinct_cameras=config.min_distinct_cameras
            )
        output = four_point_solve(
            [corr_list[i] for i in sample], rig, prior, root_mag_bound=config.root_mag_bound
        )
        for cand_index, cand in enumerate(output.candidates):
            res = scorer.residuals(cand.pose)
            mask = res < config.inlier_threshold
            count = int(mask.sum())
            key = (-count, float(res[mask].sum()), iteration, cand_index)
            if best_key is None or key < best_key:
                best_key, best_pose, best_mask = key, cand.pose, mask
                if config.iterations is None and count >= 1:
                    needed, capped = iteration_plan(
                        config.confidence, count / n, 4, cap=config.max_iterations
                    )
                    planned = min(planned, max(needed, iteration + 1))
        iteration += 1

    if best_pose is None:
        return RansacResult(None, np.zeros(n, dtype=bool), iteration, 0, capped)
    return RansacResult(best_pose, best_mask, iteration, int(best_mask.sum()), capped)
