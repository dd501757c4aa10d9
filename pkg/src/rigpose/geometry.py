"""Core geometry: rotation conventions, Plücker lines, rig calibration, pose algebra.

Conventions used throughout the package:

* The rig reference frame has z pointing up; camera extrinsics map camera
  coordinates into the rig frame (``x_rig = R_i @ x_cam + t_i``).
* Euler angles follow the Z-Y-X (yaw, pitch, roll) convention applied
  right-to-left: ``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)``.
* A :class:`RelativePose` ``(R, t)`` maps frame-0 rig coordinates into
  frame-1 rig coordinates: ``x_1 = R @ x_0 + t``.  This is the unique
  convention under which matched lines ``l_0`` (frame 0) and ``l_1``
  (frame 1) satisfy ``generalized_epipolar_value(l_0, l_1, pose) == 0``;
  see that function for the explicit bilinear form.

All values are immutable after construction and all operations are pure,
so everything here is safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CameraIndexError,
    InvalidRotationError,
    NonFiniteInputError,
    NonUnitVectorError,
    UndefinedDirectionError,
)

ROTATION_TOL = 1e-12
UNIT_TOL = 1e-12
ZERO_YAW_TOL = 1e-9


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _as_vector3(v, name: str) -> np.ndarray:
    arr = np.array(v, dtype=float, copy=True).reshape(3)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInputError(f"{name} contains non-finite values: {arr}")
    return _freeze(arr)


def _as_matrix3(m, name: str) -> np.ndarray:
    arr = np.array(m, dtype=float, copy=True).reshape(3, 3)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInputError(f"{name} contains non-finite values")
    return _freeze(arr)


def check_rotation(m, name: str = "rotation", tol: float = ROTATION_TOL) -> np.ndarray:
    """Validate that ``m`` is orthonormal with det +1; returns a frozen copy."""
    arr = _as_matrix3(m, name)
    err = np.abs(arr.T @ arr - np.eye(3)).max()
    if err > tol:
        raise InvalidRotationError(f"{name} is not orthonormal: |R^T R - I| = {err:.3e}")
    det = float(np.linalg.det(arr))
    if abs(det - 1.0) > max(tol, 1e-12):
        raise InvalidRotationError(f"{name} has det {det:.15f}, expected +1")
    return arr


def rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def yaw_rotation(r_y: float) -> np.ndarray:
    """Rotation about the z axis by ``r_y`` radians; exactly identity at 0."""
    if not math.isfinite(r_y):
        raise NonFiniteInputError(f"yaw angle is not finite: {r_y}")
    c, s = math.cos(r_y), math.sin(r_y)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def zyx_euler_angles(rotation) -> tuple[float, float, float]:
    """Decompose a rotation as Rz(yaw) @ Ry(pitch) @ Rx(roll); returns (yaw, pitch, roll).

    Assumes |pitch| < pi/2 (no gimbal handling); adequate for vehicle attitudes.
    """
    r = np.asarray(rotation, dtype=float)
    yaw = math.atan2(r[1, 0], r[0, 0])
    pitch = math.asin(max(-1.0, min(1.0, -r[2, 0])))
    roll = math.atan2(r[2, 1], r[2, 2])
    return yaw, pitch, roll


def skew(v) -> np.ndarray:
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rotation_from_axis_angle(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation about a unit ``axis`` by ``angle`` radians."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    k = skew(a)
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


@dataclass(frozen=True)
class CameraExtrinsics:
    """One camera of the rig: rotation camera->rig and camera center in rig frame."""

    rotation: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", check_rotation(self.rotation, "camera rotation"))
        object.__setattr__(self, "offset", _as_vector3(self.offset, "camera offset"))


@dataclass(frozen=True)
class RigCalibration:
    """Ordered, densely indexed set of camera extrinsics for one rig."""

    cameras: tuple[CameraExtrinsics, ...]
    _flat: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        cams = tuple(
            c if isinstance(c, CameraExtrinsics) else CameraExtrinsics(*c) for c in self.cameras
        )
        if len(cams) < 1:
            raise ValueError("rig needs at least one camera")
        object.__setattr__(self, "cameras", cams)
        # Flattened (row-major R then t) caches for the solver hot paths.
        flat = tuple(tuple(c.rotation.ravel()) + tuple(c.offset) for c in cams)
        object.__setattr__(self, "_flat", flat)
        object.__setattr__(self, "_karray", _freeze(np.array(flat, dtype=float)))

    def __len__(self) -> int:
        return len(self.cameras)

    def check_index(self, camera_index: int) -> int:
        if not 0 <= camera_index < len(self.cameras):
            raise CameraIndexError(
                f"camera index {camera_index} outside rig with {len(self.cameras)} cameras"
            )
        return camera_index


@dataclass(frozen=True)
class PlueckerLine:
    """6-vector line in the rig frame: unit direction u and moment m = t x u (u.m = 0)."""

    direction: np.ndarray
    moment: np.ndarray

    def __post_init__(self):
        u = _as_vector3(self.direction, "line direction")
        m = _as_vector3(self.moment, "line moment")
        if abs(float(u @ u) - 1.0) > 2.0 * UNIT_TOL:
            raise NonUnitVectorError(f"line direction has norm {np.linalg.norm(u):.15f}")
        if abs(float(u @ m)) > 1e-9 * max(1.0, float(np.linalg.norm(m))):
            raise ValueError(f"Pluecker constraint violated: u.m = {float(u @ m):.3e}")
        object.__setattr__(self, "direction", u)
        object.__setattr__(self, "moment", m)

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.direction, self.moment])


@dataclass(frozen=True)
class Correspondence:
    """A feature match: camera index and unit bearing (camera frame) in each frame."""

    camera_index_0: int
    camera_index_1: int
    bearing_0: np.ndarray
    bearing_1: np.ndarray

    def __post_init__(self):
        for name in ("bearing_0", "bearing_1"):
            b = _as_vector3(getattr(self, name), name)
            if abs(float(b @ b) - 1.0) > 2.0 * UNIT_TOL:
                raise NonUnitVectorError(f"{name} has norm {np.linalg.norm(b):.15f}")
            object.__setattr__(self, name, b)


@dataclass(frozen=True)
class AttitudePrior:
    """Known pitch*roll rotation for each frame (zero yaw by construction).

    ``r_pr_0`` rotates frame-0 rig directions into the reference-aligned frame
    (gravity z up); ``r_pr_1`` does the same for frame 1.
    """

    r_pr_0: np.ndarray
    r_pr_1: np.ndarray
    _flat: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mats = []
        for name in ("r_pr_0", "r_pr_1"):
            r = check_rotation(getattr(self, name), name)
            yaw, _, _ = zyx_euler_angles(r)
            if abs(yaw) > ZERO_YAW_TOL:
                raise InvalidRotationError(f"{name} has nonzero yaw component: {yaw:.3e} rad")
            object.__setattr__(self, name, r)
            mats.append(r)
        object.__setattr__(self, "_flat", (tuple(mats[0].ravel()), tuple(mats[1].ravel())))
        object.__setattr__(self, "_karray_0", _freeze(mats[0].ravel().copy()))
        object.__setattr__(self, "_karray_1", _freeze(mats[1].ravel().copy()))

    @staticmethod
    def identity() -> "AttitudePrior":
        return AttitudePrior(np.eye(3), np.eye(3))


@dataclass(frozen=True)
class RelativePose:
    """Rig motion between frames: x_1 = rotation @ x_0 + translation.

    Translation magnitude is poorly observable from same-camera matches; treat
    the direction as the trusted quantity.
    """

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", check_rotation(self.rotation, "pose rotation", tol=1e-11))
        object.__setattr__(self, "translation", _as_vector3(self.translation, "pose translation"))

    @staticmethod
    def identity() -> "RelativePose":
        return RelativePose(np.eye(3), np.zeros(3))


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def _pose_unchecked(rotation: np.ndarray, translation: np.ndarray) -> RelativePose:
    """Internal constructor for poses already known to be valid (no re-validation).

    Only for products of validated rotations (e.g. prior^T @ yaw @ prior);
    user-supplied matrices must go through RelativePose().
    """
    pose = object.__new__(RelativePose)
    object.__setattr__(pose, "rotation", _freeze(rotation))
    object.__setattr__(pose, "translation", _freeze(translation))
    return pose


def pluecker_from_bearing(rig: RigCalibration, camera_index: int, bearing) -> PlueckerLine:
    """Lift a unit camera-frame bearing to a rig-frame Plücker line.

    The direction is ``R_i @ bearing`` and the moment ``t_i x direction``.
    Non-unit bearings are rejected, never renormalized.
    """
    rig.check_index(camera_index)
    b = _as_vector3(bearing, "bearing")
    if abs(float(b @ b) - 1.0) > 2.0 * UNIT_TOL:
        raise NonUnitVectorError(f"bearing has norm {np.linalg.norm(b):.15f}")
    cam = rig.cameras[camera_index]
    u = cam.rotation @ b
    m = np.cross(cam.offset, u)
    return PlueckerLine(u, m)


def attitude_from_angles(
    roll_0: float, pitch_0: float, roll_1: float, pitch_1: float
) -> AttitudePrior:
    """Build the per-frame pitch*roll prior from roll/pitch angles in radians."""
    for name, a in (("roll_0", roll_0), ("pitch_0", pitch_0), ("roll_1", roll_1), ("pitch_1", pitch_1)):
        if not math.isfinite(a):
            raise NonFiniteInputError(f"{name} is not finite: {a}")
    return AttitudePrior(rot_y(pitch_0) @ rot_x(roll_0), rot_y(pitch_1) @ rot_x(roll_1))


def compose_final_pose(prior: AttitudePrior, r_y: float, t_tilde) -> RelativePose:
    """Assemble the full pose from the prior, the solved yaw and the warped translation.

    R = R_pr1^T @ Rz(r_y) @ R_pr0 and t = R_pr1^T @ t_tilde.  The rotation is a
    product of validated rotations, so no re-validation is performed here.
    """
    t = np.asarray(t_tilde, dtype=float).reshape(3)
    if not (math.isfinite(r_y) and np.all(np.isfinite(t))):
        raise NonFiniteInputError("compose_final_pose got non-finite yaw or translation")
    rot = prior.r_pr_1.T @ (yaw_rotation(r_y) @ prior.r_pr_0)
    return _pose_unchecked(rot, prior.r_pr_1.T @ t)


def rotation_error(rotation_gt, rotation_est) -> float:
    """Angle in [0, pi] between two rotations: arccos((trace(Rgt^T Rest) - 1) / 2).

    Near-identity differences are evaluated through the Frobenius form
    2 asin(|Rgt - Rest|_F / (2 sqrt 2)), which is the same angle but does not
    lose precision where arccos flattens; the arccos argument is clamped to
    [-1, 1] either way.
    """
    r_gt = check_rotation(rotation_gt, "rotation_gt", tol=1e-9)
    r_est = check_rotation(rotation_est, "rotation_est", tol=1e-9)
    c = (float(np.trace(r_gt.T @ r_est)) - 1.0) / 2.0
    if c > 0.9:
        s = float(np.linalg.norm(r_gt - r_est)) / (2.0 * math.sqrt(2.0))
        return 2.0 * math.asin(max(-1.0, min(1.0, s)))
    return math.acos(max(-1.0, min(1.0, c)))


def translation_direction_error(t_gt, t_est) -> float:
    """Angle in [0, pi] between two translation directions (scale-invariant).

    Evaluated as atan2(|a x b|, a . b) on the normalized vectors, the stable
    equivalent of arccos of the clamped dot product.
    """
    a = _as_vector3(t_gt, "t_gt")
    b = _as_vector3(t_est, "t_est")
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na < 1e-15 or nb < 1e-15:
        raise UndefinedDirectionError("translation direction undefined for zero-norm vector")
    a = a / na
    b = b / nb
    return math.atan2(float(np.linalg.norm(np.cross(a, b))), float(a @ b))


def generalized_epipolar_value(l0: PlueckerLine, l1: PlueckerLine, pose: RelativePose) -> float:
    """Bilinear constraint value for matched lines under a candidate pose.

    Evaluates ``l1^T [[t]x R, R; R, 0] l0`` with ``l0`` from frame 0 and ``l1``
    from frame 1; zero iff the two rays intersect under the pose.  This fixes
    the package-wide (R, t) convention.
    """
    r, t = pose.rotation, pose.translation
    u0, m0 = l0.direction, l0.moment
    u1, m1 = l1.direction, l1.moment
    return float(u1 @ (np.cross(t, r @ u0)) + u1 @ (r @ m0) + m1 @ (r @ u0))
