"""The 4-point relative-pose minimal solver.

Pipeline: lift bearings to rig-frame Plücker lines, warp both frames by their
attitude priors, form one 8-coefficient constraint row per correspondence,
expand the 4x4 determinant polynomial in the yaw unknown, take the real roots
inside the trust bound, and recover the warped translation per root by least
squares.  At most four candidate poses come back, ranked by quartic residual
then conditioning; consensus scoring (see :mod:`rigpose.ransac`) picks between
them.

The per-row identity is exact, not approximate: with the small-rotation model
``I + [r_y]_x`` substituted for the yaw rotation, the warped epipolar value
equals ``a1 + a2 tx + a3 ty + a4 tz + (a5 + a6 tx + a7 ty + a8 tz) r_y``
for every translation and yaw, which is what the row tests pin down.

Internals run on plain floats: this solver sits inside RANSAC loops and numpy
dispatch overhead would dominate at this problem size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientCorrespondencesError
from .geometry import (
    AttitudePrior,
    Correspondence,
    PlueckerLine,
    RelativePose,
    RigCalibration,
    _pose_unchecked,
    compose_final_pose,
)
from .quartic import (
    DEFAULT_IMAG_TOL,
    DEFAULT_MAG_BOUND,
    real_roots_filtered,
    roots_from_coefficients,
)
from ._kernel import KERNEL as _KERNEL

DEGENERATE_CONDITIONING = 1e-10

# Row pairs and complementary pairs with Laplace signs for a 4x4 determinant
# expanded along column pairs (0,1) x (2,3).
_LAPLACE_TERMS = (
    (0, 1, 2, 3, 1.0),
    (0, 2, 1, 3, -1.0),
    (0, 3, 1, 2, 1.0),
    (1, 2, 0, 3, 1.0),
    (1, 3, 0, 2, -1.0),
    (2, 3, 0, 1, 1.0),
)


@dataclass(frozen=True)
class CoefficientRow:
    """Constraint-row coefficients (1, tx, ty, tz, r_y, tx*r_y, ty*r_y, tz*r_y)."""

    a1: float
    a2: float
    a3: float
    a4: float
    a5: float
    a6: float
    a7: float
    a8: float

    def evaluate(self, t_tilde, r_y: float) -> float:
        """Row polynomial value at a warped translation and yaw."""
        tx, ty, tz = float(t_tilde[0]), float(t_tilde[1]), float(t_tilde[2])
        return (
            self.a1
            + self.a2 * tx
            + self.a3 * ty
            + self.a4 * tz
            + (self.a5 + self.a6 * tx + self.a7 * ty + self.a8 * tz) * r_y
        )

    def as_tuple(self) -> tuple:
        return (self.a1, self.a2, self.a3, self.a4, self.a5, self.a6, self.a7, self.a8)


@dataclass(frozen=True)
class SolverCandidate:
    """One pose hypothesis: pose, solved yaw, and translation-system conditioning.

    ``conditioning`` is the smallest singular value of the 4x3 translation
    system; below ``DEGENERATE_CONDITIONING`` the candidate is flagged
    degenerate (typically an unobservable translation scale) but still
    returned.
    """

    pose: RelativePose
    r_y: float
    conditioning: float
    degenerate: bool


@dataclass(frozen=True)
class SolverOutput:
    candidates: tuple[SolverCandidate, ...]

    def __len__(self) -> int:
        return len(self.candidates)

    @property
    def best(self) -> SolverCandidate | None:
        return self.candidates[0] if self.candidates else None


# ---------------------------------------------------------------------------
# Scalar kernels
# ---------------------------------------------------------------------------


def _pluecker_scalar(cam_flat, bx, by, bz):
    (r00, r01, r02, r10, r11, r12, r20, r21, r22, tx, ty, tz) = cam_flat
    ux = r00 * bx + r01 * by + r02 * bz
    uy = r10 * bx + r11 * by + r12 * bz
    uz = r20 * bx + r21 * by + r22 * bz
    return (
        ux,
        uy,
        uz,
        ty * uz - tz * uy,
        tz * ux - tx * uz,
        tx * uy - ty * ux,
    )


def _rotate6(rot_flat, line):
    (r00, r01, r02, r10, r11, r12, r20, r21, r22) = rot_flat
    ux, uy, uz, mx, my, mz = line
    return (
        r00 * ux + r01 * uy + r02 * uz,
        r10 * ux + r11 * uy + r12 * uz,
        r20 * ux + r21 * uy + r22 * uz,
        r00 * mx + r01 * my + r02 * mz,
        r10 * mx + r11 * my + r12 * mz,
        r20 * mx + r21 * my + r22 * mz,
    )


def _row_scalar(l0w, l1w):
    fx, fy, fz, gx, gy, gz = l0w  # warped frame-0 line
    px, py, pz, qx, qy, qz = l1w  # warped frame-1 line
    return (
        px * gx + py * gy + pz * gz + qx * fx + qy * fy + qz * fz,  # a1
        fy * pz - fz * py,  # a2: (f0 x f1)_x
        fz * px - fx * pz,  # a3
        fx * py - fy * px,  # a4
        py * gx - px * gy + qy * fx - qx * fy,  # a5
        fx * pz,  # a6: ((z x f0) x f1)_x
        fy * pz,  # a7
        -(fx * px + fy * py),  # a8
    )


def _quartic_scalar(rows):
    # det(M0 + r*M1) by Laplace expansion over complementary 2x2 minors;
    # per-row constant columns (a2,a3,a4,a1) and r-columns (a6,a7,a8,a5).
    out4 = out3 = out2 = out1 = out0 = 0.0
    for i, j, k, l, sign in _LAPLACE_TERMS:
        ri, rj, rk, rl = rows[i], rows[j], rows[k], rows[l]
        ci0, ci1 = ri[1], ri[2]
        di0, di1 = ri[5], ri[6]
        cj0, cj1 = rj[1], rj[2]
        dj0, dj1 = rj[5], rj[6]
        p0 = ci0 * cj1 - ci1 * cj0
        p1 = ci0 * dj1 + di0 * cj1 - ci1 * dj0 - di1 * cj0
        p2 = di0 * dj1 - di1 * dj0
        ck2, ck3 = rk[3], rk[0]
        dk2, dk3 = rk[7], rk[4]
        cl2, cl3 = rl[3], rl[0]
        dl2, dl3 = rl[7], rl[4]
        q0 = ck2 * cl3 - ck3 * cl2
        q1 = ck2 * dl3 + dk2 * cl3 - ck3 * dl2 - dk3 * cl2
        q2 = dk2 * dl3 - dk3 * dl2
        out0 += sign * p0 * q0
        out1 += sign * (p0 * q1 + p1 * q0)
        out2 += sign * (p0 * q2 + p1 * q1 + p2 * q0)
        out3 += sign * (p1 * q2 + p2 * q1)
        out4 += sign * p2 * q2
    return out4, out3, out2, out1, out0


def _sym3_eig_range(n00, n01, n02, n11, n12, n22):
    p1 = n01 * n01 + n02 * n02 + n12 * n12
    q = (n00 + n11 + n22) / 3.0
    p2 = (n00 - q) ** 2 + (n11 - q) ** 2 + (n22 - q) ** 2 + 2.0 * p1
    if p2 <= 0.0:
        return q, q
    p = math.sqrt(p2 / 6.0)
    b00, b11, b22 = (n00 - q) / p, (n11 - q) / p, (n22 - q) / p
    b01, b02, b12 = n01 / p, n02 / p, n12 / p
    half_det = (
        b00 * b11 * b22
        + 2.0 * b01 * b02 * b12
        - b00 * b12 * b12
        - b11 * b02 * b02
        - b22 * b01 * b01
    ) / 2.0
    half_det = max(-1.0, min(1.0, half_det))
    phi = math.acos(half_det) / 3.0
    lam_max = q + 2.0 * p * math.cos(phi)
    lam_min = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    return lam_min, lam_max


def _translation_scalar(rows, r_y):
    """Least-squares t for the 4x3 system at a yaw root; returns ((tx,ty,tz), sigma_min).

    Normal equations on the fast path; falls back to an SVD-backed solve when
    the system is close to rank deficient (degenerate translation geometry),
    which also yields the minimum-norm solution there.
    """
    r0, r1, r2, r3 = rows
    m00 = r0[1] + r0[5] * r_y
    m01 = r0[2] + r0[6] * r_y
    m02 = r0[3] + r0[7] * r_y
    b0 = -(r0[0] + r0[4] * r_y)
    m10 = r1[1] + r1[5] * r_y
    m11 = r1[2] + r1[6] * r_y
    m12 = r1[3] + r1[7] * r_y
    b1 = -(r1[0] + r1[4] * r_y)
    m20 = r2[1] + r2[5] * r_y
    m21 = r2[2] + r2[6] * r_y
    m22 = r2[3] + r2[7] * r_y
    b2 = -(r2[0] + r2[4] * r_y)
    m30 = r3[1] + r3[5] * r_y
    m31 = r3[2] + r3[6] * r_y
    m32 = r3[3] + r3[7] * r_y
    b3 = -(r3[0] + r3[4] * r_y)
    n00 = m00 * m00 + m10 * m10 + m20 * m20 + m30 * m30
    n01 = m00 * m01 + m10 * m11 + m20 * m21 + m30 * m31
    n02 = m00 * m02 + m10 * m12 + m20 * m22 + m30 * m32
    n11 = m01 * m01 + m11 * m11 + m21 * m21 + m31 * m31
    n12 = m01 * m02 + m11 * m12 + m21 * m22 + m31 * m32
    n22 = m02 * m02 + m12 * m12 + m22 * m22 + m32 * m32
    y0 = m00 * b0 + m10 * b1 + m20 * b2 + m30 * b3
    y1 = m01 * b0 + m11 * b1 + m21 * b2 + m31 * b3
    y2 = m02 * b0 + m12 * b1 + m22 * b2 + m32 * b3
    lam_min, lam_max = _sym3_eig_range(n00, n01, n02, n11, n12, n22)
    if lam_min <= max(1e-12 * lam_max, 1e-280):
        mat = np.array(
            [[m00, m01, m02], [m10, m11, m12], [m20, m21, m22], [m30, m31, m32]]
        )
        sol, _, _, sv = np.linalg.lstsq(mat, np.array([b0, b1, b2, b3]), rcond=None)
        return (float(sol[0]), float(sol[1]), float(sol[2])), float(sv[-1])
    det = (
        n00 * (n11 * n22 - n12 * n12)
        - n01 * (n01 * n22 - n12 * n02)
        + n02 * (n01 * n12 - n11 * n02)
    )
    i00 = n11 * n22 - n12 * n12
    i01 = n02 * n12 - n01 * n22
    i02 = n01 * n12 - n02 * n11
    i11 = n00 * n22 - n02 * n02
    i12 = n02 * n01 - n00 * n12
    i22 = n00 * n11 - n01 * n01
    tx = (i00 * y0 + i01 * y1 + i02 * y2) / det
    ty = (i01 * y0 + i11 * y1 + i12 * y2) / det
    tz = (i02 * y0 + i12 * y1 + i22 * y2) / det
    return (tx, ty, tz), math.sqrt(max(lam_min, 0.0))


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def _compose_scalar(prior_flat_0, prior_flat_1, r_y, t_tilde):
    """Scalar equivalent of compose_final_pose for prior matrices already flattened."""
    c, s = math.cos(r_y), math.sin(r_y)
    a00, a01, a02, a10, a11, a12, a20, a21, a22 = prior_flat_0
    # Z @ R_pr0
    z00, z01, z02 = c * a00 - s * a10, c * a01 - s * a11, c * a02 - s * a12
    z10, z11, z12 = s * a00 + c * a10, s * a01 + c * a11, s * a02 + c * a12
    b00, b01, b02, b10, b11, b12, b20, b21, b22 = prior_flat_1
    tx, ty, tz = t_tilde
    rot = np.array(
        [
            [
                b00 * z00 + b10 * z10 + b20 * a20,
                b00 * z01 + b10 * z11 + b20 * a21,
                b00 * z02 + b10 * z12 + b20 * a22,
            ],
            [
                b01 * z00 + b11 * z10 + b21 * a20,
                b01 * z01 + b11 * z11 + b21 * a21,
                b01 * z02 + b11 * z12 + b21 * a22,
            ],
            [
                b02 * z00 + b12 * z10 + b22 * a20,
                b02 * z01 + b12 * z11 + b22 * a21,
                b02 * z02 + b12 * z12 + b22 * a22,
            ],
        ]
    )
    t = np.array(
        [
            b00 * tx + b10 * ty + b20 * tz,
            b01 * tx + b11 * ty + b21 * tz,
            b02 * tx + b12 * ty + b22 * tz,
        ]
    )
    return _pose_unchecked(rot, t)


def warp_line(line: PlueckerLine, rotation) -> PlueckerLine:
    """Rotate a Plücker line's direction and moment by the same rotation."""
    r = np.asarray(rotation, dtype=float)
    return PlueckerLine(r @ line.direction, r @ line.moment)


def _line6(line) -> tuple:
    if isinstance(line, PlueckerLine):
        return tuple(line.direction) + tuple(line.moment)
    arr = np.asarray(line, dtype=float).reshape(6)
    return tuple(arr)


def coefficient_row(l0_warped, l1_warped) -> CoefficientRow:
    """Constraint-row coefficients from a pair of warped lines (frame 0, frame 1)."""
    return CoefficientRow(*_row_scalar(_line6(l0_warped), _line6(l1_warped)))


def build_quartic(rows) -> tuple[float, float, float, float, float]:
    """Coefficients (A, B, C, D, E) of det M(r_y) = A r^4 + ... + E for 4 rows."""
    if len(rows) != 4:
        raise InsufficientCorrespondencesError(f"need exactly 4 rows, got {len(rows)}")
    return _quartic_scalar([r.as_tuple() if isinstance(r, CoefficientRow) else tuple(r) for r in rows])


def recover_translation(rows, r_y: float) -> tuple[np.ndarray, float]:
    """Least-squares warped translation at a yaw root, with conditioning.

    Returns (t_tilde, smallest singular value of the 4x3 system).
    """
    if len(rows) != 4:
        raise InsufficientCorrespondencesError(f"need exactly 4 rows, got {len(rows)}")
    tup = [r.as_tuple() if isinstance(r, CoefficientRow) else tuple(r) for r in rows]
    t_tilde, cond = _translation_scalar(tup, float(r_y))
    return np.array(t_tilde), cond


def _four_point_solve_python(correspondences, rig, prior, imag_tol, root_mag_bound):
    """Reference implementation of the solve pipeline on plain Python floats."""
    prior_flat_0, prior_flat_1 = prior._flat
    rig_flat = rig._flat
    rows = []
    for c in correspondences:
        rig.check_index(c.camera_index_0)
        rig.check_index(c.camera_index_1)
        l0 = _pluecker_scalar(rig_flat[c.camera_index_0], *c.bearing_0.tolist())
        l1 = _pluecker_scalar(rig_flat[c.camera_index_1], *c.bearing_1.tolist())
        rows.append(_row_scalar(_rotate6(prior_flat_0, l0), _rotate6(prior_flat_1, l1)))
    qa, qb, qc, qd, qe = _quartic_scalar(rows)
    roots = roots_from_coefficients(qa, qb, qc, qd, qe)
    reals = real_roots_filtered(roots, imag_tol, root_mag_bound)
    if not reals:
        return SolverOutput(())
    scale = max(1.0, abs(qa), abs(qb), abs(qc), abs(qd), abs(qe))
    ranked = []
    for r in reals:
        t_tilde, cond = _translation_scalar(rows, r)
        pose = _compose_scalar(prior_flat_0, prior_flat_1, r, t_tilde)
        residual = abs((((qa * r + qb) * r + qc) * r + qd) * r + qe) / scale
        ranked.append((residual, -cond, SolverCandidate(pose, r, cond, cond < DEGENERATE_CONDITIONING)))
    ranked.sort(key=lambda item: (item[0], item[1]))
    return SolverOutput(tuple(item[2] for item in ranked))


def four_point_solve(
    correspondences,
    rig: RigCalibration,
    prior: AttitudePrior,
    *,
    imag_tol: float = DEFAULT_IMAG_TOL,
    root_mag_bound: float = DEFAULT_MAG_BOUND,
) -> SolverOutput:
    """Candidate relative poses from exactly four correspondences.

    An empty candidate list (no admissible yaw root) is a valid outcome, not
    an error.  ``root_mag_bound`` widens the yaw trust region for sweeps past
    the default ~15 degrees.

    Runs on a JIT-compiled kernel when numba is available (same pipeline,
    property-tested for agreement); set RIGPOSE_NO_NUMBA=1 to force the
    pure-Python path.
    """
    if len(correspondences) != 4:
        raise InsufficientCorrespondencesError(
            f"minimal solver needs exactly 4 correspondences, got {len(correspondences)}"
        )
    if _KERNEL is not None:
        cam0 = np.empty((4, 12))
        cam1 = np.empty((4, 12))
        b0 = np.empty((4, 3))
        b1 = np.empty((4, 3))
        karr = rig._karray
        for i, c in enumerate(correspondences):
            cam0[i] = karr[rig.check_index(c.camera_index_0)]
            cam1[i] = karr[rig.check_index(c.camera_index_1)]
            b0[i] = c.bearing_0
            b1[i] = c.bearing_1
        out = np.empty((4, 15))
        n = _KERNEL(
            cam0, cam1, b0, b1, prior._karray_0, prior._karray_1, imag_tol, root_mag_bound, out
        )
        if n >= 0:
            ranked = []
            for i in range(n):
                cond = float(out[i, 1])
                pose = _pose_unchecked(out[i, 3:12].reshape(3, 3).copy(), out[i, 12:15].copy())
                cand = SolverCandidate(pose, float(out[i, 0]), cond, cond < DEGENERATE_CONDITIONING)
                ranked.append((float(out[i, 2]), -cond, cand))
            ranked.sort(key=lambda item: (item[0], item[1]))
            return SolverOutput(tuple(item[2] for item in ranked))
        # kernel signalled a near rank-deficient translation system
    return _four_point_solve_python(correspondences, rig, prior, imag_tol, root_mag_bound)
