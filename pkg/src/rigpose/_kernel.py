"""JIT-compiled hot path for the 4-point solver.

This mirrors, step for step, the pure-Python pipeline in ``solver.py`` and
``quartic.py`` (which stay the tested reference); a property test asserts the
two paths agree.  Import is optional: when numba is missing or disabled via
``RIGPOSE_NO_NUMBA=1``, ``KERNEL`` is None and callers use the Python path.

The kernel fills ``out`` with one row per admissible yaw root:
(r_y, conditioning, quartic_residual, R row-major x9, t x3) and returns the
candidate count.  A return of -1 means some root needs the SVD-backed
translation fallback (near rank-deficient system); the caller then redoes the
whole solve on the Python path.
"""

from __future__ import annotations

import cmath
import math
import os

import numpy as np

__all__ = ["KERNEL", "NUMBA_AVAILABLE"]

KERNEL = None
NUMBA_AVAILABLE = False

if not os.environ.get("RIGPOSE_NO_NUMBA"):
    try:
        from numba import njit

        NUMBA_AVAILABLE = True
    except ImportError:  # pragma: no cover - exercised only without numba
        njit = None

if NUMBA_AVAILABLE:

    @njit(cache=True, fastmath=False)
    def _rel_residual_nb(a3, a2, a1, a0, roots, nroots):
        scale = max(1.0, abs(a3), abs(a2), abs(a1), abs(a0))
        worst = 0.0
        for i in range(nroots):
            r = roots[i]
            mag = abs(r)
            if not math.isfinite(mag):
                return math.inf
            denom = scale if mag <= 1.0 else scale * mag**4
            err = abs((((r + a3) * r + a2) * r + a1) * r + a0) / denom
            if err > worst:
                worst = err
        return worst

    @njit(cache=True, fastmath=False)
    def _radical_roots_nb(t1, t2, t3, t4, t5, flip_r1, cube_branch, out):
        r1 = cmath.sqrt(complex(t3 * t3 - t2 * t2 * t2, 0.0))
        if abs(t3 - r1) > abs(t3 + r1):
            r1 = -r1
        if flip_r1:
            r1 = -r1
        base = (t3 + r1) ** (1.0 / 3.0)
        if cube_branch == 1:
            base = base * complex(-0.5, 0.8660254037844386)
        elif cube_branch == 2:
            base = base * complex(-0.5, -0.8660254037844386)
        if base == 0:
            r3 = complex(0.0, 0.0)
        else:
            r3 = (t2 / base + base) / 12.0
        r4 = cmath.sqrt(t5 + r3)
        r5 = 2.0 * t5 - r3
        if t4 == 0.0 and t5 == 0.0 and abs(r3) < 1e-16:
            r6 = complex(1.0, 0.0)
        elif r4 == 0:
            r6 = complex(0.0, 0.0) if t4 == 0.0 else complex(math.inf, 0.0)
        else:
            r6 = t4 / r4
        sq_minus = cmath.sqrt(r5 - r6)
        sq_plus = cmath.sqrt(r5 + r6)
        out[0] = t1 - r4 - sq_minus
        out[1] = t1 - r4 + sq_minus
        out[2] = t1 + r4 - sq_plus
        out[3] = t1 + r4 + sq_plus

    @njit(cache=True, fastmath=False)
    def _polish_nb(a3, a2, a1, a0, root):
        x = root
        fx = (((x + a3) * x + a2) * x + a1) * x + a0
        for _ in range(2):
            d = ((4.0 * x + 3.0 * a3) * x + 2.0 * a2) * x + a1
            if d == 0:
                break
            x_new = x - fx / d
            f_new = (((x_new + a3) * x_new + a2) * x_new + a1) * x_new + a0
            if abs(f_new) < abs(fx):
                x = x_new
                fx = f_new
            else:
                break
        return x

    @njit(cache=True, fastmath=False)
    def _solve_quartic_nb(a3, a2, a1, a0, out):
        t1 = -a3 / 4.0
        t2 = a2 * a2 - 3.0 * a3 * a1 + 12.0 * a0
        t3 = (
            2.0 * a2**3
            - 9.0 * a3 * a2 * a1
            + 27.0 * a1 * a1
            + 27.0 * a3 * a3 * a0
            - 72.0 * a2 * a0
        ) / 2.0
        t4 = (-(a3**3) + 4.0 * a3 * a2 - 8.0 * a1) / 32.0
        t5 = (3.0 * a3 * a3 - 8.0 * a2) / 48.0

        if t2 == 0.0 and t3 == 0.0 and t4 == 0.0 and t5 == 0.0:
            r = complex(t1, 0.0)
            for i in range(4):
                out[i] = r
            return

        _radical_roots_nb(t1, t2, t3, t4, t5, False, 0, out)
        best_err = _rel_residual_nb(a3, a2, a1, a0, out, 4)
        if best_err > 1e-13:
            for i in range(4):
                out[i] = _polish_nb(a3, a2, a1, a0, out[i])
            best_err = _rel_residual_nb(a3, a2, a1, a0, out, 4)
        if best_err > 1e-10:
            best = out.copy()
            cand = np.empty(4, dtype=np.complex128)
            for flip_i in range(2):
                for branch in range(3):
                    if flip_i == 0 and branch == 0:
                        continue
                    _radical_roots_nb(t1, t2, t3, t4, t5, flip_i == 1, branch, cand)
                    for i in range(4):
                        cand[i] = _polish_nb(a3, a2, a1, a0, cand[i])
                    err = _rel_residual_nb(a3, a2, a1, a0, cand, 4)
                    if err < best_err:
                        best_err = err
                        for i in range(4):
                            best[i] = cand[i]
            for i in range(4):
                out[i] = best[i]

    @njit(cache=True, fastmath=False)
    def _solve_cubic_nb(b, c, d, out):
        shift = b / 3.0
        p = c - b * b / 3.0
        q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
        disc = cmath.sqrt(complex(q * q / 4.0 + p**3 / 27.0, 0.0))
        s = -q / 2.0 + disc
        if abs(-q / 2.0 - disc) > abs(s):
            s = -q / 2.0 - disc
        if s == 0:
            out[0] = complex(-shift, 0.0)
            out[1] = out[0]
            out[2] = out[0]
            return
        u = s ** (1.0 / 3.0)
        v = -p / (3.0 * u)
        w = complex(-0.5, 0.8660254037844386)
        wc = complex(-0.5, -0.8660254037844386)
        out[0] = u + v - shift
        out[1] = u * w + v * wc - shift
        out[2] = u * wc + v * w - shift

    @njit(cache=True, fastmath=False)
    def _roots_nb(c4, c3, c2, c1, c0, out):
        """Degree-aware roots into out; returns the root count (0..4)."""
        coeffs = np.empty(5)
        coeffs[0] = c4
        coeffs[1] = c3
        coeffs[2] = c2
        coeffs[3] = c1
        coeffs[4] = c0
        start = 0
        while start < 4:
            lead = coeffs[start]
            rest = 0.0
            for i in range(start + 1, 5):
                a = abs(coeffs[i])
                if a > rest:
                    rest = a
            if abs(lead) > 1e-14 * rest:
                break
            start += 1
        if start == 4:
            return 0
        lead = coeffs[start]
        degree = 4 - start
        if degree == 4:
            _solve_quartic_nb(c3 / lead, c2 / lead, c1 / lead, c0 / lead, out)
            return 4
        if degree == 3:
            _solve_cubic_nb(c2 / lead, c1 / lead, c0 / lead, out)
            return 3
        if degree == 2:
            b = c1 / lead
            c = c0 / lead
            s = cmath.sqrt(complex(b * b - 4.0 * c, 0.0))
            big = (-b - s) / 2.0 if abs(-b - s) > abs(-b + s) else (-b + s) / 2.0
            if big == 0:
                out[0] = complex(0.0, 0.0)
                out[1] = complex(0.0, 0.0)
            else:
                out[0] = big
                out[1] = c / big
            return 2
        out[0] = complex(-c0 / lead, 0.0)
        return 1

    @njit(cache=True, fastmath=False)
    def _solve_kernel(cam0, cam1, b0, b1, p0, p1, imag_tol, mag_bound, out):
        rows = np.empty((4, 8))
        for i in range(4):
            # camera-frame bearing -> rig-frame Pluecker line, frame 0
            f = cam0[i]
            bx = b0[i, 0]
            by = b0[i, 1]
            bz = b0[i, 2]
            ux = f[0] * bx + f[1] * by + f[2] * bz
            uy = f[3] * bx + f[4] * by + f[5] * bz
            uz = f[6] * bx + f[7] * by + f[8] * bz
            mx = f[10] * uz - f[11] * uy
            my = f[11] * ux - f[9] * uz
            mz = f[9] * uy - f[10] * ux
            # warp by frame-0 prior
            fx = p0[0] * ux + p0[1] * uy + p0[2] * uz
            fy = p0[3] * ux + p0[4] * uy + p0[5] * uz
            fz = p0[6] * ux + p0[7] * uy + p0[8] * uz
            gx = p0[0] * mx + p0[1] * my + p0[2] * mz
            gy = p0[3] * mx + p0[4] * my + p0[5] * mz
            gz = p0[6] * mx + p0[7] * my + p0[8] * mz
            # frame 1
            f = cam1[i]
            bx = b1[i, 0]
            by = b1[i, 1]
            bz = b1[i, 2]
            ux = f[0] * bx + f[1] * by + f[2] * bz
            uy = f[3] * bx + f[4] * by + f[5] * bz
            uz = f[6] * bx + f[7] * by + f[8] * bz
            mx = f[10] * uz - f[11] * uy
            my = f[11] * ux - f[9] * uz
            mz = f[9] * uy - f[10] * ux
            px = p1[0] * ux + p1[1] * uy + p1[2] * uz
            py = p1[3] * ux + p1[4] * uy + p1[5] * uz
            pz = p1[6] * ux + p1[7] * uy + p1[8] * uz
            qx = p1[0] * mx + p1[1] * my + p1[2] * mz
            qy = p1[3] * mx + p1[4] * my + p1[5] * mz
            qz = p1[6] * mx + p1[7] * my + p1[8] * mz
            rows[i, 0] = px * gx + py * gy + pz * gz + qx * fx + qy * fy + qz * fz
            rows[i, 1] = fy * pz - fz * py
            rows[i, 2] = fz * px - fx * pz
            rows[i, 3] = fx * py - fy * px
            rows[i, 4] = py * gx - px * gy + qy * fx - qx * fy
            rows[i, 5] = fx * pz
            rows[i, 6] = fy * pz
            rows[i, 7] = -(fx * px + fy * py)

        out4 = 0.0
        out3 = 0.0
        out2 = 0.0
        out1 = 0.0
        out0 = 0.0
        # Laplace expansion over complementary 2x2 minors, constant columns
        # (a2,a3,a4,a1) and r-columns (a6,a7,a8,a5); pairs and signs fixed.
        for term in range(6):
            if term == 0:
                i, j, k, l, sign = 0, 1, 2, 3, 1.0
            elif term == 1:
                i, j, k, l, sign = 0, 2, 1, 3, -1.0
            elif term == 2:
                i, j, k, l, sign = 0, 3, 1, 2, 1.0
            elif term == 3:
                i, j, k, l, sign = 1, 2, 0, 3, 1.0
            elif term == 4:
                i, j, k, l, sign = 1, 3, 0, 2, -1.0
            else:
                i, j, k, l, sign = 2, 3, 0, 1, 1.0
            p_0 = rows[i, 1] * rows[j, 2] - rows[i, 2] * rows[j, 1]
            p_1 = (
                rows[i, 1] * rows[j, 6]
                + rows[i, 5] * rows[j, 2]
                - rows[i, 2] * rows[j, 5]
                - rows[i, 6] * rows[j, 1]
            )
            p_2 = rows[i, 5] * rows[j, 6] - rows[i, 6] * rows[j, 5]
            q_0 = rows[k, 3] * rows[l, 0] - rows[k, 0] * rows[l, 3]
            q_1 = (
                rows[k, 3] * rows[l, 4]
                + rows[k, 7] * rows[l, 0]
                - rows[k, 0] * rows[l, 7]
                - rows[k, 4] * rows[l, 3]
            )
            q_2 = rows[k, 7] * rows[l, 4] - rows[k, 4] * rows[l, 7]
            out0 += sign * p_0 * q_0
            out1 += sign * (p_0 * q_1 + p_1 * q_0)
            out2 += sign * (p_0 * q_2 + p_1 * q_1 + p_2 * q_0)
            out3 += sign * (p_1 * q_2 + p_2 * q_1)
            out4 += sign * p_2 * q_2

        croots = np.empty(4, dtype=np.complex128)
        nroots = _roots_nb(out4, out3, out2, out1, out0, croots)
        scale = max(1.0, abs(out4), abs(out3), abs(out2), abs(out1), abs(out0))
        ncand = 0
        for ri in range(nroots):
            z = croots[ri]
            if abs(z.imag) >= imag_tol or abs(z.real) >= mag_bound:
                continue
            r_y = z.real
            m00 = rows[0, 1] + rows[0, 5] * r_y
            m01 = rows[0, 2] + rows[0, 6] * r_y
            m02 = rows[0, 3] + rows[0, 7] * r_y
            bb0 = -(rows[0, 0] + rows[0, 4] * r_y)
            m10 = rows[1, 1] + rows[1, 5] * r_y
            m11 = rows[1, 2] + rows[1, 6] * r_y
            m12 = rows[1, 3] + rows[1, 7] * r_y
            bb1 = -(rows[1, 0] + rows[1, 4] * r_y)
            m20 = rows[2, 1] + rows[2, 5] * r_y
            m21 = rows[2, 2] + rows[2, 6] * r_y
            m22 = rows[2, 3] + rows[2, 7] * r_y
            bb2 = -(rows[2, 0] + rows[2, 4] * r_y)
            m30 = rows[3, 1] + rows[3, 5] * r_y
            m31 = rows[3, 2] + rows[3, 6] * r_y
            m32 = rows[3, 3] + rows[3, 7] * r_y
            bb3 = -(rows[3, 0] + rows[3, 4] * r_y)
            n00 = m00 * m00 + m10 * m10 + m20 * m20 + m30 * m30
            n01 = m00 * m01 + m10 * m11 + m20 * m21 + m30 * m31
            n02 = m00 * m02 + m10 * m12 + m20 * m22 + m30 * m32
            n11 = m01 * m01 + m11 * m11 + m21 * m21 + m31 * m31
            n12 = m01 * m02 + m11 * m12 + m21 * m22 + m31 * m32
            n22 = m02 * m02 + m12 * m12 + m22 * m22 + m32 * m32
            y0 = m00 * bb0 + m10 * bb1 + m20 * bb2 + m30 * bb3
            y1 = m01 * bb0 + m11 * bb1 + m21 * bb2 + m31 * bb3
            y2 = m02 * bb0 + m12 * bb1 + m22 * bb2 + m32 * bb3
            # closed-form eigenvalue range of the symmetric normal matrix
            pp1 = n01 * n01 + n02 * n02 + n12 * n12
            qq = (n00 + n11 + n22) / 3.0
            pp2 = (n00 - qq) ** 2 + (n11 - qq) ** 2 + (n22 - qq) ** 2 + 2.0 * pp1
            if pp2 <= 0.0:
                lam_min = qq
                lam_max = qq
            else:
                pw = math.sqrt(pp2 / 6.0)
                w00 = (n00 - qq) / pw
                w11 = (n11 - qq) / pw
                w22 = (n22 - qq) / pw
                w01 = n01 / pw
                w02 = n02 / pw
                w12 = n12 / pw
                half_det = (
                    w00 * w11 * w22
                    + 2.0 * w01 * w02 * w12
                    - w00 * w12 * w12
                    - w11 * w02 * w02
                    - w22 * w01 * w01
                ) / 2.0
                half_det = max(-1.0, min(1.0, half_det))
                phi = math.acos(half_det) / 3.0
                lam_max = qq + 2.0 * pw * math.cos(phi)
                lam_min = qq + 2.0 * pw * math.cos(phi + 2.0943951023931953)
            if lam_min <= max(1e-12 * lam_max, 1e-280):
                # near rank-deficient: caller redoes the solve on the SVD path
                return -1
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
            cond = math.sqrt(max(lam_min, 0.0))
            resid = (
                abs((((out4 * r_y + out3) * r_y + out2) * r_y + out1) * r_y + out0) / scale
            )
            # compose pose: R = P1^T Z P0, t = P1^T t_tilde
            cz = math.cos(r_y)
            sz = math.sin(r_y)
            z00 = cz * p0[0] - sz * p0[3]
            z01 = cz * p0[1] - sz * p0[4]
            z02 = cz * p0[2] - sz * p0[5]
            z10 = sz * p0[0] + cz * p0[3]
            z11 = sz * p0[1] + cz * p0[4]
            z12 = sz * p0[2] + cz * p0[5]
            out[ncand, 0] = r_y
            out[ncand, 1] = cond
            out[ncand, 2] = resid
            out[ncand, 3] = p1[0] * z00 + p1[3] * z10 + p1[6] * p0[6]
            out[ncand, 4] = p1[0] * z01 + p1[3] * z11 + p1[6] * p0[7]
            out[ncand, 5] = p1[0] * z02 + p1[3] * z12 + p1[6] * p0[8]
            out[ncand, 6] = p1[1] * z00 + p1[4] * z10 + p1[7] * p0[6]
            out[ncand, 7] = p1[1] * z01 + p1[4] * z11 + p1[7] * p0[7]
            out[ncand, 8] = p1[1] * z02 + p1[4] * z12 + p1[7] * p0[8]
            out[ncand, 9] = p1[2] * z00 + p1[5] * z10 + p1[8] * p0[6]
            out[ncand, 10] = p1[2] * z01 + p1[5] * z11 + p1[8] * p0[7]
            out[ncand, 11] = p1[2] * z02 + p1[5] * z12 + p1[8] * p0[8]
            out[ncand, 12] = p1[0] * tx + p1[3] * ty + p1[6] * tz
            out[ncand, 13] = p1[1] * tx + p1[4] * ty + p1[7] * tz
            out[ncand, 14] = p1[2] * tx + p1[5] * ty + p1[8] * tz
            ncand += 1
        return ncand

    KERNEL = _solve_kernel
