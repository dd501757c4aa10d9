"""Closed-form roots of monic quartics (and lower degrees for degenerate leading terms).

The quartic path evaluates the radical formulas T1..T5 / R1..R6 in complex
arithmetic throughout.  Branch handling, fixed here because the radicals admit
choices:

* the square root R1 takes whichever sign maximizes |T3 + R1| (avoids
  cancellation when T3 + R1 would underflow);
* the cube root R2 is the principal complex cube root;
* if the resulting root set leaves a polynomial residual above tolerance, the
  other R1 sign and cube-root branches are tried and the best set kept.

A degenerate guard sets R6 = 1 when T4 = 0, T5 = 0 and |R3| < 1e-16, and an
exact quadruple root (T2 = T3 = T4 = T5 = 0) short-circuits to (-a3/4)^4.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import NonFiniteInputError

DEFAULT_IMAG_TOL = 1e-6
DEFAULT_MAG_BOUND = 0.2618  # radians, ~15 degrees
_LEADING_TOL = 1e-14
_POLISH_TOL = 1e-13
_RETRY_TOL = 1e-10
_CUBE_ROOTS_OF_UNITY = (
    complex(1.0, 0.0),
    complex(-0.5, math.sqrt(3.0) / 2.0),
    complex(-0.5, -math.sqrt(3.0) / 2.0),
)


@dataclass(frozen=True)
class Quartic:
    """Monic quartic x^4 + a3 x^3 + a2 x^2 + a1 x + a0."""

    a3: float
    a2: float
    a1: float
    a0: float

    def __post_init__(self):
        for name in ("a3", "a2", "a1", "a0"):
            if not math.isfinite(getattr(self, name)):
                raise NonFiniteInputError(f"quartic coefficient {name} is not finite")

    def __call__(self, x: complex) -> complex:
        return (((x + self.a3) * x + self.a2) * x + self.a1) * x + self.a0


def _eval_quartic(a3: float, a2: float, a1: float, a0: float, x: complex) -> complex:
    return (((x + a3) * x + a2) * x + a1) * x + a0


def _rel_residual(a3, a2, a1, a0, roots) -> float:
    scale = max(1.0, abs(a3), abs(a2), abs(a1), abs(a0))
    worst = 0.0
    for r in roots:
        mag = abs(r)
        if not math.isfinite(mag):
            return math.inf
        denom = scale if mag <= 1.0 else scale * mag**4
        err = abs((((r + a3) * r + a2) * r + a1) * r + a0) / denom
        if err > worst:
            worst = err
    return worst


def _radical_roots(t1, t2, t3, t4, t5, flip_r1: bool, cube_branch: int):
    r1 = cmath.sqrt(t3 * t3 - t2 * t2 * t2)
    if abs(t3 - r1) > abs(t3 + r1):
        r1 = -r1
    if flip_r1:
        r1 = -r1
    r2 = (t3 + r1) ** (1.0 / 3.0) * _CUBE_ROOTS_OF_UNITY[cube_branch]
    if r2 == 0:
        r3 = complex(0.0)  # only reachable with T2 = 0, where T2/R2 -> 0
    else:
        r3 = (t2 / r2 + r2) / 12.0
    r4 = cmath.sqrt(t5 + r3)
    r5 = 2.0 * t5 - r3
    if t4 == 0.0 and t5 == 0.0 and abs(r3) < 1e-16:
        r6 = complex(1.0)
    elif r4 == 0:
        r6 = complex(0.0) if t4 == 0.0 else complex(math.inf, 0.0)
    else:
        r6 = t4 / r4
    sq_minus = cmath.sqrt(r5 - r6)
    sq_plus = cmath.sqrt(r5 + r6)
    return (t1 - r4 - sq_minus, t1 - r4 + sq_minus, t1 + r4 - sq_plus, t1 + r4 + sq_plus)


def _polish(a3, a2, a1, a0, root: complex) -> complex:
    # One or two guarded Newton steps; keep a step only if |p| strictly drops.
    x = root
    fx = _eval_quartic(a3, a2, a1, a0, x)
    for _ in range(2):
        d = ((4.0 * x + 3.0 * a3) * x + 2.0 * a2) * x + a1
        if d == 0:
            break
        x_new = x - fx / d
        f_new = _eval_quartic(a3, a2, a1, a0, x_new)
        if abs(f_new) < abs(fx):
            x, fx = x_new, f_new
        else:
            break
    return x


def solve_quartic_closed_form(q: Quartic) -> tuple[complex, complex, complex, complex]:
    """All four complex roots of a monic quartic via the radical formulas."""
    a3, a2, a1, a0 = q.a3, q.a2, q.a1, q.a0
    t1 = -a3 / 4.0
    t2 = a2 * a2 - 3.0 * a3 * a1 + 12.0 * a0
    t3 = (2.0 * a2**3 - 9.0 * a3 * a2 * a1 + 27.0 * a1 * a1 + 27.0 * a3 * a3 * a0 - 72.0 * a2 * a0) / 2.0
    t4 = (-(a3**3) + 4.0 * a3 * a2 - 8.0 * a1) / 32.0
    t5 = (3.0 * a3 * a3 - 8.0 * a2) / 48.0

    if t2 == 0.0 and t3 == 0.0 and t4 == 0.0 and t5 == 0.0:
        r = complex(t1)
        return (r, r, r, r)

    best = _radical_roots(t1, t2, t3, t4, t5, False, 0)
    best_err = _rel_residual(a3, a2, a1, a0, best)
    if best_err > _POLISH_TOL:
        best = tuple(_polish(a3, a2, a1, a0, r) for r in best)
        best_err = _rel_residual(a3, a2, a1, a0, best)
    if best_err > _RETRY_TOL:
        for flip in (False, True):
            for branch in (0, 1, 2):
                if not flip and branch == 0:
                    continue
                cand = tuple(
                    _polish(a3, a2, a1, a0, r)
                    for r in _radical_roots(t1, t2, t3, t4, t5, flip, branch)
                )
                err = _rel_residual(a3, a2, a1, a0, cand)
                if err < best_err:
                    best, best_err = cand, err
    return best


def _solve_cubic(b: float, c: float, d: float) -> tuple[complex, complex, complex]:
    """Roots of the monic cubic x^3 + b x^2 + c x + d (Cardano, complex arithmetic)."""
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    disc = cmath.sqrt(complex(q * q / 4.0 + p**3 / 27.0))
    s = -q / 2.0 + disc
    if abs(-q / 2.0 - disc) > abs(s):
        s = -q / 2.0 - disc
    if s == 0:
        y = complex(0.0)
        return (y - shift, y - shift, y - shift)
    u = s ** (1.0 / 3.0)
    v = -p / (3.0 * u)
    w = _CUBE_ROOTS_OF_UNITY[1]
    return (
        u + v - shift,
        u * w + v * w.conjugate() - shift,
        u * w.conjugate() + v * w - shift,
    )


def _solve_quadratic(b: float, c: float) -> tuple[complex, complex]:
    s = cmath.sqrt(complex(b * b - 4.0 * c))
    big = (-b - s) / 2.0 if abs(-b - s) > abs(-b + s) else (-b + s) / 2.0
    if big == 0:
        return (complex(0.0), complex(0.0))
    return (big, c / big)


def roots_from_coefficients(
    c4: float, c3: float, c2: float, c1: float, c0: float
) -> list[complex]:
    """Roots of c4 x^4 + ... + c0, dropping leading coefficients that vanish.

    A leading coefficient counts as vanishing when it is below 1e-14 times the
    max magnitude of the remaining coefficients; the reduced-degree polynomial
    is then solved by the analogous closed form.  An identically-zero
    polynomial yields no roots.
    """
    coeffs = [c4, c3, c2, c1, c0]
    while len(coeffs) > 1:
        lead = coeffs[0]
        rest = max(abs(x) for x in coeffs[1:])
        if abs(lead) > _LEADING_TOL * rest:
            break
        coeffs = coeffs[1:]
    if len(coeffs) == 1:
        return []
    lead = coeffs[0]
    monic = [x / lead for x in coeffs[1:]]
    degree = len(monic)
    if degree == 4:
        return list(solve_quartic_closed_form(Quartic(*monic)))
    if degree == 3:
        return list(_solve_cubic(*monic))
    if degree == 2:
        return list(_solve_quadratic(*monic))
    return [complex(-monic[0])]


def real_roots_filtered(
    roots, imag_tol: float = DEFAULT_IMAG_TOL, mag_bound: float = DEFAULT_MAG_BOUND
) -> list[float]:
    """Real parts of roots with |Im| < imag_tol and |Re| < mag_bound.

    An empty result is a valid outcome; order follows the input.
    """
    out = []
    for r in roots:
        z = complex(r)
        if abs(z.imag) < imag_tol and abs(z.real) < mag_bound:
            out.append(z.real)
    return out
