"""Certified canonical heights for morphisms of the projective line.

For a degree ``d`` map the distortion ``|h(f Q) - d h(Q)|`` is at most a
constant ``C`` read off from the coefficients and a Bezout identity for
the resultant. Then ``d^-K h(f^K P)`` differs from the canonical height
by at most ``C d^-K / (d - 1)``.
"""

from __future__ import annotations

import math
from fractions import Fraction

from heightlab.canonical.estimate import TELESCOPED, CanonicalEstimate
from heightlab.canonical.series import DIGITS_BUDGET
from heightlab.dynsys.p1 import P1Morphism, p1_apply
from heightlab.errors import InputError
from heightlab.heights.projective import ProjectivePoint, weil_height
from heightlab.numlin.balls import BallReal, default_precision


def distortion_constant(f: P1Morphism, precision_bits: int | None = None) -> Fraction:
    """Rational upper bound for ``C``."""
    return f.bounds.constant(precision_bits).upper_fraction()


def height_offset(f: P1Morphism, precision_bits: int | None = None) -> Fraction:
    """``C0 = C / (d - 1)``, bounding ``|h_hat - h|`` everywhere."""
    return distortion_constant(f, precision_bits) / (f.degree - 1)


def telescoping_depth(C: Fraction, d: int, tolerance: float) -> int:
    """Smallest ``K`` with ``C d^-K <= tolerance``."""
    if C <= 0:
        return 0
    K = max(0, math.ceil(math.log(float(C) / tolerance, d)))
    while C / Fraction(d) ** K > Fraction(tolerance):
        K += 1
    while K > 0 and C / Fraction(d) ** (K - 1) <= Fraction(tolerance):
        K -= 1
    return K


def call_silverman(f: P1Morphism, P: ProjectivePoint, tolerance: float = 1e-4,
                   precision_bits: int | None = None, digits_budget: int = DIGITS_BUDGET) -> CanonicalEstimate:
    """Canonical height of ``P`` with a certified error ball.

    The depth ``K`` is chosen so that ``C d^-K <= tolerance``, which also
    makes the tail ``C d^-K / (d - 1)`` at most ``tolerance``. A repeated
    orbit point proves ``P`` preperiodic and gives the value 0 exactly. If
    the coordinates outgrow ``digits_budget`` first, the estimate stops
    there and its ball is correspondingly wider.
    """
    if not tolerance > 0:
        raise InputError("tolerance must be positive")
    bits = precision_bits or default_precision()
    d = f.degree
    C = distortion_constant(f, bits)
    K = telescoping_depth(C, d, tolerance)
    seen = {P.coords}
    Q = P
    k = 0
    notes: list[str] = []
    while k < K:
        R = p1_apply(f, Q)
        if max(abs(c) for c in R.coords).bit_length() * 0.30103 > digits_budget:
            notes.append(f"digit budget reached at depth {k} of {K}")
            break
        Q = R
        k += 1
        if Q.coords in seen:
            zero = BallReal.exact(0, bits)
            return CanonicalEstimate(zero, zero, TELESCOPED, zero, Fraction(0), Fraction(0),
                                     (f"orbit repeats after {k} steps; preperiodic",))
        seen.add(Q.coords)
    scale = Fraction(1, d ** k)
    mid = weil_height(Q, bits).value * BallReal.exact(scale, bits)
    err = BallReal.exact(C * scale / (d - 1), bits)
    lo = mid.lower_fraction() - err.upper_fraction()
    hi = mid.upper_fraction() + err.upper_fraction()
    ball = BallReal.from_bounds(max(lo, Fraction(0)), hi, bits)
    notes.append(f"depth {k}, distortion bound {float(C):.6g}")
    exact = Fraction(0) if hi == 0 else None
    return CanonicalEstimate(ball, ball, TELESCOPED, err, exact, exact, tuple(notes))


def canonical_lower_bound(f: P1Morphism, P: ProjectivePoint, steps: int, precision_bits: int | None = None
                          ) -> tuple[Fraction, ProjectivePoint]:
    """``d^-k (h(f^k P) - C0)``, a certified lower bound for the canonical height."""
    bits = precision_bits or default_precision()
    C0 = height_offset(f, bits)
    Q = P
    for _ in range(steps):
        Q = p1_apply(f, Q)
    h = weil_height(Q, bits).value.lower_fraction()
    return (h - C0) / f.degree ** steps, Q
