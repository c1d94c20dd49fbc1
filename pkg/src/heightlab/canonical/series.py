"""Normalized height sequences ``a_n = h(f^n x) / (delta^n n^l)``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from heightlab.dynsys.ops import apply, height, size_digits
from heightlab.dynsys.wehler import WehlerSystem
from heightlab.dynsys.picard import SystemSpectral, system_spectral
from heightlab.errors import DegenerateFiber, InputError
from heightlab.numlin.balls import BallReal, default_precision

DIGITS_BUDGET = 10**6

BUDGET = "budget"
DEGENERATE = "degenerate_fiber"
CONVERGED = "converged"


@dataclass(frozen=True)
class SeriesRow:
    n: int
    h: BallReal
    a: BallReal | None
    h_exact: Fraction | None = None
    a_exact: Fraction | None = None
    point: Any = None


@dataclass(frozen=True)
class HeightSeries:
    """Rows start at ``n = 0``; the ``n = 0`` row has no ``a`` value."""

    delta: BallReal
    l: int
    rows: tuple[SeriesRow, ...]
    truncation_reason: str
    spectral: SystemSpectral | None = None

    @property
    def last(self) -> SeriesRow:
        return self.rows[-1]

    def a_values(self) -> list[BallReal]:
        return [r.a for r in self.rows if r.a is not None]


def height_series(system, point, n_max: int, precision_bits: int | None = None,
                  digits_budget: int = DIGITS_BUDGET, spectral: SystemSpectral | None = None) -> HeightSeries:
    """Iterate exactly and record ``h_n`` and ``a_n`` for ``n = 0..n_max``.

    The orbit stops early when a coordinate exceeds ``digits_budget``
    decimal digits or when a Wehler fiber degenerates.
    """
    if n_max < 1:
        raise InputError("n_max must be at least 1")
    bits = precision_bits or default_precision()
    ss = spectral or system_spectral(system, bits)
    delta, l = ss.delta, ss.l
    rows = []
    x = point
    reason = CONVERGED
    for n in range(n_max + 1):
        if n:
            try:
                if isinstance(system, WehlerSystem):
                    x = system.apply_within(x, digits_budget)
                    if x is None:
                        reason = BUDGET
                        break
                else:
                    x = apply(system, x)
            except DegenerateFiber:
                reason = DEGENERATE
                break
        if size_digits(system, x) > digits_budget:
            reason = BUDGET
            break
        ph = height(system, x, bits)
        if n == 0:
            rows.append(SeriesRow(0, ph.ball, None, ph.exact, None, x))
            continue
        a = ph.ball / (delta ** n * BallReal.exact(Fraction(n) ** l, bits)) if l else ph.ball / delta ** n
        a_exact = None
        if ph.exact is not None and ss.delta_exact is not None:
            a_exact = ph.exact / (ss.delta_exact ** n * Fraction(n) ** l)
            a = BallReal.exact(a_exact, bits)
        rows.append(SeriesRow(n, ph.ball, a, ph.exact, a_exact, x))
    return HeightSeries(delta, l, tuple(rows), reason, ss)


def shift_identity_holds(series_x: HeightSeries, series_fx: HeightSeries) -> bool:
    """Check ``a_n(f x) = delta ((n+1)/n)^l a_(n+1)(x)`` on all common rows."""
    delta, l = series_x.delta, series_x.l
    ax = {r.n: r for r in series_x.rows}
    for r in series_fx.rows:
        if r.n == 0 or r.n + 1 not in ax:
            continue
        nxt = ax[r.n + 1]
        if r.a_exact is not None and nxt.a_exact is not None and series_x.spectral.delta_exact is not None:
            d = series_x.spectral.delta_exact
            if r.a_exact != d * Fraction(r.n + 1, r.n) ** l * nxt.a_exact:
                return False
            continue
        rhs = delta * BallReal.exact(Fraction(r.n + 1, r.n) ** l) * nxt.a
        if not r.a.overlaps(rhs):
            return False
    return True


def arithmetic_degree_estimate(system, point, n_max: int, precision_bits: int | None = None,
                               digits_budget: int = DIGITS_BUDGET) -> tuple[BallReal, dict]:
    """Empirical ``h(f^n x)^(1/n)`` at the last computed ``n``, with a trend report.

    The centre is the slope of ``log max(1, h_n)`` against ``n`` over the
    second half of the rows; the radius is its distance to the plain
    ``n``-th root, floored at ``1e-9``. Nothing here is certified.
    """
    if n_max < 4:
        raise InputError("n_max must be at least 4")
    bits = precision_bits or default_precision()
    s = height_series(system, point, n_max, bits, digits_budget)
    pts = [(r.n, float(r.h)) for r in s.rows if r.n >= 1]
    if len(pts) < 2:
        raise InputError("orbit truncated before two usable rows")
    half = pts[len(pts) // 2 - 1:] if len(pts) >= 4 else pts
    xs = [n for n, _ in half]
    ys = [math.log(max(1.0, h)) for _, h in half]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx if sxx else 0.0
    fit = math.exp(slope)
    n_last, h_last = pts[-1]
    root = max(1.0, h_last) ** (1.0 / n_last)
    rad = max(abs(fit - root), 1e-9)
    trend = {
        "n": n_last,
        "nth_root": root,
        "fitted_ratio": fit,
        "truncation_reason": s.truncation_reason,
        "roots": [max(1.0, h) ** (1.0 / n) for n, h in pts],
    }
    return BallReal.from_mid_rad(fit, rad, bits), trend
