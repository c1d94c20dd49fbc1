"""Nef canonical heights on Wehler surfaces.

The height vector ``(h_x, h_y, h_z)`` of ``f(P)`` is roughly ``M`` times
that of ``P``, with ``M`` the Picard matrix in word order. Pairing with the
dominant eigenvector ``D`` of ``M^T`` gives a height that scales by
``delta`` up to bounded error, and ``delta^-n h_D(f^n P)`` converges.
No explicit constant is available here, so the error is an empirical
geometric extrapolation of successive differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from heightlab.canonical.estimate import EMPIRICAL, CanonicalEstimate
from heightlab.canonical.series import BUDGET, CONVERGED, DEGENERATE, DIGITS_BUDGET
from heightlab.dynsys.picard import system_spectral
from heightlab.dynsys.wehler import INTERSECTION_FORM, WehlerPoint, WehlerSystem
from heightlab.errors import DegenerateFiber, InputError
from heightlab.numlin.balls import BallReal, default_precision
from heightlab.numlin.spectral import perron_eigenvector

SAFETY = 4
MAX_RATIO = 0.9


def nef_divisor(S: WehlerSystem, precision_bits: int | None = None) -> list[BallReal]:
    """Expanding eigenvector of the pullback, normalized to coordinate sum 1."""
    M = S.picard.matrix.transpose()
    D, _ = perron_eigenvector(M, [(1, 1, 1)], precision_bits, invariant_form=INTERSECTION_FORM)
    return D


@dataclass(frozen=True)
class NefTrace:
    """The sequence ``e_n = delta^-n h_D(f^n P)`` behind an estimate."""

    values: tuple[BallReal, ...]
    truncation_reason: str
    ratio: float


def nef_sequence(S: WehlerSystem, P: WehlerPoint, n_max: int, precision_bits: int | None = None,
                 digits_budget: int = DIGITS_BUDGET) -> tuple[list[BallReal], str]:
    bits = precision_bits or default_precision()
    delta = system_spectral(S, bits).delta
    D = nef_divisor(S, bits)
    vals = []
    Q = P
    reason = CONVERGED
    for n in range(n_max + 1):
        if n:
            try:
                nxt = S.apply_within(Q, digits_budget)
            except DegenerateFiber:
                reason = DEGENERATE
                break
            if nxt is None or S.digits(nxt) > digits_budget:
                reason = BUDGET
                break
            Q = nxt
        hv = S.height_vector(Q, bits)
        hD = sum((d * h for d, h in zip(D, hv)), BallReal.exact(0, bits))
        vals.append(hD / delta ** n)
    return vals, reason


def nef_canonical_wehler(S: WehlerSystem, P: WehlerPoint, n_max: int = 6, precision_bits: int | None = None,
                         digits_budget: int = DIGITS_BUDGET) -> CanonicalEstimate:
    """Truncated estimate of the nef canonical height with an empirical error.

    With ``r`` the observed ratio of successive differences (clamped to
    ``[delta^-1/2, 0.9]``), the error is ``4 |e_N - e_(N-1)| r / (1 - r)``.
    """
    if n_max < 1:
        raise InputError("n_max must be at least 1")
    bits = precision_bits or default_precision()
    delta = system_spectral(S, bits).delta
    if not delta.certainly_gt(1):
        raise InputError("the Picard action does not expand")
    vals, reason = nef_sequence(S, P, n_max, bits, digits_budget)
    floor = float(delta.midpoint) ** -0.5
    if len(vals) < 2:
        est = vals[0]
        err = BallReal.exact(abs(Fraction(est.midpoint)) + 1, bits)
        notes = (f"orbit stopped before one step ({reason})",)
        ball = est.inflate(err.upper)
        return CanonicalEstimate(ball, ball, EMPIRICAL, err, None, None, notes)
    mids = [float(v.midpoint) for v in vals]
    diffs = [abs(b - a) for a, b in zip(mids, mids[1:])]
    ratios = [b / a for a, b in zip(diffs, diffs[1:]) if a > 0]
    r = max(ratios[-2:]) if ratios else floor
    r = min(max(r, floor), MAX_RATIO)
    err_f = SAFETY * diffs[-1] * r / (1 - r)
    err = BallReal.exact(Fraction(err_f), bits)
    ball = vals[-1].inflate(err.upper)
    notes = (f"n = {len(vals) - 1}", f"ratio {r:.4g}", f"stop: {reason}", "error is empirical, not certified")
    return CanonicalEstimate(ball, ball, EMPIRICAL, err, None, None, notes)
