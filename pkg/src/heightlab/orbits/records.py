"""Exact orbit bookkeeping: cycle detection and preperiodicity scans."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from heightlab.canonical.polarized import height_offset
from heightlab.canonical.series import DIGITS_BUDGET
from heightlab.dynsys.ops import apply, encode, size_digits
from heightlab.dynsys.p1 import P1Morphism, p1_apply
from heightlab.dynsys.wehler import WehlerSystem
from heightlab.errors import DegenerateFiber, InputError
from heightlab.heights.projective import ProjectivePoint, enumerate_p1_points, weil_height
from heightlab.numlin.balls import default_precision


@dataclass(frozen=True)
class OrbitRecord:
    """Encodings of ``x, f(x), ...``; with a period, ``points[t + k] == points[t + k + period]``."""

    points: tuple
    tail_length: int | None
    period: int | None
    truncated: bool
    reason: str = ""

    @property
    def preperiodic(self) -> bool:
        return self.period is not None


class _Orbit:
    """Lazily extended exact orbit with encodings."""

    def __init__(self, system, x, digits_budget: int):
        self.system = system
        self.points = [x]
        self.keys = [encode(system, x)]
        self.budget = digits_budget
        self.stopped: str | None = None

    def get(self, i: int):
        while len(self.keys) <= i and self.stopped is None:
            try:
                if isinstance(self.system, WehlerSystem):
                    nxt = self.system.apply_within(self.points[-1], self.budget)
                else:
                    nxt = apply(self.system, self.points[-1])
            except DegenerateFiber:
                self.stopped = "degenerate_fiber"
                break
            if nxt is None or size_digits(self.system, nxt) > self.budget:
                self.stopped = "budget"
                break
            self.points.append(nxt)
            self.keys.append(encode(self.system, nxt))
        return self.keys[i] if i < len(self.keys) else None


def detect_preperiodic(system, x, max_steps: int = 1000, digits_budget: int = DIGITS_BUDGET) -> OrbitRecord:
    """Brent's algorithm on exact encodings, followed by a replay check."""
    if max_steps < 1:
        raise InputError("max_steps must be at least 1")
    orb = _Orbit(system, x, digits_budget)
    power = lam = 1
    tortoise = 0
    hare = 1
    period = None
    while hare <= max_steps:
        kh = orb.get(hare)
        if kh is None:
            break
        if orb.get(tortoise) == kh:
            period = lam
            break
        if power == lam:
            tortoise = hare
            power *= 2
            lam = 0
        hare += 1
        lam += 1
    if period is None:
        n = min(len(orb.keys), max_steps + 1)
        return OrbitRecord(tuple(orb.keys[:n]), None, None, True, orb.stopped or "max_steps")
    # smallest tail: first index mu with x_mu == x_(mu + period)
    mu = 0
    while orb.get(mu) != orb.get(mu + period):
        mu += 1
    keys = tuple(orb.get(i) for i in range(mu + period + 1))
    for k in range(period):
        if keys[mu + k] != orb.get(mu + k + period):
            raise AssertionError("cycle replay failed")
    return OrbitRecord(keys, mu, period, False, "cycle")


def naive_preperiodic(system, x, max_steps: int) -> tuple[int, int] | None:
    """Full-history search; returns ``(tail, period)`` or None."""
    seen: dict[Any, int] = {}
    y = x
    for i in range(max_steps + 1):
        k = encode(system, y)
        if k in seen:
            return seen[k], i - seen[k]
        seen[k] = i
        if i < max_steps:
            y = apply(system, y)
    return None


@dataclass(frozen=True)
class ScanResult:
    confirmed: tuple[ProjectivePoint, ...]
    anomalies: tuple[ProjectivePoint, ...] = field(default=())
    examined: int = 0
    threshold: Fraction = Fraction(0)


def northcott_scan(f: P1Morphism, bound: int, tolerance: float = 1e-4, max_steps: int = 64,
                   precision_bits: int | None = None) -> ScanResult:
    """Preperiodic points of ``f`` among those of height at most ``log bound``.

    A point is kept as a candidate while the certified lower bound
    ``d^-k (h(f^k P) - C0)`` for its canonical height stays below the
    threshold. Candidates are confirmed by a repeated orbit point; those
    never confirmed are reported as anomalies.
    """
    bits = precision_bits or default_precision()
    if bound < 1:
        raise InputError("height bound must be at least 1")
    d = f.degree
    C0 = height_offset(f, bits)
    theta = Fraction(tolerance)
    confirmed, anomalies = [], []
    points = enumerate_p1_points(bound)
    for P in points:
        seen = {P.coords}
        Q = P
        status = None
        for k in range(1, max_steps + 1):
            Q = p1_apply(f, Q)
            if Q.coords in seen:
                status = "periodic"
                break
            seen.add(Q.coords)
            h = weil_height(Q, bits).value.lower_fraction()
            if (h - C0) / Fraction(d) ** k > theta:
                status = "wandering"
                break
        if status == "periodic":
            confirmed.append(P)
        elif status is None:
            anomalies.append(P)
    return ScanResult(tuple(confirmed), tuple(anomalies), len(points), theta)


def preperiodic_oracle(f: P1Morphism, P: ProjectivePoint, precision_bits: int | None = None,
                       max_steps: int = 10_000) -> bool:
    """Independent check: iterate until a repeat or until the height passes ``C0``.

    A preperiodic point has canonical height 0, so every orbit point has
    height at most ``C0``; exceeding it proves the orbit infinite.
    """
    bits = precision_bits or default_precision()
    C0 = height_offset(f, bits)
    seen = set()
    Q = P
    for _ in range(max_steps):
        if Q.coords in seen:
            return True
        seen.add(Q.coords)
        if weil_height(Q, bits).value.lower_fraction() > C0:
            return False
        Q = p1_apply(f, Q)
    raise RuntimeError("oracle did not decide within its step budget")
