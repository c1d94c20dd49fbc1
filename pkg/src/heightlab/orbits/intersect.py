"""Intersections of two orbits and their arithmetic-progression structure."""

from __future__ import annotations

from dataclasses import dataclass

from heightlab.canonical.series import DIGITS_BUDGET
from heightlab.dynsys.picard import system_spectral
from heightlab.errors import HypothesisFailed, InputError
from heightlab.numlin.balls import default_precision
from heightlab.orbits.records import _Orbit


@dataclass(frozen=True)
class IntersectionReport:
    pairs: tuple[tuple[int, int], ...]
    max_gap: int | None
    ap_decomposition: tuple[tuple[int, int, int], ...]
    residual_pairs: tuple[tuple[int, int], ...]
    n_max: int
    computed: tuple[int, int]
    truncated: bool

    @property
    def window(self) -> int:
        """Largest index reached on both orbits."""
        return min(self.computed)


def _orbit_keys(system, x, N: int, budget: int) -> tuple[list, bool]:
    orb = _Orbit(system, x, budget)
    orb.get(N)
    return orb.keys[: N + 1], orb.stopped is not None


def _progression(k: int, i: int, j: int, nx: int, ny: int) -> list[tuple[int, int]]:
    out = []
    m = 0
    while k * m + i <= nx and k * m + j <= ny:
        out.append((k * m + i, k * m + j))
        m += 1
    return out


def orbit_intersection(f_system, x, g_system, y, N: int, digits_budget: int = DIGITS_BUDGET) -> IntersectionReport:
    """All ``(n, m)`` with ``f^n x = g^m y`` and both indices at most ``N``.

    Progressions ``{(k t + i, k t + j)}`` are extracted greedily by
    increasing ``k``; one is accepted only if every member inside the
    computed window is an actual pair and it covers at least two pairs.
    Whatever is left is reported as residual.
    """
    if N < 1:
        raise InputError("N must be at least 1")
    kx, tx = _orbit_keys(f_system, x, N, digits_budget)
    ky, ty = _orbit_keys(g_system, y, N, digits_budget)
    index: dict = {}
    for m, key in enumerate(ky):
        index.setdefault(key, []).append(m)
    pairs = []
    for n, key in enumerate(kx):
        for m in index.get(key, ()):
            if ky[m] == key:  # the hash match is confirmed by full equality
                pairs.append((n, m))
    pairs.sort()
    pair_set = set(pairs)
    nx, ny = len(kx) - 1, len(ky) - 1
    remaining = set(pairs)
    aps = []
    for k in range(1, max(nx, ny) + 1):
        if len(remaining) < 2:
            break
        for (n, m) in sorted(remaining):
            if (n, m) not in remaining:
                continue
            i, j = n % k, m - (n - n % k)
            if j < 0:
                i, j = n - (m - m % k), m % k
            members = _progression(k, i, j, nx, ny)
            if len(members) < 2 or not all(p in pair_set for p in members):
                continue
            if not any(p in remaining for p in members):
                continue
            aps.append((k, i, j))
            remaining -= set(members)
    gap = max((abs(n - m) for n, m in pairs), default=None)
    return IntersectionReport(tuple(pairs), gap, tuple(aps), tuple(sorted(remaining)), N, (nx, ny), tx or ty)


@dataclass(frozen=True)
class GapCheck:
    holds: bool
    bound: int | None
    schedule: tuple[tuple[int, int | None], ...]


def gap_bound_check(f_system, x, g_system, y, N: int, precision_bits: int | None = None,
                    digits_budget: int = DIGITS_BUDGET) -> GapCheck:
    """Check the spectral hypothesis, then watch the largest gap over ``N/4, N/2, N``."""
    bits = precision_bits or default_precision()
    a = system_spectral(f_system, bits)
    b = system_spectral(g_system, bits)
    if not a.delta.overlaps(b.delta) or a.l != b.l:
        raise HypothesisFailed(f"spectral pairs differ: ({a.delta}, {a.l}) vs ({b.delta}, {b.l})")
    if not a.delta.certainly_gt(1):
        raise HypothesisFailed("dynamical degree is not above 1")
    schedule = []
    for n in sorted({max(1, N // 4), max(1, N // 2), N}):
        rep = orbit_intersection(f_system, x, g_system, y, n, digits_budget)
        schedule.append((n, rep.max_gap))
    gaps = [g for _, g in schedule]
    stable = len(set(gaps[-2:])) == 1
    return GapCheck(stable and gaps[-1] is not None, gaps[-1], tuple(schedule))
