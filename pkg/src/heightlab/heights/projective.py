"""Points of projective space over Q and their Weil heights."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable

import gmpy2

from heightlab.errors import AllZero
from heightlab.numlin.balls import BallReal, default_precision, log_int


@dataclass(frozen=True)
class ProjectivePoint:
    """Canonical representative: coprime integers, first nonzero entry positive."""

    coords: tuple[int, ...]

    def __post_init__(self):
        c = self.coords
        if not any(c):
            raise AllZero("projective point with all coordinates zero")
        g = gmpy2.gcd(*c)
        first = next(x for x in c if x)
        if g != 1 or first < 0:
            raise ValueError(f"{c} is not a canonical representative; use normalize()")

    @classmethod
    def trusted(cls, coords: tuple[int, ...]) -> ProjectivePoint:
        """Wrap coordinates already known to be canonical, skipping the gcd check."""
        P = object.__new__(cls)
        object.__setattr__(P, "coords", coords)
        return P

    @property
    def dimension(self) -> int:
        return len(self.coords) - 1

    def __iter__(self):
        return iter(self.coords)

    def __str__(self) -> str:
        return "(" + ":".join(str(x) for x in self.coords) + ")"

    def affine(self) -> Fraction | None:
        """``x/y`` for a point of P^1, or None at infinity."""
        x, y = self.coords
        return None if y == 0 else Fraction(x, y)


def normalize(raw: Iterable) -> ProjectivePoint:
    """Clear denominators and divide out the content; the first nonzero entry ends up positive."""
    vals = [Fraction(v) if not isinstance(v, str) else Fraction(v.strip()) for v in raw]
    if not any(vals):
        raise AllZero("cannot normalize the zero vector")
    den = 1
    for v in vals:
        den = den * v.denominator // gcd(den, v.denominator)
    ints = [int(v * den) for v in vals]
    g = 0
    for x in ints:
        g = gcd(g, x)
    ints = [x // g for x in ints]
    if next(x for x in ints if x) < 0:
        ints = [-x for x in ints]
    return ProjectivePoint(tuple(ints))


def p1_point(value) -> ProjectivePoint:
    """The point ``(value : 1)``; ``None`` or ``"inf"`` gives ``(1 : 0)``."""
    if value is None or (isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "oo")):
        return ProjectivePoint((1, 0))
    q = Fraction(value) if not isinstance(value, str) else Fraction(value.strip())
    return normalize((q.numerator, q.denominator))


@dataclass(frozen=True)
class HeightValue:
    """A height as a ball on the natural-log scale.

    ``exact_core`` is the integer whose logarithm the height is, when the
    height is a plain Weil height.
    """

    value: BallReal
    exact_core: int | None = None

    def __float__(self) -> float:
        return float(self.value)


def weil_height(P: ProjectivePoint, precision_bits: int | None = None) -> HeightValue:
    core = max(abs(x) for x in P.coords)
    return HeightValue(log_int(core, precision_bits or default_precision()), core)


def height_of_rational(x: Fraction, precision_bits: int | None = None) -> BallReal:
    """Naive height ``log max(|num|, den)`` of a rational number."""
    return log_int(max(abs(x.numerator), x.denominator), precision_bits)


def enumerate_p1_points(bound: int) -> list[ProjectivePoint]:
    """Every point of P^1(Q) with multiplicative height at most ``bound``."""
    if bound < 1:
        raise ValueError("height bound must be at least 1")
    out = [ProjectivePoint((1, 0)), ProjectivePoint((0, 1))]
    for q in range(1, bound + 1):
        for p in range(1, bound + 1):
            if gcd(p, q) == 1:
                out.append(ProjectivePoint((p, q)))
                out.append(ProjectivePoint((p, -q)))
    return out
