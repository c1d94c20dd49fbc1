"""Elliptic curves in long Weierstrass form over Q with the exact group law."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from heightlab.errors import InputError


def _q(v) -> Fraction:
    return Fraction(v.strip()) if isinstance(v, str) else Fraction(v)


class EllipticCurve:
    """``y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6``."""

    __slots__ = ("a1", "a2", "a3", "a4", "a6", "__dict__")

    def __init__(self, a1=0, a2=0, a3=0, a4=0, a6=0):
        self.a1, self.a2, self.a3, self.a4, self.a6 = (_q(a) for a in (a1, a2, a3, a4, a6))
        if self.discriminant == 0:
            raise InputError(f"singular curve {self.ainvs}")

    @classmethod
    def from_list(cls, ainvs) -> EllipticCurve:
        if len(ainvs) != 5:
            raise InputError("expected five Weierstrass coefficients [a1, a2, a3, a4, a6]")
        return cls(*ainvs)

    @property
    def ainvs(self) -> tuple[Fraction, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @cached_property
    def b_invariants(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @cached_property
    def c_invariants(self) -> tuple[Fraction, Fraction]:
        b2, b4, b6, _ = self.b_invariants
        return b2 * b2 - 24 * b4, -b2 ** 3 + 36 * b2 * b4 - 216 * b6

    @cached_property
    def discriminant(self) -> Fraction:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self.ainvs)

    def integral_model(self) -> tuple[EllipticCurve, int]:
        """An integral model and the scale ``u``: ``(x, y) -> (u^2 x, u^3 y)``."""
        u = 1
        while True:
            scaled = [a * u ** k for a, k in zip(self.ainvs, (1, 2, 3, 4, 6))]
            if all(a.denominator == 1 for a in scaled):
                return (self if u == 1 else EllipticCurve(*scaled)), u
            u += 1

    def contains(self, x: Fraction, y: Fraction) -> bool:
        a1, a2, a3, a4, a6 = self.ainvs
        return y * y + a1 * x * y + a3 * y == x ** 3 + a2 * x * x + a4 * x + a6

    def point(self, x, y) -> EPoint:
        return EPoint(self, _q(x), _q(y))

    def zero(self) -> EPoint:
        return EPoint(self, None, None)

    def __eq__(self, other) -> bool:
        return isinstance(other, EllipticCurve) and self.ainvs == other.ainvs

    def __hash__(self) -> int:
        return hash(self.ainvs)

    def __repr__(self) -> str:
        return "EllipticCurve([" + ", ".join(str(a) for a in self.ainvs) + "])"


@dataclass(frozen=True)
class EPoint:
    """A rational point; ``x is None`` encodes the point at infinity."""

    curve: EllipticCurve
    x: Fraction | None
    y: Fraction | None

    def __post_init__(self):
        if (self.x is None) != (self.y is None):
            raise InputError("point needs both coordinates or neither")
        if self.x is not None and not self.curve.contains(self.x, self.y):
            raise InputError(f"({self.x}, {self.y}) is not on {self.curve}")

    @property
    def is_zero(self) -> bool:
        return self.x is None

    def __neg__(self) -> EPoint:
        return ec_neg(self)

    def __add__(self, other: EPoint) -> EPoint:
        return ec_add(self, other)

    def __sub__(self, other: EPoint) -> EPoint:
        return ec_add(self, ec_neg(other))

    def __rmul__(self, m: int) -> EPoint:
        return ec_mul(m, self)

    def key(self) -> tuple:
        return ("O",) if self.x is None else (self.x, self.y)

    def __repr__(self) -> str:
        return "O" if self.x is None else f"({self.x}, {self.y})"


def ec_neg(P: EPoint) -> EPoint:
    if P.is_zero:
        return P
    E = P.curve
    return EPoint(E, P.x, -P.y - E.a1 * P.x - E.a3)


def ec_add(P: EPoint, Q: EPoint) -> EPoint:
    if P.curve != Q.curve:
        raise InputError("points lie on different curves")
    if P.is_zero:
        return Q
    if Q.is_zero:
        return P
    E = P.curve
    a1, a2, a3, a4, a6 = E.ainvs
    if P.x == Q.x:
        if P.y + Q.y + a1 * Q.x + a3 == 0:
            return E.zero()
        lam = (3 * P.x * P.x + 2 * a2 * P.x + a4 - a1 * P.y) / (2 * P.y + a1 * P.x + a3)
    else:
        lam = (Q.y - P.y) / (Q.x - P.x)
    nu = P.y - lam * P.x
    x3 = lam * lam + a1 * lam - a2 - P.x - Q.x
    y3 = -(lam + a1) * x3 - nu - a3
    return EPoint(E, x3, y3)


def ec_mul(m: int, P: EPoint) -> EPoint:
    """``m * P`` by double-and-add."""
    if m < 0:
        return ec_mul(-m, ec_neg(P))
    result = P.curve.zero()
    addend = P
    while m:
        if m & 1:
            result = ec_add(result, addend)
        addend = ec_add(addend, addend)
        m >>= 1
    return result
