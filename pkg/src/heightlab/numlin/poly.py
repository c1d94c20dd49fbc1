"""Dense univariate polynomials with rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class RatPoly:
    """Polynomial over Q, coefficients in ascending degree order.

    Immutable; the zero polynomial has an empty coefficient tuple.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        c = [_frac(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(c)

    @classmethod
    def monomial(cls, degree: int, coeff=1) -> RatPoly:
        return cls([0] * degree + [coeff])

    @classmethod
    def from_roots(cls, roots: Sequence) -> RatPoly:
        p = cls([1])
        for r in roots:
            p = p * cls([-_frac(r), 1])
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, RatPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == RatPoly([other]).coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"RatPoly({self})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            if k == 0:
                mono = str(c)
            else:
                head = "" if c == 1 else "-" if c == -1 else f"{c}*"
                mono = head + ("t" if k == 1 else f"t^{k}")
            terms.append(mono)
        return " + ".join(terms).replace("+ -", "- ")

    # ring operations ---------------------------------------------------
    def __add__(self, other) -> RatPoly:
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return RatPoly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self) -> RatPoly:
        return RatPoly(-c for c in self.coeffs)

    def __sub__(self, other) -> RatPoly:
        return self + (-_as_poly(other))

    def __rsub__(self, other) -> RatPoly:
        return _as_poly(other) - self

    def __mul__(self, other) -> RatPoly:
        other = _as_poly(other)
        if not self.coeffs or not other.coeffs:
            return RatPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return RatPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> RatPoly:
        result = RatPoly([1])
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def divmod(self, other: RatPoly) -> tuple[RatPoly, RatPoly]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        inv = 1 / other.lead
        quo = [Fraction(0)] * max(len(rem) - dq, 0)
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k] * inv
            if c == 0:
                continue
            quo[k - dq] = c
            for j, b in enumerate(other.coeffs):
                rem[k - dq + j] -= c * b
        return RatPoly(quo), RatPoly(rem[:dq] if dq > 0 else [])

    def __floordiv__(self, other) -> RatPoly:
        return self.divmod(_as_poly(other))[0]

    def __mod__(self, other) -> RatPoly:
        return self.divmod(_as_poly(other))[1]

    def divides(self, other: RatPoly) -> bool:
        return (other % self).is_zero()

    def exact_div(self, other: RatPoly) -> RatPoly:
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    def monic(self) -> RatPoly:
        if not self.coeffs:
            return self
        inv = 1 / self.lead
        return RatPoly(c * inv for c in self.coeffs)

    def derivative(self) -> RatPoly:
        return RatPoly(k * c for k, c in enumerate(self.coeffs) if k > 0)

    def __call__(self, x):
        acc = 0 * x if not isinstance(x, (int, Fraction)) else Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def compose_neg(self) -> RatPoly:
        """``p(-t)``."""
        return RatPoly(c if k % 2 == 0 else -c for k, c in enumerate(self.coeffs))

    def reverse(self) -> RatPoly:
        """``t^deg * p(1/t)``."""
        return RatPoly(reversed(self.coeffs))

    def primitive_integer(self) -> list[int]:
        """Coefficients scaled to coprime integers with positive leading term."""
        if not self.coeffs:
            return []
        from math import gcd, lcm

        den = reduce(lcm, (c.denominator for c in self.coeffs), 1)
        ints = [int(c * den) for c in self.coeffs]
        g = reduce(gcd, ints, 0)
        ints = [x // g for x in ints]
        if ints[-1] < 0:
            ints = [-x for x in ints]
        return ints

    def to_strings(self) -> list[str]:
        return [str(c) for c in self.coeffs]


def _as_poly(x) -> RatPoly:
    if isinstance(x, RatPoly):
        return x
    return RatPoly([x])


def poly_gcd(a: RatPoly, b: RatPoly) -> RatPoly:
    """Monic gcd (zero if both are zero)."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def poly_lcm(a: RatPoly, b: RatPoly) -> RatPoly:
    if a.is_zero() or b.is_zero():
        return RatPoly()
    return (a * b).exact_div(poly_gcd(a, b)).monic()


def poly_xgcd(a: RatPoly, b: RatPoly) -> tuple[RatPoly, RatPoly, RatPoly]:
    """Return ``(g, s, t)`` with ``s*a + t*b = g`` and ``g`` monic."""
    r0, r1 = a, b
    s0, s1 = RatPoly([1]), RatPoly()
    t0, t1 = RatPoly(), RatPoly([1])
    while not r1.is_zero():
        q, r = r0.divmod(r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if r0.is_zero():
        return r0, s0, t0
    inv = 1 / r0.lead
    return r0 * inv, s0 * inv, t0 * inv


def resultant_int(f: Sequence[int], g: Sequence[int]) -> int:
    """Resultant of two polynomials given by descending integer coefficient lists.

    Uses the Sylvester determinant with fraction-free elimination; the
    leading coefficients may vanish (homogeneous forms with a root at
    infinity are handled by the caller passing full-length lists).
    """
    from heightlab.numlin.matrix import det_int

    return det_int(sylvester_matrix(f, g))


def sylvester_matrix(f: Sequence[int], g: Sequence[int]) -> list[list[int]]:
    m = len(f) - 1
    n = len(g) - 1
    size = m + n
    rows = []
    for i in range(n):
        rows.append([0] * i + list(f) + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + list(g) + [0] * (size - n - 1 - i))
    return rows
