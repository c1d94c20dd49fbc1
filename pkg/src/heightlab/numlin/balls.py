"""Outward-rounded real balls on top of mpmath's raw mpf layer.

Every operation takes its precision and rounding direction explicitly, so
no global mpmath context is touched and balls are safe to use from any
thread.
"""

from __future__ import annotations

import os
from fractions import Fraction
from numbers import Rational

import mpmath
from mpmath import libmp

from heightlab.errors import PrecisionExhausted

_D = libmp.round_floor
_U = libmp.round_ceiling

MAX_PRECISION_BITS = 4096


def default_precision() -> int:
    """Working precision in bits; ``HEIGHTLAB_PRECISION_BITS`` overrides the 128-bit default."""
    raw = os.environ.get("HEIGHTLAB_PRECISION_BITS")
    if raw:
        bits = int(raw)
        if bits < 16:
            raise ValueError("HEIGHTLAB_PRECISION_BITS must be at least 16")
        return bits
    return 128


def _make(raw: tuple) -> mpmath.mpf:
    return mpmath.mp.make_mpf(raw)


def _raw_from_rational(q: Rational, prec: int, rnd) -> tuple:
    return libmp.from_rational(int(q.numerator), int(q.denominator), prec, rnd)


def _to_fraction(raw: tuple) -> Fraction:
    p, q = libmp.to_rational(raw)
    return Fraction(int(p), int(q))


def _widen(lo: tuple, hi: tuple, prec: int) -> tuple[tuple, tuple]:
    # one extra ulp each side for transcendental kernels
    lo = libmp.mpf_sub(lo, libmp.mpf_shift(libmp.mpf_abs(lo), -prec + 1), prec, _D) if lo != libmp.fzero else lo
    hi = libmp.mpf_add(hi, libmp.mpf_shift(libmp.mpf_abs(hi), -prec + 1), prec, _U) if hi != libmp.fzero else hi
    return lo, hi


class BallReal:
    """A real number known to lie in ``[lower, upper]``.

    Internally stored as an interval; ``midpoint`` and ``radius`` are
    derived so that ``[midpoint - radius, midpoint + radius]`` contains the
    stored interval.
    """

    __slots__ = ("_lo", "_hi", "precision_bits")

    def __init__(self, lo: tuple, hi: tuple, precision_bits: int):
        if libmp.mpf_gt(lo, hi):
            raise ValueError("ball lower end exceeds upper end")
        self._lo = lo
        self._hi = hi
        self.precision_bits = precision_bits

    # construction -------------------------------------------------------
    @classmethod
    def exact(cls, value, precision_bits: int | None = None) -> BallReal:
        prec = precision_bits or default_precision()
        if isinstance(value, BallReal):
            return value
        if isinstance(value, float):
            value = Fraction(value)
        if isinstance(value, (int, Rational)):
            q = Fraction(value)
            return cls(_raw_from_rational(q, prec, _D), _raw_from_rational(q, prec, _U), prec)
        if isinstance(value, mpmath.mpf):
            raw = value._mpf_
            return cls(raw, raw, prec)
        raise TypeError(f"cannot build a ball from {type(value).__name__}")

    @classmethod
    def from_bounds(cls, lo, hi, precision_bits: int | None = None) -> BallReal:
        prec = precision_bits or default_precision()
        a = cls.exact(lo, prec)
        b = cls.exact(hi, prec)
        return cls(a._lo, b._hi, prec)

    @classmethod
    def from_mid_rad(cls, mid, rad, precision_bits: int | None = None) -> BallReal:
        prec = precision_bits or default_precision()
        m = cls.exact(mid, prec)
        r = cls.exact(rad, prec)
        if libmp.mpf_sign(r._lo) < 0:
            raise ValueError("negative radius")
        lo = libmp.mpf_sub(m._lo, r._hi, prec, _D)
        hi = libmp.mpf_add(m._hi, r._hi, prec, _U)
        return cls(lo, hi, prec)

    @classmethod
    def hull(cls, balls) -> BallReal:
        balls = list(balls)
        lo = balls[0]._lo
        hi = balls[0]._hi
        for b in balls[1:]:
            if libmp.mpf_lt(b._lo, lo):
                lo = b._lo
            if libmp.mpf_gt(b._hi, hi):
                hi = b._hi
        return cls(lo, hi, max(b.precision_bits for b in balls))

    # views --------------------------------------------------------------
    @property
    def lower(self) -> mpmath.mpf:
        return _make(self._lo)

    @property
    def upper(self) -> mpmath.mpf:
        return _make(self._hi)

    @property
    def midpoint(self) -> mpmath.mpf:
        mid = libmp.mpf_shift(libmp.mpf_add(self._lo, self._hi, self.precision_bits + 2, libmp.round_nearest), -1)
        return _make(mid)

    @property
    def radius(self) -> mpmath.mpf:
        mid = self.midpoint._mpf_
        a = libmp.mpf_sub(self._hi, mid, self.precision_bits, _U)
        b = libmp.mpf_sub(mid, self._lo, self.precision_bits, _U)
        return _make(a if libmp.mpf_ge(a, b) else b)

    def lower_fraction(self) -> Fraction:
        return _to_fraction(self._lo)

    def upper_fraction(self) -> Fraction:
        return _to_fraction(self._hi)

    def width(self) -> mpmath.mpf:
        return _make(libmp.mpf_sub(self._hi, self._lo, self.precision_bits, _U))

    def __float__(self) -> float:
        return float(self.midpoint)

    def __repr__(self) -> str:
        return f"BallReal({mpmath.nstr(self.midpoint, 17)} +/- {mpmath.nstr(self.radius, 3)})"

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> BallReal:
        if isinstance(other, BallReal):
            return other
        return BallReal.exact(other, self.precision_bits)

    def _prec(self, other: BallReal) -> int:
        return max(self.precision_bits, other.precision_bits)

    def __add__(self, other) -> BallReal:
        o = self._coerce(other)
        p = self._prec(o)
        return BallReal(libmp.mpf_add(self._lo, o._lo, p, _D), libmp.mpf_add(self._hi, o._hi, p, _U), p)

    __radd__ = __add__

    def __neg__(self) -> BallReal:
        return BallReal(libmp.mpf_neg(self._hi), libmp.mpf_neg(self._lo), self.precision_bits)

    def __sub__(self, other) -> BallReal:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> BallReal:
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> BallReal:
        o = self._coerce(other)
        p = self._prec(o)
        ends = [(a, b) for a in (self._lo, self._hi) for b in (o._lo, o._hi)]
        lows = [libmp.mpf_mul(a, b, p, _D) for a, b in ends]
        highs = [libmp.mpf_mul(a, b, p, _U) for a, b in ends]
        lo = lows[0]
        for x in lows[1:]:
            if libmp.mpf_lt(x, lo):
                lo = x
        hi = highs[0]
        for x in highs[1:]:
            if libmp.mpf_gt(x, hi):
                hi = x
        return BallReal(lo, hi, p)

    __rmul__ = __mul__

    def inverse(self) -> BallReal:
        if self.contains_zero():
            raise ZeroDivisionError("ball contains zero")
        p = self.precision_bits
        return BallReal(libmp.mpf_div(libmp.fone, self._hi, p, _D), libmp.mpf_div(libmp.fone, self._lo, p, _U), p)

    def __truediv__(self, other) -> BallReal:
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other) -> BallReal:
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int) -> BallReal:
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        result = BallReal.exact(1, self.precision_bits)
        if n % 2 == 0 and n > 0:
            base = self.abs()
        else:
            base = self
        for _ in range(n):
            result = result * base
        return result

    def abs(self) -> BallReal:
        if libmp.mpf_sign(self._lo) >= 0:
            return self
        if libmp.mpf_sign(self._hi) <= 0:
            return -self
        hi = self._hi if libmp.mpf_ge(self._hi, libmp.mpf_neg(self._lo)) else libmp.mpf_neg(self._lo)
        return BallReal(libmp.fzero, hi, self.precision_bits)

    __abs__ = abs

    def sqrt(self) -> BallReal:
        if libmp.mpf_sign(self._hi) < 0:
            raise ValueError("sqrt of a negative ball")
        p = self.precision_bits
        lo = libmp.fzero if libmp.mpf_sign(self._lo) <= 0 else libmp.mpf_sqrt(self._lo, p, _D)
        return BallReal(lo, libmp.mpf_sqrt(self._hi, p, _U), p)

    def log(self) -> BallReal:
        if libmp.mpf_sign(self._lo) <= 0:
            raise ValueError("log of a ball touching zero")
        p = self.precision_bits
        lo, hi = _widen(libmp.mpf_log(self._lo, p, _D), libmp.mpf_log(self._hi, p, _U), p)
        return BallReal(lo, hi, p)

    def exp(self) -> BallReal:
        p = self.precision_bits
        lo, hi = _widen(libmp.mpf_exp(self._lo, p, _D), libmp.mpf_exp(self._hi, p, _U), p)
        if libmp.mpf_sign(lo) < 0:
            lo = libmp.fzero
        return BallReal(lo, hi, p)

    def nth_root(self, n: int) -> BallReal:
        if libmp.mpf_sign(self._lo) < 0:
            raise ValueError("root of a negative ball")
        p = self.precision_bits
        lo = libmp.fzero if self._lo == libmp.fzero else libmp.mpf_nthroot(self._lo, n, p, _D)
        lo, hi = _widen(lo, libmp.mpf_nthroot(self._hi, n, p, _U), p)
        return BallReal(max_raw(lo, libmp.fzero), hi, p)

    def square(self) -> BallReal:
        return self.abs() * self.abs()

    def inflate(self, rad) -> BallReal:
        """Grow the ball symmetrically by a non-negative amount."""
        r = self._coerce(rad)
        p = self.precision_bits
        return BallReal(libmp.mpf_sub(self._lo, r._hi, p, _D), libmp.mpf_add(self._hi, r._hi, p, _U), p)

    def with_precision(self, precision_bits: int) -> BallReal:
        return BallReal(self._lo, self._hi, precision_bits)

    # predicates ---------------------------------------------------------
    def contains(self, value) -> bool:
        if isinstance(value, BallReal):
            return libmp.mpf_le(self._lo, value._lo) and libmp.mpf_ge(self._hi, value._hi)
        if isinstance(value, float):
            value = Fraction(value)
        if isinstance(value, mpmath.mpf):
            value = _to_fraction(value._mpf_)
        q = Fraction(value)
        return self.lower_fraction() <= q <= self.upper_fraction()

    def contains_zero(self) -> bool:
        return libmp.mpf_sign(self._lo) <= 0 <= libmp.mpf_sign(self._hi)

    def overlaps(self, other) -> bool:
        o = self._coerce(other)
        return libmp.mpf_le(self._lo, o._hi) and libmp.mpf_le(o._lo, self._hi)

    def certainly_positive(self) -> bool:
        return libmp.mpf_sign(self._lo) > 0

    def certainly_negative(self) -> bool:
        return libmp.mpf_sign(self._hi) < 0

    def certainly_lt(self, other) -> bool:
        o = self._coerce(other)
        return libmp.mpf_lt(self._hi, o._lo)

    def certainly_gt(self, other) -> bool:
        o = self._coerce(other)
        return libmp.mpf_gt(self._lo, o._hi)

    def certainly_le(self, other) -> bool:
        o = self._coerce(other)
        return libmp.mpf_le(self._hi, o._lo)

    def possibly_le(self, other) -> bool:
        o = self._coerce(other)
        return libmp.mpf_le(self._lo, o._hi)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BallReal):
            return NotImplemented
        return self._lo == other._lo and self._hi == other._hi

    def __hash__(self) -> int:
        return hash((self._lo, self._hi))


def max_raw(a: tuple, b: tuple) -> tuple:
    return a if libmp.mpf_ge(a, b) else b


def ball_max(balls) -> BallReal:
    """Enclosure of the maximum of the enclosed reals."""
    balls = list(balls)
    lo = balls[0]._lo
    hi = balls[0]._hi
    for b in balls[1:]:
        lo = max_raw(lo, b._lo)
        hi = max_raw(hi, b._hi)
    return BallReal(lo, hi, max(b.precision_bits for b in balls))


def ball_min(balls) -> BallReal:
    return -ball_max([-b for b in balls])


def log_int(n: int, precision_bits: int | None = None) -> BallReal:
    """Certified enclosure of ``log(n)`` for a positive integer of any size."""
    if n <= 0:
        raise ValueError("log of a non-positive integer")
    return BallReal.exact(n, precision_bits).log()


def escalate(fn, precision_bits: int | None = None, max_bits: int = MAX_PRECISION_BITS):
    """Call ``fn(bits)`` doubling ``bits`` on PrecisionExhausted until ``max_bits``."""
    bits = precision_bits or default_precision()
    while True:
        try:
            return fn(bits)
        except PrecisionExhausted:
            if bits >= max_bits:
                raise
            bits = min(2 * bits, max_bits)
