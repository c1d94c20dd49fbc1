"""Certified isolation of the complex roots of a rational polynomial.

Approximations come from mpmath's polynomial solver; certification uses
the Weierstrass correction inclusion: with ``W_i = p(z_i) / (lc * prod_{j != i}
(z_i - z_j))`` every connected component of the union of discs
``|z - z_i| <= n |W_i|`` made of k discs holds exactly k roots. The
corrections are evaluated exactly in Q(i), so disjoint discs are a proof.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

import mpmath
from mpmath import libmp

from heightlab.errors import PrecisionExhausted
from heightlab.numlin.balls import BallReal, default_precision
from heightlab.numlin.factor import rational_roots
from heightlab.numlin.poly import RatPoly


def sqrt_bounds(x: Fraction, bits: int = 96) -> tuple[Fraction, Fraction]:
    """Rational ``lo <= sqrt(x) <= hi`` with relative gap about ``2**-bits``."""
    if x < 0:
        raise ValueError("sqrt of a negative number")
    if x == 0:
        return Fraction(0), Fraction(0)
    scale = 4 ** bits
    n = x.numerator * x.denominator * scale
    r = isqrt(n)
    den = x.denominator * 2 ** bits
    lo = Fraction(r, den)
    hi = lo if r * r == n else Fraction(r + 1, den)
    return lo, hi


@dataclass(frozen=True)
class ComplexBall:
    """Closed disc with Gaussian-rational center and rational radius."""

    re: Fraction
    im: Fraction
    radius: Fraction

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def modulus(self, precision_bits: int | None = None) -> BallReal:
        """Enclosure of ``|z|`` for every ``z`` in the disc."""
        lo2, hi2 = sqrt_bounds(self.re * self.re + self.im * self.im)
        lo = max(lo2 - self.radius, Fraction(0))
        return BallReal.from_bounds(lo, hi2 + self.radius, precision_bits)

    def real_part(self, precision_bits: int | None = None) -> BallReal:
        return BallReal.from_bounds(self.re - self.radius, self.re + self.radius, precision_bits)

    def imag_part(self, precision_bits: int | None = None) -> BallReal:
        return BallReal.from_bounds(self.im - self.radius, self.im + self.radius, precision_bits)

    def contains(self, z: complex) -> bool:
        dx = Fraction(z.real) - self.re
        dy = Fraction(z.imag) - self.im
        return dx * dx + dy * dy <= self.radius * self.radius

    def midpoint(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __repr__(self) -> str:
        z = self.midpoint()
        return f"ComplexBall({z.real:.12g}{z.imag:+.12g}j, r={float(self.radius):.3g})"


def _gmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _geval(p: RatPoly, z):
    acc = (Fraction(0), Fraction(0))
    for c in reversed(p.coeffs):
        acc = _gmul(acc, z)
        acc = (acc[0] + c, acc[1])
    return acc


def _mpf_fraction(x) -> Fraction:
    p, q = libmp.to_rational(x._mpf_)
    return Fraction(int(p), int(q))


def _round_fraction(x, bits: int) -> Fraction:
    q = Fraction(x)
    if q == 0:
        return q
    scale = 2 ** bits
    return Fraction(round(q * scale), scale)


def _approximate_roots(p: RatPoly, bits: int) -> list[tuple[Fraction, Fraction]]:
    ctx = mpmath.MPContext()
    ctx.prec = bits + 32
    coeffs = [ctx.mpf(c.numerator) / c.denominator for c in reversed(p.coeffs)]
    try:
        roots = ctx.polyroots(coeffs, maxsteps=200 + 20 * p.degree, extraprec=2 * bits + 64)
    except ctx.NoConvergence as exc:
        raise PrecisionExhausted(f"root approximation did not converge for {p}") from exc
    if p.degree == 1:
        roots = [roots] if not isinstance(roots, list) else roots
    out = []
    tiny = Fraction(1, 2 ** (bits // 2 + 8))
    for r in roots:
        re = _mpf_fraction(ctx.re(r))
        im = _mpf_fraction(ctx.im(r))
        scale = 1 + abs(re) + abs(im)
        if abs(im) < tiny * scale:
            im = Fraction(0)
        out.append((_round_fraction(re, bits + 16), _round_fraction(im, bits + 16)))
    # pair conjugates so the discs come out symmetric
    fixed = []
    used = [False] * len(out)
    for i, (re, im) in enumerate(out):
        if used[i]:
            continue
        used[i] = True
        if im == 0:
            fixed.append((re, im))
            continue
        best, bestd = None, None
        for j in range(len(out)):
            if used[j]:
                continue
            d = abs(out[j][0] - re) + abs(out[j][1] + im)
            if bestd is None or d < bestd:
                best, bestd = j, d
        if best is None:
            fixed.append((re, im))
            continue
        used[best] = True
        mre = (re + out[best][0]) / 2
        mim = (abs(im) + abs(out[best][1])) / 2
        fixed += [(mre, mim), (mre, -mim)]
    return fixed


def _certify(p: RatPoly, approx: list[tuple[Fraction, Fraction]], bits: int) -> list[ComplexBall]:
    n = p.degree
    lc = p.lead
    balls = []
    for i, z in enumerate(approx):
        num = _geval(p, z)
        den = (lc, Fraction(0))
        for j, w in enumerate(approx):
            if j != i:
                den = _gmul(den, (z[0] - w[0], z[1] - w[1]))
        mod_den = den[0] * den[0] + den[1] * den[1]
        if mod_den == 0:
            raise PrecisionExhausted("coincident root approximations")
        mod_num = num[0] * num[0] + num[1] * num[1]
        _, hi = sqrt_bounds(mod_num / mod_den, 64)
        r = n * hi
        r = _round_up(r, bits + 32)
        balls.append(ComplexBall(z[0], z[1], r))
    for i in range(n):
        for j in range(i + 1, n):
            a, b = balls[i], balls[j]
            dx, dy = a.re - b.re, a.im - b.im
            rs = a.radius + b.radius
            if dx * dx + dy * dy <= rs * rs:
                raise PrecisionExhausted(f"root discs overlap for {p} at {bits} bits")
    return balls


def _round_up(x: Fraction, bits: int) -> Fraction:
    if x == 0:
        return x
    scale = 2 ** max(bits - max(x.numerator.bit_length() - x.denominator.bit_length(), 0), 8)
    return Fraction(-((-x.numerator * scale) // x.denominator), scale)


def root_enclosures(p: RatPoly, precision_bits: int | None = None) -> list[ComplexBall]:
    """One certified disc per root of the squarefree polynomial ``p``.

    Rational roots get radius 0. Real roots get real centers; non-real
    roots come in exactly conjugate pairs.
    """
    bits = precision_bits or default_precision()
    if p.is_zero():
        raise ValueError("zero polynomial")
    if p.degree == 0:
        return []
    exact: list[ComplexBall] = []
    rest = p.monic()
    if max(abs(c.numerator) for c in rest.coeffs) < 10**12 and max(c.denominator for c in rest.coeffs) < 10**12:
        rr = rational_roots(rest)
        if rr:
            for r in rr:
                exact.append(ComplexBall(r, Fraction(0), Fraction(0)))
                rest = rest.exact_div(RatPoly([-r, 1]))
    balls = list(exact)
    if rest.degree > 0:
        approx = _approximate_roots(rest, bits)
        cert = _certify(rest, approx, bits)
        limit = Fraction(1, 2 ** (bits // 2))
        for b in cert:
            size = 1 + abs(b.re) + abs(b.im)
            if b.radius > limit * size:
                raise PrecisionExhausted(f"root radius {float(b.radius):.3g} too large at {bits} bits")
        # rational roots were removed, so exact and numeric discs cannot share a root
        for e in exact:
            for b in cert:
                dx, dy = e.re - b.re, b.im
                if dx * dx + dy * dy <= b.radius * b.radius:
                    raise PrecisionExhausted("rational root inside a numeric disc")
        balls += cert
    balls.sort(key=lambda b: (-float(b.re * b.re + b.im * b.im), float(b.re), float(b.im)))
    return balls
