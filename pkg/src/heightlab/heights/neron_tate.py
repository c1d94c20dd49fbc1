"""Neron-Tate heights on elliptic curves over Q.

Normalization: ``h(P) = 1/2 * lim 4^-n h(x(2^n P))`` with ``h`` the naive
height of a rational number. Two independent backends are provided:

* :func:`neron_tate` telescopes along the doubling orbit with a certified
  tail bound derived from the duplication forms;
* :func:`neron_tate_local` sums local heights (an archimedean series plus
  closed forms at the bad primes).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import gmpy2
import mpmath

from heightlab.errors import FactorizationNeeded, InputError
from heightlab.heights.elliptic import EllipticCurve, EPoint, ec_add, ec_neg
from heightlab.heights.forms import FormBounds, form_bounds
from heightlab.heights.projective import HeightValue
from heightlab.numlin.balls import BallReal, default_precision, log_int

MAX_DOUBLING_DEPTH = 12
TORSION_WINDOW = 16
TRIAL_DIVISION_LIMIT = 10**6


def _integral(P: EPoint) -> tuple[EllipticCurve, Fraction | None]:
    E, u = P.curve.integral_model()
    if P.is_zero:
        return E, None
    return E, P.x * u * u


def duplication_forms(E: EllipticCurve) -> tuple[list[int], list[int]]:
    """``x(2Q) = F(x, 1) / G(x, 1)`` as descending integer coefficient lists."""
    if not E.is_integral():
        raise InputError("duplication forms need an integral model")
    b2, b4, b6, b8 = (int(b) for b in E.b_invariants)
    F = [1, 0, -b4, -2 * b6, -b8]
    G = [0, 4, b2, 2 * b4, b6]
    return F, G


_BOUNDS_CACHE: dict[EllipticCurve, FormBounds] = {}


def duplication_bounds(E: EllipticCurve) -> FormBounds:
    """Constants with ``|h(x(2Q)) - 4 h(x(Q))| <= max(log C_up, log C_low)``."""
    b = _BOUNDS_CACHE.get(E)
    if b is None:
        b = form_bounds(*duplication_forms(E))
        _BOUNDS_CACHE[E] = b
    return b


def _eval_form(coeffs: Sequence[int], X: int, Z: int) -> int:
    """``sum c_k X^(d-k) Z^k`` for descending coefficients ``c``."""
    acc = 0
    zp = 1
    for c in coeffs:
        acc = acc * X + c * zp
        zp *= Z
    return acc


def _double_x(F, G, X: int, Z: int) -> tuple[int, int] | None:
    num = _eval_form(F, X, Z)
    den = _eval_form(G, X, Z)
    if den == 0:
        return None
    g = gmpy2.gcd(num, den)
    num //= g
    den //= g
    if den < 0:
        num, den = -num, -den
    return num, den


def _naive(X: int, Z: int, bits: int) -> BallReal:
    return log_int(int(max(abs(X), abs(Z))), bits)


def tail_bound(E: EllipticCurve, depth: int, bits: int | None = None) -> BallReal:
    """Certified bound on the truncation error after ``depth`` doublings."""
    bits = bits or default_precision()
    C = duplication_bounds(E).constant(bits)
    return C / (6 * 4 ** depth)


def neron_tate(P: EPoint, tolerance: float = 1e-10, precision_bits: int | None = None,
               max_depth: int = MAX_DOUBLING_DEPTH) -> HeightValue:
    """Canonical height by doubling telescoping.

    The depth is the smallest one whose certified tail is below half the
    tolerance, capped at ``max_depth``; if the cap is hit the returned ball
    is simply wider than requested. Torsion points return exactly zero.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    bits = precision_bits or default_precision()
    E, x = _integral(P)
    if x is None:
        return HeightValue(BallReal.exact(0, bits))
    F, G = duplication_forms(E)
    C = duplication_bounds(E).constant(bits)
    tol = Fraction(tolerance)
    depth = 0
    while depth < max_depth and (C / (6 * 4 ** depth)).upper_fraction() > tol / 2:
        depth += 1
    X, Z = gmpy2.mpz(x.numerator), gmpy2.mpz(x.denominator)
    h_prev = _naive(X, Z, bits)
    total = h_prev
    seen = {(X, Z)}
    for k in range(1, max(depth, TORSION_WINDOW if depth == 0 else depth) + 1):
        nxt = _double_x(F, G, X, Z)
        if nxt is None or nxt in seen:
            return HeightValue(BallReal.exact(0, bits))
        seen.add(nxt)
        X, Z = nxt
        if k > depth:
            continue
        h_k = _naive(X, Z, bits)
        total = total + (h_k - 4 * h_prev) / (4 ** k)
        h_prev = h_k
    tail = (C / (6 * 4 ** depth)).upper_fraction()
    value = (total / 2).inflate(tail)
    return HeightValue(value)


# --- backend B: local heights --------------------------------------------

def _valuation(n: Fraction | int, p: int) -> int:
    n = Fraction(n)
    if n == 0:
        return 10**9
    v = 0
    a, b = n.numerator, n.denominator
    while a % p == 0:
        a //= p
        v += 1
    while b % p == 0:
        b //= p
        v -= 1
    return v


def factor_integer(n: int, hints: Sequence[int] = ()) -> dict[int, int]:
    """Prime factorization by trial division up to 10^6 plus declared prime hints.

    A cofactor left after trial division is accepted as prime when it is below
    10^12 (it has no factor up to its square root); otherwise it must be
    split by the hints.
    """
    n = abs(int(n))
    out: dict[int, int] = {}
    for q in hints:
        q = int(q)
        while q > 1 and n % q == 0:
            out[q] = out.get(q, 0) + 1
            n //= q
    p = 2
    while p * p <= n and p <= TRIAL_DIVISION_LIMIT:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        if n < TRIAL_DIVISION_LIMIT ** 2 or p * p > n:
            out[n] = out.get(n, 0) + 1
        else:
            raise FactorizationNeeded(f"discriminant has an unfactored part {n}; pass it as a hint")
    return out


def _minimal_at(E: EllipticCurve, p: int) -> bool:
    c4, c6 = E.c_invariants
    return _valuation(E.discriminant, p) < 12 or _valuation(c4, p) < 4 or _valuation(c6, p) < 6


def local_height_p(E: EllipticCurve, x: Fraction, y: Fraction, p: int, bits: int) -> BallReal:
    """Local height at ``p`` including the ``ord_p(Delta)/12`` term (minimal model)."""
    a1, a2, a3, a4, a6 = E.ainvs
    b2, b4, b6, b8 = E.b_invariants
    logp = log_int(p, bits)
    N = _valuation(E.discriminant, p)
    base = logp * Fraction(N, 12)
    A = _valuation(3 * x * x + 2 * a2 * x + a4 - a1 * y, p)
    B = _valuation(2 * y + a1 * x + a3, p)
    if A <= 0 or B <= 0:
        return base + logp * Fraction(max(0, -_valuation(x, p)), 2)
    c4, _ = E.c_invariants
    if _valuation(c4, p) == 0:
        M = Fraction(min(B, Fraction(N, 2)))
        return base - logp * (M * (N - M) / (2 * N))
    C = _valuation(3 * x ** 4 + b2 * x ** 3 + 3 * b4 * x * x + 3 * b6 * x + b8, p)
    if C >= 3 * B:
        return base - logp * Fraction(B, 3)
    return base - logp * Fraction(C, 8)


def local_height_infinity(E: EllipticCurve, x: Fraction, tolerance: float, bits: int) -> BallReal:
    """Archimedean local height via the Tate-Silverman series.

    The number of terms follows the published digit estimate with a
    safety margin; the returned ball is inflated by the tolerance.
    """
    ctx = mpmath.MPContext()
    ctx.prec = bits + 32
    b2, b4, b6, b8 = (ctx.mpf(b.numerator) / b.denominator for b in E.b_invariants)
    b2s = b2 - 12
    b4s = b4 - b2 + 6
    b6s = b6 - 2 * b4 + b2 - 4
    b8s = b8 - 3 * b6 + 3 * b4 - b2 + 3
    H = max(ctx.mpf(4), abs(b2), 2 * abs(b4), 2 * abs(b6), abs(b8))
    digits = max(1.0, -math.log10(tolerance)) + 5
    nterms = int(math.ceil(5.0 / 3.0 * digits + 0.5 + 0.75 * float(ctx.log(7 + 4.0 / 3.0 * ctx.log(H))))) + 5
    xv = ctx.mpf(x.numerator) / x.denominator
    if abs(xv) < 0.5:
        t = 1 / (xv + 1)
        beta = 0
    else:
        t = 1 / xv
        beta = 1
    mu = -ctx.log(abs(t))
    f = ctx.mpf(1)
    for _ in range(nterms + 1):
        f = f / 4
        if beta == 1:
            w = b6 * t ** 4 + 2 * b4 * t ** 3 + b2 * t * t + 4 * t
            z = 1 - b4 * t * t - 2 * b6 * t ** 3 - b8 * t ** 4
            zw = z + w
        else:
            w = b6s * t ** 4 + 2 * b4s * t ** 3 + b2s * t * t + 4 * t
            z = 1 - b4s * t * t - 2 * b6s * t ** 3 - b8s * t ** 4
            zw = z - w
        if abs(w) <= 2 * abs(z):
            mu += f * ctx.log(abs(z))
            t = w / z
        else:
            mu += f * ctx.log(abs(zw))
            t = w / zw
            beta = 1 - beta
    disc = E.discriminant
    lam = mu / 2 - ctx.log(abs(ctx.mpf(disc.numerator) / disc.denominator)) / 12
    return BallReal.from_mid_rad(_to_fraction(lam), Fraction(tolerance) / 2, bits)


def _to_fraction(v) -> Fraction:
    from mpmath import libmp
    p, q = libmp.to_rational(v._mpf_)
    return Fraction(int(p), int(q))


def neron_tate_local(P: EPoint, tolerance: float = 1e-10, precision_bits: int | None = None,
                     factor_hints: Sequence[int] = ()) -> HeightValue:
    """Canonical height as a sum of local heights on a minimal integral model."""
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    bits = precision_bits or default_precision()
    if P.is_zero:
        return HeightValue(BallReal.exact(0, bits))
    E, u = P.curve.integral_model()
    x, y = P.x * u * u, P.y * u ** 3
    if _torsion_by_doubling(E, x):
        return HeightValue(BallReal.exact(0, bits))
    primes = factor_integer(int(E.discriminant), factor_hints)
    for p in primes:
        if not _minimal_at(E, p):
            raise InputError(f"model is not minimal at {p}; local heights need a minimal model")
    total = local_height_infinity(E, x, tolerance, bits)
    for p in primes:
        total = total + local_height_p(E, x, y, p, bits)
    # primes of good reduction only see the denominator of x
    den = x.denominator
    for p in primes:
        while den % p == 0:
            den //= p
    if den > 1:
        total = total + log_int(den, bits) / 2
    return HeightValue(total)


def _torsion_by_doubling(E: EllipticCurve, x: Fraction) -> bool:
    F, G = duplication_forms(E)
    X, Z = gmpy2.mpz(x.numerator), gmpy2.mpz(x.denominator)
    seen = {(X, Z)}
    for _ in range(TORSION_WINDOW):
        nxt = _double_x(F, G, X, Z)
        if nxt is None or nxt in seen:
            return True
        seen.add(nxt)
        X, Z = nxt
        if max(abs(X), abs(Z)).bit_length() > 4096:
            return False
    return False


def is_torsion(P: EPoint) -> bool:
    """Torsion test: the doubling orbit of ``x`` repeats or reaches the origin within 16 steps."""
    if P.is_zero:
        return True
    E, x = _integral(P)
    return _torsion_by_doubling(E, x)


def nt_pairing(P: EPoint, Q: EPoint, tolerance: float = 1e-10, precision_bits: int | None = None,
               backend=None) -> BallReal:
    """``<P, Q> = (h(P + Q) - h(P) - h(Q)) / 2``."""
    height = backend or neron_tate
    if P.curve != Q.curve:
        raise InputError("points lie on different curves")
    a = height(ec_add(P, Q), tolerance, precision_bits).value
    b = height(P, tolerance, precision_bits).value
    c = height(Q, tolerance, precision_bits).value
    return (a - b - c) / 2


__all__ = [
    "duplication_bounds", "duplication_forms", "factor_integer", "is_torsion", "local_height_infinity",
    "local_height_p", "neron_tate", "neron_tate_local", "nt_pairing", "tail_bound", "ec_neg",
]
