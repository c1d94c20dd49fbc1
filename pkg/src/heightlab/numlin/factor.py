"""Squarefree decomposition and factorization over Q."""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, isqrt
from typing import Sequence

import sympy

from heightlab.errors import BadHints, DegreeTooLarge
from heightlab.numlin.poly import RatPoly, poly_gcd

MAX_UNHINTED_DEGREE = 12

Factorization = list[tuple[RatPoly, int]]


def squarefree_decomposition(p: RatPoly) -> Factorization:
    """Yun's algorithm; returns monic squarefree parts with increasing multiplicity."""
    if p.is_zero():
        raise ValueError("squarefree decomposition of the zero polynomial")
    p = p.monic()
    if p.degree == 0:
        return []
    out = []
    dp = p.derivative()
    a = poly_gcd(p, dp)
    b = p.exact_div(a)
    c = dp.exact_div(a)
    d = c - b.derivative()
    i = 1
    while b.degree > 0:
        g = poly_gcd(b, d)
        b = b.exact_div(g)
        c = d.exact_div(g)
        d = c - b.derivative()
        if g.degree > 0:
            out.append((g, i))
        i += 1
    return out


def _sort_key(item: tuple[RatPoly, int]):
    q, m = item
    return (q.degree, m, [float(c) for c in q.coeffs])


def factor_rational(p: RatPoly, hints: Sequence[RatPoly] | None = None) -> Factorization:
    """Full factorization over Q into monic irreducibles with multiplicities.

    Without hints, degree must be at most 12. With hints, the product of the
    hint factors must reproduce ``p`` up to a constant, and each distinct hint
    must be certified irreducible.
    """
    if p.is_zero():
        raise ValueError("cannot factor the zero polynomial")
    if hints is not None:
        return _factor_with_hints(p, hints)
    if p.degree > MAX_UNHINTED_DEGREE:
        raise DegreeTooLarge(f"degree {p.degree} exceeds {MAX_UNHINTED_DEGREE}; supply hints")
    if p.degree == 0:
        return []
    t = sympy.Symbol("t")
    expr = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(p.coeffs)], t, domain="QQ")
    _, facs = expr.factor_list()
    out = []
    for f, m in facs:
        coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(f.all_coeffs())]
        out.append((RatPoly(coeffs).monic(), int(m)))
    out.sort(key=_sort_key)
    return out


def _factor_with_hints(p: RatPoly, hints: Sequence[RatPoly]) -> Factorization:
    prod = RatPoly([1])
    for h in hints:
        prod = prod * h
    if prod.monic() != p.monic():
        raise BadHints("product of hints does not reproduce the polynomial")
    counts: dict[RatPoly, int] = {}
    for h in hints:
        if h.degree <= 0:
            continue
        counts[h.monic()] = counts.get(h.monic(), 0) + 1
    for q in counts:
        verdict = certify_irreducible(q)
        if verdict is False:
            raise BadHints(f"hint {q} is reducible")
        if verdict is None:
            raise BadHints(f"could not certify irreducibility of hint {q}")
    return sorted(counts.items(), key=_sort_key)


# --- irreducibility certificates ------------------------------------------

def _divisors(n: int, cap: int = 10**7) -> list[int] | None:
    n = abs(n)
    if n == 0:
        return [0]
    if n > cap * cap:
        return None
    small = [d for d in range(1, isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def rational_roots(p: RatPoly) -> list[Fraction] | None:
    """All rational roots by the rational-root test, or None if coefficients are too large."""
    ints = p.primitive_integer()
    roots = []
    while ints and ints[0] == 0:
        roots.append(Fraction(0))
        ints = ints[1:]
    if len(ints) <= 1:
        return roots
    num = _divisors(ints[0])
    den = _divisors(ints[-1])
    if num is None or den is None:
        return None
    q = RatPoly(ints)
    for a in num:
        for b in den:
            for s in (1, -1):
                r = Fraction(s * a, b)
                if r not in roots and q(r) == 0:
                    roots.append(r)
    return roots


def _quartic_has_quadratic_factor(p: RatPoly) -> bool | None:
    ints = p.primitive_integer()
    a4 = ints[4]
    # monic integral transform: a4^3 * p(t / a4)
    mon = [ints[k] * a4 ** (3 - k) if k <= 3 else 1 for k in range(4)] + [1]
    e, d, c, b = mon[0], mon[1], mon[2], mon[3]
    divs = _divisors(e)
    if divs is None:
        return None
    for v in divs:
        for v_signed in (v, -v):
            if v_signed == 0 or e % v_signed:
                continue
            z = e // v_signed
            s = c - v_signed - z
            disc = b * b - 4 * s
            if disc < 0:
                continue
            r = isqrt(disc)
            if r * r != disc or (b + r) % 2:
                continue
            for u in ((b + r) // 2, (b - r) // 2):
                w = b - u
                if u * z + v_signed * w == d:
                    return True
    return False


def _poly_mod_p(coeffs: list[int], p: int) -> list[int]:
    c = [x % p for x in coeffs]
    while c and c[-1] == 0:
        c.pop()
    return c


def _pm_mul(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _poly_mod_p(out, p)


def _pm_divmod(a: list[int], b: list[int], p: int) -> tuple[list[int], list[int]]:
    a = list(a)
    inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    for k in range(len(a) - len(b), -1, -1):
        c = a[k + len(b) - 1] * inv % p
        q[k] = c
        if c:
            for j, y in enumerate(b):
                a[k + j] = (a[k + j] - c * y) % p
    return _poly_mod_p(q, p), _poly_mod_p(a[: len(b) - 1], p)


def _pm_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    while b:
        a, b = b, _pm_divmod(a, b, p)[1]
    if not a:
        return a
    inv = pow(a[-1], -1, p)
    return [x * inv % p for x in a]


def _pm_powmod(base: list[int], e: int, mod: list[int], p: int) -> list[int]:
    result = [1]
    base = _pm_divmod(base, mod, p)[1]
    while e:
        if e & 1:
            result = _pm_divmod(_pm_mul(result, base, p), mod, p)[1]
        base = _pm_divmod(_pm_mul(base, base, p), mod, p)[1]
        e >>= 1
    return result


def distinct_degree_pattern(coeffs: list[int], p: int) -> list[int] | None:
    """Degrees of the irreducible factors of a squarefree polynomial mod p.

    Returns None if the reduction drops degree or is not squarefree.
    """
    f = _poly_mod_p(coeffs, p)
    if len(f) != len(coeffs):
        return None
    df = _poly_mod_p([k * c for k, c in enumerate(f)][1:], p)
    if len(_pm_gcd(f, df, p)) > 1:
        return None
    degrees = []
    h = [0, 1]
    d = 0
    while len(f) - 1 >= 2 * (d + 1):
        d += 1
        h = _pm_powmod(h, p, f, p)
        diff = list(h) + [0] * max(0, 2 - len(h))
        diff[1] = (diff[1] - 1) % p
        g = _pm_gcd(f, _poly_mod_p(diff, p), p)
        if len(g) > 1:
            degrees += [d] * ((len(g) - 1) // d)
            f = _pm_divmod(f, g, p)[0]
            h = _pm_divmod(h, f, p)[1] if len(f) > 1 else h
    if len(f) > 1:
        degrees.append(len(f) - 1)
    return sorted(degrees)


def _subset_sums(degrees: list[int]) -> set[int]:
    sums = {0}
    for d in degrees:
        sums |= {s + d for s in sums}
    return sums


def modular_irreducibility_certificate(q: RatPoly, primes: int = 60) -> bool:
    """True if factor-degree patterns modulo small primes exclude every proper factor."""
    ints = q.primitive_integer()
    n = len(ints) - 1
    possible = set(range(n + 1))
    p = 2
    tried = 0
    while tried < primes:
        p = int(sympy.nextprime(p))
        pattern = distinct_degree_pattern(ints, p)
        if pattern is None:
            continue
        tried += 1
        possible &= _subset_sums(pattern)
        if possible <= {0, n}:
            return True
    return False


def certify_irreducible(q: RatPoly) -> bool | None:
    """True (certified irreducible), False (certified reducible), or None (undecided)."""
    n = q.degree
    if n <= 0:
        return False
    if n == 1:
        return True
    if n <= 3:
        roots = rational_roots(q)
        if roots is not None:
            return not roots
    elif n == 4:
        roots = rational_roots(q)
        if roots:
            return False
        if roots is not None:
            split = _quartic_has_quadratic_factor(q)
            if split is not None:
                return not split
    if modular_irreducibility_certificate(q):
        return True
    if n <= MAX_UNHINTED_DEGREE:
        return len(factor_rational(q)) == 1 and factor_rational(q)[0][1] == 1
    return None


def content_gcd(values) -> int:
    return reduce(gcd, values, 0)
