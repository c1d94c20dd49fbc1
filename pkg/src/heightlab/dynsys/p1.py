"""Endomorphisms of the projective line given by a pair of binary forms."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import gmpy2

from heightlab.errors import DegreeTooSmall, InputError, NotAMorphism
from heightlab.heights.forms import FormBounds, form_bounds
from heightlab.heights.projective import ProjectivePoint, normalize
from heightlab.numlin.poly import resultant_int


def _ints(coeffs: Sequence, path: str) -> tuple[int, ...]:
    out = []
    for i, c in enumerate(coeffs):
        try:
            v = int(str(c).strip()) if not isinstance(c, int) else c
        except ValueError:
            raise InputError(f"coefficient {c!r} is not an integer", f"{path}[{i}]") from None
        out.append(v)
    return tuple(out)


def eval_form(coeffs: Sequence[int], X, Y):
    """``sum c_k X^(d-k) Y^k`` by Horner in two variables."""
    acc = 0
    yp = 1
    for c in coeffs:
        acc = acc * X + c * yp
        yp *= Y
    return acc


def form_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _form_pow(a: Sequence[int], n: int) -> list[int]:
    out = [1]
    for _ in range(n):
        out = form_mul(out, a)
    return out


@dataclass(frozen=True)
class P1Morphism:
    """``(X : Y) -> (F(X, Y) : G(X, Y))``; coefficients are descending in ``X``."""

    numerator: tuple[int, ...]
    denominator: tuple[int, ...]
    resultant: int

    @property
    def degree(self) -> int:
        return len(self.numerator) - 1

    @cached_property
    def bounds(self) -> FormBounds:
        return form_bounds(self.numerator, self.denominator)

    def __call__(self, P: ProjectivePoint) -> ProjectivePoint:
        return p1_apply(self, P)

    def compose(self, other: P1Morphism) -> P1Morphism:
        """``self o other``."""
        d = self.degree
        G0, G1 = other.numerator, other.denominator
        powers0 = [_form_pow(G0, k) for k in range(d + 1)]
        powers1 = [_form_pow(G1, k) for k in range(d + 1)]

        def substitute(F):
            total = [0] * (d * other.degree + 1)
            for k, c in enumerate(F):
                if c:
                    term = form_mul(powers0[d - k], powers1[k])
                    for i, t in enumerate(term):
                        total[i] += c * t
            return total

        return p1_validate(substitute(self.numerator), substitute(self.denominator))

    def iterate(self, k: int) -> P1Morphism:
        out = self
        for _ in range(k - 1):
            out = self.compose(out)
        return out

    def describe(self) -> str:
        return f"P1 morphism of degree {self.degree}: F={list(self.numerator)}, G={list(self.denominator)}"


def p1_validate(numerator: Sequence, denominator: Sequence) -> P1Morphism:
    """Check that the forms define a morphism of degree at least 2."""
    F = _ints(numerator, "numerator")
    G = _ints(denominator, "denominator")
    if len(F) != len(G):
        raise InputError("numerator and denominator must list the same number of coefficients")
    if len(F) - 1 <= 1:
        raise DegreeTooSmall(f"degree {len(F) - 1} map; dynamical degree must exceed 1")
    res = resultant_int(F, G)
    if res == 0:
        raise NotAMorphism("the forms have a common zero; not a morphism")
    return P1Morphism(F, G, res)


def p1_apply(f: P1Morphism, P: ProjectivePoint) -> ProjectivePoint:
    X, Y = (gmpy2.mpz(c) for c in P.coords)
    a = eval_form(f.numerator, X, Y)
    b = eval_form(f.denominator, X, Y)
    # for coprime X, Y the common factor of a and b divides the resultant
    R = abs(gmpy2.mpz(f.resultant))
    g = gmpy2.gcd(gmpy2.gcd(a % R, b % R), R)
    a, b = a // g, b // g
    if a < 0 or (a == 0 and b < 0):
        a, b = -a, -b
    return ProjectivePoint.trusted((int(a), int(b)))


def polynomial_map(coeffs: Sequence) -> P1Morphism:
    """``z -> c_d z^d + ... + c_0`` with ascending integer coefficients."""
    c = _ints(coeffs, "coefficients")
    d = len(c) - 1
    num = tuple(reversed(c))
    den = tuple([0] * d + [1])
    return p1_validate(num, den)


__all__ = ["P1Morphism", "eval_form", "normalize", "p1_apply", "p1_validate", "polynomial_map"]
