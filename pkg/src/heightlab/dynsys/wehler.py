"""Surfaces of tridegree (2, 2, 2) in P^1 x P^1 x P^1 and their Vieta involutions."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import gmpy2
import sympy

from heightlab.errors import DegenerateFiber, InputError
from heightlab.heights.projective import ProjectivePoint, weil_height
from heightlab.numlin.balls import BallReal
from heightlab.numlin.matrix import RatMatrix

AXES = ("x", "y", "z")

S_X = RatMatrix([[-1, 2, 2], [0, 1, 0], [0, 0, 1]])
S_Y = RatMatrix([[1, 0, 0], [2, -1, 2], [0, 0, 1]])
S_Z = RatMatrix([[1, 0, 0], [0, 1, 0], [2, 2, -1]])
PICARD_GENERATORS = {"x": S_X, "y": S_Y, "z": S_Z}

# intersection form on the span of the three fiber classes; S Q S^T = Q for every
# generator, so the transposes are the isometries
INTERSECTION_FORM = RatMatrix([[0, 2, 2], [2, 0, 2], [2, 2, 0]])


def _axis(a: str) -> str:
    a = a.strip().lower()
    if a.startswith("sigma"):
        a = a[5:]
    a = a.lstrip("σ_")
    if a not in AXES:
        raise InputError(f"unknown involution {a!r}; expected one of x, y, z")
    return a


def _mono(u0, u1):
    return (u0 * u0, u0 * u1, u1 * u1)


@dataclass(frozen=True)
class WehlerPoint:
    x: ProjectivePoint
    y: ProjectivePoint
    z: ProjectivePoint

    def coords(self) -> tuple[ProjectivePoint, ProjectivePoint, ProjectivePoint]:
        return (self.x, self.y, self.z)

    def key(self) -> tuple:
        return (self.x.coords, self.y.coords, self.z.coords)

    def __str__(self) -> str:
        return f"[{self.x}, {self.y}, {self.z}]"


class WehlerSystem:
    """A (2,2,2) form ``F`` with 27 coefficients ``c[i][j][k]`` and an involution word.

    ``F = sum c[i][j][k] m_i(x) m_j(y) m_k(z)`` with ``m_0 = u0^2``,
    ``m_1 = u0 u1``, ``m_2 = u1^2``. The word lists involutions in
    composition order: ``["x", "y"]`` is ``sigma_x o sigma_y``.
    """

    def __init__(self, form_coeffs: Sequence, word: Sequence[str], label: str = "", screen: bool = True):
        flat = list(_flatten(form_coeffs))
        if len(flat) != 27:
            raise InputError(f"expected 27 coefficients, got {len(flat)}", "form")
        try:
            flat = [int(str(c).strip()) if not isinstance(c, int) else c for c in flat]
        except ValueError:
            raise InputError("form coefficients must be integers", "form") from None
        if not any(flat):
            raise InputError("the zero form defines no surface", "form")
        self.coeffs = tuple(tuple(tuple(flat[9 * i + 3 * j + k] for k in range(3)) for j in range(3)) for i in range(3))
        self.word = tuple(_axis(w) for w in word)
        if not self.word:
            raise InputError("empty involution word", "word")
        self.label = label
        for s in PICARD_GENERATORS.values():
            assert s @ s == RatMatrix.identity(3)
        if screen:
            factors = self.visible_factors()
            if len(factors) > 1 or factors[0][1] > 1:
                raise InputError("the form splits over Q; not an irreducible surface", "form")

    @property
    def picard_matrices(self) -> tuple[RatMatrix, RatMatrix, RatMatrix]:
        return (S_X, S_Y, S_Z)

    def visible_factors(self):
        u0, u1, v0, v1, w0, w1 = sympy.symbols("u0 u1 v0 v1 w0 w1")
        expr = self.evaluate_symbolic(u0, u1, v0, v1, w0, w1)
        _, facs = sympy.factor_list(sympy.expand(expr))
        return [(f, m) for f, m in facs if f.free_symbols]

    def evaluate_symbolic(self, u0, u1, v0, v1, w0, w1):
        mx, my, mz = _mono(u0, u1), _mono(v0, v1), _mono(w0, w1)
        return sum(self.coeffs[i][j][k] * mx[i] * my[j] * mz[k]
                   for i in range(3) for j in range(3) for k in range(3) if self.coeffs[i][j][k])

    def evaluate(self, x: Sequence[int], y: Sequence[int], z: Sequence[int]) -> int:
        return self.evaluate_symbolic(*x, *y, *z)

    def contains(self, P: WehlerPoint) -> bool:
        return self.evaluate(P.x.coords, P.y.coords, P.z.coords) == 0

    def point(self, x: ProjectivePoint, y: ProjectivePoint, z: ProjectivePoint) -> WehlerPoint:
        P = WehlerPoint(x, y, z)
        if not self.contains(P):
            raise InputError(f"{P} does not lie on the surface")
        return P

    def fiber_quadratic(self, axis: str, P: WehlerPoint) -> tuple[int, int, int]:
        """Coefficients ``(A, B, C)`` of ``F`` as a form ``A u0^2 + B u0 u1 + C u1^2`` in the axis."""
        axis = _axis(axis)
        c = self.coeffs
        ms = [_mono(*(gmpy2.mpz(t) for t in Q.coords)) for Q in P.coords()]
        out = []
        for e in range(3):
            acc = gmpy2.mpz(0)
            for a in range(3):
                for b in range(3):
                    if axis == "x":
                        coef, m1, m2 = c[e][a][b], ms[1][a], ms[2][b]
                    elif axis == "y":
                        coef, m1, m2 = c[a][e][b], ms[0][a], ms[2][b]
                    else:
                        coef, m1, m2 = c[a][b][e], ms[0][a], ms[1][b]
                    if coef:
                        acc += coef * m1 * m2
            out.append(acc)
        return out[0], out[1], out[2]

    def __call__(self, P: WehlerPoint) -> WehlerPoint:
        for a in reversed(self.word):
            P = wehler_involution(self, a, P)
        return P

    def apply_within(self, P: WehlerPoint, digits_budget: int) -> WehlerPoint | None:
        """``f(P)``, or None if some intermediate coordinate would exceed ``digits_budget`` digits.

        An involution along an axis replaces that coordinate by one of size
        about twice the other two combined minus its own, which is checked
        before the quadratic is formed.
        """
        for a in reversed(self.word):
            idx = AXES.index(a)
            sizes = [_digits_of(Q) for Q in P.coords()]
            if 2 * (sum(sizes) - sizes[idx]) - sizes[idx] > digits_budget:
                return None
            P = wehler_involution(self, a, P)
        return P

    def iterate(self, k: int) -> WehlerSystem:
        return WehlerSystem(list(_flatten(self.coeffs)), self.word * k, self.label, screen=False)

    def height(self, P: WehlerPoint, precision_bits: int | None = None) -> BallReal:
        """Ample height ``h(x) + h(y) + h(z)``."""
        total = BallReal.exact(0, precision_bits)
        for Q in P.coords():
            total = total + weil_height(Q, precision_bits).value
        return total

    def height_vector(self, P: WehlerPoint, precision_bits: int | None = None) -> tuple[BallReal, ...]:
        return tuple(weil_height(Q, precision_bits).value for Q in P.coords())

    def digits(self, P: WehlerPoint) -> int:
        return max(max(abs(c) for c in Q.coords).bit_length() for Q in P.coords()) * 30103 // 100000 + 1

    @cached_property
    def picard(self):
        from heightlab.dynsys.picard import wehler_picard

        return wehler_picard(self)


def _digits_of(Q: ProjectivePoint) -> int:
    return max(abs(c) for c in Q.coords).bit_length() * 30103 // 100000 + 1


def _flatten(c):
    if isinstance(c, (list, tuple)):
        for x in c:
            yield from _flatten(x)
    else:
        yield c


def _canonical_pair(a, b) -> ProjectivePoint:
    g = gmpy2.gcd(a, b)
    a, b = a // g, b // g
    if a < 0 or (a == 0 and b < 0):
        a, b = -a, -b
    return ProjectivePoint((int(a), int(b)))


def wehler_involution(S: WehlerSystem, axis: str, P: WehlerPoint) -> WehlerPoint:
    """Swap the axis coordinate of ``P`` for the other root of its fiber quadratic.

    With ``(p : q)`` one root of ``A u0^2 + B u0 u1 + C u1^2``, the other root is
    ``(-Bq - Ap : Aq)``, or ``(Cp : -Bp - Cq)`` when that vanishes. Both vanish
    only if the whole fiber lies on the surface.
    """
    axis = _axis(axis)
    idx = AXES.index(axis)
    A, B, C = S.fiber_quadratic(axis, P)
    p, q = (gmpy2.mpz(t) for t in P.coords()[idx].coords)
    if A * p * p + B * p * q + C * q * q != 0:
        raise InputError(f"{P} does not lie on the surface")
    a, b = -B * q - A * p, A * q
    if a == 0 and b == 0:
        a, b = C * p, -B * p - C * q
    if a == 0 and b == 0:
        raise DegenerateFiber(f"the {axis}-fiber through {P} lies on the surface")
    new = _canonical_pair(a, b)
    coords = list(P.coords())
    coords[idx] = new
    return WehlerPoint(*coords)


__all__ = ["INTERSECTION_FORM", "PICARD_GENERATORS", "WehlerPoint", "WehlerSystem", "wehler_involution"]
