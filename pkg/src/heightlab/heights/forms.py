"""Height distortion bounds for a pair of binary forms.

For coprime integers ``(X, Z)`` and forms ``F, G`` of degree ``d`` with
nonzero resultant, the map ``(X : Z) -> (F : G)`` satisfies

    -log C_low <= h(F : G) - d * h(X : Z) <= log C_up

with ``C_up`` the larger coefficient 1-norm and ``C_low`` read off a
Bezout identity ``f F + g G = Res * X^(2d-1)`` (and the same for ``Z``).
The gcd of ``F(X, Z)`` and ``G(X, Z)`` divides the resultant, so the
resultant cancels out of the lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from heightlab.errors import NotAMorphism
from heightlab.numlin.balls import BallReal, default_precision
from heightlab.numlin.matrix import det_int, solve
from heightlab.numlin.poly import sylvester_matrix


@dataclass(frozen=True)
class FormBounds:
    degree: int
    resultant: int
    upper: int  # C_up
    lower: Fraction  # C_low

    def log_upper(self, bits: int | None = None) -> BallReal:
        return BallReal.exact(self.upper, bits).log()

    def log_lower(self, bits: int | None = None) -> BallReal:
        return BallReal.exact(self.lower, bits).log()

    def constant(self, bits: int | None = None) -> BallReal:
        """``max(log C_up, log C_low)``: bound on ``|h(phi Q) - d h(Q)|``."""
        bits = bits or default_precision()
        a = self.log_upper(bits)
        b = self.log_lower(bits)
        return BallReal.from_bounds(0, max(a.upper_fraction(), b.upper_fraction()), bits)


def bezout_cofactors(F: Sequence[int], G: Sequence[int], target: int) -> tuple[list[Fraction], list[Fraction]]:
    """Forms ``f, g`` of degree ``d-1`` with ``f F + g G = Res * X^(2d-1-target) Z^target``."""
    d = len(F) - 1
    S = sylvester_matrix(F, G)
    res = det_int(S)
    if res == 0:
        raise NotAMorphism("forms share a common root")
    # rows of S are the shifted multiples of F then of G; solve S^T c = rhs
    ST = [[S[i][j] for i in range(2 * d)] for j in range(2 * d)]
    rhs = [0] * (2 * d)
    rhs[target] = res
    c = solve(ST, rhs)
    assert c is not None
    return list(c[:d]), list(c[d:])


def form_bounds(F: Sequence[int], G: Sequence[int]) -> FormBounds:
    """Distortion constants for ``(F : G)``, both given as descending coefficient lists."""
    if len(F) != len(G):
        raise ValueError("forms must have the same degree")
    d = len(F) - 1
    S = sylvester_matrix(F, G)
    res = det_int(S)
    if res == 0:
        raise NotAMorphism("forms share a common root")
    upper = max(sum(abs(c) for c in F), sum(abs(c) for c in G))
    worst = Fraction(0)
    for target in (0, 2 * d - 1):
        f, g = bezout_cofactors(F, G, target)
        worst = max(worst, sum(abs(x) for x in f) + sum(abs(x) for x in g))
    return FormBounds(d, res, upper, max(worst, Fraction(1)))
