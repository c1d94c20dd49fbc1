"""Linear actions on Neron-Severi lattices and product systems.

Also home to the spectral summary ``(delta, l)`` of every supported system.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from heightlab.errors import ConeViolation, InputError, PrecisionExhausted
from heightlab.numlin.balls import BallReal, default_precision
from heightlab.numlin.matrix import RatMatrix
from heightlab.numlin.spectral import EXACT, NUMERIC, SpectralData, spectral_data


@dataclass(frozen=True)
class PicardAction:
    """Matrix of ``f^*`` on a rank-``n`` lattice, optionally with a preserved cone.

    An ``invariant_form`` ``Q`` must satisfy ``M Q M^T = Q``.
    """

    matrix: RatMatrix
    cone_generators: tuple[tuple[Fraction, ...], ...] | None = None
    label: str = ""
    invariant_form: RatMatrix | None = None

    def __post_init__(self):
        if self.cone_generators is not None and len(self.cone_generators) < self.matrix.dimension:
            raise ConeViolation("a full-dimensional cone needs at least as many generators as the rank", "cone_generators")
        Q = self.invariant_form
        if Q is not None and self.matrix @ Q @ self.matrix.transpose() != Q:
            raise InputError("the matrix does not preserve the invariant form", "invariant_form")

    def iterate(self, k: int) -> PicardAction:
        return PicardAction(self.matrix ** k, self.cone_generators, self.label, self.invariant_form)


def wehler_picard(S) -> PicardAction:
    """Product of the generator matrices in word order."""
    from heightlab.dynsys.wehler import INTERSECTION_FORM, PICARD_GENERATORS

    M = RatMatrix.identity(3)
    for a in S.word:
        M = M @ PICARD_GENERATORS[a]
    return PicardAction(M, None, S.label or "wehler", INTERSECTION_FORM)


@dataclass(frozen=True)
class ProductSystem:
    left: Any
    right: Any
    label: str = ""

    def __call__(self, point):
        x, y = point
        return (self.left(x), self.right(y))

    def iterate(self, k: int) -> ProductSystem:
        return ProductSystem(self.left.iterate(k), self.right.iterate(k), self.label)


@dataclass(frozen=True)
class SystemSpectral:
    """``(delta_f, l_f)`` with provenance.

    ``delta_key`` identifies delta symbolically (an exact rational, or a
    dominant polynomial and a power) so that equal dynamical degrees can
    be recognized exactly. ``l_upper_bound`` marks values that only bound
    ``l_f`` from above.
    """

    delta: BallReal
    l: int
    tag: str
    certification: str
    delta_exact: Fraction | None = None
    delta_key: tuple | None = None
    l_upper_bound: bool = False
    spectral: SpectralData | None = None

    def as_pair(self) -> tuple[BallReal, int]:
        return self.delta, self.l


def _key_from_spectral(sd: SpectralData, power: int) -> tuple:
    if sd.exact_rho_sq is not None and power % 2 == 0:
        return ("q", sd.exact_rho_sq ** (power // 2))
    return ("root", tuple(df.poly for df in sd.dominant_factors), power)


def _from_matrix(M, power: int, tag: str, l_factor: int, upper: bool, bits: int | None) -> SystemSpectral:
    sd = spectral_data(M, bits)
    rho = sd.rho
    delta = rho ** power if power > 1 else rho
    exact = None
    if sd.exact_rho_sq is not None and power == 2:
        exact = sd.exact_rho_sq
        delta = BallReal.exact(exact, bits)
    elif power == 1 and rho.lower == rho.upper:
        exact = rho.lower_fraction()
    return SystemSpectral(delta, l_factor * sd.jordan_exponent, tag, sd.certification, exact,
                          ("q", exact) if exact is not None else _key_from_spectral(sd, power), upper, sd)


def system_spectral(S, precision_bits: int | None = None) -> SystemSpectral:
    """Dynamical degree enclosure and growth exponent for any supported system."""
    from heightlab.dynsys.lattice import ConcreteAbelianSystem, LatticeSystem
    from heightlab.dynsys.p1 import P1Morphism
    from heightlab.dynsys.wehler import WehlerSystem

    bits = precision_bits or default_precision()
    if isinstance(S, P1Morphism):
        d = Fraction(S.degree)
        return SystemSpectral(BallReal.exact(d, bits), 0, "polarized", EXACT, d, ("q", d))
    if isinstance(S, LatticeSystem):
        return _from_matrix(S.matrix, 2, "abelian", 2, False, bits)
    if isinstance(S, ConcreteAbelianSystem):
        return _from_matrix(S.matrix, 2, "abelian", 2, False, bits)
    if isinstance(S, WehlerSystem):
        out = _from_matrix(S.picard.matrix, 1, "surface-automorphism", 0, False, bits)
        return out
    if isinstance(S, PicardAction):
        return _from_matrix(S.matrix, 1, "picard-upper-bound", 1, True, bits)
    if isinstance(S, ProductSystem):
        a = system_spectral(S.left, bits)
        b = system_spectral(S.right, bits)
        return lexicographic_max(a, b)
    raise TypeError(f"unsupported system {type(S).__name__}")


def lexicographic_max(a: SystemSpectral, b: SystemSpectral) -> SystemSpectral:
    """The larger of two ``(delta, l)`` pairs; equal deltas must be provably equal."""
    if a.delta.certainly_gt(b.delta):
        return a
    if b.delta.certainly_gt(a.delta):
        return b
    if a.delta_key is None or a.delta_key != b.delta_key:
        raise PrecisionExhausted("dynamical degrees overlap but are not provably equal")
    win = a if a.l >= b.l else b
    cert = EXACT if a.certification == EXACT and b.certification == EXACT else NUMERIC
    return SystemSpectral(win.delta, win.l, "product", cert, win.delta_exact, win.delta_key,
                          a.l_upper_bound or b.l_upper_bound, win.spectral)


__all__ = ["PicardAction", "ProductSystem", "SystemSpectral", "lexicographic_max", "system_spectral",
           "wehler_picard"]
