"""Uniform access to the supported systems: evaluation, heights, sizes and
hashable encodings of points."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from heightlab.dynsys.lattice import ConcreteAbelianSystem, LatticeSystem
from heightlab.dynsys.p1 import P1Morphism, p1_apply
from heightlab.dynsys.picard import PicardAction, ProductSystem
from heightlab.dynsys.wehler import WehlerPoint, WehlerSystem
from heightlab.heights.projective import ProjectivePoint, weil_height
from heightlab.numlin.balls import BallReal, default_precision


@dataclass(frozen=True)
class PointHeight:
    ball: BallReal
    exact: Fraction | None = None
    core: int | None = None


def apply(S, x):
    if isinstance(S, P1Morphism):
        return p1_apply(S, x)
    if isinstance(S, PicardAction):
        raise TypeError("a Picard action has no points to iterate")
    return S(x)


def height(S, x, precision_bits: int | None = None) -> PointHeight:
    """The ample height each system kind is measured with."""
    bits = precision_bits or default_precision()
    if isinstance(S, P1Morphism):
        hv = weil_height(x, bits)
        return PointHeight(hv.value, None, hv.exact_core)
    if isinstance(S, LatticeSystem):
        h = S.height(x)
        if isinstance(h, Fraction):
            return PointHeight(BallReal.exact(h, bits), h)
        return PointHeight(h)
    if isinstance(S, ConcreteAbelianSystem):
        return PointHeight(S.height(x))
    if isinstance(S, WehlerSystem):
        return PointHeight(S.height(x, bits))
    if isinstance(S, ProductSystem):
        a = height(S.left, x[0], bits)
        b = height(S.right, x[1], bits)
        exact = a.exact + b.exact if a.exact is not None and b.exact is not None else None
        return PointHeight(a.ball + b.ball, exact)
    raise TypeError(f"no height for {type(S).__name__}")


def size_digits(S, x) -> int:
    """Decimal size of the largest integer needed to write ``x``."""
    if isinstance(x, ProjectivePoint):
        return _digits(max(abs(c) for c in x.coords))
    if isinstance(x, WehlerPoint):
        return max(size_digits(None, c) for c in x.coords())
    if isinstance(S, ProductSystem):
        return max(size_digits(S.left, x[0]), size_digits(S.right, x[1]))
    if isinstance(S, ConcreteAbelianSystem):
        return max((_digits(max(abs(P.x.numerator), P.x.denominator)) for P in x if not P.is_zero), default=1)
    if isinstance(S, LatticeSystem):
        return max(_digits(max(abs(c.numerator), c.denominator)) for c in x)
    return 1


def _digits(n: int) -> int:
    return max(1, n.bit_length() * 30103 // 100000 + 1)


def encode(S, x) -> Any:
    """Hashable exact encoding; equal encodings mean equal points."""
    if isinstance(x, ProjectivePoint):
        return x.coords
    if isinstance(x, WehlerPoint):
        return x.key()
    if isinstance(S, ProductSystem):
        return (encode(S.left, x[0]), encode(S.right, x[1]))
    if isinstance(S, ConcreteAbelianSystem):
        return tuple(P.key() for P in x)
    if isinstance(S, LatticeSystem):
        return tuple(x)
    return x


__all__ = ["PointHeight", "apply", "encode", "height", "size_digits"]
