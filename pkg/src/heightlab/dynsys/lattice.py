"""Abelian systems: affine maps on a lattice with a height form, and their concrete
realization on a power of an elliptic curve."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from heightlab.errors import DimensionMismatch, FactorizationNeeded, InputError
from heightlab.heights.elliptic import EllipticCurve, EPoint, ec_add, ec_mul
from heightlab.heights.gram import GramForm, lattice_height
from heightlab.heights.neron_tate import neron_tate, neron_tate_local
from heightlab.numlin.balls import BallReal
from heightlab.numlin.matrix import CMMatrix, RatMatrix, Vector, as_rational, vec


class LatticeSystem:
    """``v -> A v + p`` on ``Q^n`` with a Gram form measuring heights.

    A :class:`CMMatrix` of size ``r`` acts on ``2r`` embedded coordinates
    (real and omega parts interleaved); the Gram form then has rank ``2r``.
    """

    __slots__ = ("matrix", "translation", "gram", "label")

    def __init__(self, matrix: RatMatrix | CMMatrix, translation: Sequence | None = None,
                 gram: GramForm | None = None, label: str = ""):
        A = as_rational(matrix)
        n = A.dimension
        p = vec(translation) if translation is not None else tuple(Fraction(0) for _ in range(n))
        if len(p) != n:
            raise DimensionMismatch(f"translation has length {len(p)}, expected {n}", "translation")
        if gram is None:
            gram = GramForm.cm(RatMatrix.identity(n // 2), matrix.cm_d) if isinstance(matrix, CMMatrix) \
                and matrix.cm_d else GramForm.identity(n)
        if gram.rank != n:
            raise DimensionMismatch(f"Gram form has rank {gram.rank}, expected {n}", "gram")
        self.matrix = matrix
        self.translation = p
        self.gram = gram
        self.label = label

    @property
    def linear(self) -> RatMatrix:
        return as_rational(self.matrix)

    @property
    def dimension(self) -> int:
        return self.linear.dimension

    @property
    def cm_d(self) -> int:
        return self.matrix.cm_d if isinstance(self.matrix, CMMatrix) else 0

    @property
    def is_linear(self) -> bool:
        return not any(self.translation)

    def __call__(self, v: Sequence) -> Vector:
        return lattice_apply(self, v)

    def iterate(self, k: int) -> LatticeSystem:
        """The system ``f^k``: matrix ``A^k``, translation ``(A^(k-1) + ... + I) p``."""
        A = self.linear
        Ak = A ** k
        p = tuple(Fraction(0) for _ in range(self.dimension))
        for _ in range(k):
            p = tuple(a + b for a, b in zip(A.apply(p), self.translation))
        mat = Ak
        if isinstance(self.matrix, CMMatrix):
            mat = _cm_power(self.matrix, k)
        return LatticeSystem(mat, p, self.gram, self.label)

    def height(self, v: Sequence):
        return lattice_height(v, self.gram)


def _cm_power(M: CMMatrix, k: int) -> CMMatrix:
    a, b, d = M.real_part, M.omega_part, M.cm_d
    ra, rb = RatMatrix.identity(a.dimension), RatMatrix.zeros(a.dimension)
    for _ in range(k):
        # (ra + w rb)(a + w b) = ra a - d rb b + w (ra b + rb a)
        ra, rb = ra @ a - (rb @ b).scale(d), ra @ b + rb @ a
    return CMMatrix(ra, rb, d)


def lattice_apply(S: LatticeSystem, v: Sequence) -> Vector:
    v = vec(v)
    if len(v) != S.dimension:
        raise DimensionMismatch(f"point has length {len(v)}, expected {S.dimension}")
    return tuple(a + b for a, b in zip(S.linear.apply(v), S.translation))


class ConcreteAbelianSystem:
    """``x -> A x + t`` on ``E^r`` with an integer matrix acting through the group law."""

    __slots__ = ("curve", "matrix", "translation", "label")

    def __init__(self, curve: EllipticCurve, matrix: RatMatrix, translation: Sequence[EPoint] | None = None,
                 label: str = ""):
        if not matrix.is_integral():
            raise InputError("the matrix of a concrete abelian system must be integral", "matrix")
        r = matrix.dimension
        t = tuple(translation) if translation is not None else tuple(curve.zero() for _ in range(r))
        if len(t) != r:
            raise DimensionMismatch(f"translation has {len(t)} points, expected {r}", "translation")
        for P in t:
            if P.curve != curve:
                raise InputError("translation point lies on another curve", "translation")
        self.curve = curve
        self.matrix = matrix
        self.translation = t
        self.label = label

    @property
    def rank(self) -> int:
        return self.matrix.dimension

    def __call__(self, x: Sequence[EPoint]) -> tuple[EPoint, ...]:
        return concrete_apply(self, x)

    def height(self, x: Sequence[EPoint], tolerance: float = 1e-8) -> BallReal:
        """Coordinate sum of Neron-Tate heights.

        Orbit points get large quickly, so the local decomposition is used;
        its cost grows with the logarithm of the coordinates rather than with
        a doubling depth. Doubling is the fallback when the discriminant
        cannot be factored.
        """
        total = BallReal.exact(0)
        for P in x:
            try:
                h = neron_tate_local(P, tolerance)
            except FactorizationNeeded:
                h = neron_tate(P, tolerance)
            total = total + h.value
        return total

    def iterate(self, k: int) -> ConcreteAbelianSystem:
        A = self.matrix
        t = tuple(self.curve.zero() for _ in range(self.rank))
        for _ in range(k):
            t = tuple(ec_add(a, b) for a, b in zip(_act(A, t, self.curve), self.translation))
        return ConcreteAbelianSystem(self.curve, A ** k, t, self.label)

    def shadow(self, generator: EPoint, translation_coords: Sequence | None = None) -> LatticeSystem:
        """The lattice system seen on coordinates with respect to one generator.

        A point ``(c_1 g, ..., c_r g)`` has coordinates ``(c_1, ..., c_r)``; the
        translation must be given in the same coordinates. The Gram form is
        ``h(g) * I`` as a ball matrix.
        """
        hg = neron_tate(generator, 1e-10).value
        zero = BallReal.exact(0)
        gram = GramForm([[hg if i == j else zero for j in range(self.rank)] for i in range(self.rank)])
        return LatticeSystem(self.matrix, translation_coords, gram, self.label)


def _act(A: RatMatrix, x: Sequence[EPoint], curve: EllipticCurve) -> tuple[EPoint, ...]:
    out = []
    for row in A.rows:
        acc = curve.zero()
        for a, P in zip(row, x):
            if a:
                acc = ec_add(acc, ec_mul(int(a), P))
        out.append(acc)
    return tuple(out)


def concrete_apply(S: ConcreteAbelianSystem, x: Sequence[EPoint]) -> tuple[EPoint, ...]:
    if len(x) != S.rank:
        raise DimensionMismatch(f"point has {len(x)} coordinates, expected {S.rank}")
    return tuple(ec_add(a, b) for a, b in zip(_act(S.matrix, x, S.curve), S.translation))


__all__ = ["ConcreteAbelianSystem", "LatticeSystem", "concrete_apply", "lattice_apply"]
