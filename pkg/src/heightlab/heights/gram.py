"""Gram forms: the Neron-Tate pairing extended to lattice coordinates."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from heightlab.errors import DimensionMismatch, InputError
from heightlab.heights.elliptic import EPoint
from heightlab.heights.neron_tate import neron_tate, nt_pairing
from heightlab.numlin.balls import BallReal
from heightlab.numlin.matrix import RatMatrix, omega_action


def _is_psd(G: RatMatrix) -> bool:
    """Exact positive semidefiniteness by symmetric elimination."""
    a = [list(r) for r in G.rows]
    n = len(a)
    alive = list(range(n))
    while alive:
        k = alive[0]
        piv = a[k][k]
        if piv < 0:
            return False
        if piv == 0:
            if any(a[k][j] != 0 for j in alive):
                return False
            alive.pop(0)
            continue
        for i in alive[1:]:
            f = a[i][k] / piv
            if f:
                for j in alive:
                    a[i][j] -= f * a[k][j]
        alive.pop(0)
    return True


class GramForm:
    """A symmetric positive semidefinite form on ``Q^rank``.

    ``gram`` is either a :class:`RatMatrix` (exact) or a square list of
    :class:`BallReal` entries (computed heights). With ``cm_action`` set,
    the form must satisfy ``J^T G J = d G``.
    """

    __slots__ = ("rank", "gram", "cm_action", "cm_d")

    def __init__(self, gram, cm_action: RatMatrix | None = None, cm_d: int = 0):
        if isinstance(gram, RatMatrix):
            rank = gram.dimension
            if gram.transpose() != gram:
                raise InputError("Gram matrix is not symmetric")
            if not _is_psd(gram):
                raise InputError("Gram matrix is not positive semidefinite")
        else:
            gram = [list(r) for r in gram]
            rank = len(gram)
            if any(len(r) != rank for r in gram):
                raise DimensionMismatch("Gram matrix must be square")
            for i in range(rank):
                for j in range(i):
                    if not gram[i][j].overlaps(gram[j][i]):
                        raise InputError("Gram matrix is not symmetric")
        if cm_action is not None:
            if cm_action.dimension != rank:
                raise DimensionMismatch("CM action and Gram form differ in rank")
            if cm_action @ cm_action != RatMatrix.identity(rank).scale(-cm_d):
                raise InputError(f"CM action does not square to -{cm_d}")
            if isinstance(gram, RatMatrix) and cm_action.transpose() @ gram @ cm_action != gram.scale(cm_d):
                raise InputError("Gram form is not compatible with the CM action")
        self.rank = rank
        self.gram = gram
        self.cm_action = cm_action
        self.cm_d = cm_d

    @classmethod
    def identity(cls, rank: int) -> GramForm:
        return cls(RatMatrix.identity(rank))

    @classmethod
    def cm(cls, base: RatMatrix, cm_d: int) -> GramForm:
        """The form on ``2r`` embedded coordinates induced by a hermitian-real base form.

        Coordinates pair up as ``(real, omega)``; the norm of ``a + b*omega``
        is ``a^2 + d b^2``, which is what makes ``J^T G J = d G`` hold.
        """
        r = base.dimension
        rows = [[Fraction(0)] * (2 * r) for _ in range(2 * r)]
        for i in range(r):
            for j in range(r):
                g = base.rows[i][j]
                rows[2 * i][2 * j] = g
                rows[2 * i + 1][2 * j + 1] = g * cm_d
        return cls(RatMatrix(rows), omega_action(r, cm_d), cm_d)

    @property
    def is_exact(self) -> bool:
        return isinstance(self.gram, RatMatrix)

    def entry(self, i: int, j: int):
        return self.gram.rows[i][j] if self.is_exact else self.gram[i][j]

    def minor2(self, i: int, j: int):
        return self.entry(i, i) * self.entry(j, j) - self.entry(i, j) * self.entry(j, i)

    def __repr__(self) -> str:
        return f"GramForm(rank={self.rank}, exact={self.is_exact}, cm_d={self.cm_d})"


def lattice_height(v: Sequence, G: GramForm):
    """``v^T G v``; a Fraction for exact forms, a ball otherwise."""
    if len(v) != G.rank:
        raise DimensionMismatch(f"vector of length {len(v)} for a rank {G.rank} form")
    v = [Fraction(x) for x in v]
    if G.is_exact:
        rows = G.gram.rows
        return sum((v[i] * rows[i][j] * v[j] for i in range(G.rank) for j in range(G.rank) if v[i] and v[j]),
                   Fraction(0))
    acc = BallReal.exact(0)
    for i in range(G.rank):
        for j in range(G.rank):
            if v[i] and v[j]:
                acc = acc + G.gram[i][j] * (v[i] * v[j])
    return acc


def gram_from_points(points: Sequence[EPoint], tolerance: float = 1e-10, precision_bits: int | None = None,
                     backend=None) -> GramForm:
    """Pairwise Neron-Tate pairings as a ball-valued Gram form."""
    height = backend or neron_tate
    k = len(points)
    diag = [height(P, tolerance, precision_bits).value for P in points]
    gram: list[list[BallReal]] = [[None] * k for _ in range(k)]  # type: ignore[list-item]
    for i in range(k):
        gram[i][i] = diag[i]
        for j in range(i + 1, k):
            s = height(points[i] + points[j], tolerance, precision_bits).value
            pij = (s - diag[i] - diag[j]) / 2
            gram[i][j] = gram[j][i] = pij
    return GramForm(gram)


__all__ = ["GramForm", "gram_from_points", "lattice_height", "nt_pairing"]
