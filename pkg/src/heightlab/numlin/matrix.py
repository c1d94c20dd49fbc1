"""Exact dense matrices over Q and over an imaginary quadratic order."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from heightlab.errors import DimensionMismatch
from heightlab.numlin.poly import RatPoly, poly_lcm

Vector = tuple[Fraction, ...]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def vec(values: Iterable) -> Vector:
    return tuple(_frac(v) for v in values)


def dot(a: Sequence, b: Sequence) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


class RatMatrix:
    """Square matrix with Fraction entries. Immutable."""

    __slots__ = ("rows", "dimension")

    def __init__(self, rows: Iterable[Iterable]):
        r = tuple(tuple(_frac(x) for x in row) for row in rows)
        n = len(r)
        if n == 0 or any(len(row) != n for row in r):
            raise DimensionMismatch("matrix must be square and non-empty")
        self.rows = r
        self.dimension = n

    @classmethod
    def identity(cls, n: int) -> RatMatrix:
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, n: int) -> RatMatrix:
        return cls([[0] * n for _ in range(n)])

    @classmethod
    def diag(cls, entries: Sequence) -> RatMatrix:
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def companion(cls, p: RatPoly) -> RatMatrix:
        p = p.monic()
        n = p.degree
        rows = [[0] * n for _ in range(n)]
        for i in range(1, n):
            rows[i][i - 1] = 1
        for i in range(n):
            rows[i][n - 1] = -p.coeffs[i]
        return cls(rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other) -> bool:
        return isinstance(other, RatMatrix) and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def __repr__(self) -> str:
        return "RatMatrix(" + repr([[str(x) for x in row] for row in self.rows]) + ")"

    def to_strings(self) -> list[list[str]]:
        return [[str(x) for x in row] for row in self.rows]

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for row in self.rows for x in row)

    def transpose(self) -> RatMatrix:
        return RatMatrix(zip(*self.rows))

    def column(self, j: int) -> Vector:
        return tuple(row[j] for row in self.rows)

    def __add__(self, other: RatMatrix) -> RatMatrix:
        self._check(other)
        return RatMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other: RatMatrix) -> RatMatrix:
        self._check(other)
        return RatMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self) -> RatMatrix:
        return RatMatrix([[-a for a in r] for r in self.rows])

    def scale(self, c) -> RatMatrix:
        c = _frac(c)
        return RatMatrix([[c * a for a in r] for r in self.rows])

    def __matmul__(self, other):
        if isinstance(other, RatMatrix):
            self._check(other)
            cols = list(zip(*other.rows))
            return RatMatrix([[dot(r, c) for c in cols] for r in self.rows])
        return self.apply(other)

    __mul__ = __matmul__

    def apply(self, v: Sequence) -> Vector:
        if len(v) != self.dimension:
            raise DimensionMismatch(f"vector of length {len(v)} for a {self.dimension}x{self.dimension} matrix")
        v = vec(v)
        return tuple(dot(r, v) for r in self.rows)

    def __pow__(self, n: int) -> RatMatrix:
        if n < 0:
            return self.inverse() ** (-n)
        result = RatMatrix.identity(self.dimension)
        base = self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def _check(self, other: RatMatrix) -> None:
        if other.dimension != self.dimension:
            raise DimensionMismatch("matrix dimensions differ")

    def eval_poly(self, p: RatPoly) -> RatMatrix:
        """Horner evaluation ``p(M)``."""
        n = self.dimension
        acc = RatMatrix.zeros(n)
        ident = RatMatrix.identity(n)
        for c in reversed(p.coeffs):
            acc = acc @ self + ident.scale(c)
        return acc

    def trace(self) -> Fraction:
        return sum((self.rows[i][i] for i in range(self.dimension)), Fraction(0))

    def det(self) -> Fraction:
        return det_frac([list(r) for r in self.rows])

    def rank(self) -> int:
        return len(rref([list(r) for r in self.rows])[1])

    def inverse(self) -> RatMatrix:
        n = self.dimension
        aug = [list(self.rows[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        red, piv = rref(aug)
        if piv[:n] != list(range(n)):
            raise ZeroDivisionError("singular matrix")
        return RatMatrix([row[n:] for row in red[:n]])

    def kernel(self) -> list[Vector]:
        return nullspace([list(r) for r in self.rows])

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.rows for x in r)

    def block_diag(self, other: RatMatrix) -> RatMatrix:
        n, m = self.dimension, other.dimension
        rows = [list(r) + [0] * m for r in self.rows]
        rows += [[0] * n + list(r) for r in other.rows]
        return RatMatrix(rows)


# --- rectangular helpers ---------------------------------------------------

def rref(rows: list[list]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns."""
    a = [[_frac(x) for x in r] for r in rows]
    if not a:
        return a, []
    m, n = len(a), len(a[0])
    piv = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(m):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        piv.append(c)
        r += 1
        if r == m:
            break
    return a, piv


def nullspace(rows: list[list]) -> list[Vector]:
    """Basis of ``{x : rows @ x = 0}``."""
    if not rows:
        return []
    n = len(rows[0])
    red, piv = rref(rows)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for i, c in enumerate(piv):
            x[c] = -red[i][f]
        basis.append(tuple(x))
    return basis


def column_space_basis(vectors: Sequence[Sequence]) -> list[Vector]:
    """A basis (reduced) of the span of the given vectors."""
    if not vectors:
        return []
    red, piv = rref([list(v) for v in vectors])
    return [tuple(red[i]) for i in range(len(piv))]


def in_span(v: Sequence, basis: Sequence[Sequence]) -> bool:
    if all(x == 0 for x in v):
        return True
    if not basis:
        return False
    return len(column_space_basis(list(basis) + [list(v)])) == len(column_space_basis(basis))


def solve(rows: list[list], rhs: Sequence) -> Vector | None:
    """One solution of ``rows @ x = rhs`` or None when inconsistent."""
    n = len(rows[0])
    aug = [list(r) + [_frac(b)] for r, b in zip(rows, rhs)]
    red, piv = rref(aug)
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for i, c in enumerate(piv):
        x[c] = red[i][n]
    return tuple(x)


def det_frac(rows: list[list]) -> Fraction:
    a = [[_frac(x) for x in r] for r in rows]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        inv = 1 / a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] * inv
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return det


def det_int(rows: list[list[int]]) -> int:
    """Bareiss fraction-free determinant of an integer matrix."""
    a = [list(map(int, r)) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            p = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if p is None:
                return 0
            a[k], a[p] = a[p], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def adjugate_int(rows: list[list[int]]) -> list[list[int]]:
    """Integer adjugate, via an exact inverse scaled by the determinant."""
    n = len(rows)
    d = det_int(rows)
    if d == 0:
        raise ZeroDivisionError("adjugate of a singular matrix is not needed here")
    inv = RatMatrix(rows).inverse()
    return [[int(inv.rows[i][j] * d) for j in range(n)] for i in range(n)]


# --- characteristic and minimal polynomials ------------------------------

def char_poly(M: RatMatrix) -> RatPoly:
    """``det(tI - M)`` via exact reduction to Hessenberg form."""
    n = M.dimension
    h = [list(r) for r in M.rows]
    for m in range(1, n - 1):
        p = next((i for i in range(m, n) if h[i][m - 1] != 0), None)
        if p is None:
            continue
        if p != m:
            h[p], h[m] = h[m], h[p]
            for row in h:
                row[p], row[m] = row[m], row[p]
        inv = 1 / h[m][m - 1]
        for i in range(m + 1, n):
            u = h[i][m - 1] * inv
            if u == 0:
                continue
            h[i] = [x - u * y for x, y in zip(h[i], h[m])]
            for row in h:
                row[m] += u * row[i]
    t = RatPoly([0, 1])
    polys = [RatPoly([1])]
    for m in range(1, n + 1):
        pm = (t - h[m - 1][m - 1]) * polys[m - 1]
        prod = Fraction(1)
        for i in range(m - 1, 0, -1):
            prod *= h[i][i - 1]
            if prod == 0:
                break
            pm = pm - polys[i - 1] * (h[i - 1][m - 1] * prod)
        polys.append(pm)
    return polys[n]


def vector_annihilator(M: RatMatrix, v: Sequence) -> RatPoly:
    """Monic least-degree ``p`` with ``p(M) v = 0``."""
    n = M.dimension
    basis: list[tuple[int, list[Fraction], list[Fraction]]] = []  # pivot, vector, combo
    w = list(vec(v))
    if all(x == 0 for x in w):
        return RatPoly([1])
    for k in range(n + 1):
        combo = [Fraction(0)] * (n + 1)
        combo[k] = Fraction(1)
        r = list(w)
        for piv, bv, bc in basis:
            f = r[piv]
            if f != 0:
                r = [x - f * y for x, y in zip(r, bv)]
                combo = [x - f * y for x, y in zip(combo, bc)]
        piv = next((i for i, x in enumerate(r) if x != 0), None)
        if piv is None:
            return RatPoly(combo).monic()
        inv = 1 / r[piv]
        basis.append((piv, [x * inv for x in r], [x * inv for x in combo]))
        w = list(M.apply(w))
    raise ArithmeticError("Krylov sequence failed to terminate")


def min_poly(M: RatMatrix) -> RatPoly:
    """Minimal polynomial as the lcm of the annihilators of the standard basis."""
    n = M.dimension
    result = RatPoly([1])
    for j in range(n):
        e = [0] * n
        e[j] = 1
        result = poly_lcm(result, vector_annihilator(M, e))
    return result


# --- imaginary quadratic entries ------------------------------------------

class CMMatrix:
    """Matrix over Q(omega) with omega^2 = -d, stored as ``real + omega * omega_part``."""

    __slots__ = ("real_part", "omega_part", "cm_d")

    def __init__(self, real_part: RatMatrix, omega_part: RatMatrix, cm_d: int):
        if real_part.dimension != omega_part.dimension:
            raise DimensionMismatch("real and omega parts differ in size")
        if cm_d < 0:
            raise ValueError("cm_d must be non-negative")
        self.real_part = real_part
        self.omega_part = omega_part
        self.cm_d = int(cm_d)

    @property
    def dimension(self) -> int:
        return self.real_part.dimension

    def embed(self) -> RatMatrix:
        """Regular representation: ``a + b*omega`` becomes ``[[a, -d*b], [b, a]]``.

        Coordinates of the embedded space come in pairs (real, omega) per
        original coordinate. For ``cm_d == 0`` the real part is returned.
        """
        if self.cm_d == 0:
            return self.real_part
        r = self.dimension
        d = self.cm_d
        rows = [[Fraction(0)] * (2 * r) for _ in range(2 * r)]
        for i in range(r):
            for j in range(r):
                a = self.real_part.rows[i][j]
                b = self.omega_part.rows[i][j]
                rows[2 * i][2 * j] = a
                rows[2 * i][2 * j + 1] = -d * b
                rows[2 * i + 1][2 * j] = b
                rows[2 * i + 1][2 * j + 1] = a
        return RatMatrix(rows)


def omega_action(rank: int, cm_d: int) -> RatMatrix:
    """Multiplication by omega on ``rank`` embedded coordinate pairs."""
    blocks = RatMatrix([[0, -cm_d], [1, 0]])
    out = blocks
    for _ in range(rank - 1):
        out = out.block_diag(blocks)
    return out


def as_rational(M) -> RatMatrix:
    return M.embed() if isinstance(M, CMMatrix) else M
