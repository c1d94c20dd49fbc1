"""Exact limits and height-zero loci for affine maps on lattices.

Write ``A = S + N`` (semisimple plus nilpotent, commuting). On the part of
the space where the Jordan blocks of maximal modulus have their largest
size ``l + 1``, the orbit satisfies

    A^n w ~ (n^l / l!) S^(n-l) N^l w,

so the normalized heights ``h(A^n w) / (rho^(2n) n^(2l))`` approach
``Q(R^(n-l) z) / (l! rho^l)^2`` with ``z = N^l w`` and ``R = S / rho``. ``R``
has all its eigenvalues on the unit circle there, so the limit points are
the values of ``Q`` along the ``R``-orbit of ``z``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Sequence

from heightlab.canonical.estimate import EMPIRICAL, EXACT_LATTICE, CanonicalEstimate
from heightlab.dynsys.lattice import LatticeSystem, lattice_apply
from heightlab.errors import InputError, MixedModulusFactor
from heightlab.heights.gram import GramForm, lattice_height
from heightlab.numlin.balls import BallReal, ball_max, ball_min, default_precision
from heightlab.numlin.factor import factor_rational
from heightlab.numlin.matrix import (
    CMMatrix, RatMatrix, Vector, as_rational, char_poly, column_space_basis, in_span, nullspace, solve,
    vector_annihilator,
)
from heightlab.numlin.poly import RatPoly, poly_gcd, poly_xgcd
from heightlab.numlin.roots import root_enclosures
from heightlab.numlin.spectral import EXACT, NUMERIC, SpectralData, spectral_data

MAX_FINITE_ORDER = 60


def jordan_chevalley(A: RatMatrix) -> tuple[RatMatrix, RatMatrix]:
    """Semisimple and nilpotent parts by Newton iteration on the squarefree minimal polynomial."""
    from heightlab.numlin.matrix import min_poly

    m = min_poly(A)
    q = m.exact_div(poly_gcd(m, m.derivative()))
    dq = q.derivative()
    S = A
    for _ in range(64):
        qS = S.eval_poly(q)
        if qS.is_zero():
            return S, A - S
        S = S - qS @ S.eval_poly(dq).inverse()
    raise ArithmeticError("Newton iteration for the semisimple part did not terminate")


def _top_projector(A: RatMatrix, sd: SpectralData) -> tuple[RatMatrix, list[RatPoly]]:
    """CRT idempotent onto the generalized eigenspaces of the largest dominant Jordan blocks."""
    l = sd.jordan_exponent
    top = [df.poly for df in sd.dominant_factors if df.jordan_size == l + 1]
    a = RatPoly([1])
    for p in top:
        a = a * p ** (l + 1)
    b = sd.min_poly.exact_div(a)
    g, s, t = poly_xgcd(a, b)
    assert g == RatPoly([1])
    return A.eval_poly(t * b), top


def _vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _vsub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _gram_value(v: Sequence, G: GramForm, bits: int):
    h = lattice_height(v, G)
    return BallReal.exact(h, bits) if isinstance(h, Fraction) else h


def _exact_ok(sd: SpectralData) -> str | None:
    """Reason the exact path is unavailable, or None."""
    if sd.exact_rho_sq is None:
        return "the squared spectral radius is not rational"
    if sd.exact_rho_sq == 0:
        return "nilpotent matrix"
    for df in sd.dominant_factors:
        if df.profile != "uniform":
            return f"dominant factor {df.poly} is not provably of uniform modulus"
    return None


def empirical_limits(system: LatticeSystem, v: Sequence, n_max: int = 60, window: int = 10,
                     precision_bits: int | None = None, reason: str = "") -> CanonicalEstimate:
    """Extremes of ``a_n`` over the last ``window`` terms up to ``n_max``."""
    from heightlab.dynsys.picard import system_spectral

    bits = precision_bits or default_precision()
    ss = system_spectral(system, bits)
    delta, l = ss.delta, ss.l
    x = tuple(Fraction(c) for c in v)
    vals = []
    for n in range(1, n_max + 1):
        x = lattice_apply(system, x)
        if n > n_max - window:
            h = _gram_value(x, system.gram, bits)
            vals.append(h / (delta ** n * BallReal.exact(n, bits) ** l) if l else h / delta ** n)
    hi = ball_max(vals)
    lo = ball_min(vals)
    notes = (f"empirical: {reason}",) if reason else ("empirical",)
    return CanonicalEstimate(hi, lo, EMPIRICAL, None, None, None, notes)


def _invariant_form(TW: RatMatrix, GW: RatMatrix) -> RatMatrix:
    """A ``T``-invariant positive form: the average of ``GW`` along ``T``.

    The map ``X -> T^T X T`` is semisimple with unimodular eigenvalues on
    symmetric matrices; removing the factor ``(t - 1)`` from the annihilator
    of ``GW`` and evaluating gives the projection onto invariants.
    """
    k = TW.dimension
    idx = [(i, j) for i in range(k) for j in range(i, k)]

    def to_vec(X: RatMatrix):
        return tuple(X.rows[i][j] for i, j in idx)

    def from_vec(v):
        rows = [[Fraction(0)] * k for _ in range(k)]
        for (i, j), x in zip(idx, v):
            rows[i][j] = rows[j][i] = x
        return RatMatrix(rows)

    cols = []
    for e in range(len(idx)):
        basis = [Fraction(0)] * len(idx)
        basis[e] = Fraction(1)
        X = from_vec(basis)
        cols.append(to_vec(TW.transpose() @ X @ TW))
    L = RatMatrix([[cols[c][r] for c in range(len(idx))] for r in range(len(idx))])
    g0 = to_vec(GW)
    ann = vector_annihilator(L, g0)
    one = RatPoly([-1, 1])
    q, r = ann.divmod(one)
    if not r.is_zero():
        raise ArithmeticError("no invariant component; the form cannot be averaged")
    P = L.eval_poly(q).scale(1 / q(Fraction(1)))
    return from_vec(P.apply(g0))


def _ratio_bounds(GW: RatMatrix, HW: RatMatrix, bits: int) -> tuple[BallReal, BallReal]:
    """Enclosures of the extreme values of ``Q(x) / H(x)`` over nonzero ``x``."""
    p = char_poly(HW.inverse() @ GW)
    sq = p.exact_div(poly_gcd(p, p.derivative()))
    roots = [r.real_part(bits) for r in root_enclosures(sq, bits)]
    return ball_min(roots), ball_max(roots)


def lattice_canonical(system: LatticeSystem, v: Sequence, precision_bits: int | None = None,
                      empirical_n: int = 60) -> CanonicalEstimate:
    """Limit points of ``a_n = h(f^n v) / (delta^n n^l)`` by dominant-term extraction."""
    bits = precision_bits or default_precision()
    A = system.linear
    v = tuple(Fraction(c) for c in v)
    if len(v) != A.dimension:
        raise InputError(f"point has length {len(v)}, expected {A.dimension}")
    sd = spectral_data(system.matrix, bits)
    if sd.certification not in (EXACT, NUMERIC):
        raise InputError("spectral data is only heuristic")
    reason = _exact_ok(sd)
    if reason is not None:
        return empirical_limits(system, v, empirical_n, precision_bits=bits, reason=reason)
    rho_sq = sd.exact_rho_sq
    l = sd.jordan_exponent
    pi, top = _top_projector(A, sd)
    if any(p(Fraction(1)) == 0 for p in top) and any(system.translation):
        return empirical_limits(system, v, empirical_n, precision_bits=bits,
                                reason="translation along a unimodular dominant eigenvalue")
    n = A.dimension
    eye = RatMatrix.identity(n)
    pw = pi.apply(v)
    if any(system.translation):
        u = solve([list(r) for r in (eye - A).rows], pi.apply(system.translation))
        assert u is not None, "I - A is invertible on the dominant part"
        pw = _vsub(pw, pi.apply(u))
    S, N = jordan_chevalley(A)
    z = pw
    for _ in range(l):
        z = N.apply(z)
    scale = Fraction(1, factorial(l) ** 2) / rho_sq ** l
    if not any(z):
        zero = BallReal.exact(0, bits)
        return CanonicalEstimate(zero, zero, EXACT_LATTICE, None, Fraction(0), Fraction(0),
                                 ("the dominant Jordan component vanishes",))
    T = (S @ S).scale(1 / rho_sq)
    Sz = S.apply(z)
    G = system.gram
    # orbit of z and S z under T; both parities of n - l occur infinitely often
    order = None
    a, b = z, Sz
    for k in range(1, MAX_FINITE_ORDER + 1):
        a, b = T.apply(a), T.apply(b)
        if a == z and b == Sz:
            order = k
            break
    if order is not None:
        vals = []
        a, b = z, Sz
        for _ in range(order):
            vals.append(_value(a, G, 1, bits))
            vals.append(_value(b, G, rho_sq, bits))
            a, b = T.apply(a), T.apply(b)
        if all(isinstance(x, Fraction) for x in vals):
            hi, lo = max(vals) * scale, min(vals) * scale
            return CanonicalEstimate(BallReal.exact(hi, bits), BallReal.exact(lo, bits), EXACT_LATTICE, None, hi, lo,
                                     (f"rotation of order {order} on the dominant component",))
        balls = [x if isinstance(x, BallReal) else BallReal.exact(x, bits) for x in vals]
        return CanonicalEstimate(ball_max(balls) * scale, ball_min(balls) * scale, EXACT_LATTICE, None, None, None,
                                 (f"rotation of order {order}; Gram entries are enclosures",))
    if not G.is_exact:
        return empirical_limits(system, v, empirical_n, precision_bits=bits,
                                reason="infinite-order rotation with an inexact Gram form")
    return _irrational_rotation(system, z, Sz, T, rho_sq, scale, bits)


def _value(x, G: GramForm, divisor: Fraction, bits: int):
    h = lattice_height(x, G)
    return h / divisor


def _irrational_rotation(system, z, Sz, T, rho_sq, scale, bits) -> CanonicalEstimate:
    """Bounds when ``T`` has infinite order on the orbit: sampled extremes inside an invariant-form sandwich."""
    basis = column_space_basis([z] + _orbit(T, z, 2 * T.dimension) + [Sz] + _orbit(T, Sz, 2 * T.dimension))
    k = len(basis)
    cols = [[basis[c][r] for c in range(k)] for r in range(T.dimension)]

    def coords(x):
        c = solve(cols, x)
        assert c is not None
        return c

    TW = RatMatrix([coords(T.apply(b)) for b in basis]).transpose()
    Gfull = system.gram.gram
    GW = RatMatrix([[sum(basis[i][p] * Gfull.rows[p][q] * basis[j][q] for p in range(T.dimension)
                         for q in range(T.dimension)) for j in range(k)] for i in range(k)])
    HW = _invariant_form(TW, GW)
    m, M = _ratio_bounds(GW, HW, bits)
    hz = _quad(HW, coords(z))
    hsz = _quad(HW, coords(Sz)) / rho_sq
    samples = []
    a, b = z, Sz
    for _ in range(64):
        samples.append(_value(a, system.gram, 1, bits))
        samples.append(_value(b, system.gram, rho_sq, bits))
        a, b = T.apply(a), T.apply(b)
    smax, smin = max(samples), min(samples)
    upper = M * max(hz, hsz)
    lower = m * min(hz, hsz)
    sup_ball = BallReal.from_bounds(smax, upper.upper_fraction(), bits) * scale
    inf_lo = max(lower.lower_fraction(), Fraction(0))
    inf_ball = BallReal.from_bounds(min(inf_lo, smin), smin, bits) * scale
    return CanonicalEstimate(sup_ball, inf_ball, EXACT_LATTICE, None, None, None,
                             ("infinite-order rotation: invariant-form bounds",))


def _orbit(T: RatMatrix, x, count: int) -> list:
    out = []
    for _ in range(count):
        x = T.apply(x)
        out.append(x)
    return out


def _quad(H: RatMatrix, c) -> Fraction:
    k = len(c)
    return sum(c[i] * H.rows[i][j] * c[j] for i in range(k) for j in range(k))


# --- height-zero loci ------------------------------------------------------

def zf_kernel(A: RatMatrix | CMMatrix, factor_hints=None, precision_bits: int | None = None
              ) -> tuple[list[Vector], str]:
    """Rational subspace on which the lower canonical height vanishes.

    It is the sum of the generalized eigenspaces of non-dominant factors and,
    for dominant factors ``p``, of ``ker p(A)^l``.
    """
    bits = precision_bits or default_precision()
    M = as_rational(A)
    sd = spectral_data(A, bits, factor_hints)
    if not sd.rho.certainly_gt(1):
        raise InputError("the height-zero locus is only computed for dynamical degree above 1")
    for df in sd.dominant_factors:
        if df.profile == "mixed":
            raise MixedModulusFactor(f"dominant factor {df.poly} has roots of different moduli; "
                                     "the height-zero locus is not rational")
    l = sd.jordan_exponent
    dominant = {df.poly for df in sd.dominant_factors}
    basis: list[Vector] = []
    for p, k in factor_rational(sd.min_poly, factor_hints):
        e = min(k, l) if p in dominant else k
        if e == 0:
            continue
        K = M.eval_poly(p ** e)
        basis += nullspace([list(r) for r in K.rows])
    basis = column_space_basis(basis) if basis else []
    for b in basis:
        if not in_span(M.apply(b), basis):
            raise ArithmeticError("kernel is not invariant; factorization inconsistent")
    cert = EXACT if all(df.profile == "uniform" for df in sd.dominant_factors) and sd.certification == EXACT \
        else NUMERIC
    return basis, cert


YES, NO, UNDECIDED = "yes", "no", "undecided"
HEURISTIC_CERT = "heuristic"


@dataclass(frozen=True)
class ZfResult:
    member: str
    certification: str
    kernel_basis: tuple[Vector, ...] | None = None
    fixed_point: Vector | None = None
    limit: CanonicalEstimate | None = None
    flags: tuple[str, ...] = ()


def zf_membership(system: LatticeSystem, v: Sequence, factor_hints=None,
                  precision_bits: int | None = None) -> ZfResult:
    """Decide whether the lower canonical height of ``v`` vanishes."""
    bits = precision_bits or default_precision()
    v = tuple(Fraction(c) for c in v)
    A = system.linear
    if len(v) != A.dimension:
        raise InputError(f"point has length {len(v)}, expected {A.dimension}")
    try:
        basis, cert = zf_kernel(system.matrix, factor_hints, bits)
    except MixedModulusFactor as exc:
        return ZfResult(UNDECIDED, HEURISTIC_CERT, None, None, None, ("mixed_modulus_factor", str(exc)))
    eye = RatMatrix.identity(A.dimension)
    p0 = solve([list(r) for r in (eye - A).rows], system.translation)
    if p0 is None:
        return ZfResult(UNDECIDED, HEURISTIC_CERT, tuple(basis), None, None, ("no_fixed_point",))
    w = _vsub(v, p0)
    if not any(w) or (basis and in_span(w, basis)):
        return ZfResult(YES, cert, tuple(basis), p0)
    est = lattice_canonical(system, v, bits)
    if est.mode == EXACT_LATTICE and est.liminf_est.certainly_positive():
        return ZfResult(NO, cert, tuple(basis), p0, est)
    return ZfResult(UNDECIDED, HEURISTIC_CERT, tuple(basis), p0, est, ("positivity_not_certified",))


def concrete_shadow(system, x: Sequence, tolerance: float = 1e-10, precision_bits: int | None = None
                    ) -> tuple[LatticeSystem, Vector]:
    """The lattice system that tracks ``f^n x`` as integer combinations of generators.

    The generators are the coordinates of ``x`` followed by the translation
    points. An orbit point is an ``r x m`` coefficient matrix ``C`` (row ``i``
    gives coordinate ``i``); the map is ``C -> A C + T`` and the height is
    ``sum_i C_i G C_i^T`` with ``G`` the pairing matrix of the generators.
    """
    from heightlab.heights.gram import gram_from_points
    from heightlab.heights.neron_tate import neron_tate_local

    r = system.rank
    gens = list(x) + [t for t in system.translation if not t.is_zero]
    m = len(gens)
    bits = precision_bits or default_precision()
    G = gram_from_points(gens, tolerance, bits, neron_tate_local).gram
    zero = BallReal.exact(0, bits)
    big = [[zero] * (r * m) for _ in range(r * m)]
    for i in range(r):
        for a in range(m):
            for b in range(m):
                big[i * m + a][i * m + b] = G[a][b]
    A = as_rational(system.matrix)
    rows = [[A.rows[i][k] if a == b else Fraction(0) for k in range(r) for b in range(m)]
            for i in range(r) for a in range(m)]
    trans = [Fraction(0)] * (r * m)
    col = r
    for i, t in enumerate(system.translation):
        if not t.is_zero:
            trans[i * m + col] = Fraction(1)
            col += 1
    start = [Fraction(1) if (j == i) else Fraction(0) for i in range(r) for j in range(m)]
    return LatticeSystem(RatMatrix(rows), trans, GramForm(big), system.label), tuple(start)


def concrete_canonical(system, x: Sequence, tolerance: float = 1e-10,
                       precision_bits: int | None = None) -> CanonicalEstimate:
    """Canonical height limits on a power of an elliptic curve through its lattice shadow."""
    shadow, v = concrete_shadow(system, x, tolerance, precision_bits)
    return lattice_canonical(shadow, v, precision_bits)
