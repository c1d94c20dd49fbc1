"""Dominant eigenstructure of rational matrices, with certified spectral radii."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from heightlab.errors import ConeViolation, NoConvergence, PrecisionExhausted
from heightlab.numlin.balls import BallReal, ball_max, default_precision, escalate, log_int
from heightlab.numlin.factor import factor_rational
from heightlab.numlin.matrix import CMMatrix, RatMatrix, as_rational, min_poly, solve
from heightlab.numlin.poly import RatPoly
from heightlab.numlin.roots import ComplexBall, root_enclosures

EXACT = "exact"
NUMERIC = "numeric-certified"
HEURISTIC = "heuristic"


@dataclass(frozen=True)
class FactorModuli:
    """Root moduli of one irreducible factor of the minimal polynomial."""

    poly: RatPoly
    multiplicity: int
    roots: tuple[ComplexBall, ...]
    moduli: tuple[BallReal, ...]
    max_modulus: BallReal
    exact_max_modulus_sq: Fraction | None
    # "uniform": every root provably has the same modulus; "mixed": provably not;
    # "unresolved": the enclosures overlap but equality is not proven
    profile: str


@dataclass(frozen=True)
class DominantFactor:
    poly: RatPoly
    jordan_size: int
    certification: str
    profile: str


@dataclass(frozen=True)
class SpectralData:
    rho: BallReal
    jordan_exponent: int
    dominant_factors: tuple[DominantFactor, ...]
    certification: str
    min_poly: RatPoly = field(repr=False)
    factors: tuple[FactorModuli, ...] = field(repr=False, default=())
    exact_rho_sq: Fraction | None = None

    @property
    def delta_pair(self) -> tuple[BallReal, int]:
        return self.rho, self.jordan_exponent


def _exact_max_modulus_sq(q: RatPoly) -> tuple[Fraction | None, str | None]:
    """Closed-form squared max modulus and modulus profile for degree <= 2."""
    q = q.monic()
    if q.degree == 1:
        return q.coeffs[0] ** 2, "uniform"
    if q.degree == 2:
        c0, c1 = q.coeffs[0], q.coeffs[1]
        disc = c1 * c1 - 4 * c0
        if disc < 0:
            return c0, "uniform"
        if c1 == 0:
            return abs(c0), "uniform"
        return None, "mixed"
    return None, None


def factor_moduli(q: RatPoly, multiplicity: int, bits: int) -> FactorModuli:
    roots = tuple(root_enclosures(q, bits))
    moduli = tuple(b.modulus(bits) for b in roots)
    exact_sq, profile = _exact_max_modulus_sq(q)
    if exact_sq is not None:
        mx = BallReal.exact(exact_sq, bits).sqrt()
    else:
        mx = ball_max(moduli)
    if profile is None:
        if any(m.certainly_lt(mx) for m in moduli):
            profile = "mixed"
        elif _negation_or_power_symmetric(q):
            profile = "uniform"
        else:
            profile = "unresolved"
    return FactorModuli(q, multiplicity, roots, moduli, mx, exact_sq, profile)


def _negation_or_power_symmetric(q: RatPoly) -> bool:
    """True if ``q(t) = g(t^k)`` with ``g`` of degree <= 2 having roots of equal modulus."""
    n = q.degree
    for k in range(n, 1, -1):
        if n % k:
            continue
        if all(c == 0 for i, c in enumerate(q.coeffs) if i % k):
            g = RatPoly(q.coeffs[::k])
            if g.degree <= 2:
                sq, prof = _exact_max_modulus_sq(g)
                if prof == "uniform":
                    return True
    return False


def _provably_equal_max(a: FactorModuli, b: FactorModuli) -> bool:
    if a.exact_max_modulus_sq is not None and b.exact_max_modulus_sq is not None:
        return a.exact_max_modulus_sq == b.exact_max_modulus_sq
    if a.poly.degree == b.poly.degree:
        neg = a.poly.compose_neg().monic()
        if neg == b.poly.monic():
            return True
    return False


def _provably_different(a: FactorModuli, b: FactorModuli) -> bool:
    if a.exact_max_modulus_sq is not None and b.exact_max_modulus_sq is not None:
        return a.exact_max_modulus_sq != b.exact_max_modulus_sq
    return not a.max_modulus.overlaps(b.max_modulus)


def _analyze(A: RatMatrix, bits: int, default_bits: int, factor_hints=None) -> SpectralData:
    m = min_poly(A)
    facs = factor_rational(m, factor_hints)
    if not facs:
        raise ValueError("empty minimal polynomial")
    info = tuple(factor_moduli(q, k, bits) for q, k in facs)
    # nilpotent: the only factor is t
    if all(f.exact_max_modulus_sq == 0 for f in info):
        dom = tuple(DominantFactor(f.poly, f.multiplicity, EXACT, "uniform") for f in info)
        return SpectralData(BallReal.exact(0, bits), max(f.multiplicity for f in info) - 1, dom, EXACT, m, info, Fraction(0))
    rho_lo = max((f.max_modulus for f in info), key=lambda b: b.lower)
    candidates = [f for f in info if not f.max_modulus.certainly_lt(rho_lo)]
    top = max(candidates, key=lambda f: f.max_modulus.lower)
    dominant = [top]
    for f in candidates:
        if f is top:
            continue
        if _provably_equal_max(f, top):
            dominant.append(f)
        elif _provably_different(f, top) and f.max_modulus.certainly_lt(top.max_modulus):
            continue
        else:
            raise PrecisionExhausted(f"modulus tie between {top.poly} and {f.poly} unresolved at {bits} bits")
    exact_sq = next((f.exact_max_modulus_sq for f in dominant if f.exact_max_modulus_sq is not None), None)
    if exact_sq is not None:
        rho = BallReal.exact(exact_sq, bits).sqrt()
    else:
        rho = top.max_modulus
        for f in dominant[1:]:
            lo = max(rho.lower, f.max_modulus.lower)
            hi = min(rho.upper, f.max_modulus.upper)
            rho = BallReal.from_bounds(lo, hi, bits)
    cert = EXACT
    others = [f for f in info if all(f is not d for d in dominant)]
    if others:
        second = max(f.max_modulus.upper for f in others)
        gap = rho.lower - second
        if bits > default_bits or gap < rho.lower * mpmath.mpf(2) ** (-(bits // 4)):
            cert = NUMERIC
    elif bits > default_bits:
        cert = NUMERIC
    l = max(f.multiplicity for f in dominant) - 1
    dom = []
    for f in dominant:
        fc = EXACT if f.profile == "uniform" else NUMERIC
        dom.append(DominantFactor(f.poly, f.multiplicity, fc, f.profile))
    return SpectralData(rho, l, tuple(dom), cert, m, info, exact_sq)


def spectral_data(M: RatMatrix | CMMatrix, precision_bits: int | None = None, factor_hints=None) -> SpectralData:
    """Certified spectral radius and Jordan exponent ``l(A)``.

    ``l(A)`` is the largest multiplicity in the minimal polynomial of an
    irreducible factor that has a root of maximal modulus, minus one.
    Precision doubles on unresolved ties up to 4096 bits.
    """
    A = as_rational(M)
    start = precision_bits or default_precision()
    return escalate(lambda bits: _analyze(A, bits, start, factor_hints), start)


# --- Perron eigenvectors ---------------------------------------------------

def _in_cone(v: Sequence[Fraction], gens: list[tuple[Fraction, ...]], form: RatMatrix | None, anchor) -> bool:
    if form is not None:
        qv = sum(v[i] * form.rows[i][j] * v[j] for i in range(len(v)) for j in range(len(v)))
        orient = sum(v[i] * form.rows[i][j] * anchor[j] for i in range(len(v)) for j in range(len(v)))
        return qv >= 0 and orient >= 0
    if all(x == 0 for x in v):
        return True
    n = len(v)
    cols = [[g[i] for g in gens] for i in range(n)]
    if len(gens) <= n:
        sol = solve(cols, v)
        if sol is None:
            return False
        return all(c >= 0 for c in sol)
    from scipy.optimize import linprog

    res = linprog(np.zeros(len(gens)), A_eq=np.array(cols, dtype=float), b_eq=np.array(v, dtype=float),
                  bounds=[(0, None)] * len(gens), method="highs")
    return bool(res.success)


def perron_eigenvector(M: RatMatrix, cone_generators: Sequence[Sequence], precision_bits: int | None = None,
                       budget: int = 5000, check_steps: int = 6, invariant_form: RatMatrix | None = None):
    """Dominant eigenvector inside an invariant cone by power iteration.

    Returns ``(vector, residual)``: a unit-sum vector of balls and an
    enclosure of ``max_i |(Mv - rho v)_i|`` with ``rho = sum(Mv)``.
    When ``invariant_form`` is given the cone is the forward light cone
    ``{v : v^T Q v >= 0}`` on the side of the first generator; otherwise it
    is the polyhedral cone spanned by the generators.
    """
    bits = precision_bits or default_precision()
    n = M.dimension
    gens = [tuple(Fraction(x) for x in g) for g in cone_generators]
    if not gens:
        raise ConeViolation("no cone generators supplied")
    anchor = gens[0]
    if invariant_form is not None:
        anchor = invariant_form.apply(gens[0])
    for g in gens:
        w = g
        for _ in range(check_steps):
            w = M.apply(w)
            if not _in_cone(w, gens, invariant_form, anchor):
                raise ConeViolation(f"iterate of generator {[str(x) for x in g]} leaves the cone")
    ctx = mpmath.MPContext()
    ctx.prec = bits + 32
    A = [[ctx.mpf(x.numerator) / x.denominator for x in row] for row in M.rows]
    v = [ctx.mpf(sum(g[i] for g in gens).numerator) / sum(g[i] for g in gens).denominator for i in range(n)]
    tol = ctx.mpf(2) ** (-(bits // 4) - 8)
    s = ctx.fsum(v)
    v = [x / s for x in v]
    for _ in range(budget):
        w = [ctx.fsum(a * x for a, x in zip(row, v)) for row in A]
        s = ctx.fsum(w)
        if s == 0:
            raise NoConvergence("power iterate collapsed to zero")
        w = [x / s for x in w]
        diff = max(abs(a - b) for a, b in zip(w, v))
        v = w
        if diff < tol * ctx.mpf(2) ** -8:
            break
    else:
        raise NoConvergence(f"power iteration did not settle within {budget} steps")
    # exact residual evaluation at the rational midpoint
    from heightlab.numlin.roots import _mpf_fraction

    vq = [_mpf_fraction(x) for x in v]
    total = sum(vq)
    vq = [x / total for x in vq]
    Mv = M.apply(vq)
    rho = sum(Mv)
    res = max(abs(a - rho * b) for a, b in zip(Mv, vq))
    residual = BallReal.exact(res, bits)
    if residual.certainly_gt(BallReal.exact(Fraction(1, 2 ** (bits // 4)), bits)):
        raise NoConvergence(f"residual {float(res):.3g} above tolerance")
    return [BallReal.exact(x, bits) for x in vq], residual


# --- brute-force growth oracle ---------------------------------------------

def growth_exponent_oracle(
    M: RatMatrix | CMMatrix, n_max: int = 30, doublings: int = 6
) -> tuple[float, float]:
    """Least-squares fit of ``log ||M^n|| ~ c + n log(rho) + l log(n)``.

    Uses exact powers and the Frobenius norm; an independent cross-check
    for :func:`spectral_data`, not a primary result. Sample exponents are
    ``n_max/3 <= n <= n_max`` plus ``n_max * 2**k`` for ``k <= doublings``
    (reached by repeated squaring). The long tail averages out the bounded
    oscillation that equal-modulus complex eigenvalues put on the norm.
    """
    if n_max < 8:
        raise ValueError("n_max must be at least 8")
    A = as_rational(M)
    den = 1
    for row in A.rows:
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
    B = A.scale(den)
    P = RatMatrix.identity(A.dimension)
    ns, ys = [], []

    def record(n: int, P: RatMatrix) -> bool:
        sq = sum(int(x) * int(x) for row in P.rows for x in row)
        if sq == 0:
            return False
        ns.append(n)
        ys.append(float((log_int(sq, 64) / 2).midpoint) - n * math.log(den))
        return True

    for n in range(1, n_max + 1):
        P = P @ B
        if 3 * n >= n_max and not record(n, P):
            return float("-inf"), 0.0
    n = n_max
    for _ in range(doublings):
        P = P @ P
        n *= 2
        if not record(n, P):
            return float("-inf"), 0.0
    ns_arr = np.array(ns, dtype=float)
    design = np.column_stack([np.ones_like(ns_arr), ns_arr, np.log(ns_arr)])
    coef, *_ = np.linalg.lstsq(design, np.array(ys), rcond=None)
    log_rho, l = float(coef[1]), float(coef[2])
    if abs(log_rho) < 1e-12:
        log_rho = 0.0
    if abs(l) < 1e-12:
        l = 0.0
    return log_rho, l
