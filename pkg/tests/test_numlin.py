from __future__ import annotations

import math
import random
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from heightlab.errors import PrecisionExhausted
from heightlab.numlin.balls import BallReal
from heightlab.numlin.factor import factor_rational, squarefree_decomposition
from heightlab.numlin.matrix import CMMatrix, RatMatrix, char_poly, min_poly
from heightlab.numlin.poly import RatPoly, poly_gcd
from heightlab.numlin.roots import root_enclosures
from heightlab.numlin.spectral import EXACT, growth_exponent_oracle, perron_eigenvector, spectral_data

from oracles import frob_powers_fit

t = RatPoly([0, 1])
one = RatPoly([1])
PHI = (1 + math.sqrt(5)) / 2


def near(ball, x, eps=1e-12) -> bool:
    """Float targets are not exact, so compare after widening the ball slightly."""
    if isinstance(ball, BallReal):
        return ball.inflate(eps).contains(x)
    return abs(ball.midpoint() - x) <= eps + float(ball.radius)


def rand_matrix(rng, n, lo=-3, hi=3):
    return RatMatrix([[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)])


class TestPolynomials:
    def test_char_poly_examples(self):
        assert char_poly(RatMatrix([[2, 1], [0, 2]])) == t * t - 4 * t + 4
        assert char_poly(RatMatrix.identity(3)) == (t - 1) ** 3
        assert char_poly(RatMatrix([[0, 1], [1, 1]])) == t * t - t - 1

    def test_min_poly_examples(self):
        assert min_poly(RatMatrix.identity(3)) == t - 1
        assert min_poly(RatMatrix([[2, 1], [0, 2]])) == (t - 2) ** 2
        assert min_poly(RatMatrix.diag([2, 2, 3])) == (t - 2) * (t - 3)

    def test_squarefree_examples(self):
        assert squarefree_decomposition((t - 1) ** 2 * (t - 2)) == [(t - 2, 1), (t - 1, 2)]
        assert squarefree_decomposition(t * t - t - 1) == [(t * t - t - 1, 1)]
        assert squarefree_decomposition((t - 1) ** 3) == [(t - 1, 3)]

    def test_factor_examples(self):
        assert factor_rational(t * t - 4 * t + 4) == [(t - 2, 2)]
        got = dict(factor_rational(t ** 4 - 1))
        assert got == {t - 1: 1, t + 1: 1, t * t + 1: 1}
        assert factor_rational(t * t - t - 1) == [(t * t - t - 1, 1)]

    def test_cayley_hamilton_random(self):
        rng = random.Random(7)
        for _ in range(40):
            M = rand_matrix(rng, rng.randint(1, 4))
            assert M.eval_poly(char_poly(M)).is_zero()
            mp = min_poly(M)
            assert M.eval_poly(mp).is_zero()
            assert mp.divides(char_poly(M))


class TestRoots:
    def test_golden(self):
        balls = root_enclosures(t * t - t - 1, 128)
        assert any(near(b, PHI) for b in balls)
        assert any(near(b, 1 - PHI) for b in balls)

    def test_i(self):
        balls = root_enclosures(t * t + 1, 128)
        assert any(near(b, 1j) for b in balls) and any(near(b, -1j) for b in balls)

    def test_rational_root_exact(self):
        (b,) = root_enclosures(t - 2, 128)
        assert b.contains(2) and b.radius == 0

    def test_product_of_roots(self):
        rng = random.Random(3)
        for _ in range(15):
            coeffs = [rng.randint(-5, 5) for _ in range(4)] + [1]
            if coeffs[0] == 0:
                continue
            p = RatPoly(coeffs)
            sq = p.exact_div(poly_gcd(p, p.derivative()))
            if sq.degree != p.degree:
                continue
            prod = 1
            for b in root_enclosures(p, 128):
                prod *= b.midpoint()
            assert abs(prod - (-1) ** p.degree * coeffs[0]) < 1e-10


class TestBalls:
    @settings(max_examples=150, deadline=None)
    @given(st.fractions(min_value=-1000, max_value=1000, max_denominator=10**6),
           st.fractions(min_value=-1000, max_value=1000, max_denominator=10**6))
    def test_containment(self, a, b):
        A, B = BallReal.exact(a, 64), BallReal.exact(b, 64)
        assert (A + B).contains(a + b)
        assert (A - B).contains(a - b)
        assert (A * B).contains(a * b)
        if b != 0:
            assert (A / B).contains(a / b)
        assert (A * A).contains(a * a)
        assert (A ** 3).contains(a ** 3)

    @settings(max_examples=80, deadline=None)
    @given(st.fractions(min_value=Fraction(1, 1000), max_value=10**6, max_denominator=10**4))
    def test_transcendental(self, a):
        A = BallReal.exact(a, 96)
        assert A.log().contains(math.log(float(a))) or A.log().radius < 1e-15
        s = A.sqrt()
        assert s.lower_fraction() ** 2 <= a <= s.upper_fraction() ** 2

    def test_ordering(self):
        a, b = BallReal.exact(1), BallReal.exact(2)
        assert a.certainly_lt(b) and b.certainly_gt(a)
        h = BallReal.hull([a, b])
        assert h.contains(Fraction(3, 2)) and not h.certainly_gt(a)


class TestSpectral:
    def test_examples(self):
        s = spectral_data(RatMatrix([[2, 3], [0, 2]]))
        assert s.rho.contains(2) and s.jordan_exponent == 1 and s.certification == EXACT
        s = spectral_data(RatMatrix.diag([3, 2]))
        assert s.rho.contains(3) and s.jordan_exponent == 0
        s = spectral_data(RatMatrix([[0, 1], [1, 1]]))
        assert near(s.rho, PHI) and s.jordan_exponent == 0

    def test_cm_embedding(self):
        # multiplication by 1 + i on Z[i]: modulus sqrt 2
        s = spectral_data(CMMatrix(RatMatrix([[1]]), RatMatrix([[1]]), 1))
        assert near(s.rho, math.sqrt(2)) and s.exact_rho_sq == 2

    def test_powers(self):
        rng = random.Random(11)
        done = 0
        while done < 15:
            M = rand_matrix(rng, rng.randint(1, 4))
            try:
                s = spectral_data(M)
            except PrecisionExhausted:
                continue
            for N in (2, 3):
                sN = spectral_data(M ** N)
                assert sN.rho.overlaps(s.rho ** N)
                if s.rho.certainly_gt(0):
                    assert sN.jordan_exponent == s.jordan_exponent
            done += 1

    def test_block_diag_is_lex_max(self):
        rng = random.Random(5)
        for _ in range(20):
            A, B = rand_matrix(rng, 2), rand_matrix(rng, 2)
            sa, sb, sab = spectral_data(A), spectral_data(B), spectral_data(A.block_diag(B))
            if sa.rho.certainly_gt(sb.rho):
                want = sa
            elif sb.rho.certainly_gt(sa.rho):
                want = sb
            else:
                assert sab.jordan_exponent == max(sa.jordan_exponent, sb.jordan_exponent)
                continue
            assert sab.rho.overlaps(want.rho) and sab.jordan_exponent == want.jordan_exponent

    def test_growth_oracle_examples(self):
        r, l = growth_exponent_oracle(RatMatrix([[2, 1], [0, 2]]), 30)
        assert abs(r - math.log(2)) < 0.01 and abs(l - 1) < 0.15
        r, l = growth_exponent_oracle(RatMatrix.identity(3), 30)
        assert abs(r) < 1e-9 and abs(l) < 1e-9
        r, l = growth_exponent_oracle(RatMatrix.diag([3, 2]), 30)
        assert abs(r - math.log(3)) < 0.01 and abs(l) < 0.15

    def test_growth_oracle_vs_plain_fit(self):
        # the plain float slope and the oracle agree on a diagonalizable example
        rows = [[2, 1], [1, 1]]
        r, _ = growth_exponent_oracle(RatMatrix(rows), 30)
        assert abs(r - frob_powers_fit(rows)) < 0.01


class TestPerron:
    def test_golden(self):
        v, res = perron_eigenvector(RatMatrix([[2, 1], [1, 1]]), [(1, 0), (0, 1)])
        ratio = float(v[0].midpoint) / float(v[1].midpoint)
        assert abs(ratio - PHI) < 1e-12 and float(res.upper) < 1e-12

    def test_identity(self):
        v, res = perron_eigenvector(RatMatrix.identity(2), [(1, 0), (0, 1)])
        assert float(res.upper) == 0

    def test_wehler_product(self):
        from heightlab.dynsys.wehler import INTERSECTION_FORM, S_X, S_Y, S_Z

        M = S_X @ S_Y @ S_Z
        v, res = perron_eigenvector(M.transpose(), [(1, 1, 1)], invariant_form=INTERSECTION_FORM)
        vf = [float(x.midpoint) for x in v]
        Mv = [sum(float(M.rows[j][i]) * vf[j] for j in range(3)) for i in range(3)]
        rho = 9 + 4 * math.sqrt(5)  # largest root of t^3 - 17 t^2 - 17 t + 1, by the quadratic factor
        assert max(abs(a - rho * b) for a, b in zip(Mv, vf)) < 1e-9
