from __future__ import annotations

import math
from fractions import Fraction

import pytest

from heightlab.canonical.estimate import EMPIRICAL, EXACT_LATTICE, TELESCOPED, CanonicalEstimate
from heightlab.canonical.lattice import (
    NO, UNDECIDED, YES, concrete_canonical, jordan_chevalley, lattice_canonical, zf_kernel, zf_membership,
)
from heightlab.canonical.polarized import (
    call_silverman, canonical_lower_bound, height_offset, telescoping_depth,
)
from heightlab.canonical.series import (
    BUDGET, arithmetic_degree_estimate, height_series, shift_identity_holds,
)
from heightlab.canonical.wehler import nef_canonical_wehler, nef_divisor
from heightlab.dynsys.lattice import LatticeSystem
from heightlab.dynsys.p1 import polynomial_map
from heightlab.errors import InputError
from heightlab.heights.elliptic import ec_mul
from heightlab.heights.gram import GramForm
from heightlab.heights.neron_tate import neron_tate_local
from heightlab.heights.projective import p1_point
from heightlab.numlin.balls import BallReal
from heightlab.numlin.matrix import RatMatrix
from heightlab.numlin.poly import RatPoly

from corpus import WEHLER_POINTS, load, point
from oracles import normalized_terms

EX11 = [[2, 3], [0, 2]]


def lattice(rows, p=None, gram=None):
    return LatticeSystem(RatMatrix(rows), p, GramForm(RatMatrix(gram)) if gram else None)


class TestSeries:
    def test_example_closed_form(self):
        s = height_series(lattice(EX11), (0, 1), 50)
        assert s.l == 2 and s.delta.contains(4)
        for r in s.rows[1:]:
            assert r.a_exact == Fraction(9, 4) + Fraction(1, r.n ** 2)

    def test_matches_oracle(self):
        A, p, G = [[1, 1, 0], [1, 0, 0], [0, 0, 2]], [1, 0, -1], [[2, 1, 0], [1, 1, 0], [0, 0, 1]]
        s = height_series(lattice(A, p, G), (1, 2, 3), 30)
        want = normalized_terms(A, p, G, (1, 2, 3), 4, 0, 30)
        for r in s.rows[1:]:
            assert r.a.contains(want[r.n])

    def test_shift_identity_exact_and_balls(self):
        S = lattice(EX11, [1, 0])
        x = (Fraction(1), Fraction(-2))
        assert shift_identity_holds(height_series(S, x, 20), height_series(S, S(x), 20))
        f = polynomial_map([1, 0, 1])
        P = p1_point("3/2")
        assert shift_identity_holds(height_series(f, P, 8), height_series(f, f(P), 8))

    def test_shift_identity_detects_mismatch(self):
        S = lattice(EX11)
        x = (Fraction(1), Fraction(1))
        assert not shift_identity_holds(height_series(S, x, 10), height_series(S, (5, 1), 10))

    def test_budget_truncation(self):
        s = height_series(polynomial_map([0, 0, 1]), p1_point(3), 40, digits_budget=50)
        assert s.truncation_reason == BUDGET and len(s.rows) < 41

    def test_arithmetic_degree(self):
        ball, trend = arithmetic_degree_estimate(polynomial_map([1, 0, 1]), p1_point(2), 12)
        assert abs(float(ball.midpoint) - 2) < 0.05
        ball, _ = arithmetic_degree_estimate(lattice(EX11), (0, 1), 40)
        assert ball.contains(4)  # the n^2 factor biases the fitted slope upward
        with pytest.raises(InputError):
            arithmetic_degree_estimate(lattice(EX11), (0, 1), 3)


class TestLatticeCanonical:
    def test_example(self):
        est = lattice_canonical(lattice(EX11), (0, 1))
        assert est.mode == EXACT_LATTICE and est.limsup_exact == est.liminf_exact == Fraction(9, 4)

    def test_quadratic_scaling(self):
        S = lattice([[2, 1, 0], [0, 2, 1], [0, 0, 2]], None, [[2, 1, 0], [1, 2, 0], [0, 0, 1]])
        base = lattice_canonical(S, (1, -1, 3))
        for m in (2, -3, Fraction(1, 2)):
            est = lattice_canonical(S, (m, -m, 3 * m))
            assert est.limsup_exact == m * m * base.limsup_exact

    def test_golden_against_iteration(self):
        A = [[0, 1], [1, 1]]
        est = lattice_canonical(lattice(A), (1, 0))
        phi2 = ((1 + 5 ** 0.5) / 2) ** 2
        x = (Fraction(1), Fraction(0))
        for _ in range(40):
            x = (x[1], x[0] + x[1])
        a40 = float(x[0] ** 2 + x[1] ** 2) / phi2 ** 40
        assert est.limsup_est.inflate(1e-12).contains(a40)

    def test_finite_rotation_extremes(self):
        # sqrt 2 times a rotation by 45 degrees: the limit points cycle with period 8
        A, G = [[1, -1], [1, 1]], [[2, 1], [1, 1]]
        est = lattice_canonical(lattice(A, None, G), (1, 0))
        terms = normalized_terms(A, [0, 0], G, (1, 0), 2, 0, 40)
        late = [terms[n] for n in range(30, 41)]
        assert est.limsup_exact == max(late) and est.liminf_exact == min(late)

    def test_irrational_rotation_encloses_orbit(self):
        A, G = [[1, -2], [1, 1]], [[3, 1], [1, 1]]
        est = lattice_canonical(lattice(A, None, G), (1, 0))
        terms = normalized_terms(A, [0, 0], G, (1, 0), 3, 0, 60)
        assert all(est.liminf_est.lower_fraction() <= terms[n] <= est.limsup_est.upper_fraction()
                   for n in range(20, 61))

    def test_affine_subtracts_fixed_point(self):
        S = lattice([[2, 0], [0, 3]], [1, 1])
        est = lattice_canonical(S, (-1, Fraction(-1, 2)))
        assert est.limsup_exact == 0
        est = lattice_canonical(S, (0, 0))
        # dominant part of v - P0 is 1/2, divided by rho^0 and no Jordan factor
        assert est.limsup_exact == Fraction(1, 4)

    def test_jordan_chevalley(self):
        A = RatMatrix([[2, 1, 0], [0, 2, 0], [0, 0, 3]])
        S, N = jordan_chevalley(A)
        assert S + N == A and S @ N == N @ S
        assert (N @ N).is_zero() and S == RatMatrix.diag([2, 2, 3])

    def test_estimate_invariants(self):
        lo, hi = BallReal.exact(1), BallReal.exact(2)
        with pytest.raises(ValueError):
            CanonicalEstimate(lo, hi, EXACT_LATTICE)
        with pytest.raises(ValueError):
            CanonicalEstimate(hi, lo, TELESCOPED)


class TestZf:
    def test_kernels(self):
        basis, _ = zf_kernel(RatMatrix.diag([2, 1]))
        assert basis == [(0, 1)]
        basis, _ = zf_kernel(RatMatrix(EX11))
        assert basis == [(1, 0)]

    def test_membership(self):
        S = lattice(EX11)
        assert zf_membership(S, (5, 0)).member == YES
        r = zf_membership(S, (0, 1))
        assert r.member == NO and r.limit.liminf_exact == Fraction(9, 4)

    def test_affine(self):
        S = lattice(EX11, [1, 2])
        r = zf_membership(S, (5, -2))
        assert r.member == YES and r.fixed_point == (5, -2)
        assert zf_membership(S, (6, -2)).member == YES
        assert zf_membership(S, (5, -1)).member == NO

    def test_mixed_modulus_undecided(self):
        r = zf_membership(lattice([[0, 1], [1, 1]]), (1, 0))
        assert r.member == UNDECIDED and "mixed_modulus_factor" in r.flags

    def test_no_fixed_point(self):
        S = lattice([[1, 0], [0, 2]], [1, 0])
        r = zf_membership(S, (0, 1))
        assert r.member == UNDECIDED and r.flags == ("no_fixed_point",)

    def test_hints_accepted(self):
        t = RatPoly([0, 1])
        basis, _ = zf_kernel(RatMatrix.diag([2, 1]), [t - 2, t - 1])
        assert basis == [(0, 1)]


class TestPolarized:
    def test_examples(self):
        f = polynomial_map([0, 0, 1])
        est = call_silverman(f, p1_point(2))
        assert est.mode == TELESCOPED and est.value.inflate(1e-12).contains(math.log(2))
        assert call_silverman(f, p1_point(1)).limsup_exact == 0
        g = polynomial_map([-1, 0, 1])
        est = call_silverman(g, p1_point(0))
        assert est.limsup_exact == 0 and "preperiodic" in est.notes[0]

    def test_functional_equation(self):
        f = polynomial_map([1, -1, 0, 1])
        for x in ("2", "-3/5", "7/2"):
            P = p1_point(x)
            a, b = call_silverman(f, P, 1e-5), call_silverman(f, f(P), 1e-5)
            assert abs(float(b.value.midpoint) - 3 * float(a.value.midpoint)) <= 3e-5

    def test_lower_bound_and_offset(self):
        f = polynomial_map([-1, 0, 1])
        P = p1_point("5/3")
        est = call_silverman(f, P)
        lb, _ = canonical_lower_bound(f, P, 6)
        assert lb <= est.value.upper_fraction()
        C0 = height_offset(f)
        h = math.log(5)
        assert float(est.value.midpoint) <= h + float(C0)

    def test_depth(self):
        assert telescoping_depth(Fraction(0), 2, 1e-4) == 0
        K = telescoping_depth(Fraction(3), 2, 1e-4)
        assert Fraction(3, 2 ** K) <= Fraction(1e-4) < Fraction(3, 2 ** (K - 1))

    def test_budget_widens(self):
        f = polynomial_map([1, 0, 1])
        est = call_silverman(f, p1_point(7), 1e-6, digits_budget=30)
        assert any("budget" in n for n in est.notes)
        assert est.value.contains(est.value.midpoint)

    def test_bad_tolerance(self):
        with pytest.raises(InputError):
            call_silverman(polynomial_map([0, 0, 1]), p1_point(2), 0)


class TestWehlerCanonical:
    def test_nef_divisor(self):
        D = [float(x.midpoint) for x in nef_divisor(load("wehler_seed4").system)]
        assert abs(sum(D) - 1) < 1e-12

    def test_multiplication_rule(self):
        L = load("wehler_seed4")
        W = L.system
        P = point(L, WEHLER_POINTS[0])
        a, b = nef_canonical_wehler(W, P, 5), nef_canonical_wehler(W, W(P), 4)
        delta = 9 + 4 * 5 ** 0.5
        gap = abs(float(b.value.midpoint) - delta * float(a.value.midpoint))
        assert a.mode == EMPIRICAL and gap <= 4 * (float(b.error_bound.upper) + delta * float(a.error_bound.upper))


class TestConcrete:
    def test_37a_square(self):
        L = load("concrete_37a")
        E = L.system.curve
        P = E.point(0, 0)
        est = concrete_canonical(L.system, (P, ec_mul(2, P)), 1e-10)
        assert est.value.inflate(1e-9).contains(float(neron_tate_local(P, 1e-12).value.midpoint))
        est = concrete_canonical(L.system, (P, E.zero()), 1e-10)
        assert float(est.value.upper) < 1e-9
