from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest

from heightlab.dynsys.lattice import LatticeSystem
from heightlab.dynsys.p1 import polynomial_map
from heightlab.errors import HypothesisFailed, InputError
from heightlab.heights.projective import p1_point
from heightlab.numlin.matrix import RatMatrix
from heightlab.orbits.intersect import gap_bound_check, orbit_intersection
from heightlab.orbits.records import detect_preperiodic, naive_preperiodic, northcott_scan, preperiodic_oracle

from oracles import all_points_up_to, naive_cycle, preperiodic_by_height, proj_step_poly


def poly_step(c):
    """Plain-int step for ``z -> z^2 + c`` with integer ``c``."""
    return proj_step_poly([1, 0, c], [0, 0, 1])


class TestDetect:
    @pytest.mark.parametrize("c,x,tail,period", [
        (-1, 0, 0, 2), (0, -1, 1, 1), (-2, 0, 2, 1), (0, 0, 0, 1), (-1, "inf", 0, 1), (-2, 1, 1, 1), (-2, "1/2", None, None),
    ])
    def test_examples(self, c, x, tail, period):
        r = detect_preperiodic(polynomial_map([c, 0, 1]), p1_point(x), digits_budget=500)
        assert (r.tail_length, r.period) == (tail, period) and r.preperiodic == (period is not None)

    def test_wandering_truncates(self):
        r = detect_preperiodic(polynomial_map([0, 0, 1]), p1_point(2), max_steps=200, digits_budget=1000)
        assert r.truncated and r.reason == "budget" and not r.preperiodic

    def test_max_steps(self):
        S = LatticeSystem(RatMatrix([[1, 1], [0, 1]]))
        r = detect_preperiodic(S, (0, 1), max_steps=30)
        assert r.truncated and r.reason == "max_steps" and len(r.points) == 31
        with pytest.raises(InputError):
            detect_preperiodic(S, (0, 1), max_steps=0)

    def test_against_full_history(self):
        rng = random.Random(2)
        for _ in range(60):
            c = rng.choice([-2, -1, 0])
            x = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
            f = polynomial_map([c, 0, 1])
            P = p1_point(x)
            want = naive_cycle(poly_step(c), P.coords, 12)
            got = detect_preperiodic(f, P, 12, digits_budget=2000)
            assert want == ((got.tail_length, got.period) if got.preperiodic else None)
            assert naive_preperiodic(f, P, 12) == want

    def test_lattice_rotation(self):
        S = LatticeSystem(RatMatrix([[0, -1], [1, 0]]), [1, 0])
        r = detect_preperiodic(S, (3, 5))
        assert r.period == 4 and r.tail_length == 0

    def test_iterate_consistency(self):
        # tail and period under f^k follow from those under f
        for c, x in ((-1, 0), (-2, 0), (-2, 1), (0, -1)):
            f = polynomial_map([c, 0, 1])
            P = p1_point(x)
            r = detect_preperiodic(f, P)
            for k in (2, 3):
                rk = detect_preperiodic(f.iterate(k), P)
                assert rk.period == r.period // math.gcd(r.period, k)
                assert rk.tail_length == -(-r.tail_length // k)


class TestNorthcott:
    @pytest.mark.parametrize("c,c0", [(0, 0.0), (-1, math.log(2))])
    def test_small_bound_matches_oracle(self, c, c0):
        f = polynomial_map([c, 0, 1])
        res = northcott_scan(f, 12)
        want = {P for P in all_points_up_to(12) if preperiodic_by_height(poly_step(c), P, c0)}
        assert {P.coords for P in res.confirmed} == want and not res.anomalies
        assert res.examined == len(all_points_up_to(12))

    def test_known_sets(self):
        got = {P.coords for P in northcott_scan(polynomial_map([0, 0, 1]), 20).confirmed}
        assert got == {(1, 0), (0, 1), (1, 1), (1, -1)}
        got = {P.coords for P in northcott_scan(polynomial_map([-2, 0, 1]), 20).confirmed}
        assert got == {(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (2, -1)}

    def test_package_oracle_agrees(self):
        f = polynomial_map([-1, 0, 1])
        for x in ("0", "-1", "1", "inf", "1/2", "3"):
            P = p1_point(x)
            assert preperiodic_oracle(f, P) == preperiodic_by_height(poly_step(-1), P.coords, math.log(2))

    def test_bad_bound(self):
        with pytest.raises(InputError):
            northcott_scan(polynomial_map([0, 0, 1]), 0)


class TestIntersection:
    def test_squares(self):
        f = polynomial_map([0, 0, 1])
        rep = orbit_intersection(f, p1_point(2), f, p1_point(16), 20)
        assert rep.pairs == tuple((m + 2, m) for m in range(19))
        assert rep.max_gap == 2 and rep.ap_decomposition == ((1, 2, 0),) and not rep.residual_pairs

    def test_truncation(self):
        f = polynomial_map([0, 0, 1])
        rep = orbit_intersection(f, p1_point(2), f, p1_point(16), 40, digits_budget=300)
        assert rep.truncated and rep.max_gap == 2 and rep.window < 40

    def test_cycles_against_brute_force(self):
        f = polynomial_map([-1, 0, 1])
        N = 12
        rep = orbit_intersection(f, p1_point(0), f, p1_point(-1), N)
        step = poly_step(-1)
        xs, ys = [(0, 1)], [(1, -1)]
        for _ in range(N):
            xs.append(step(xs[-1]))
            ys.append(step(ys[-1]))
        want = tuple((n, m) for n in range(N + 1) for m in range(N + 1) if xs[n] == ys[m])
        assert rep.pairs == want
        covered = set(rep.residual_pairs)
        for k, i, j in rep.ap_decomposition:
            t = 0
            while k * t + i <= N and k * t + j <= N:
                covered.add((k * t + i, k * t + j))
                t += 1
        assert covered == set(want)

    def test_empty(self):
        f = polynomial_map([0, 0, 1])
        rep = orbit_intersection(f, p1_point(3), f, p1_point(5), 8)
        assert rep.pairs == () and rep.max_gap is None

    def test_gap_check(self):
        f = polynomial_map([0, 0, 1])
        chk = gap_bound_check(f, p1_point(2), f, p1_point(16), 20)
        assert chk.holds and chk.bound == 2 and [n for n, _ in chk.schedule] == [5, 10, 20]

    def test_hypothesis(self):
        with pytest.raises(HypothesisFailed):
            gap_bound_check(polynomial_map([0, 0, 1]), p1_point(2), polynomial_map([0, 0, 0, 1]), p1_point(2), 8)
