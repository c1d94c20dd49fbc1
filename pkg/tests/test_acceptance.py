"""Acceptance criteria.

Each test appends one ``ACCEPTANCE k: PASS|FAIL`` line to the session log
(printed in the terminal summary) and then asserts. Reference values come
from ``oracles.py`` or from hand derivations in the comments.
"""

from __future__ import annotations

import itertools
import json
import math
import random
import time
from fractions import Fraction

import pytest

from heightlab.canonical.lattice import NO, UNDECIDED, YES, lattice_canonical, zf_membership
from heightlab.canonical.polarized import call_silverman, height_offset
from heightlab.canonical.series import height_series, shift_identity_holds
from heightlab.canonical.wehler import nef_canonical_wehler, nef_sequence
from heightlab.cli.main import main
from heightlab.dynsys.lattice import LatticeSystem
from heightlab.dynsys.p1 import p1_validate, polynomial_map
from heightlab.dynsys.picard import ProductSystem, system_spectral
from heightlab.dynsys.wehler import AXES, wehler_involution
from heightlab.errors import PrecisionExhausted
from heightlab.heights.elliptic import EllipticCurve, ec_add, ec_mul, ec_neg
from heightlab.heights.neron_tate import neron_tate, neron_tate_local
from heightlab.heights.projective import enumerate_p1_points, p1_point, weil_height
from heightlab.numlin.matrix import CMMatrix, RatMatrix
from heightlab.numlin.spectral import growth_exponent_oracle, spectral_data
from heightlab.orbits.intersect import gap_bound_check, orbit_intersection
from heightlab.orbits.records import northcott_scan

from corpus import EXAMPLES, WEHLER_POINTS, load, point
from oracles import frob_powers_fit, preperiodic_by_height, proj_step_poly, zero_limit_oracle


def record(log, k: int, ok: bool, detail: str, t0: float) -> None:
    log.append(f"ACCEPTANCE {k}: {'PASS' if ok else 'FAIL'} - {detail} ({time.perf_counter() - t0:.2f}s)")


# --- 1 -------------------------------------------------------------------

def test_jordan_closed_form(acceptance_log, capsys):
    t0 = time.perf_counter()
    path = str(EXAMPLES / "jordan_2x2.json")
    assert main(["spectral", "--system", path]) == 0
    sp = json.loads(capsys.readouterr().out)
    lo, hi = (Fraction(x) for x in sp["delta"])
    spectral_ok = lo <= 4 <= hi and sp["l"] == 2
    assert main(["series", "--system", path, "--point", "0,1", "--steps", "50"]) == 0
    rows = json.loads(capsys.readouterr().out)["rows"]
    # A^n (0, 1) = (3 n 2^(n-1), 2^n), so a_n = (9 n^2 4^(n-1) + 4^n) / (4^n n^2)
    series_ok = len(rows) == 51 and all(
        Fraction(r["a_n_exact"]) == Fraction(9, 4) + Fraction(1, r["n"] ** 2) for r in rows[1:])
    est = lattice_canonical(LatticeSystem(RatMatrix([[2, 3], [0, 2]])), (0, 1))
    canon_ok = est.limsup_exact == est.liminf_exact == Fraction(9, 4)
    elapsed = time.perf_counter() - t0
    ok = spectral_ok and series_ok and canon_ok and elapsed < 1
    record(acceptance_log, 1, ok, f"delta=[{lo},{hi}] l={sp['l']}, a_n exact to n=50: {series_ok}, "
                                  f"limit={est.limsup_exact}", t0)
    assert ok


# --- 2 -------------------------------------------------------------------

def test_spectral_vs_growth_oracle(acceptance_log):
    t0 = time.perf_counter()
    rng = random.Random(20240501)
    cases = []
    while len(cases) < 50:
        n = rng.randint(1, 5)
        M = RatMatrix([[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)])
        try:
            sd = spectral_data(M)
        except PrecisionExhausted:
            continue
        if sd.rho.certainly_gt(1):
            cases.append((M, sd))
    rho_bad = l_miss = 0
    worst = 0.0
    for M, sd in cases:
        log_rho, l_fit = growth_exponent_oracle(M, 30)
        err = abs(log_rho - math.log(float(sd.rho.midpoint)))
        worst = max(worst, err)
        rho_bad += err > 0.02
        l_miss += round(l_fit) != sd.jordan_exponent
    # an independent plain float fit agrees on the first few matrices too
    fit_ok = all(abs(frob_powers_fit(M.rows) - math.log(float(sd.rho.midpoint))) < 0.1
                 for M, sd in cases[:10] if sd.jordan_exponent == 0)
    elapsed = time.perf_counter() - t0
    ok = rho_bad == 0 and l_miss <= 2 and fit_ok and elapsed < 60
    record(acceptance_log, 2, ok, f"50 matrices, worst |dlog rho|={worst:.2e}, l misses={l_miss}", t0)
    assert ok


# --- 3 -------------------------------------------------------------------

NT_CORPUS = [
    ([0, 0, 1, -1, 0], (0, 0), (1, 0)),     # 37a
    ([0, 1, 1, 0, 0], (0, 0), (-1, 0)),     # 43a
    ([1, -1, 1, 0, 0], (0, 0), (1, 0)),     # 53a
    ([0, 1, 1, -2, 0], (0, 0), (1, 0)),     # 389a, rank 2
    ([0, 0, 0, 0, 17], (-1, 4), (2, 5)),    # y^2 = x^3 + 17
]


def test_neron_tate_backends(acceptance_log):
    t0 = time.perf_counter()
    tol = 1e-7
    hA = lambda R: float(neron_tate(R, tol, max_depth=10).value.midpoint)
    hB = lambda R: float(neron_tate_local(R, tol).value.midpoint)
    worst_ab = worst_dup = worst_par = 0.0
    for ainvs, p, q in NT_CORPUS:
        E = EllipticCurve.from_list(ainvs)
        P, Q = E.point(*p), E.point(*q)
        for R in (P, Q, ec_mul(2, P), ec_add(P, Q), ec_add(P, ec_neg(Q))):
            worst_ab = max(worst_ab, abs(hA(R) - hB(R)))
        for h in (hA, hB):
            worst_dup = max(worst_dup, abs(h(ec_mul(2, P)) - 4 * h(P)))
            worst_par = max(worst_par, abs(h(ec_add(P, Q)) + h(ec_add(P, ec_neg(Q))) - 2 * h(P) - 2 * h(Q)))
    elapsed = time.perf_counter() - t0
    # published value for 37a, halved to this normalization
    ref = abs(hB(EllipticCurve.from_list([0, 0, 1, -1, 0]).point(0, 0)) - 0.0511114082399688 / 2)
    ok = worst_ab <= 1e-6 and worst_dup <= 4e-6 and worst_par <= 4e-6 and ref < 1e-9 and elapsed < 120
    record(acceptance_log, 3, ok, f"5 curves, |A-B|<={worst_ab:.1e}, dup {worst_dup:.1e}, "
                                  f"parallelogram {worst_par:.1e}, 37a ref {ref:.1e}", t0)
    assert ok


# --- 4 -------------------------------------------------------------------

P1_CORPUS = {
    "z^2-1": polynomial_map([-1, 0, 1]),
    "z^2-2": polynomial_map([-2, 0, 1]),
    "z^2+1": polynomial_map([1, 0, 1]),
    "z^2+z": polynomial_map([0, 1, 1]),
    "z^2-3/4": p1_validate([4, 0, -3], [0, 0, 4]),
    "(z^2+1)/z": p1_validate([1, 0, 1], [0, 1, 0]),
    "1/z^2+2": p1_validate([2, 0, 1], [1, 0, 0]),
    "z^3-2z": polynomial_map([0, -2, 0, 1]),
    "z^3+1": polynomial_map([1, 0, 0, 1]),
    "z^4-1": polynomial_map([-1, 0, 0, 0, 1]),
}


def test_call_silverman(acceptance_log):
    t0 = time.perf_counter()
    tol = 1e-4
    rng = random.Random(7)
    worst = 0.0
    upper_ok = True
    for f in P1_CORPUS.values():
        d = f.degree
        C0 = float(height_offset(f))
        for _ in range(100):
            P = p1_point(Fraction(rng.randint(-20, 20), rng.randint(1, 20)))
            a = float(call_silverman(f, P, tol).value.midpoint)
            b = float(call_silverman(f, f(P), tol).value.midpoint)
            worst = max(worst, abs(b - d * a))
            upper_ok &= a <= float(weil_height(P).value) + C0 + 1e-12
    elapsed = time.perf_counter() - t0
    ok = worst <= 2 * tol and upper_ok and elapsed < 60
    record(acceptance_log, 4, ok, f"10 maps x 100 points, worst |h(fP)-d h(P)|={worst:.2e}, "
                                  f"h_hat <= h + C0: {upper_ok}", t0)
    assert ok


# --- 5 -------------------------------------------------------------------

@pytest.mark.parametrize("c,c0,expected", [
    # z^2: |h(f P) - 2 h(P)| = 0, so C0 = 0
    (0, 0.0, {(1, 0), (0, 1), (1, 1), (1, -1)}),
    # z^2 - 1: max(|X^2 - Y^2|, Y^2) lies between max(X^2, Y^2)/2 and 2 max(X^2, Y^2)
    # and the resultant is 1, so C0 = log 2
    (-1, math.log(2), {(1, 0), (0, 1), (1, 1), (1, -1)}),
])
def test_northcott(acceptance_log, c, c0, expected):
    t0 = time.perf_counter()
    f = polynomial_map([c, 0, 1])
    res = northcott_scan(f, 100)
    got = {P.coords for P in res.confirmed}
    step = proj_step_poly([1, 0, c], [0, 0, 1])
    pts = enumerate_p1_points(100)
    oracle = {P.coords for P in pts if preperiodic_by_height(step, P.coords, c0)}
    elapsed = time.perf_counter() - t0
    ok = got == expected == oracle and not res.anomalies and elapsed < 30
    name = "z^2" if c == 0 else f"z^2{c:+d}"
    record(acceptance_log, 5, ok, f"{name} at B=100: {len(got)} points of {res.examined}, "
                                  f"oracle agrees: {got == oracle}", t0)
    assert ok


# --- 6 -------------------------------------------------------------------

def test_orbit_intersection(acceptance_log):
    t0 = time.perf_counter()
    f = polynomial_map([0, 0, 1])
    x, y = p1_point(2), p1_point(16)
    details = []
    ok = True
    for N, budget in ((10, 10 ** 6), (20, 10 ** 6), (40, 10 ** 6), (10, 100)):
        rep = orbit_intersection(f, x, f, y, N, budget)
        nx, ny = rep.computed
        want = tuple((m + 2, m) for m in range(ny + 1) if m + 2 <= nx)
        good = (rep.pairs == want and rep.max_gap == 2 and rep.ap_decomposition == ((1, 2, 0),)
                and not rep.residual_pairs)
        ok &= good
        details.append(f"N={N}{' budget=100' if budget == 100 else ''}: window {rep.computed}"
                       f"{' truncated' if rep.truncated else ''}")
    chk = gap_bound_check(f, x, f, y, 20)
    ok &= chk.holds and chk.bound == 2
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 10
    record(acceptance_log, 6, ok, "gap 2, one AP, no residue; " + "; ".join(details), t0)
    assert ok


# --- 7 -------------------------------------------------------------------

def _cm(real, omega, d):
    return CMMatrix(RatMatrix(real), RatMatrix(omega), d)


J3 = RatMatrix([[2, 1, 0], [0, 2, 1], [0, 0, 2]])
EX11 = RatMatrix([[2, 3], [0, 2]])
# t^2 + 2 twice with an identity coupling: roots +-i sqrt 2, one Jordan step
QJ = RatMatrix([[0, -2, 1, 0], [1, 0, 0, 1], [0, 0, 0, -2], [0, 0, 1, 0]])
ROT1 = RatMatrix([[1, -1, 0], [1, 1, 0], [0, 0, 1]])
ROT_IRR = RatMatrix([[1, -2], [1, 1]])
GOLD_SUB = RatMatrix([[2, 0, 0], [0, 0, 1], [0, 1, 1]])
CM1 = _cm([[1, 0], [0, 1]], [[1, 0], [0, 0]], 1)   # diag(1 + i, 1)
CM2 = _cm([[0, 0], [0, 1]], [[1, 0], [0, 0]], 2)   # diag(sqrt -2, 1)
CM3 = _cm([[1, 1], [0, 1]], [[1, 0], [0, 1]], 3)   # (1 + sqrt -3) I + N
D23 = RatMatrix.diag([2, 3])

# (matrix, translation, point, delta, l, expected); delta and l by hand
ZF_CASES = [
    (J3, None, (5, 7, 0), 4, 4, YES),
    (J3, None, (0, 0, 1), 4, 4, NO),
    (J3, None, (1, -1, 2), 4, 4, NO),
    (EX11, None, (4, 0), 4, 2, YES),
    (EX11, None, (0, 1), 4, 2, NO),
    (RatMatrix.diag([3, 2, 1]), None, (0, 5, -2), 9, 0, YES),
    (RatMatrix.diag([3, 2, 1]), None, (1, 0, 0), 9, 0, NO),
    (QJ, None, (1, 0, 0, 0), 2, 2, YES),
    (QJ, None, (0, 0, 1, 0), 2, 2, NO),
    (ROT1, None, (0, 0, 3), 2, 0, YES),
    (ROT1, None, (1, 1, 1), 2, 0, NO),
    (ROT_IRR, None, (2, -1), 3, 0, NO),
    (GOLD_SUB, None, (0, 1, 1), 4, 0, YES),
    (GOLD_SUB, None, (1, 0, 0), 4, 0, NO),
    (CM1, None, (0, 0, 3, 1), 2, 0, YES),
    (CM1, None, (1, 2, 0, 0), 2, 0, NO),
    (CM2, None, (0, 0, 1, 1), 2, 0, YES),
    (CM2, None, (1, 0, 0, 0), 2, 0, NO),
    (CM3, None, (2, 1, 0, 0), 4, 2, YES),
    (CM3, None, (0, 0, 1, 0), 4, 2, NO),
    (D23, (1, 1), (-1, Fraction(-1, 2)), 9, 0, YES),
    (D23, (1, 1), (5, Fraction(-1, 2)), 9, 0, YES),
    (D23, (1, 1), (0, 0), 9, 0, NO),
    (EX11, (1, 2), (5, -2), 4, 2, YES),
    (EX11, (1, 2), (8, -2), 4, 2, YES),
    (EX11, (1, 2), (5, -1), 4, 2, NO),
]
MIXED = [RatMatrix([[0, 1], [1, 1]]), RatMatrix([[0, -1], [1, 3]])]


def test_zf_exactness(acceptance_log):
    t0 = time.perf_counter()
    wrong = []
    for idx, (A, p, v, delta, l, expected) in enumerate(ZF_CASES):
        S = LatticeSystem(A, p)
        ss = system_spectral(S)
        assert ss.delta.contains(delta) and ss.l == l, idx
        rows = S.linear.rows
        G = S.gram.gram.rows
        trans = list(S.translation)
        oracle = YES if zero_limit_oracle(rows, trans, G, v, delta, l) else NO
        r = zf_membership(S, v)
        if not (r.member == oracle == expected and r.certification != "heuristic"):
            wrong.append((idx, r.member, oracle, expected))
    mixed = [zf_membership(LatticeSystem(A), (1, 0)).member for A in MIXED]
    elapsed = time.perf_counter() - t0
    ok = not wrong and all(m == UNDECIDED for m in mixed) and elapsed < 60
    record(acceptance_log, 7, ok, f"{len(ZF_CASES)} decidable cases, mismatches {wrong}, "
                                  f"mixed-modulus cases undecided: {mixed}", t0)
    assert ok


# --- 8 -------------------------------------------------------------------

def test_wehler(acceptance_log):
    t0 = time.perf_counter()
    L = load("wehler_seed4")
    W = L.system
    delta = system_spectral(W).delta
    d = float(delta.midpoint)
    preserve = mult = shift = True
    gaps = []
    for text in WEHLER_POINTS:
        P = point(L, text)
        Q = P
        for _ in range(2):
            for a in AXES:
                preserve &= W.contains(wehler_involution(W, a, Q))
            Q = W(Q)
            preserve &= W.contains(Q)
        fP = W(P)
        # When the digit budget stops both orbits at the same point the rule
        # holds by construction, so fP stops two steps short of where P stopped.
        reached = len(nef_sequence(W, P, 6)[0]) - 1
        a, b = nef_canonical_wehler(W, P, 6), nef_canonical_wehler(W, fP, reached - 2)
        gap = abs(float(b.value.midpoint) - d * float(a.value.midpoint))
        allowed = 4 * (float(b.error_bound.upper) + d * float(a.error_bound.upper))
        gaps.append(f"{gap:.1e}/{allowed:.1e}")
        mult &= gap <= allowed
        shift &= shift_identity_holds(height_series(W, P, 6), height_series(W, fP, 5))
    elapsed = time.perf_counter() - t0
    ok = preserve and mult and shift and elapsed < 120
    record(acceptance_log, 8, ok, f"F preserved: {preserve}, multiplication rule (gap/allowed) "
                                  f"{', '.join(gaps)}, shift identity: {shift}", t0)
    assert ok


# --- 9 -------------------------------------------------------------------

def _lex_max(a, b):
    if a.delta.certainly_gt(b.delta):
        return a.delta, a.l
    if b.delta.certainly_gt(a.delta):
        return b.delta, b.l
    return a.delta, max(a.l, b.l)


def test_structural_identities(acceptance_log):
    t0 = time.perf_counter()
    names = sorted(p.stem for p in EXAMPLES.glob("*.json"))
    systems = {n: load(n).system for n in names}
    iter_ok = True
    for n, S in systems.items():
        a, b = system_spectral(S), system_spectral(S.iterate(2))
        good = b.delta.overlaps(a.delta ** 2) and b.l == a.l
        if a.delta_exact is not None and b.delta_exact is not None:
            good &= b.delta_exact == a.delta_exact ** 2
        iter_ok &= good
    point_systems = [n for n in names if n != "picard_wehler"]
    prod_ok = True
    checked = 0
    for m, n in itertools.combinations(point_systems, 2):
        a, b = system_spectral(systems[m]), system_spectral(systems[n])
        if a.delta.overlaps(b.delta) and a.delta_key != b.delta_key:
            continue  # equality of the degrees cannot be decided from enclosures
        got = system_spectral(ProductSystem(systems[m], systems[n]))
        want_delta, want_l = _lex_max(a, b)
        prod_ok &= got.delta.overlaps(want_delta) and got.l == want_l
        checked += 1
    elapsed = time.perf_counter() - t0
    ok = iter_ok and prod_ok and checked >= 30 and elapsed < 10
    record(acceptance_log, 9, ok, f"iterate rule on {len(systems)} systems: {iter_ok}; "
                                  f"product rule on {checked} pairs: {prod_ok}", t0)
    assert ok
