"""Independent reference computations used by the tests.

Nothing here calls the estimators under test. Orbits are iterated with
plain Python integers and Fractions, and constants are derived by hand
in the comments.
"""

from __future__ import annotations

import math
from fractions import Fraction


def mat_vec(A, v):
    return [sum(Fraction(a) * x for a, x in zip(row, v)) for row in A]


def affine_orbit(A, p, v, n_max):
    out = [list(map(Fraction, v))]
    for _ in range(n_max):
        w = mat_vec(A, out[-1])
        out.append([a + Fraction(b) for a, b in zip(w, p)])
    return out


def quad(G, v):
    n = len(v)
    return sum(Fraction(G[i][j]) * v[i] * v[j] for i in range(n) for j in range(n))


def normalized_terms(A, p, G, v, delta, l, n_max=60):
    """``a_n = v_n^T G v_n / (delta^n n^l)`` by direct iteration."""
    orbit = affine_orbit(A, p, v, n_max)
    return {n: quad(G, orbit[n]) / (Fraction(delta) ** n * Fraction(n) ** l) for n in range(1, n_max + 1)}


def zero_limit_oracle(A, p, G, v, delta, l, n_max=60) -> bool:
    """Classify ``liminf a_n`` as zero or positive from exact iterates.

    A vanishing limit comes from lower Jordan order or a smaller modulus,
    so the late window maximum drops by at least ``(25/55)^2 < 1/4``
    against the early window; a positive limit keeps the windows
    comparable. The cut at 1/2 separates the two regimes.
    """
    a = normalized_terms(A, p, G, v, delta, l, n_max)
    early = max(a[n] for n in range(20, 31))
    late = max(a[n] for n in range(50, 61))
    if early == 0:
        return True
    return late / early < Fraction(1, 2)


def naive_cycle(step, x, max_steps):
    """Full-history search: ``(tail, period)`` or None."""
    seen = {}
    for i in range(max_steps + 1):
        if x in seen:
            return seen[x], i - seen[x]
        seen[x] = i
        x = step(x)
    return None


def proj_step_poly(coeffs_desc_num, coeffs_desc_den):
    """A P^1 step on primitive integer pairs using plain ints and math.gcd."""

    def ev(c, X, Y):
        d = len(c) - 1
        return sum(ci * X ** (d - i) * Y ** i for i, ci in enumerate(c))

    def step(P):
        X, Y = P
        a, b = ev(coeffs_desc_num, X, Y), ev(coeffs_desc_den, X, Y)
        g = math.gcd(a, b)
        a, b = a // g, b // g
        if a < 0 or (a == 0 and b < 0):
            a, b = -a, -b
        return (a, b)

    return step


def preperiodic_by_height(step, P, c0: float, max_steps=10_000) -> bool:
    """Orbit repeats before any height exceeds ``c0`` iff preperiodic.

    ``c0`` bounds ``|h_hat - h|``; a preperiodic orbit has canonical height
    zero, so all its heights are at most ``c0``.
    """
    seen = set()
    for _ in range(max_steps):
        if P in seen:
            return True
        seen.add(P)
        if math.log(max(abs(P[0]), abs(P[1]))) > c0 + 1e-12:
            return False
        P = step(P)
    raise RuntimeError("undecided")


def all_points_up_to(B):
    """P^1(Q) points of multiplicative height at most ``B``, by brute force."""
    pts = {(1, 0), (0, 1)}
    for q in range(1, B + 1):
        for p in range(-B, B + 1):
            if p and math.gcd(p, q) == 1:
                pts.add((p, q) if p > 0 else (-p, -q))
    return pts


def frob_powers_fit(rows, n_lo=10, n_hi=40):
    """Plain float fit of ``log ||M^n||`` against ``n`` (used only as a sanity check)."""
    M = [[Fraction(x) for x in r] for r in rows]
    P = [[Fraction(int(i == j)) for j in range(len(M))] for i in range(len(M))]
    xs, ys = [], []
    for n in range(1, n_hi + 1):
        P = [[sum(P[i][k] * M[k][j] for k in range(len(M))) for j in range(len(M))] for i in range(len(M))]
        if n >= n_lo:
            s = sum(x * x for r in P for x in r)
            xs.append(n)
            ys.append(0.5 * math.log(float(s)))
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)
