"""Shared brute-force oracles.

These are written directly from the definitions in plain Python loops and
share no code with the package, so agreement is meaningful.
"""

import itertools
from fractions import Fraction

import numpy as np
import pytest


def sgn(v):
    return int(v > 0) - int(v < 0)


def a_oracle(z1, z2, z3, z4):
    # distance form of the sign kernel
    return sgn(abs(z1 - z3) + abs(z2 - z4) - abs(z1 - z2) - abs(z3 - z4))


def t_star_oracle(xs, ys, distinct=False):
    """Exact t* as a Fraction, looping over all index tuples."""
    n = len(xs)
    total = 0
    count = 0
    for i, j, k, l in itertools.product(range(n), repeat=4):
        if distinct and len({i, j, k, l}) < 4:
            continue
        total += a_oracle(xs[i], xs[j], xs[k], xs[l]) * a_oracle(ys[i], ys[j], ys[k], ys[l])
        count += 1
    return Fraction(total, count)


def quadrant_class(points):
    """'C', 'D' or 'T' by trying every axis-parallel split point."""
    xs = sorted({p[0] for p in points})
    ys = sorted({p[1] for p in points})
    cuts_x = [(a + b) / 2 for a, b in zip(xs, xs[1:])]
    cuts_y = [(a + b) / 2 for a, b in zip(ys, ys[1:])]
    for s in cuts_x:
        for t in cuts_y:
            quad = [0, 0, 0, 0]
            for x, y in points:
                quad[(x > s) * 2 + (y > t)] += 1
            # quadrants 0 (low, low) and 3 (high, high) are opposite, as are 1 and 2
            if quad in ([2, 0, 0, 2], [0, 2, 2, 0]):
                return "C"
            if quad == [1, 1, 1, 1]:
                return "D"
    return "T"


def pop_tau_oracle(probs, rv, cv):
    """tau* of a small real-valued joint by summing over category quadruples."""
    r, c = probs.shape
    cells = [(i, j) for i in range(r) for j in range(c) if probs[i, j] > 0]
    total = 0.0
    for q in itertools.product(cells, repeat=4):
        w = probs[q[0]] * probs[q[1]] * probs[q[2]] * probs[q[3]]
        ax = a_oracle(*(rv[i] for i, _ in q))
        ay = a_oracle(*(cv[j] for _, j in q))
        total += w * ax * ay
    return total


def hoeffding_oracle(xs, ys):
    """(1/n) sum_i (F12 - F1 F2)^2 at the sample points, '<=' convention."""
    n = len(xs)
    total = Fraction(0)
    for i in range(n):
        f12 = Fraction(sum(xs[j] <= xs[i] and ys[j] <= ys[i] for j in range(n)), n)
        f1 = Fraction(sum(xs[j] <= xs[i] for j in range(n)), n)
        f2 = Fraction(sum(ys[j] <= ys[i] for j in range(n)), n)
        total += (f12 - f1 * f2) ** 2
    return total / n


def mid_grade_oracle(values):
    n = len(values)
    return [Fraction(sum(v < z for v in values) + sum(v <= z for v in values), 2 * n) for z in values]


def dewet_oracle(xs, ys):
    gx = mid_grade_oracle(xs)
    gy = mid_grade_oracle(ys)
    n = len(xs)

    def h(g, i, j, k, l):
        return abs(g[i] - g[j]) + abs(g[k] - g[l]) - abs(g[i] - g[k]) - abs(g[j] - g[l])

    total = sum(
        h(gx, *t) * h(gy, *t) for t in itertools.product(range(n), repeat=4)
    )
    return total / n**4


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def tied_sample(rng, n, levels=4):
    from taustar import PairedSample

    return PairedSample(rng.integers(0, levels, n), rng.integers(0, levels, n))
