"""Independent reference computations used as test oracles.

These are written from the textbook definitions, in exact rational
arithmetic where practical, and share no code with the package.
"""

from fractions import Fraction
import math


def brute_ranks(xs):
    """rank_i = #(x_j < x_i) + (#(x_j == x_i) + 1) / 2, by double loop."""
    out = []
    for x in xs:
        below = sum(1 for y in xs if y < x)
        equal = sum(1 for y in xs if y == x)
        out.append(below + (equal + 1) / 2)
    return out


def brute_pearson(xs, ys):
    """Covariance over the product of standard deviations, sums done exactly."""
    fx = [Fraction(x) for x in xs]
    fy = [Fraction(y) for y in ys]
    n = len(fx)
    mx = sum(fx) / n
    my = sum(fy) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(fx, fy))
    sxx = sum((a - mx) ** 2 for a in fx)
    syy = sum((b - my) ** 2 for b in fy)
    return float(sxy) / math.sqrt(float(sxx) * float(syy))


def brute_spearman(xs, ys):
    return brute_pearson(brute_ranks(xs), brute_ranks(ys))


def classical_spearman(xs, ys):
    """1 - 6 sum(d^2) / (n (n^2 - 1)); valid only without ties."""
    n = len(xs)
    rx = brute_ranks(xs)
    ry = brute_ranks(ys)
    d2 = sum(Fraction(a - b) ** 2 for a, b in zip(rx, ry))
    return float(1 - 6 * d2 / (n * (n * n - 1)))
