import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from noisecheck.errors import DegenerateInputError, InvalidInputError
from noisecheck.stats_core import average_ranks, mean_and_variance, pearson, roughness, spearman_rho
from oracles import brute_pearson, brute_ranks, brute_spearman, classical_spearman

reals = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
small_ints = st.integers(min_value=-5, max_value=5).map(float)


@pytest.mark.parametrize("xs, expected", [
    ([3.0, 1.0, 2.0], [3.0, 1.0, 2.0]),
    ([1.0, 2.0, 2.0, 3.0], [1.0, 2.5, 2.5, 4.0]),
    ([5.0, 5.0, 5.0], [2.0, 2.0, 2.0]),
    ([7.0], [1.0]),
])
def test_average_ranks_examples(xs, expected):
    assert average_ranks(xs).tolist() == expected


@pytest.mark.parametrize("bad", [[], [1.0, float("nan")], [float("inf")], [[1.0, 2.0]]])
def test_average_ranks_rejects(bad):
    with pytest.raises(InvalidInputError):
        average_ranks(bad)


@given(st.lists(small_ints | reals, min_size=1, max_size=40))
def test_average_ranks_match_brute_force_and_sum(xs):
    r = average_ranks(xs)
    assert r.tolist() == brute_ranks(xs)
    n = len(xs)
    assert r.sum() == n * (n + 1) / 2


def test_pearson_examples():
    assert pearson([1, 2, 3], [1, 2, 3]) == 1.0
    assert pearson([1, 2, 3], [3, 2, 1]) == -1.0
    assert pearson([1, 2, 3], [1, 3, 2]) == 0.5
    assert brute_pearson([1, 2, 3], [1, 3, 2]) == 0.5


def test_pearson_errors():
    with pytest.raises(InvalidInputError):
        pearson([1, 2, 3], [1, 2])
    with pytest.raises(InvalidInputError):
        pearson([1], [1])
    with pytest.raises(DegenerateInputError):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(DegenerateInputError):
        pearson([1, 2, 3], [0.1, 0.1, 0.1])


def test_spearman_examples():
    assert spearman_rho([10, 20, 30], [1, 5, 9]) == 1.0
    assert spearman_rho([1, 2, 3, 4], [4, 3, 2, 1]) == -1.0
    # oracle: ranks [1, 2.5, 2.5, 4] vs [1, 3, 2, 4] -> 4.5 / sqrt(4.5 * 5) = 3 / sqrt(10)
    expected = brute_spearman([1, 2, 2, 4], [1, 3, 2, 4])
    assert expected == pytest.approx(3 / math.sqrt(10), abs=1e-15)
    assert spearman_rho([1, 2, 2, 4], [1, 3, 2, 4]) == pytest.approx(expected, abs=1e-15)


def test_spearman_constant_is_degenerate():
    with pytest.raises(DegenerateInputError):
        spearman_rho([2, 2, 2], [1, 2, 3])


pairs_of_lists = st.integers(min_value=2, max_value=30).flatmap(
    lambda n: st.tuples(st.lists(small_ints | reals, min_size=n, max_size=n),
                        st.lists(small_ints | reals, min_size=n, max_size=n)))


@given(pairs_of_lists)
def test_spearman_matches_definitional_oracle(xy):
    xs, ys = xy
    assume(len(set(xs)) > 1 and len(set(ys)) > 1)
    assert spearman_rho(xs, ys) == pytest.approx(brute_spearman(xs, ys), abs=1e-12)


@given(pairs_of_lists)
def test_spearman_symmetry_and_self(xy):
    xs, ys = xy
    assume(len(set(xs)) > 1 and len(set(ys)) > 1)
    assert spearman_rho(xs, ys) == spearman_rho(ys, xs)
    assert spearman_rho(xs, xs) == 1.0


@given(pairs_of_lists, st.randoms(use_true_random=False))
def test_spearman_invariant_under_joint_reordering(xy, rnd):
    xs, ys = xy
    assume(len(set(xs)) > 1 and len(set(ys)) > 1)
    idx = list(range(len(xs)))
    rnd.shuffle(idx)
    px = [xs[i] for i in idx]
    py = [ys[i] for i in idx]
    assert spearman_rho(px, py) == pytest.approx(spearman_rho(xs, ys), abs=1e-12)


@given(pairs_of_lists)
def test_spearman_invariant_under_increasing_transform(xy):
    xs, ys = xy
    assume(len(set(xs)) > 1 and len(set(ys)) > 1)
    tx = [math.atan(x / 1000.0) * 3 + 7 for x in xs]
    assume(len(set(tx)) == len(set(xs)))  # transform must stay strictly increasing in float
    assert spearman_rho(tx, ys) == spearman_rho(xs, ys)


@given(st.integers(min_value=3, max_value=50), st.randoms(use_true_random=False))
def test_spearman_tie_free_matches_classical_formula(n, rnd):
    xs = rnd.sample(range(1000), n)
    ys = rnd.sample(range(1000), n)
    assert spearman_rho(xs, ys) == pytest.approx(classical_spearman(xs, ys), abs=1e-12)


@pytest.mark.parametrize("n", [10, 30, 100])
def test_null_variance_is_one_over_n_minus_one(n):
    # Monte Carlo oracle: under independence Var(rho) = 1 / (n - 1) exactly.
    rng = np.random.default_rng(12345 + n)
    draws = 4000
    rhos = np.array([spearman_rho(rng.random(n), rng.random(n)) for _ in range(draws)])
    target = 1.0 / (n - 1)
    # relative sd of a sample variance is about sqrt(2 / draws) ~ 2.2%; allow ~4.5 sd
    assert rhos.var(ddof=1) == pytest.approx(target, rel=0.10)
    assert abs(rhos.mean()) < 4 * math.sqrt(target / draws)


@pytest.mark.parametrize("xs, expected", [
    ([2.0, 2.0, 2.0], (2.0, 0.0)),
    ([1.0, 3.0], (2.0, 2.0)),
    ([0.0], (0.0, 0.0)),
])
def test_mean_and_variance_examples(xs, expected):
    assert mean_and_variance(xs) == expected


def test_mean_and_variance_empty():
    with pytest.raises(InvalidInputError):
        mean_and_variance([])


@settings(max_examples=200)
@given(st.lists(reals, min_size=2, max_size=50))
def test_mean_and_variance_matches_exact_arithmetic(xs):
    from fractions import Fraction
    fx = [Fraction(x) for x in xs]
    m = sum(fx) / len(fx)
    v = sum((x - m) ** 2 for x in fx) / (len(fx) - 1)
    mean, var = mean_and_variance(xs)
    assert mean == pytest.approx(float(m), rel=1e-12, abs=1e-9)
    assert var == pytest.approx(float(v), rel=1e-9, abs=1e-6)


@pytest.mark.parametrize("xs, expected", [
    ([1.0, 1.0, 1.0], 0.0),
    ([1.0, 0.5, 1.0], 0.5),
    ([1.0, 0.8, 0.6], 0.2),
])
def test_roughness_examples(xs, expected):
    assert roughness(xs) == pytest.approx(expected, abs=1e-15)


def test_roughness_needs_two_points():
    with pytest.raises(InvalidInputError):
        roughness([1.0])
