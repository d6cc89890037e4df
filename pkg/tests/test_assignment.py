from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from masort.assignment import solve
from masort.errors import InvalidInputError
from oracles import best_matching_value, lexmin_optimal_matching


def exact_total(scores, matches):
    return sum((Fraction(float(scores[r, c])) for r, c in matches), Fraction(0))


def check_structure(res, shape, scores, gate):
    n_rows, n_cols = shape
    rows = [r for r, _ in res.matches]
    cols = [c for _, c in res.matches]
    assert len(set(rows)) == len(rows) and len(set(cols)) == len(cols)
    assert sorted(rows + res.unmatched_rows) == list(range(n_rows))
    assert sorted(cols + res.unmatched_cols) == list(range(n_cols))
    assert all(scores[r, c] >= gate for r, c in res.matches)


def test_examples():
    m = np.array([[0.9, 0.1], [0.2, 0.8]])
    res = solve(m, 0.0)
    assert res.matches == [(0, 0), (1, 1)]
    assert res.total(m) == pytest.approx(1.7)
    res = solve([[0.9]], 0.95)
    assert res.matches == [] and res.unmatched_rows == [0] and res.unmatched_cols == [0]
    assert solve([[0.5]], 0.0).matches == [(0, 0)]


def test_empty_shapes():
    assert solve(np.zeros((0, 3))).unmatched_cols == [0, 1, 2]
    assert solve(np.zeros((2, 0))).unmatched_rows == [0, 1]
    assert solve([]).matches == []


@pytest.mark.parametrize("bad", [[[np.nan]], [[np.inf, 0.0]], [[1.0, -np.inf]]])
def test_non_finite_rejected(bad):
    with pytest.raises(InvalidInputError):
        solve(bad)


def test_nan_gate_rejected():
    with pytest.raises(InvalidInputError):
        solve([[1.0]], float("nan"))


def test_gate_changes_the_optimum():
    m = np.array([[1.0, 0.6], [0.6, 0.45]])
    # ungated, the diagonal wins (1.45); gating out 0.45 leaves the swap (1.2)
    assert solve(m, -1.0).matches == [(0, 0), (1, 1)]
    assert solve(m, 0.5).matches == [(0, 1), (1, 0)]


def test_non_positive_pairs_left_unmatched():
    res = solve([[0.0, -0.2], [-1.0, 0.4]])
    assert res.matches == [(1, 1)]
    assert res.unmatched_rows == [0] and res.unmatched_cols == [0]


def test_random_against_exhaustive_oracle():
    rng = np.random.default_rng(20240501)
    for _ in range(500):
        m, n = rng.integers(1, 8, size=2)
        scores = rng.normal(0.3, 0.6, size=(m, n))
        gate = float(rng.uniform(-0.5, 1.0))
        res = solve(scores, gate)
        check_structure(res, (m, n), scores, gate)
        assert exact_total(scores, res.matches) == best_matching_value(scores, gate)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_ties_resolve_to_lexicographic_minimum(m, n, data):
    scores = data.draw(arrays(float, (m, n), elements=st.integers(-1, 3).map(float)))
    gate = data.draw(st.sampled_from([-5.0, 0.0, 1.0, 2.0]))
    assert solve(scores, gate).matches == lexmin_optimal_matching(scores, gate)


scores_strategy = st.tuples(st.integers(1, 6), st.integers(1, 6)).flatmap(
    lambda s: arrays(float, s, elements=st.floats(-1, 2, allow_nan=False, width=32)))


@settings(max_examples=200, deadline=None)
@given(scores_strategy, st.floats(-1, 1.5), st.randoms(use_true_random=False))
def test_row_and_column_permutation_equivariance(scores, gate, rnd):
    m, n = scores.shape
    # continuous draws can still tie; equivariance holds for the unique optimum
    base = solve(scores, gate)
    if sum(1 for match in _optimal_sets(scores, gate)) != 1:
        return
    pr = list(range(m))
    pc = list(range(n))
    rnd.shuffle(pr)
    rnd.shuffle(pc)
    permuted = scores[np.ix_(pr, pc)]
    got = {(pr[r], pc[c]) for r, c in solve(permuted, gate).matches}
    assert got == set(base.matches)


def _optimal_sets(scores, gate):
    from oracles import all_matchings
    best = best_matching_value(scores, gate)
    for match in all_matchings(*scores.shape):
        if all(scores[r, c] >= gate and scores[r, c] > 0 for r, c in match) and exact_total(scores, match) == best:
            yield match


dyadic = st.tuples(st.integers(1, 6), st.integers(1, 6)).flatmap(
    lambda s: arrays(float, s, elements=st.integers(1, 64).map(lambda k: k / 16)))


@settings(max_examples=200, deadline=None)
@given(dyadic, st.integers(0, 64).map(lambda k: k / 16), st.integers(-64, 64).map(lambda k: k / 16))
def test_shift_with_gate_keeps_matching(scores, gate_gap, shift):
    # Holds where every pair stays feasible and positive: then all maximal
    # matchings share one size and a constant shift cannot reorder them.
    shift = max(shift, -scores.min() + 1 / 16)
    gate = float(scores.min()) - gate_gap
    a = solve(scores, gate).matches
    b = solve(scores + shift, gate + shift).matches
    assert a == b


def test_shift_can_matter_once_the_gate_bites():
    m = np.array([[1.0, 0.3], [0.3, 0.0]])
    assert solve(m, 0.2).matches == [(0, 0)]
    assert solve(m + 10, 10.2).matches == [(0, 1), (1, 0)]
