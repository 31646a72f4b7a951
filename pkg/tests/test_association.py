import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from femtonet.association import (
    Assignment,
    Thresholds,
    associate_proposed,
    associate_scheme1,
    associate_scheme2,
    classify,
    grouped_capacity,
    level_table,
)
from femtonet.metrics import total_capacity

B = 10e6


# --- classify ---------------------------------------------------------------

@pytest.mark.parametrize("eta, level", [(0.05, 0), (0.5, 2), (0.3, 1), (0.1, 1), (0.99, 2)])
def test_classify_examples(eta, level):
    assert classify(eta, (0.1, 0.5)) == level


def test_classify_general_q_matches_interval_scan():
    thr = (0.1, 0.2, 0.4, 0.8)
    for eta in np.linspace(0.01, 0.99, 99):
        expected = 0
        for l, t in enumerate(thr, 1):
            if eta >= t:
                expected = l
        assert classify(eta, thr) == expected


def test_classify_rejects_bad_input():
    with pytest.raises(ValueError):
        classify(1.0, (0.1, 0.5))
    with pytest.raises(ValueError):
        classify(0.0, (0.1, 0.5))
    with pytest.raises(ValueError):
        classify(0.3, (0.5, 0.1))


def test_level_table_matches_classify():
    rng = np.random.default_rng(0)
    eta = rng.uniform(0.001, 0.999, (3, 7))
    lt = level_table(eta, (0.2, 0.6))
    for i in range(3):
        for j in range(7):
            assert lt.levels[i, j] == classify(eta[i, j], (0.2, 0.6))


# --- Assignment bookkeeping --------------------------------------------------

def test_assignment_views_stay_consistent():
    a = Assignment(3, 5, n_max=2)
    a.assign(0, 1)
    a.assign(3, 1)
    with pytest.raises(ValueError):
        a.assign(4, 1)
    with pytest.raises(ValueError):
        a.assign(0, 2)
    a.move(3, 2)
    assert a.served_sets == [[], [0], [3]]
    assert a.counts.tolist() == [0, 1, 1]
    assert a.release(0) == 1
    assert a.station_of(0) is None
    a.check()


def test_thresholds_validation():
    with pytest.raises(ValueError):
        Thresholds(0.3, (0.2,), 0.01, 10)
    with pytest.raises(ValueError):
        Thresholds(0.1, (0.5,), 0.0, 10)
    with pytest.raises(ValueError):
        Thresholds(0.1, (1.0,), 0.01, 10)


# --- proposed association -----------------------------------------------------

def test_proposed_hand_executed_example():
    thr = Thresholds(0.1, (0.5,), 0.2, 10)
    a, final = associate_proposed(np.array([[0.6, 0.4]]), thr, return_thresholds=True)
    assert a.serving.tolist() == [0, 0]
    assert final.lambda2 == (0.1,)


def test_proposed_all_below_floor_is_empty():
    eta = np.full((3, 4), 0.01)
    a = associate_proposed(eta, Thresholds.uniform(3, 0.02, 0.5, 0.01, 10))
    assert a.served_count == 0


def test_proposed_equal_sinr_goes_to_lowest_index():
    a = associate_proposed(np.array([[0.6], [0.6]]), Thresholds.uniform(2, 0.1, 0.5, 0.01, 10))
    assert a.serving.tolist() == [0]


def test_proposed_respects_cap_and_removes_full_station():
    eta = np.array([[0.9, 0.8, 0.7], [0.3, 0.35, 0.6]])
    a = associate_proposed(eta, Thresholds.uniform(2, 0.1, 0.5, 0.05, 1))
    # station 0 fills with user 0; user 2 then falls to station 1 in the same pass
    assert a.serving.tolist() == [0, -1, 1]


def _random_instance(rng, max_s=3, max_u=6):
    s = int(rng.integers(1, max_s + 1))
    n = int(rng.integers(1, max_u + 1))
    eta = rng.uniform(0.001, 0.95, (s, n))
    lam1 = float(rng.uniform(0.01, 0.3))
    lam2 = tuple(float(x) for x in rng.uniform(lam1, 0.95, s))
    delta = float(rng.choice([0.01, 0.05, 0.2]))
    n_max = int(rng.integers(1, 4))
    return eta, Thresholds(lam1, lam2, delta, n_max)


def test_proposed_matches_straight_line_oracle():
    rng = np.random.default_rng(11)
    for _ in range(300):
        eta, thr = _random_instance(rng)
        got, final = associate_proposed(eta, thr, return_thresholds=True)
        want, want_lam2 = oracles.associate_ref(eta.tolist(), thr.lambda1, thr.lambda2, thr.delta, thr.n_max)
        assert got.serving.tolist() == [-1 if w is None else w for w in want]
        np.testing.assert_allclose(final.lambda2, want_lam2, rtol=0, atol=1e-15)


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_proposed_invariants(seed):
    rng = np.random.default_rng(seed)
    eta, thr = _random_instance(rng, 4, 8)
    a = associate_proposed(eta, thr)
    a.check()
    served = a.serving >= 0
    assert np.all(eta.max(axis=0)[served] >= thr.lambda1)
    # determinism
    assert associate_proposed(eta, thr) == a


# --- scheme 1 -------------------------------------------------------------------

def test_scheme1_distinct_argmaxes():
    a = associate_scheme1(np.array([[0.9, 0.1], [0.2, 0.8]]))
    assert a.serving.tolist() == [0, 1]


def test_scheme1_conflict_rule():
    a = associate_scheme1(np.array([[0.9, 0.8], [0.7, 0.1]]))
    assert a.serving.tolist() == [0, 1]


def test_scheme1_more_stations_than_users():
    a = associate_scheme1(np.array([[0.2], [0.7], [0.4]]))
    assert a.serving.tolist() == [1]
    assert a.counts.tolist() == [0, 1, 0]


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_scheme1_structure(seed):
    rng = np.random.default_rng(seed)
    s, n = int(rng.integers(1, 6)), int(rng.integers(1, 15))
    eta = rng.uniform(0.001, 0.99, (s, n))
    a = associate_scheme1(eta)
    a.check()
    assert np.all(a.counts <= 1)
    assert a.served_count == min(s, n)
    assert associate_scheme1(eta) == a


def test_scheme1_is_capacity_optimal_when_argmaxes_are_distinct():
    # brute force over every association of <= 3 stations and <= 6 users
    rng = np.random.default_rng(5)
    checked = 0
    while checked < 40:
        s, n = int(rng.integers(1, 4)), int(rng.integers(1, 7))
        eta = rng.uniform(0.01, 0.99, (s, n))
        if len(set(np.argmax(eta, axis=1))) < s:
            continue
        _, best = oracles.best_association(eta.tolist(), 1.0)
        a = associate_scheme1(eta)
        assert total_capacity(a, eta, 1.0) == pytest.approx(best, rel=1e-12)
        checked += 1


# --- scheme 2 -------------------------------------------------------------------

def test_scheme2_examples():
    assert associate_scheme2(np.array([[0.3], [0.6]]), 0.1, 10).serving.tolist() == [1]
    assert associate_scheme2(np.array([[0.5, 0.6, 0.7]]), 0.1, 2).serving.tolist() == [0, 0, -1]
    assert associate_scheme2(np.full((2, 3), 0.05), 0.1, 10).served_count == 0


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_scheme2_serves_everyone_above_floor_when_capacity_allows(seed):
    rng = np.random.default_rng(seed)
    s, n = int(rng.integers(1, 5)), int(rng.integers(1, 12))
    n_max = int(np.ceil(n / s)) + int(rng.integers(0, 2))
    eta = rng.uniform(0.001, 0.6, (s, n))
    a = associate_scheme2(eta, 0.1, n_max)
    a.check()
    eligible = eta.max(axis=0) >= 0.1
    assert np.array_equal(a.serving >= 0, eligible)


# --- grouped capacity -------------------------------------------------------------

def test_grouped_capacity_single_user():
    eta = np.array([[0.5]])
    a = Assignment(1, 1, 10)
    a.assign(0, 0)
    assert grouped_capacity(a, eta, level_table(eta, (0.1, 0.4)), B) == pytest.approx(1e7)


def test_grouped_capacity_equal_group_is_exact():
    eta = np.array([[0.6, 0.6, 0.2]])
    a = Assignment(1, 3, 10)
    for j in range(3):
        a.assign(j, 0)
    lt = level_table(eta, (0.1, 0.5))
    assert grouped_capacity(a, eta, lt, B) == pytest.approx(total_capacity(a, eta, B), rel=1e-12)


def test_grouped_capacity_bounded_by_exact():
    rng = np.random.default_rng(8)
    for _ in range(200):
        eta, thr = _random_instance(rng, 3, 8)
        a = associate_scheme2(eta, 0.001, 8)
        lt = level_table(eta, (0.2, 0.5))
        grouped = grouped_capacity(a, eta, lt, B)
        exact = oracles.network_capacity([None if x < 0 else int(x) for x in a.serving], eta.tolist(), B)
        assert grouped <= exact * (1 + 1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(1e-6, 1 - 1e-6), min_size=1, max_size=20))
def test_mean_sinr_lower_bounds_group_rate(etas):
    exact = sum(math.log2(1 / (1 - e)) for e in etas)
    mean = sum(etas) / len(etas)
    assert exact >= len(etas) * math.log2(1 / (1 - mean)) * (1 - 1e-12)
