import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hitl.errors import InvalidInputError, InvalidScheduleError
from hitl.gain import GainState
from hitl.stochastic import RngStream
from hitl.strategy import (
    Schedule,
    apportion,
    build_schedule,
    schedule_distribution,
    softmax_weights,
    strategy_index,
    weights_for_gain,
)

validities = st.lists(st.floats(0, 1), min_size=1, max_size=8)


def test_zero_gain_is_uniform():
    np.testing.assert_allclose(softmax_weights([0.9, 0.1, 0.5, 0.3], 0.0), [0.25] * 4, rtol=0, atol=1e-15)


def test_single_cue():
    assert softmax_weights([0.4], 3.0).tolist() == [1.0]
    assert schedule_distribution([1.0]).tolist() == [1.0]


def test_two_cue_weights():
    a = softmax_weights([1.0, 0.5], 2.0)
    np.testing.assert_allclose(a, [0.7310585786300049, 0.2689414213699951], rtol=1e-12)
    np.testing.assert_allclose(schedule_distribution(a), [1.0, math.exp(-1)], rtol=1e-12)
    assert strategy_index(a) == pytest.approx(0.7310585786300049)


def test_uniform_distribution_and_index():
    assert schedule_distribution([0.25] * 4).tolist() == [1.0] * 4
    assert strategy_index([0.2] * 5) == pytest.approx(0.2)


@pytest.mark.parametrize("q,g", [([1.2, 0.5], 1.0), ([-0.1], 1.0), ([0.5], -1.0)])
def test_bad_inputs(q, g):
    with pytest.raises(InvalidInputError):
        softmax_weights(q, g)


@given(validities, st.floats(0, 1e4))
def test_weights_normalized_even_at_huge_gain(q, g):
    a = softmax_weights(q, g)
    assert abs(a.sum() - 1) < 1e-12
    assert np.all(np.isfinite(a))


@given(validities, st.floats(1e-3, 50))
def test_order_preserved(q, g):
    a = softmax_weights(q, g)
    for i in range(len(q)):
        for j in range(len(q)):
            if q[i] > q[j] and g * (q[i] - q[j]) > 1e-9:
                assert a[i] > a[j]
    assert q[int(np.argmax(a))] == max(q)


@given(st.lists(st.floats(0, 1), min_size=2, max_size=6, unique=True))
def test_index_nondecreasing_in_gain(q):
    gains = [0, 0.5, 1, 2, 5, 10, 20, 50, 100, 1000]
    idx = [strategy_index(softmax_weights(q, g)) for g in gains]
    assert all(b >= a - 1e-15 for a, b in zip(idx, idx[1:]))
    assert 1 / len(q) - 1e-12 <= idx[0] <= idx[-1] <= 1


def test_index_tends_to_one():
    assert strategy_index(softmax_weights([0.9, 0.6], 1e4)) == 1.0


def test_apportion_examples():
    assert apportion([0.5, 0.5], 4).tolist() == [2, 2]
    assert apportion([0.7310585786300049, 0.2689414213699951], 10).tolist() == [7, 3]
    # remainder tie goes to the lower index
    assert apportion([1, 1, 1], 4).tolist() == [2, 1, 1]


@given(st.lists(st.floats(1e-3, 1), min_size=1, max_size=8), st.integers(1, 60))
def test_apportion_within_one(a, n):
    a = np.array(a) / np.sum(a)
    c = apportion(a, n)
    assert c.sum() == n
    assert np.all(np.abs(c - n * a) < 1)


def test_deterministic_schedule():
    a = softmax_weights([0.5, 1.0], 2.0)
    s = build_schedule(a, 10, 2.0)
    assert s.cues == [1] * 7 + [0] * 3
    assert s.horizon == 2.0
    assert s.intervals[1] == pytest.approx((0.2, 0.4, 1))


def test_single_cue_schedules():
    for mode in ("deterministic", "probabilistic"):
        s = build_schedule([1.0], 5, 1.0, RngStream(0, 0), mode)
        assert s.cues == [0] * 5


def test_probabilistic_frequencies():
    a = np.array([0.5, 0.3, 0.2])
    counts = np.zeros(3)
    n = 10_000
    for i in range(n):
        counts += build_schedule(a, 1, 1.0, RngStream(9, i), "probabilistic").occupancy(3)
    se = np.sqrt(a * (1 - a) / n)
    assert np.all(np.abs(counts / n - a) < 3 * se)


def test_probabilistic_needs_stream():
    with pytest.raises(InvalidInputError):
        build_schedule([0.5, 0.5], 2, 1.0, None, "probabilistic")
    with pytest.raises(InvalidInputError):
        build_schedule([0.5, 0.5], 2, 1.0, mode="greedy")


@pytest.mark.parametrize(
    "ivs",
    [
        [(0.0, 0.5, 0), (0.6, 1.0, 1)],  # gap
        [(0.0, 0.5, 0), (0.4, 1.0, 1)],  # overlap
        [(0.1, 1.0, 0)],  # late start
        [(0.0, 0.0, 0)],  # empty
        [(0.0, 1.0, -1)],  # bad cue
        [],
    ],
)
def test_invalid_schedules(ivs):
    with pytest.raises(InvalidScheduleError):
        Schedule(ivs)


def test_gain_state_drives_weights():
    q = [0.9, 0.6]
    np.testing.assert_array_equal(weights_for_gain(q, GainState(3.0, 0.2)), softmax_weights(q, 3.0))
