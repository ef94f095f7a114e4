import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hitl.errors import InvalidInputError, InvalidThresholdError
from hitl.gain import (
    PHASIC,
    TONIC,
    GainBounds,
    GainDrift,
    GainState,
    UtilityTrace,
    engagement_index,
    perturb_gain_assigned,
    restore_gain_skipped,
    update_mode,
    update_utilities,
)
from hitl.stochastic import RngStream

finite = st.floats(-50, 50)


def _run_utilities(reward, t_end, dt=1e-3, trace=None):
    trace = trace or UtilityTrace()
    for _ in range(round(t_end / dt)):
        trace = update_utilities(trace, reward, dt)
    return trace


def test_step_response():
    tr = _run_utilities(1.0, 10.0)
    assert tr.u_s == pytest.approx(1 - math.exp(-5), abs=5e-4)
    assert tr.u_l == pytest.approx(1 - math.exp(-1 / 12), abs=5e-4)


def test_constant_reward_fixed_point():
    tr = _run_utilities(0.7, 2000.0, dt=0.5)
    assert tr.u_s == pytest.approx(0.7) and tr.u_l == pytest.approx(0.7, abs=1e-6)


def test_decay_from_constant():
    tr = _run_utilities(0.0, 4.0, trace=UtilityTrace(1.0, 1.0))
    assert tr.u_s == pytest.approx(math.exp(-2), abs=5e-4)
    assert tr.u_l == pytest.approx(math.exp(-4 / 120), abs=5e-4)


def test_trace_validation():
    with pytest.raises(InvalidInputError):
        UtilityTrace(tau_s=5, tau_l=5)
    with pytest.raises(InvalidInputError):
        update_utilities(UtilityTrace(), 1.0, 0.0)


def test_engagement_values():
    assert engagement_index(0, 0) == pytest.approx(0.25)
    assert engagement_index(2, 1) == pytest.approx(0.8807970779778823 * 0.2689414213699951, rel=1e-12)
    assert engagement_index(800, -800) == 1.0
    assert engagement_index(-800, 800) == 0.0


@given(finite, finite)
def test_engagement_in_unit_interval(us, ul):
    e = engagement_index(us, ul)
    assert 0 <= e <= 1


moderate = st.floats(-15, 15)


@given(moderate, moderate, st.floats(0.01, 5))
def test_engagement_monotone(us, ul, d):
    e = engagement_index(us, ul)
    assert engagement_index(us + d, ul) > e
    assert engagement_index(us, ul + d) < e


@given(finite, finite, st.floats(0.01, 5))
def test_engagement_monotone_weakly_when_saturated(us, ul, d):
    e = engagement_index(us, ul)
    assert engagement_index(us + d, ul) >= e >= engagement_index(us, ul + d)


def test_hysteresis_trace():
    mode, seen = TONIC, []
    for e in (0.2, 0.35, 0.2, 0.1):
        mode = update_mode(mode, e, 0.3, 0.15)
        seen.append(mode)
    assert seen == [TONIC, PHASIC, PHASIC, TONIC]


def test_mode_extremes():
    for m in (PHASIC, TONIC):
        assert update_mode(m, 1.0) == PHASIC
        assert update_mode(m, 0.0) == TONIC


@pytest.mark.parametrize("on,off", [(0.2, 0.2), (0.1, 0.3), (1.0, 0.5), (0.5, 0.0)])
def test_bad_thresholds(on, off):
    with pytest.raises(InvalidThresholdError):
        update_mode(TONIC, 0.5, on, off)


@given(st.lists(st.floats(0.1500001, 0.2999999), max_size=30), st.sampled_from([PHASIC, TONIC]))
def test_no_flip_inside_band(es, start):
    mode = start
    for e in es:
        mode = update_mode(mode, e, 0.3, 0.15)
    assert mode == start


C = GainState(1.0, 0.5)
BOUNDS = GainBounds(0.2, 2.0, 0.0, 1.0)


def test_zero_step_is_identity():
    s = GainState(1.3, 0.2)
    assert perturb_gain_assigned(s, C, RngStream(0, 0), 0.0) == s


def test_noise_free_push_outward():
    s = GainState(1.3, 0.9)
    out = perturb_gain_assigned(s, C, RngStream(0, 0), 0.05, noise=False)
    assert out.distance(C) == pytest.approx(s.distance(C) + 0.05)


def test_push_from_center_moves_off_it():
    out = perturb_gain_assigned(C, C, RngStream(1, 0), 0.05, noise=False)
    assert out.distance(C) == pytest.approx(0.05)


def test_mean_distance_grows_from_center():
    n, steps = 10_000, 20
    d = np.zeros((steps, n))
    for i in range(n):
        s = C
        for k in range(steps):
            s = perturb_gain_assigned(s, C, RngStream(2, i * steps + k), 0.05)
            d[k, i] = s.distance(C)
    m = d.mean(axis=1)
    assert np.all(np.diff(m) > 0)


def test_full_pull():
    assert restore_gain_skipped(GainState(1.8, 0.1), C, RngStream(0, 0), 1.0, 0.0) == C
    assert restore_gain_skipped(C, C, RngStream(0, 0), 0.3, 0.0) == C


def test_geometric_contraction():
    n = 2000
    dist = []
    for i in range(n):
        s = GainState(1.5, 0.5)
        for k in range(10):
            s = restore_gain_skipped(s, C, RngStream(3, i * 10 + k), 0.3, 0.01)
        dist.append(s.distance(C))
    # drift part 0.5 * 0.7**10 = 0.0141; the noise floor adds roughly 0.01 * sqrt(sum 0.49**j)
    mean_disp = 0.5 * 0.7**10
    assert mean_disp < np.mean(dist) < mean_disp + 0.03


def test_restore_validation():
    with pytest.raises(InvalidInputError):
        restore_gain_skipped(C, C, RngStream(0, 0), 0.0, 0.01)
    with pytest.raises(InvalidInputError):
        restore_gain_skipped(C, C, RngStream(0, 0), 0.5, -1)


def test_alternation_is_recurrent():
    s, d = C, []
    drift = GainDrift()
    for k in range(10_000):
        rng = RngStream(4, k)
        if k % 2 == 0:
            s = perturb_gain_assigned(s, C, rng, drift.s0)
        else:
            s = restore_gain_skipped(s, C, rng, drift.alpha, drift.s1)
        d.append(s.distance(C))
    assert np.percentile(d, 95) <= 3 * drift.s0 / drift.alpha


@given(st.floats(-10, 10), st.floats(-10, 10), st.integers(0, 1000))
def test_clamping_stays_in_bounds(ge, gi, k):
    s = BOUNDS.clamp(ge, gi)
    assert BOUNDS.contains(s)
    out = perturb_gain_assigned(s, C, RngStream(5, k), 0.5, BOUNDS)
    assert BOUNDS.contains(out)
    out = restore_gain_skipped(s, C, RngStream(5, k), 0.3, 0.5, BOUNDS)
    assert BOUNDS.contains(out)


def test_drift_defaults_and_modes():
    d = GainDrift()
    assert d.problems() == []
    assert d.step_scale(PHASIC) == 0.5 and d.step_scale(TONIC) == 2.0
    assert set(GainDrift(s0=0, alpha=2, s1=-1).problems()) == {"s0 > 0", "0 < alpha <= 1", "s1 >= 0"}


def test_gain_state_must_be_finite():
    with pytest.raises(InvalidInputError):
        GainState(float("nan"), 0.0)
