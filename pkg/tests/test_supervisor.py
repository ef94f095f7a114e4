import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hitl.errors import InvalidInputError, InvalidRangeError
from hitl.gain import PHASIC, TONIC, GainState
from hitl.reward import GainGrid, RewardSurface, locate_region
from hitl.stochastic import RngStream, stream_id
from hitl.supervisor import (
    AUTONOMY,
    HUMAN,
    STEP_NAMESPACE,
    SUCCESS,
    Engagement,
    SupervisorConfig,
    Task,
    autonomy_success,
    average_success,
    dispatch_probability,
    gen_tasks,
    human_success,
    run,
    step,
)

prob = st.floats(0, 1)


def _surface(values, e=(1.0, 2.0), i=(0.0, 1.0)):
    values = np.asarray(values, float)
    grid = GainGrid(e_min=e[0], e_max=e[1], n_e=values.shape[0], i_min=i[0], i_max=i[1], n_i=values.shape[1])
    return RewardSurface(grid, values, values, 100, 0, "")


def test_degenerate_task_range():
    tasks = gen_tasks(50, 0.8, 0.8, RngStream(1, 0))
    assert all(t.m == 0.8 for t in tasks)


def test_task_distribution():
    m = np.array([t.m for t in gen_tasks(10_000, rng=RngStream(3, stream_id(3, 0)))])
    assert abs(m.mean() - 0.85) < 0.002
    assert m.min() >= 0.75 and m.max() <= 0.95


@pytest.mark.parametrize("lo,hi", [(0.0, 0.5), (0.9, 0.8), (0.5, 1.1)])
def test_task_range_errors(lo, hi):
    with pytest.raises(InvalidRangeError):
        gen_tasks(5, lo, hi)


def test_task_simplicity_checked():
    with pytest.raises(InvalidInputError):
        Task(0, 0.0)


def test_autonomy_success():
    assert autonomy_success(1.0) == 0.95
    assert autonomy_success(0.75) == pytest.approx(0.7125, abs=1e-15)
    assert autonomy_success(0.95) == pytest.approx(0.9025, abs=1e-15)
    with pytest.raises(InvalidInputError):
        autonomy_success(0.0)


def test_human_success():
    s = _surface([[0.0, 0.5], [0.7, 1.0]])
    best = s.center
    assert human_success(0.95, best, s) == 0.95
    assert human_success(0.75, best, s) == 0.75
    assert human_success(0.9, GainState(1.0, 0.0), s) == 0.0


def test_dispatch_and_average():
    assert dispatch_probability(1.0, 0.7) == 0.0
    assert dispatch_probability(0.0, 1.0) == 1.0
    p = dispatch_probability(0.8, 0.9)
    assert p == pytest.approx(0.18, abs=1e-15) and 1 - p == pytest.approx(0.82, abs=1e-15)
    assert average_success(0.0, 0.4, 0.9) == 0.4
    assert average_success(1.0, 0.4, 0.9) == 0.9
    assert average_success(0.18, 0.8, 0.9) == pytest.approx(0.818, abs=1e-15)


def test_probabilities_validated():
    with pytest.raises(InvalidInputError):
        dispatch_probability(1.2, 0.5)
    with pytest.raises(InvalidInputError):
        average_success(0.5, -0.1, 0.5)


@given(prob, prob)
def test_partition(p0, p1):
    p = dispatch_probability(p0, p1)
    assert p0 + (1 - p0) * (1 - p1) + p == pytest.approx(1.0, abs=1e-15)


@given(prob, prob, prob)
def test_convexity(p, p0, p1):
    v = average_success(p, p0, p1)
    assert min(p0, p1) - 1e-15 <= v <= max(p0, p1) + 1e-15


def test_monotone_preference():
    xs = np.linspace(0, 1, 41)
    P = np.array([[dispatch_probability(a, b) for b in xs] for a in xs])
    assert np.all(np.diff(P, axis=0) <= 0)  # falls with p0
    assert np.all(np.diff(P, axis=1) >= 0)  # rises with p1


def test_human_certain_forces_human_success():
    s = _surface([[1.0, 1.0], [1.0, 1.0]])
    for i in range(50):
        rec, _, _ = step(s.center, s, Task(i, 1.0), RngStream(9, stream_id(STEP_NAMESPACE, i)))
        assert rec.p == 0.0 and rec.assignment == HUMAN and rec.outcome == SUCCESS


def test_autonomy_certain_restores_gain(monkeypatch):
    # R = 0 at the operator's cell; p1 = 1 needs a unit-slope model
    monkeypatch.setattr("hitl.supervisor.AUTONOMY_SCALE", 1.0)
    s = _surface([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    center = GainState(1.5, 0.5)
    start = GainState(1.0, 0.0)
    rec, new, _ = step(start, s, Task(0, 1.0), RngStream(4, 0), center=center)
    assert rec.p0 == 0.0 and rec.p1 == 1.0 and rec.p == 1.0
    assert rec.assignment == AUTONOMY and rec.outcome == SUCCESS
    assert new.distance(center) < start.distance(center)


def test_frozen_gain_dispatch_statistics():
    m = 0.9 / 0.95
    r = 0.8 / m
    s = _surface([[r, r], [r, 1.0]])
    state = GainState(1.0, 0.0)
    n = 10_000
    auto = ok = 0
    for i in range(n):
        rec, new, _ = step(state, s, Task(i, m), RngStream(21, stream_id(STEP_NAMESPACE, i)), frozen=True)
        assert new == state
        auto += rec.assignment == AUTONOMY
        ok += rec.outcome == SUCCESS
    assert rec.p0 == pytest.approx(0.8) and rec.p1 == pytest.approx(0.9)
    assert abs(auto / n - 0.18) < 0.012
    assert abs(ok / n - 0.818) < 0.012


def test_tonic_mode_takes_larger_steps():
    s = _surface(np.full((5, 5), 1.0))
    start = GainState(1.6, 0.6)
    center = GainState(1.5, 0.5)
    # R = 1 and m = 1 keep the task with the human
    moves = {}
    for mode in (PHASIC, TONIC):
        rec, new, _ = step(start, s, Task(0, 1.0), RngStream(2, 0), center=center, engagement=Engagement(mode=mode))
        assert rec.assignment == HUMAN
        moves[mode] = new.as_array() - start.as_array()
    np.testing.assert_allclose(moves[TONIC], 4 * moves[PHASIC], rtol=1e-12)


def test_engagement_follows_outcomes():
    eng = Engagement()
    for _ in range(3):
        eng = eng.after(1.0)
    assert eng.trace.u_s > eng.trace.u_l > 0


def test_empty_run(small_surface):
    res = run(small_surface, SupervisorConfig(n_tasks=0))
    assert res.records == ()
    st_ = res.stats()
    assert st_["mean_p0"] is None and st_["var_p_bar"] is None and st_["containment"] is None


def test_single_task_run_has_no_variance(small_surface):
    res = run(small_surface, SupervisorConfig(n_tasks=1))
    assert res.mean_p0 is not None and res.var_p0 is None


def test_run_is_deterministic(small_surface):
    a = run(small_surface, SupervisorConfig(n_tasks=60, seed=7))
    b = run(small_surface, SupervisorConfig(n_tasks=60, seed=7))
    c = run(small_surface, SupervisorConfig(n_tasks=60, seed=8))
    assert a == b
    assert a != c


def test_run_records_are_consistent(small_surface):
    res = run(small_surface, SupervisorConfig(n_tasks=100, seed=3))
    region = locate_region(small_surface)
    assert res.records[0].gain_before == region.center
    for prev, rec in zip(res.records, res.records[1:]):
        assert rec.gain_before == prev.gain_after
    for r in res.records:
        assert r.p == (1 - r.p0) * r.p1
        assert small_surface.grid.bounds.contains(r.gain_after)
    assert res.mean_p_bar == pytest.approx(math.fsum(r.p_bar for r in res.records) / 100, abs=1e-15)


def test_invalid_supervisor_config(small_surface):
    with pytest.raises(InvalidInputError) as exc:
        run(small_surface, SupervisorConfig(theta_on=0.1, theta_off=0.2, lo=0.9, hi=0.8))
    assert "theta_off < theta_on" in str(exc.value) and "lo <= hi" in str(exc.value)


def test_run_csv(tmp_path, small_surface):
    res = run(small_surface, SupervisorConfig(n_tasks=5))
    res.save(tmp_path / "run.csv")
    lines = (tmp_path / "run.csv").read_text().splitlines()
    assert lines[0] == "task,m,gamma_E,gamma_I,p0,p1,p,assignment,outcome,p_bar"
    assert len(lines) == 6 and lines[1].startswith("0,")
