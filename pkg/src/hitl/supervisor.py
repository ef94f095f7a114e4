"""Closed-loop task dispatch between a human operator and an autonomous model.

For each task the controller compares the operator's success chance
``p0 = m R(gain)`` with the model's ``p1 = 0.95 m`` and hands the task to the
model with probability ``p = (1 - p0) p1``.  Working a task pushes the
operator's gains away from the high-performance region; skipping one lets them
recover.

Randomness: task simplicities come from one stream; task ``i`` gets its own
stream whose lane 0 holds the assignment and outcome uniforms and whose lane 1
holds the gain noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import artifacts
from .errors import InvalidInputError, InvalidRangeError
from .gain import (
    PHASIC,
    GainDrift,
    GainState,
    UtilityTrace,
    engagement_index,
    perturb_gain_assigned,
    restore_gain_skipped,
    update_mode,
    update_utilities,
)
from .reward import locate_region, lookup
from .stochastic import RngStream, stream_id

TASK_NAMESPACE = 3
STEP_NAMESPACE = 4
HUMAN = "human"
AUTONOMY = "autonomy"
SUCCESS = "success"
FAILURE = "failure"
RUN_HEADER = ("task", "m", "gamma_E", "gamma_I", "p0", "p1", "p", "assignment", "outcome", "p_bar")
AUTONOMY_SCALE = 0.95


@dataclass(frozen=True)
class Task:
    id: int
    m: float  # simplicity in (0, 1]
    payload: object = None

    def __post_init__(self):
        if not 0 < self.m <= 1:
            raise InvalidInputError(f"task simplicity must be in (0, 1], got {self.m}")


def gen_tasks(n, lo=0.75, hi=0.95, rng=None):
    """``n`` tasks with simplicity drawn uniformly from ``[lo, hi]``."""
    if not 0 < lo <= hi <= 1:
        raise InvalidRangeError(f"need 0 < lo <= hi <= 1, got lo={lo}, hi={hi}")
    if n < 0:
        raise InvalidInputError("n must be >= 0")
    if rng is None:
        rng = RngStream(0, stream_id(TASK_NAMESPACE, 0))
    u = rng.uniforms(n) if n else np.zeros(0)
    m = np.minimum(lo + (hi - lo) * u, hi)
    return [Task(i, float(v)) for i, v in enumerate(m)]


def _check_prob(**kw):
    for k, v in kw.items():
        if not 0 <= v <= 1:
            raise InvalidInputError(f"{k} must be in [0, 1], got {v}")


def autonomy_success(m):
    if not 0 < m <= 1:
        raise InvalidInputError("m must be in (0, 1]")
    return AUTONOMY_SCALE * m


def human_success(m, state, surface):
    return m * lookup(surface, state)


def dispatch_probability(p0, p1):
    """Chance the task goes to the model: the human would fail and the model succeed."""
    _check_prob(p0=p0, p1=p1)
    return (1.0 - p0) * p1


def average_success(p, p0, p1):
    _check_prob(p=p, p0=p0, p1=p1)
    return (1.0 - p) * p0 + p * p1


@dataclass(frozen=True)
class TrialRecord:
    task: int
    m: float
    gain_before: GainState
    p0: float
    p1: float
    p: float
    assignment: str
    outcome: str
    gain_after: GainState
    p_bar: float

    def row(self):
        g = self.gain_before
        return (self.task, self.m, g.gamma_e, g.gamma_i, self.p0, self.p1, self.p,
                self.assignment, self.outcome, self.p_bar)


@dataclass(frozen=True)
class Engagement:
    """Operator utility traces and LC mode, advanced once per task."""

    trace: UtilityTrace = field(default_factory=UtilityTrace)
    mode: str = PHASIC
    theta_on: float = 0.3
    theta_off: float = 0.15
    dt: float = 1.0

    def after(self, reward):
        trace = update_utilities(self.trace, reward, self.dt)
        e = engagement_index(trace.u_s, trace.u_l)
        return replace(self, trace=trace, mode=update_mode(self.mode, e, self.theta_on, self.theta_off))


def step(state, surface, task, rng, drift=GainDrift(), center=None, frozen=False, engagement=None):
    """Dispatch one task and move the operator's gains.

    Returns ``(record, new_state, new_engagement)``.  ``frozen`` keeps the gains
    fixed (for checking the dispatch statistics alone).  With ``engagement`` set,
    the outward step is scaled by the current LC mode and the outcome feeds the
    utility traces.
    """
    if center is None:
        center = surface.center
    p0 = human_success(task.m, state, surface)
    p1 = autonomy_success(task.m)
    p = dispatch_probability(p0, p1)
    u_assign, u_out = rng.uniforms(2)
    to_model = u_assign < p
    ok = u_out < (p1 if to_model else p0)
    bounds = surface.grid.bounds
    noise = rng.with_lane(rng.lane + 1)
    if frozen:
        new = state
    elif to_model:
        new = restore_gain_skipped(state, center, noise, drift.alpha, drift.s1, bounds)
    else:
        s0 = drift.s0 * (drift.step_scale(engagement.mode) if engagement is not None else 1.0)
        new = perturb_gain_assigned(state, center, noise, s0, bounds)
    if engagement is not None:
        engagement = engagement.after(1.0 if ok else 0.0)
    rec = TrialRecord(
        task.id, task.m, state, p0, p1, p,
        AUTONOMY if to_model else HUMAN,
        SUCCESS if ok else FAILURE,
        new, average_success(p, p0, p1),
    )
    return rec, new, engagement


@dataclass(frozen=True)
class SupervisorConfig:
    n_tasks: int = 200
    seed: int = 42
    lo: float = 0.75
    hi: float = 0.95
    drift: GainDrift = field(default_factory=GainDrift)
    level: float = 0.9
    containment_scale: float = 2.0
    engagement: bool = False
    theta_on: float = 0.3
    theta_off: float = 0.15
    tau_s: float = 2.0
    tau_l: float = 120.0
    frozen_gain: bool = False

    def problems(self):
        p = []
        if self.n_tasks < 0:
            p.append("n_tasks >= 0")
        if not 0 < self.lo <= self.hi <= 1:
            p.append("0 < lo <= hi <= 1")
        if not 0 < self.level < 1:
            p.append("0 < level < 1")
        if not self.containment_scale > 0:
            p.append("containment_scale > 0")
        if not self.theta_off < self.theta_on:
            p.append("theta_off < theta_on")
        if not (0 < self.theta_off and self.theta_on < 1):
            p.append("0 < theta_off, theta_on < 1")
        if not self.tau_l > self.tau_s > 0:
            p.append("tau_l > tau_s > 0")
        return p + self.drift.problems()


@dataclass(frozen=True)
class RunSummary:
    records: tuple
    seed: int
    config_digest: str
    region_center: GainState
    region_radius: float
    mean_p0: float | None
    var_p0: float | None
    mean_p_bar: float | None
    var_p_bar: float | None
    containment: float | None  # share of gains within containment_scale * radius
    empirical_success: float | None
    autonomy_fraction: float | None

    def stats(self):
        return {
            "n_tasks": len(self.records),
            "mean_p0": self.mean_p0,
            "var_p0": self.var_p0,
            "mean_p_bar": self.mean_p_bar,
            "var_p_bar": self.var_p_bar,
            "containment": self.containment,
            "empirical_success": self.empirical_success,
            "autonomy_fraction": self.autonomy_fraction,
            "region_center": {"gamma_E": self.region_center.gamma_e, "gamma_I": self.region_center.gamma_i},
            "region_radius": self.region_radius,
            "seed": self.seed,
            "config_digest": self.config_digest,
        }

    def rows(self):
        return (r.row() for r in self.records)

    def save(self, csv_path):
        artifacts.write_csv(csv_path, RUN_HEADER, self.rows())


def _mean_var(xs):
    n = len(xs)
    if n == 0:
        return None, None
    mean = math.fsum(xs) / n
    if n < 2:
        return mean, None
    return mean, math.fsum((x - mean) ** 2 for x in xs) / (n - 1)


def summarize_run(records, seed, config_digest, region, scale=2.0):
    p0 = [r.p0 for r in records]
    pbar = [r.p_bar for r in records]
    m0, v0 = _mean_var(p0)
    mb, vb = _mean_var(pbar)
    n = len(records)
    if n:
        inside = sum(r.gain_before.distance(region.center) <= scale * region.radius for r in records)
        contain = inside / n
        succ = sum(r.outcome == SUCCESS for r in records) / n
        auto = sum(r.assignment == AUTONOMY for r in records) / n
    else:
        contain = succ = auto = None
    return RunSummary(tuple(records), seed, config_digest, region.center, region.radius,
                      m0, v0, mb, vb, contain, succ, auto)


def run(surface, config=SupervisorConfig(), initial=None, config_digest=None):
    """Simulate ``config.n_tasks`` dispatch decisions starting from ``initial``.

    The operator starts at the high-performance center unless ``initial`` is
    given.  The loop is sequential because each gain depends on the previous
    assignment.
    """
    probs = config.problems()
    if probs:
        raise InvalidInputError("; ".join(probs))
    region = locate_region(surface, config.level)
    seed = config.seed
    tasks = gen_tasks(config.n_tasks, config.lo, config.hi, RngStream(seed, stream_id(TASK_NAMESPACE, 0)))
    state = surface.grid.bounds.clamp(*(initial or region.center).as_array())
    eng = None
    if config.engagement:
        eng = Engagement(UtilityTrace(tau_s=config.tau_s, tau_l=config.tau_l),
                         theta_on=config.theta_on, theta_off=config.theta_off)
    records = []
    for task in tasks:
        rng = RngStream(seed, stream_id(STEP_NAMESPACE, task.id))
        rec, state, eng = step(state, surface, task, rng, config.drift, region.center,
                               config.frozen_gain, eng)
        records.append(rec)
    if config_digest is None:
        config_digest = artifacts.digest(config)
    return summarize_run(records, seed, config_digest, region, config.containment_scale)
