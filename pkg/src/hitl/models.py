"""Evidence-accumulation decision models.

Each model config compiles to a piecewise-affine SDE plus a readout rule and
runs on the fused integrator in :mod:`hitl.stochastic`.  Alternative indices
are zero-based; for the two-boundary models index 0 is the upper boundary
(choice A) and index 1 the lower one (choice B).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import stochastic as sc
from .errors import InvalidInputError, InvalidScheduleError
from .strategy import Schedule

FREE_RESPONSE = "free-response"
INTERROGATION = "interrogation"
PROTOCOLS = (FREE_RESPONSE, INTERROGATION)

CRITERIA = ("absolute", "max-vs-next", "max-vs-average")
_RULES = {"absolute": sc.RULE_ABSOLUTE, "max-vs-next": sc.RULE_MAX_NEXT, "max-vs-average": sc.RULE_MAX_AVG}
_TERMS = {sc.TERM_THRESHOLD: "threshold", sc.TERM_INTERROGATION: "interrogation", sc.TERM_TIMEOUT: "timeout"}

DEFAULT_DT = 1e-3
DEFAULT_HORIZON = 10.0


class _Validated:
    def problems(self):
        return []

    def __post_init__(self):
        for name, value in vars(self).items():
            if isinstance(value, list):
                object.__setattr__(self, name, tuple(value))
        probs = self.problems()
        if probs:
            raise InvalidInputError("; ".join(probs))


def _require(cond, msg, probs):
    if not cond:
        probs.append(msg)


def _positive_vector(name, values, probs, strict=True):
    v = np.asarray(values, float)
    ok = np.all(v > 0) if strict else np.all(v >= 0)
    _require(bool(ok) and np.all(np.isfinite(v)), f"{name} {'> 0' if strict else '>= 0'}", probs)


@dataclass(frozen=True)
class DdmParams(_Validated):
    """Leaky drift-diffusion ``dx = (mu - leak x) dt + sigma dW`` from x(0)=0."""

    mu: float = 1.0
    leak: float = 0.0
    sigma: float = 1.0
    theta_a: float = 1.0
    theta_b: float = -1.0
    correct: int = 0
    noiseless_ok: bool = field(default=False, repr=False)  # test hook for sigma=0

    def problems(self):
        p = []
        if self.noiseless_ok:
            _require(self.sigma >= 0, "sigma >= 0", p)
        else:
            _require(self.sigma > 0, "sigma > 0", p)
        _require(self.leak >= 0, "leak >= 0", p)
        _require(self.theta_a > 0 > self.theta_b, "theta_a > 0 > theta_b", p)
        _require(self.correct in (0, 1), "correct in {0, 1}", p)
        return p

    def compile(self, grid):
        seg = sc.AffineSegments(
            np.array([grid.n_steps]),
            np.array([[[-self.leak]]], float),
            np.array([[self.mu]], float),
            np.array([[self.sigma]], float),
        )
        return seg, _bounds_readout(self.theta_a, self.theta_b, 1), np.zeros(1)


@dataclass(frozen=True)
class MultiCue2afcParams(_Validated):
    """Drift-diffusion whose drift and leak follow the scheduled cue."""

    mu: tuple = (1.0,)
    leak: tuple = (0.0,)
    sigma: float = 1.0
    theta_a: float = 1.0
    theta_b: float = -1.0
    schedule: Schedule = None
    correct: int = 0

    def problems(self):
        p = []
        m = len(self.mu)
        _require(m >= 1, "at least one cue", p)
        _require(len(self.leak) == m, "leak has one entry per cue", p)
        _positive_vector("leak", self.leak, p, strict=False)
        _require(self.sigma > 0, "sigma > 0", p)
        _require(self.theta_a > 0 > self.theta_b, "theta_a > 0 > theta_b", p)
        _require(self.correct in (0, 1), "correct in {0, 1}", p)
        if self.schedule is None:
            p.append("schedule is required")
        elif max(self.schedule.cues) >= m:
            p.append("schedule cue index < number of cues")
        return p

    def compile(self, grid):
        cues, ends = _segments(self.schedule, grid)
        A = np.array([[[-self.leak[m]]] for m in cues], float)
        b = np.array([[self.mu[m]] for m in cues], float)
        g = np.full((len(cues), 1), float(self.sigma))
        return sc.AffineSegments(ends, A, b, g), _bounds_readout(self.theta_a, self.theta_b, 1), np.zeros(1)


def _race_problems(p, inputs, sigma, thresholds, criterion, delta):
    k = len(inputs)
    _require(k >= 2, "at least two pools", p)
    _require(len(sigma) == k, "sigma has one entry per pool", p)
    _require(len(thresholds) == k, "thresholds has one entry per pool", p)
    _positive_vector("sigma", sigma, p, strict=False)
    _positive_vector("thresholds", thresholds, p)
    _require(criterion in CRITERIA, f"criterion in {CRITERIA}", p)
    if delta is not None:
        _require(delta > 0, "delta > 0", p)


def _race_readout(criterion, thresholds, delta, dim, n_cues=1):
    k = len(thresholds)
    R = np.zeros((k, dim))
    for m in range(n_cues):
        R[:, m * k : (m + 1) * k] = np.eye(k)
    if delta is None:
        delta = 0.2 * min(thresholds)
    return sc.Readout(R, _RULES[criterion], np.asarray(thresholds, float), np.full(k, -np.inf), float(delta))


def _bounds_readout(theta_a, theta_b, dim):
    return sc.Readout(np.ones((1, dim)), sc.RULE_BOUNDS, np.array([theta_a], float), np.array([theta_b], float))


def _inhibition_matrix(k, leak, inhibition):
    return -leak * np.eye(k) - inhibition * (np.ones((k, k)) - np.eye(k))


@dataclass(frozen=True)
class RaceConfig(_Validated):
    """Leaky competing accumulators with mutual inhibition, one pool per choice."""

    inputs: tuple = (1.0, 0.5)
    sigma: tuple = (1.0, 1.0)
    thresholds: tuple = (1.0, 1.0)
    leak: float = 0.0
    inhibition: float = 0.0
    criterion: str = "absolute"
    delta: float = None  # default 0.2 * min(thresholds)
    correct: int = 0

    def problems(self):
        p = []
        _race_problems(p, self.inputs, self.sigma, self.thresholds, self.criterion, self.delta)
        _require(self.inhibition >= 0, "inhibition >= 0", p)
        _require(0 <= self.correct < len(self.inputs), "0 <= correct < K", p)
        return p

    def compile(self, grid):
        k = len(self.inputs)
        seg = sc.AffineSegments(
            np.array([grid.n_steps]),
            _inhibition_matrix(k, self.leak, self.inhibition)[None],
            np.asarray(self.inputs, float)[None],
            np.asarray(self.sigma, float)[None],
        )
        return seg, _race_readout(self.criterion, self.thresholds, self.delta, k), np.zeros(k)


@dataclass(frozen=True)
class MultiCueRaceConfig(_Validated):
    """Race over per-(pool, cue) accumulators driven by the scheduled cue.

    ``inputs[i][m]`` is the drive to pool ``i`` from cue ``m``.  Only the
    scheduled cue's accumulators evolve; the others hold their value.  The
    criterion sees each pool's sum over cues.
    """

    inputs: tuple = ((1.0,), (0.5,))
    leak: tuple = (0.0,)
    inhibition: tuple = (0.0,)
    sigma: tuple = (1.0, 1.0)
    thresholds: tuple = (1.0, 1.0)
    schedule: Schedule = None
    criterion: str = "absolute"
    delta: float = None
    correct: int = 0

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(tuple(float(v) for v in row) for row in self.inputs))
        super().__post_init__()

    @property
    def n_cues(self):
        return len(self.inputs[0]) if self.inputs else 0

    def problems(self):
        p = []
        _race_problems(p, [r[0] for r in self.inputs] if self.inputs else [], self.sigma,
                       self.thresholds, self.criterion, self.delta)
        m = self.n_cues
        _require(m >= 1 and all(len(r) == m for r in self.inputs), "inputs is a K x M matrix", p)
        _require(len(self.leak) == m and len(self.inhibition) == m, "leak and inhibition have one entry per cue", p)
        _positive_vector("inhibition", self.inhibition, p, strict=False)
        _require(0 <= self.correct < len(self.inputs), "0 <= correct < K", p)
        if self.schedule is None:
            p.append("schedule is required")
        elif max(self.schedule.cues) >= m:
            p.append("schedule cue index < number of cues")
        return p

    def compile(self, grid):
        k, m_cues = len(self.inputs), self.n_cues
        dim = k * m_cues
        S = np.asarray(self.inputs, float)
        cues, ends = _segments(self.schedule, grid)
        A = np.zeros((len(cues), dim, dim))
        b = np.zeros((len(cues), dim))
        g = np.zeros((len(cues), dim))
        for s, m in enumerate(cues):
            blk = slice(m * k, (m + 1) * k)
            A[s, blk, blk] = _inhibition_matrix(k, self.leak[m], self.inhibition[m])
            b[s, blk] = S[:, m]
            g[s, blk] = self.sigma
        readout = _race_readout(self.criterion, self.thresholds, self.delta, dim, m_cues)
        return sc.AffineSegments(ends, A, b, g), readout, np.zeros(dim)


@dataclass(frozen=True)
class LipConfig(_Validated):
    """Linearized LIP populations under excitatory and inhibitory gain.

    ``du_j = (-leak u_j - gamma_i sum_{k != j} u_k + gamma_e S_j) dt
    + gamma_e sigma_j dW_j``; the excitatory gain scales drive and noise alike.
    """

    inputs: tuple = (1.0, 0.5)
    sigma: tuple = (1.0, 1.0)
    thresholds: tuple = (1.0, 1.0)
    leak: float = 0.0
    gamma_e: float = 1.0
    gamma_i: float = 0.0
    correct: int = 0

    def problems(self):
        p = []
        _race_problems(p, self.inputs, self.sigma, self.thresholds, "absolute", None)
        _require(self.gamma_e > 0, "gamma_E > 0", p)
        _require(self.gamma_i >= 0, "gamma_I >= 0", p)
        _require(self.leak >= 0, "leak >= 0", p)
        _require(0 <= self.correct < len(self.inputs), "0 <= correct < K", p)
        return p

    def with_gains(self, gamma_e, gamma_i):
        return replace(self, gamma_e=gamma_e, gamma_i=gamma_i)

    @property
    def drive(self):
        return self.gamma_e * np.asarray(self.inputs, float)

    def compile(self, grid):
        k = len(self.inputs)
        seg = sc.AffineSegments(
            np.array([grid.n_steps]),
            _inhibition_matrix(k, self.leak, self.gamma_i)[None],
            self.drive[None],
            (self.gamma_e * np.asarray(self.sigma, float))[None],
        )
        return seg, _race_readout("absolute", self.thresholds, None, k), np.zeros(k)


def _segments(schedule, grid):
    if schedule.horizon < grid.horizon * (1 - 1e-9):
        raise InvalidScheduleError(
            f"schedule covers [0, {schedule.horizon}] but the grid runs to {grid.horizon}"
        )
    cues, ends = [], []
    for a, b, m in schedule.intervals:
        lo, hi = grid.step_of(a), grid.step_of(b)
        if hi <= lo:
            continue  # shorter than one step
        if cues and cues[-1] == m:
            ends[-1] = hi
        else:
            cues.append(m)
            ends.append(hi)
    return cues, np.asarray(ends, np.int64)


@dataclass(frozen=True)
class DecisionOutcome:
    choice: int | None
    decision_time: float
    termination: str  # threshold | interrogation | timeout


@dataclass
class DecisionBatch:
    """Per-trial outcomes of many independent trials."""

    choice: np.ndarray  # -1 on timeout
    decision_time: np.ndarray
    termination: np.ndarray  # TERM_* codes
    readout: np.ndarray  # decision vector at stop

    def __len__(self):
        return self.choice.shape[0]

    def outcome(self, i):
        c = int(self.choice[i])
        return DecisionOutcome(None if c < 0 else c, float(self.decision_time[i]), _TERMS[int(self.termination[i])])

    def counts(self, n_alternatives):
        decided = self.choice[self.choice >= 0]
        return np.bincount(decided, minlength=n_alternatives), int((self.choice < 0).sum())


def _check_protocol(protocol):
    if protocol not in PROTOCOLS:
        raise InvalidInputError(f"protocol must be one of {PROTOCOLS}")


def simulate_batch(model, grid, protocol, seed, stream_ids, lane=0):
    """Simulate one trial per stream id."""
    _check_protocol(protocol)
    seg, readout, x0 = model.compile(grid)
    res = sc.integrate_affine(
        seg, readout, x0, grid, seed, stream_ids, lane=lane, interrogate=protocol == INTERROGATION
    )
    dtime = np.minimum(res.steps * grid.dt, grid.horizon)
    return DecisionBatch(res.choice, dtime, res.termination, res.readout)


def simulate(model, grid, rng, protocol=FREE_RESPONSE):
    """Simulate a single trial on ``rng``."""
    batch = simulate_batch(model, grid, protocol, rng.seed, [rng.stream_id], lane=rng.lane)
    return batch.outcome(0)


def _typed(cls):
    def run(params, grid, rng, protocol=FREE_RESPONSE):
        if not isinstance(params, cls):
            raise TypeError(f"expected {cls.__name__}")
        return simulate(params, grid, rng, protocol)

    run.__doc__ = f"Simulate one trial of a {cls.__name__} model."
    return run


simulate_ddm = _typed(DdmParams)
simulate_multicue_2afc = _typed(MultiCue2afcParams)
simulate_race = _typed(RaceConfig)
simulate_multicue_race = _typed(MultiCueRaceConfig)
simulate_lip = _typed(LipConfig)


@dataclass(frozen=True)
class Performance:
    n_trials: int
    accuracy: float
    accuracy_se: float
    mean_dt: float  # over decided trials; nan if none decided
    mean_dt_se: float
    n_timeout: int
    mean_dt_all: float  # timeouts counted at the horizon


def summarize(batch, correct):
    n = len(batch)
    acc = float(np.count_nonzero(batch.choice == correct)) / n
    decided = batch.choice >= 0
    nd = int(decided.sum())
    dts = batch.decision_time[decided]
    if nd:
        mean = math.fsum(dts) / nd
        se = float(np.std(dts, ddof=1)) / math.sqrt(nd) if nd > 1 else float("nan")
    else:
        mean = se = float("nan")
    return Performance(
        n_trials=n,
        accuracy=acc,
        accuracy_se=math.sqrt(acc * (1 - acc) / n),
        mean_dt=mean,
        mean_dt_se=se,
        n_timeout=n - nd,
        mean_dt_all=math.fsum(batch.decision_time) / n,
    )


def estimate_performance(model, grid, protocol, n_trials, base_seed, stream_offset=0):
    """Accuracy and mean decision time over ``n_trials`` seeded trials.

    Trial ``t`` runs on stream ``(base_seed, stream_offset + t)``, so the result
    is fixed by the seed whatever the worker count.  Timeouts count as errors.
    """
    if n_trials < 1:
        raise InvalidInputError("n_trials must be >= 1")
    sids = np.arange(stream_offset, stream_offset + n_trials, dtype=np.uint64)
    batch = simulate_batch(model, grid, protocol, base_seed, sids)
    return summarize(batch, model.correct)
