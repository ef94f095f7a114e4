"""Operator gain state, utility traces, engagement and LC mode switching."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidInputError, InvalidThresholdError

PHASIC = "phasic"
TONIC = "tonic"


@dataclass(frozen=True)
class GainState:
    gamma_e: float
    gamma_i: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma_e) and math.isfinite(self.gamma_i)):
            raise InvalidInputError("gains must be finite")

    def as_array(self):
        return np.array([self.gamma_e, self.gamma_i])

    def distance(self, other):
        return math.hypot(self.gamma_e - other.gamma_e, self.gamma_i - other.gamma_i)


@dataclass(frozen=True)
class GainBounds:
    e_min: float
    e_max: float
    i_min: float
    i_max: float

    def clamp(self, gamma_e, gamma_i):
        return GainState(
            min(max(float(gamma_e), self.e_min), self.e_max),
            min(max(float(gamma_i), self.i_min), self.i_max),
        )

    def contains(self, state):
        return self.e_min <= state.gamma_e <= self.e_max and self.i_min <= state.gamma_i <= self.i_max


@dataclass(frozen=True)
class UtilityTrace:
    u_s: float = 0.0
    u_l: float = 0.0
    tau_s: float = 2.0
    tau_l: float = 120.0

    def __post_init__(self):
        if not self.tau_l > self.tau_s > 0:
            raise InvalidInputError("need tau_l > tau_s > 0")


def update_utilities(trace, reward, dt):
    """One Euler step of both exponential utility traces toward ``reward``."""
    if not dt > 0:
        raise InvalidInputError("dt must be positive")
    return replace(
        trace,
        u_s=trace.u_s + dt / trace.tau_s * (reward - trace.u_s),
        u_l=trace.u_l + dt / trace.tau_l * (reward - trace.u_l),
    )


def _logistic(x):
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def engagement_index(u_s, u_l):
    """Engagement grows with short-term utility and falls with long-term utility."""
    # 1 - 1/(1 + e^u_s) == logistic(u_s); 1/(1 + e^u_l) == logistic(-u_l)
    return _logistic(u_s) * _logistic(-u_l)


def update_mode(current, engagement, theta_on=0.3, theta_off=0.15):
    """Hysteretic LC mode switch: phasic at or above ``theta_on``, tonic at or below ``theta_off``."""
    if not 0 < theta_off < theta_on < 1:
        raise InvalidThresholdError("need 0 < theta_off < theta_on < 1")
    if current not in (PHASIC, TONIC):
        raise InvalidInputError(f"unknown LC mode {current!r}")
    if current == TONIC and engagement >= theta_on:
        return PHASIC
    if current == PHASIC and engagement <= theta_off:
        return TONIC
    return current


@dataclass(frozen=True)
class GainDrift:
    """How the operator's gains move after each task.

    ``s0`` is the outward step when the operator works a task; ``alpha`` and
    ``s1`` set the pull back toward the high-performance center when the task
    is skipped.  The mode scales multiply ``s0`` when engagement coupling is on.
    """

    s0: float = 0.05
    alpha: float = 0.3
    s1: float = 0.01
    phasic_scale: float = 0.5
    tonic_scale: float = 2.0

    def problems(self):
        p = []
        if not self.s0 > 0:
            p.append("s0 > 0")
        if not 0 < self.alpha <= 1:
            p.append("0 < alpha <= 1")
        if not self.s1 >= 0:
            p.append("s1 >= 0")
        if not (self.phasic_scale > 0 and self.tonic_scale > 0):
            p.append("mode scales > 0")
        return p

    def step_scale(self, mode):
        return self.phasic_scale if mode == PHASIC else self.tonic_scale


def _finish(ge, gi, bounds):
    if bounds is None:
        return GainState(float(ge), float(gi))
    return bounds.clamp(ge, gi)


def perturb_gain_assigned(state, region_center, rng, s0, bounds=None, noise=True):
    """Push the gains away from ``region_center`` by ``s0`` plus isotropic noise.

    Draws come from ``rng``'s lane: indices 0-1 for the noise pair and 2-3 for a
    random direction when ``state`` sits exactly on the center.
    """
    if not s0 >= 0:
        raise InvalidInputError("s0 must be >= 0")
    d = state.as_array() - region_center.as_array()
    norm = math.hypot(d[0], d[1])
    if norm > 0:
        u = d / norm
    else:
        v = rng.normals(2, start=2)
        u = v / math.hypot(v[0], v[1])
    xi = rng.normals(2) if noise else np.zeros(2)
    ge, gi = state.as_array() + s0 * u + s0 * xi
    return _finish(ge, gi, bounds)


def restore_gain_skipped(state, region_center, rng, alpha, s1, bounds=None):
    """Pull the gains a fraction ``alpha`` of the way back to ``region_center``, plus noise."""
    if not 0 < alpha <= 1:
        raise InvalidInputError("alpha must be in (0, 1]")
    if not s1 >= 0:
        raise InvalidInputError("s1 must be >= 0")
    x = state.as_array()
    xi = rng.normals(2) if s1 > 0 else np.zeros(2)
    ge, gi = x + alpha * (region_center.as_array() - x) + s1 * xi
    return _finish(ge, gi, bounds)
