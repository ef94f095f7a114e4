"""Cue weighting by gain-scaled softmax and cue-processing schedules.

Cue indices are zero-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidScheduleError

_TOL = 1e-12


def _vector(values, name):
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise InvalidInputError(f"{name} must be a non-empty vector")
    return v


@dataclass(frozen=True)
class Schedule:
    """Ordered ``(start, end, cue)`` intervals covering ``[0, horizon]``."""

    intervals: tuple

    def __post_init__(self):
        ivs = tuple((float(a), float(b), int(m)) for a, b, m in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        if not ivs:
            raise InvalidScheduleError("schedule has no intervals")
        if abs(ivs[0][0]) > _TOL:
            raise InvalidScheduleError("schedule must start at t=0")
        for (a, b, m), nxt in zip(ivs, ivs[1:] + (None,)):
            if not b > a:
                raise InvalidScheduleError(f"empty or reversed interval [{a}, {b})")
            if m < 0:
                raise InvalidScheduleError(f"negative cue index {m}")
            if nxt is not None and abs(nxt[0] - b) > 1e-9 * max(1.0, b):
                kind = "gap" if nxt[0] > b else "overlap"
                raise InvalidScheduleError(f"{kind} between {b} and {nxt[0]}")

    @property
    def horizon(self):
        return self.intervals[-1][1]

    @property
    def cues(self):
        return [m for _, _, m in self.intervals]

    @classmethod
    def equal(cls, cues, horizon):
        """Equal-length intervals, one per entry of ``cues``."""
        n = len(cues)
        edges = [horizon * i / n for i in range(n + 1)]
        edges[-1] = float(horizon)
        return cls(tuple((edges[i], edges[i + 1], int(m)) for i, m in enumerate(cues)))

    def occupancy(self, n_cues):
        counts = np.zeros(n_cues, dtype=int)
        for m in self.cues:
            counts[m] += 1
        return counts


def softmax_weights(q, gamma_e):
    """Cue weights ``exp(gamma_e q_m) / sum_i exp(gamma_e q_i)``.

    The max exponent is subtracted first so large gains do not overflow.
    """
    q = _vector(q, "q")
    if np.any((q < 0) | (q > 1)):
        raise InvalidInputError("cue validities must lie in [0, 1]")
    if not gamma_e >= 0:
        raise InvalidInputError("gamma_E must be >= 0")
    z = gamma_e * q
    e = np.exp(z - z.max())
    return e / e.sum()


def schedule_distribution(a):
    """Weights rescaled so the largest is exactly 1 (a relative preference, not a law)."""
    a = _vector(a, "a")
    return a / a.max()


def strategy_index(a):
    """Largest cue weight: 1/M is fully compensatory, 1 is single-cue."""
    return float(np.max(_vector(a, "a")))


def apportion(a, n):
    """Largest-remainder apportionment of ``n`` slots by weights ``a``.

    Remainder ties go to the lower cue index.
    """
    a = _vector(a, "a")
    quota = n * a / a.sum()
    counts = np.floor(quota).astype(int)
    rem = quota - counts
    order = sorted(range(a.size), key=lambda m: (-rem[m], m))
    for m in order[: n - counts.sum()]:
        counts[m] += 1
    return counts


def build_schedule(a, n_intervals, horizon, rng=None, mode="deterministic"):
    """Equal-length cue schedule from weights ``a``.

    ``deterministic`` assigns occupancy counts by largest remainder and orders
    cues by descending weight (stable for ties). ``probabilistic`` draws each
    interval's cue i.i.d. from ``a`` using uniforms from ``rng``.
    """
    a = _vector(a, "a")
    if n_intervals < 1:
        raise InvalidInputError("need at least one interval")
    if not horizon > 0:
        raise InvalidInputError("horizon must be positive")
    if mode == "deterministic":
        counts = apportion(a, n_intervals)
        order = sorted(range(a.size), key=lambda m: (-a[m], m))
        cues = [m for m in order for _ in range(counts[m])]
    elif mode == "probabilistic":
        if rng is None:
            raise InvalidInputError("probabilistic schedules need a random stream")
        cdf = np.cumsum(a / a.sum())
        cdf[-1] = 1.0
        u = rng.uniforms(n_intervals)
        cues = np.searchsorted(cdf, u, side="right").tolist()
    else:
        raise InvalidInputError(f"unknown schedule mode {mode!r}")
    return Schedule.equal(cues, horizon)


def weights_for_gain(q, gain_state):
    """Cue weights at the operator's current excitatory gain."""
    return softmax_weights(q, gain_state.gamma_e)

