"""Reward rate and the normalized reward-rate surface over the gain plane.

The surface is a Monte-Carlo estimate on the linearized LIP network: each cell
substitutes its ``(gamma_e, gamma_i)`` into a base :class:`LipConfig`, runs
seeded trials, converts accuracy and decision time into a reward rate and the
whole grid is divided by its maximum.
"""

from __future__ import annotations

import csv
import json
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import artifacts
from .errors import DegenerateSurfaceError, InvalidInputError
from .gain import GainBounds, GainState
from .models import DEFAULT_DT, FREE_RESPONSE, LipConfig, estimate_performance
from .stochastic import TimeGrid

SURFACE_NAMESPACE = 2
SURFACE_HEADER = ("gamma_E", "gamma_I", "reward_rate")

# A 4-alternative detection task: one target pool and three equal distractors.
DEFAULT_BASE = LipConfig(
    inputs=(1.0, 0.7, 0.7, 0.7),
    sigma=(0.25, 0.25, 0.25, 0.25),
    thresholds=(0.6, 0.6, 0.6, 0.6),
    leak=0.35,
)
DEFAULT_NDT = 0.3
DEFAULT_RSI = 1.0
DEFAULT_HORIZON = 5.0


@dataclass(frozen=True)
class RewardInputs:
    acc: float
    dt: float
    ndt: float = DEFAULT_NDT
    rsi: float = DEFAULT_RSI

    def __post_init__(self):
        probs = []
        if not 0 <= self.acc <= 1:
            probs.append("0 <= acc <= 1")
        for name in ("dt", "ndt", "rsi"):
            if not getattr(self, name) >= 0:
                probs.append(f"{name} >= 0")
        if probs:
            raise InvalidInputError("; ".join(probs))


def reward_rate(inputs):
    """Correct decisions per second: ``acc / (DT + NDT + RSI)``."""
    denom = inputs.dt + inputs.ndt + inputs.rsi
    if not denom > 0:
        raise InvalidInputError("DT + NDT + RSI must be positive")
    return inputs.acc / denom


@dataclass(frozen=True)
class GainGrid:
    e_min: float = 0.2
    e_max: float = 2.0
    n_e: int = 21
    i_min: float = 0.0
    i_max: float = 1.0
    n_i: int = 21

    def problems(self):
        p = []
        if not self.e_min < self.e_max:
            p.append("gamma_E min < max")
        if not self.i_min < self.i_max:
            p.append("gamma_I min < max")
        if self.n_e < 2 or self.n_i < 2:
            p.append("at least 2 points per axis")
        if self.e_min <= 0:
            p.append("gamma_E min > 0")
        if self.i_min < 0:
            p.append("gamma_I min >= 0")
        return p

    def __post_init__(self):
        probs = self.problems()
        if probs:
            raise InvalidInputError("; ".join(probs))

    @property
    def gamma_e(self):
        return np.linspace(self.e_min, self.e_max, self.n_e)

    @property
    def gamma_i(self):
        return np.linspace(self.i_min, self.i_max, self.n_i)

    @property
    def shape(self):
        return (self.n_e, self.n_i)

    @property
    def bounds(self):
        return GainBounds(self.e_min, self.e_max, self.i_min, self.i_max)

    def state(self, ie, ii):
        return GainState(float(self.gamma_e[ie]), float(self.gamma_i[ii]))


@dataclass(frozen=True, eq=False)
class RewardSurface:
    """Normalized reward rate; ``values[ie, ii]`` sits at ``(gamma_e[ie], gamma_i[ii])``."""

    grid: GainGrid
    values: np.ndarray
    raw: np.ndarray  # reward rate in 1/s before normalization
    trials_per_cell: int
    seed: int
    base_digest: str
    meta: dict = None

    @property
    def argmax(self):
        # np.argmax returns the first maximum in C order: lowest (ie, ii)
        return np.unravel_index(int(np.argmax(self.values)), self.values.shape)

    @property
    def center(self):
        return self.grid.state(*self.argmax)

    def digest(self):
        return artifacts.digest({"sidecar": self.sidecar(), "values": self.values})

    def rows(self):
        ge, gi = self.grid.gamma_e, self.grid.gamma_i
        for ie in range(self.grid.n_e):
            for ii in range(self.grid.n_i):
                yield float(ge[ie]), float(gi[ii]), float(self.values[ie, ii])

    def sidecar(self):
        ie, ii = self.argmax
        return {
            "grid": artifacts._plain(self.grid),
            "seed": self.seed,
            "trials_per_cell": self.trials_per_cell,
            "base_digest": self.base_digest,
            "argmax": {"index": [int(ie), int(ii)], "gamma_E": self.center.gamma_e, "gamma_I": self.center.gamma_i},
            "raw_max": float(self.raw.max()),
            **(self.meta or {}),
        }

    def save(self, csv_path, extra=None):
        """Write the CSV and a ``<name>.json`` sidecar next to it."""
        csv_path = Path(csv_path)
        artifacts.write_csv(csv_path, SURFACE_HEADER, self.rows())
        side = self.sidecar()
        side["raw"] = self.raw
        side.update(extra or {})
        artifacts.write_json(csv_path.with_suffix(".json"), side)


def load_surface(csv_path):
    csv_path = Path(csv_path)
    side = json.loads(csv_path.with_suffix(".json").read_text())
    grid = GainGrid(**side["grid"])
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != SURFACE_HEADER:
            raise InvalidInputError(f"unexpected surface header {header}")
        vals = np.array([float(r[2]) for r in reader])
    if vals.size != grid.n_e * grid.n_i:
        raise InvalidInputError("surface CSV does not match its grid")
    raw = np.asarray(side.get("raw", vals.reshape(grid.shape)), float)
    keep = {"ndt", "rsi", "horizon", "dt", "config_digest"}
    return RewardSurface(
        grid, vals.reshape(grid.shape), raw, side["trials_per_cell"], side["seed"], side["base_digest"],
        {k: v for k, v in side.items() if k in keep},
    )


def compute_surface(
    grid=GainGrid(),
    base=DEFAULT_BASE,
    trials_per_cell=2000,
    ndt=DEFAULT_NDT,
    rsi=DEFAULT_RSI,
    base_seed=0,
    time_grid=None,
    shared_streams=False,
):
    """Monte-Carlo reward-rate surface over ``grid``.

    Cell ``c`` (row-major) uses streams ``c * trials_per_cell + t`` in the
    surface namespace, so each cell is reproducible on its own.  Timeouts count
    as errors lasting the whole horizon.  ``shared_streams`` reuses one set of
    streams for every cell (a test hook for comparing cells on common noise).
    """
    if trials_per_cell < 100:
        raise InvalidInputError("trials_per_cell must be >= 100")
    if time_grid is None:
        time_grid = TimeGrid(DEFAULT_DT, DEFAULT_HORIZON)
    ge, gi = grid.gamma_e, grid.gamma_i
    raw = np.zeros(grid.shape)
    for ie in range(grid.n_e):
        for ii in range(grid.n_i):
            cell = 0 if shared_streams else ie * grid.n_i + ii
            perf = estimate_performance(
                base.with_gains(float(ge[ie]), float(gi[ii])),
                time_grid,
                FREE_RESPONSE,
                trials_per_cell,
                base_seed,
                stream_offset=(SURFACE_NAMESPACE << 48) + cell * trials_per_cell,
            )
            raw[ie, ii] = reward_rate(RewardInputs(perf.accuracy, perf.mean_dt_all, ndt, rsi))
    top = raw.max()
    if not top > 0:
        raise DegenerateSurfaceError("no cell produced a correct decision; raise trials or widen the grid")
    values = raw / top
    values[raw == top] = 1.0
    meta = {"ndt": ndt, "rsi": rsi, "horizon": time_grid.horizon, "dt": time_grid.dt}
    return RewardSurface(grid, values, raw, trials_per_cell, int(base_seed), artifacts.digest(base), meta)


@dataclass(frozen=True)
class HighPerfRegion:
    center: GainState
    center_index: tuple
    level: float
    members: tuple  # (ie, ii) cells
    radius: float  # RMS distance of member cells from the center

    def contains(self, state, scale=1.0):
        return state.distance(self.center) <= scale * self.radius


def locate_region(surface, level=0.9):
    """Cells at or above ``level`` of the best reward rate, centered on the argmax."""
    if not 0 < level < 1:
        raise InvalidInputError("level must be in (0, 1)")
    idx = np.argwhere(surface.values >= level)
    members = tuple((int(a), int(b)) for a, b in idx)
    center = surface.center
    ge, gi = surface.grid.gamma_e, surface.grid.gamma_i
    d2 = [(ge[a] - center.gamma_e) ** 2 + (gi[b] - center.gamma_i) ** 2 for a, b in members]
    radius = math.sqrt(math.fsum(d2) / len(d2))
    return HighPerfRegion(center, tuple(int(v) for v in surface.argmax), level, members, radius)


def is_contiguous(cells):
    """True when the cells form one 4-connected component."""
    cells = set(cells)
    if not cells:
        return False
    start = next(iter(cells))
    seen, todo = {start}, deque([start])
    while todo:
        a, b = todo.popleft()
        for nb in ((a + 1, b), (a - 1, b), (a, b + 1), (a, b - 1)):
            if nb in cells and nb not in seen:
                seen.add(nb)
                todo.append(nb)
    return len(seen) == len(cells)


def _locate(axis, x):
    n = axis.size
    # snap so a node maps to itself exactly
    f = (x - axis[0]) / (axis[-1] - axis[0]) * (n - 1)
    f = min(max(f, 0.0), n - 1.0)
    if abs(f - round(f)) < 1e-9:
        f = float(round(f))
    i = min(int(math.floor(f)), n - 2)
    return i, f - i


def lookup(surface, state):
    """Bilinear interpolation of the surface at ``state`` (clamped to the grid)."""
    i, u = _locate(surface.grid.gamma_e, state.gamma_e)
    j, v = _locate(surface.grid.gamma_i, state.gamma_i)
    z = surface.values
    top = (1 - v) * z[i, j] + v * z[i, j + 1]
    bot = (1 - v) * z[i + 1, j] + v * z[i + 1, j + 1]
    return float((1 - u) * top + u * bot)
