"""JSON experiment configs: parsing, defaults and all-at-once validation.

A config is one JSON object with a top-level ``mode``.  Absent fields take the
documented defaults; present fields are never replaced, and every problem found
is reported together in one :class:`ConfigError`.

Example::

    {"mode": "ddm", "seed": 1, "trials": 100000,
     "model": {"mu": 1.0, "sigma": 1.0, "theta_a": 1.0, "theta_b": -1.0}}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

from . import artifacts
from .errors import ConfigError, InvalidInputError, InvalidScheduleError
from .gain import GainDrift
from .models import (
    DEFAULT_DT,
    DEFAULT_HORIZON,
    PROTOCOLS,
    DdmParams,
    LipConfig,
    MultiCue2afcParams,
    MultiCueRaceConfig,
    RaceConfig,
)
from .reward import DEFAULT_BASE, DEFAULT_HORIZON as SURFACE_HORIZON, DEFAULT_NDT, DEFAULT_RSI, GainGrid
from .stochastic import TimeGrid, U64_MAX
from .strategy import Schedule, build_schedule, softmax_weights
from .supervisor import SupervisorConfig

MODEL_MODES = {
    "ddm": DdmParams,
    "multicue-2afc": MultiCue2afcParams,
    "race": RaceConfig,
    "multicue-race": MultiCueRaceConfig,
    "lip": LipConfig,
}
MODES = tuple(MODEL_MODES) + ("reward-map", "supervise")
COMMAND_MODES = {"simulate": tuple(MODEL_MODES), "reward-map": ("reward-map",), "supervise": ("supervise",)}

_TOP = {"mode", "seed", "trials", "out", "dt", "horizon", "protocol", "model", "grid", "surface", "supervisor"}
_SURFACE = {"trials_per_cell", "ndt", "rsi", "dt", "horizon", "seed", "base", "path"}
_SUPERVISOR = {"n_tasks", "lo", "hi", "level", "containment_scale", "drift", "engagement"}
_ENGAGEMENT = {"enabled", "theta_on", "theta_off", "tau_s", "tau_l"}
_SCHEDULE_SPEC = {"q", "gamma_e", "n_intervals", "horizon", "mode", "seed"}


@dataclass(frozen=True)
class SurfaceSettings:
    grid: GainGrid
    base: LipConfig
    trials_per_cell: int
    ndt: float
    rsi: float
    time_grid: TimeGrid
    seed: int
    path: str | None


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    seed: int
    trials: int
    out: str
    protocol: str
    time_grid: TimeGrid
    model: object = None
    surface: SurfaceSettings = None
    supervisor: SupervisorConfig = None
    resolved: dict = None  # the config with defaults filled in

    @property
    def digest(self):
        # the output directory does not change what is computed
        return artifacts.digest({k: v for k, v in self.resolved.items() if k != "out"})


class _Collector:
    def __init__(self):
        self.problems = []

    def add(self, where, msg):
        self.problems.append(f"{where}: {msg}" if where else msg)

    def unknown(self, where, obj, allowed):
        for k in sorted(set(obj) - set(allowed)):
            self.add(where, f"unknown field {k!r}")

    def section(self, where, obj):
        if obj is None:
            return {}
        if not isinstance(obj, dict):
            self.add(where, "must be an object")
            return {}
        return obj

    def number(self, where, obj, key, default, integer=False):
        v = obj.get(key, default)
        bad = isinstance(v, bool) or not isinstance(v, (int, float)) or (integer and not isinstance(v, int))
        if bad:
            self.add(where, f"{key} must be {'an integer' if integer else 'a number'}")
            return default
        return v


def _build(cls, where, kwargs, col):
    """Instantiate a validated dataclass, turning its failures into collected problems."""
    names = {f.name for f in fields(cls) if f.repr}
    col.unknown(where, kwargs, names)
    kwargs = {k: v for k, v in kwargs.items() if k in names}
    try:
        return cls(**kwargs)
    except (InvalidInputError, InvalidScheduleError) as e:
        for msg in str(e).split("; "):
            col.add(where, msg)
    except (TypeError, ValueError) as e:
        col.add(where, str(e))
    return None


def _schedule(where, spec, col):
    if isinstance(spec, list):
        try:
            return Schedule(tuple(tuple(iv) for iv in spec))
        except (InvalidScheduleError, TypeError, ValueError) as e:
            col.add(where, str(e))
            return None
    if isinstance(spec, dict):
        col.unknown(where, spec, _SCHEDULE_SPEC)
        try:
            a = softmax_weights(spec["q"], spec.get("gamma_e", 1.0))
            rng = None
            if spec.get("mode", "deterministic") == "probabilistic":
                from .stochastic import RngStream, stream_id

                rng = RngStream(int(spec.get("seed", 0)), stream_id(1, 0))
            return build_schedule(a, int(spec.get("n_intervals", len(a))), float(spec["horizon"]), rng,
                                  spec.get("mode", "deterministic"))
        except KeyError as e:
            col.add(where, f"missing {e.args[0]!r}")
        except (InvalidInputError, InvalidScheduleError, TypeError, ValueError) as e:
            col.add(where, str(e))
        return None
    col.add(where, "schedule must be a list of [start, end, cue] or a weighting spec")
    return None


def _time_grid(where, dt, horizon, col):
    try:
        return TimeGrid(dt, horizon)
    except (ValueError, TypeError) as e:
        col.add(where, str(e))
        return None


def _model(mode, raw, col):
    spec = dict(col.section("model", raw))
    if mode in ("multicue-2afc", "multicue-race"):
        if "schedule" not in spec:
            col.add("model", "schedule is required")
            return None
        spec["schedule"] = _schedule("model.schedule", spec["schedule"], col)
        if spec["schedule"] is None:
            return None
    return _build(MODEL_MODES[mode], "model", spec, col)


def _surface(raw, seed, col):
    spec = col.section("surface", raw.get("surface"))
    col.unknown("surface", spec, _SURFACE)
    grid = _build(GainGrid, "grid", col.section("grid", raw.get("grid")), col)
    base = DEFAULT_BASE
    if "base" in spec:
        base = _build(LipConfig, "surface.base", col.section("surface.base", spec["base"]), col)
    tpc = col.number("surface", spec, "trials_per_cell", 2000, integer=True)
    if isinstance(tpc, int) and tpc < 100:
        col.add("surface", "trials_per_cell >= 100")
    ndt = col.number("surface", spec, "ndt", DEFAULT_NDT)
    rsi = col.number("surface", spec, "rsi", DEFAULT_RSI)
    if ndt < 0 or rsi < 0:
        col.add("surface", "ndt >= 0 and rsi >= 0")
    tg = _time_grid("surface", col.number("surface", spec, "dt", DEFAULT_DT),
                    col.number("surface", spec, "horizon", SURFACE_HORIZON), col)
    sseed = col.number("surface", spec, "seed", seed, integer=True)
    path = spec.get("path")
    if path is not None and not isinstance(path, str):
        col.add("surface", "path must be a string")
    return SurfaceSettings(grid, base, tpc, ndt, rsi, tg, sseed, path)


def _supervisor(raw, seed, col):
    spec = col.section("supervisor", raw.get("supervisor"))
    col.unknown("supervisor", spec, _SUPERVISOR)
    drift = _build(GainDrift, "supervisor.drift", col.section("supervisor.drift", spec.get("drift")), col)
    for msg in drift.problems() if drift else []:
        col.add("supervisor.drift", msg)
    eng = col.section("supervisor.engagement", spec.get("engagement"))
    col.unknown("supervisor.engagement", eng, _ENGAGEMENT)
    enabled = eng.get("enabled", False)
    if not isinstance(enabled, bool):
        col.add("supervisor.engagement", "enabled must be true or false")
    num = col.number
    cfg = dict(
        n_tasks=num("supervisor", spec, "n_tasks", 200, integer=True),
        seed=seed,
        lo=num("supervisor", spec, "lo", 0.75),
        hi=num("supervisor", spec, "hi", 0.95),
        level=num("supervisor", spec, "level", 0.9),
        containment_scale=num("supervisor", spec, "containment_scale", 2.0),
        engagement=bool(enabled),
        theta_on=num("supervisor.engagement", eng, "theta_on", 0.3),
        theta_off=num("supervisor.engagement", eng, "theta_off", 0.15),
        tau_s=num("supervisor.engagement", eng, "tau_s", 2.0),
        tau_l=num("supervisor.engagement", eng, "tau_l", 120.0),
    )
    sup = SupervisorConfig(drift=drift or GainDrift(), **cfg)
    for msg in sup.problems():
        if msg in (drift.problems() if drift else []):
            continue
        where = "supervisor.engagement" if ("theta" in msg or "tau" in msg) else "supervisor"
        col.add(where, msg)
    return sup


def _defaults(raw, mode):
    """The config with every default made explicit; its digest identifies a run."""
    out = dict(raw)
    out.setdefault("seed", 0)
    out.setdefault("out", "out")
    if mode in MODEL_MODES:
        out.setdefault("trials", 10000)
        out.setdefault("dt", DEFAULT_DT)
        out.setdefault("horizon", DEFAULT_HORIZON)
        out.setdefault("protocol", "free-response")
    return out


def parse_config(raw, overrides=None):
    """Validate a decoded config dict, applying CLI ``overrides`` first."""
    col = _Collector()
    if not isinstance(raw, dict):
        raise ConfigError(["config must be a JSON object"])
    raw = dict(raw)
    for k, v in (overrides or {}).items():
        if v is not None:
            raw[k] = v
    col.unknown("", raw, _TOP)
    mode = raw.get("mode")
    if mode not in MODES:
        col.add("mode", f"must be one of {', '.join(MODES)}")
        raise ConfigError(col.problems)
    raw = _defaults(raw, mode)
    seed = col.number("", raw, "seed", 0, integer=True)
    if isinstance(seed, int) and not 0 <= seed <= U64_MAX:
        col.add("", "seed must be an unsigned 64-bit integer")
        seed = 0
    out = raw["out"]
    if not isinstance(out, str):
        col.add("", "out must be a path string")
    trials = 0
    protocol = "free-response"
    tg = model = surface = sup = None
    if mode in MODEL_MODES:
        trials = col.number("", raw, "trials", 10000, integer=True)
        if isinstance(trials, int) and trials < 1:
            col.add("", "trials >= 1")
        protocol = raw["protocol"]
        if protocol not in PROTOCOLS:
            col.add("", f"protocol must be one of {', '.join(PROTOCOLS)}")
        tg = _time_grid("", col.number("", raw, "dt", DEFAULT_DT), col.number("", raw, "horizon", DEFAULT_HORIZON), col)
        model = _model(mode, raw.get("model"), col)
        for k in ("grid", "surface", "supervisor"):
            if k in raw:
                col.add("", f"{k!r} does not apply to mode {mode}")
    else:
        for k in ("model", "trials", "dt", "horizon", "protocol"):
            if k in raw:
                col.add("", f"{k!r} does not apply to mode {mode}")
        surface = _surface(raw, seed, col)
        if mode == "supervise":
            sup = _supervisor(raw, seed, col)
        elif "supervisor" in raw:
            col.add("", "'supervisor' does not apply to mode reward-map")
    if col.problems:
        raise ConfigError(col.problems)
    return ExperimentConfig(mode, seed, trials, out, protocol, tg, model, surface, sup, raw)


def load_config(path, overrides=None):
    """Read and validate a JSON config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError([f"cannot read {path}: {e.strerror}"]) from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError([f"{path}:{e.lineno}:{e.colno}: {e.msg}"]) from None
    return parse_config(raw, overrides)
