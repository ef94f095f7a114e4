"""Command-line entry point: ``hitl simulate|reward-map|supervise <config>``.

Exit status is 0 on success, 2 when the config or arguments fail validation
and 3 when the results are degenerate (no decisions, or an all-zero surface).
``HITL_WORKERS`` sets the number of simulation threads; results do not depend
on it.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, artifacts, svg
from .config import COMMAND_MODES, load_config
from .errors import ConfigError, DegenerateSurfaceError
from .models import simulate_batch, summarize
from .reward import compute_surface, load_surface, locate_region, is_contiguous
from .supervisor import run

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DEGENERATE = 3
WORKERS_ENV = "HITL_WORKERS"
TRIAL_HEADER = ("trial", "choice", "decision_time", "termination")

log = logging.getLogger("hitl")


def _set_workers():
    value = os.environ.get(WORKERS_ENV)
    if not value:
        return None
    import numba

    try:
        n = int(value)
    except ValueError:
        raise ConfigError([f"{WORKERS_ENV} must be a positive integer, got {value!r}"]) from None
    if n < 1:
        raise ConfigError([f"{WORKERS_ENV} must be a positive integer, got {value!r}"])
    n = min(n, numba.config.NUMBA_NUM_THREADS)
    numba.set_num_threads(n)
    return n


def _stamp(cfg):
    return {"seed": cfg.seed, "config_digest": cfg.digest, "mode": cfg.mode, "version": __version__}


def cmd_simulate(cfg, out):
    sids = np.arange(cfg.trials, dtype=np.uint64)
    batch = simulate_batch(cfg.model, cfg.time_grid, cfg.protocol, cfg.seed, sids)
    perf = summarize(batch, cfg.model.correct)
    rows = (
        (t, int(batch.choice[t]), float(batch.decision_time[t]), batch.outcome(t).termination)
        for t in range(len(batch))
    )
    artifacts.write_csv(out / "trials.csv", TRIAL_HEADER, rows)
    artifacts.write_json(out / "trials.json", _stamp(cfg))
    summary = {**_stamp(cfg), "performance": perf, "protocol": cfg.protocol,
               "dt": cfg.time_grid.dt, "horizon": cfg.time_grid.horizon}
    artifacts.write_json(out / "summary.json", summary)
    log.info("accuracy %.4f  mean DT %.4f  timeouts %d", perf.accuracy, perf.mean_dt, perf.n_timeout)
    if perf.n_timeout == perf.n_trials:
        log.error("no trial reached a decision before the horizon; raise the horizon or the drift")
        return EXIT_DEGENERATE
    return EXIT_OK


def _surface(cfg, out):
    s = cfg.surface
    if s.path:
        log.info("loading surface from %s", s.path)
        return load_surface(s.path)
    t0 = time.perf_counter()
    surf = compute_surface(s.grid, s.base, s.trials_per_cell, s.ndt, s.rsi, s.seed, s.time_grid)
    log.info("surface %dx%d in %.1fs", s.grid.n_e, s.grid.n_i, time.perf_counter() - t0)
    surf.save(out / "surface.csv", extra=_stamp(cfg))
    return surf


def _region_info(surface, level=0.9):
    region = locate_region(surface, level)
    ie, ii = surface.argmax
    return {
        "argmax": {"gamma_E": region.center.gamma_e, "gamma_I": region.center.gamma_i, "index": [int(ie), int(ii)]},
        "argmax_interior": bool(0 < ie < surface.grid.n_e - 1 and 0 < ii < surface.grid.n_i - 1),
        "max_value": float(surface.values.max()),
        "region_level": level,
        "region_cells": len(region.members),
        "region_radius": region.radius,
        "region_contiguous": is_contiguous(region.members),
    }


def cmd_reward_map(cfg, out):
    surf = _surface(cfg, out)
    artifacts.write_json(out / "summary.json", {**_stamp(cfg), **_region_info(surf)})
    return EXIT_OK


def cmd_supervise(cfg, out):
    surf = _surface(cfg, out)
    res = run(surf, cfg.supervisor, config_digest=cfg.digest)
    res.save(out / "run.csv")
    stats = res.stats()
    artifacts.write_json(out / "summary.json", {**_stamp(cfg), **stats, "surface": _region_info(surf, cfg.supervisor.level)})
    desc = f"seed={cfg.seed} config_digest={cfg.digest}"
    gains = [(r.gain_before.gamma_e, r.gain_before.gamma_i) for r in res.records]
    svg.gain_trajectory(out / "gain_trajectory.svg", surf, gains, res.region_center, res.region_radius, desc)
    svg.series(out / "p0_series.svg", [r.p0 for r in res.records], "p0", "Operator success rate p0", desc)
    svg.series(out / "p_bar_series.svg", [r.p_bar for r in res.records], "p_bar", "Average success rate",
               desc, color="#2ca02c", reference=0.5)
    if stats["mean_p_bar"] is not None:
        log.info("mean p_bar %.4f  var p_bar %.5f  var p0 %.5f",
                 stats["mean_p_bar"], stats["var_p_bar"] or float("nan"), stats["var_p0"] or float("nan"))
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "reward-map": cmd_reward_map, "supervise": cmd_supervise}


def build_parser():
    p = argparse.ArgumentParser(prog="hitl", description="Supervisory-control simulations on gain-modulated decision models.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("config", help="JSON config file")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", help="output directory")
        sp.add_argument(
            "--trials", type=int,
            help="trials (simulate), trials per cell (reward-map) or tasks (supervise)",
        )
        sp.add_argument("-q", "--quiet", action="store_true")
    return p


def _overrides(args):
    o = {"seed": args.seed, "out": args.out}
    if args.trials is not None:
        if args.command == "simulate":
            o["trials"] = args.trials
        else:
            o["_trials"] = args.trials
    return o


def _apply_trials(raw_overrides, path):
    """Nested ``--trials`` targets need the raw config, so merge them here."""
    import json

    trials = raw_overrides.pop("_trials", None)
    if trials is None:
        return raw_overrides
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError):
        return raw_overrides  # load_config reports it
    if not isinstance(raw, dict):
        return raw_overrides
    key, field = ("surface", "trials_per_cell") if raw.get("mode") == "reward-map" else ("supervisor", "n_tasks")
    section = dict(raw.get(key) or {}) if isinstance(raw.get(key) or {}, dict) else raw.get(key)
    if isinstance(section, dict):
        section[field] = trials
    raw_overrides[key] = section
    return raw_overrides


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        _set_workers()
        cfg = load_config(args.config, _apply_trials(_overrides(args), args.config))
        if cfg.mode not in COMMAND_MODES[args.command]:
            raise ConfigError([f"mode {cfg.mode!r} cannot run under '{args.command}' "
                               f"(expected {', '.join(COMMAND_MODES[args.command])})"])
    except ConfigError as e:
        for msg in e.problems:
            print(f"error: {msg}", file=sys.stderr)
        return EXIT_INVALID
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return COMMANDS[args.command](cfg, out)
    except DegenerateSurfaceError as e:
        print(f"error: {e}", file=sys.stderr)
        print("hint: raise surface.trials_per_cell, lower the thresholds or widen the gain grid", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
