"""Independent reference values for the simulation tests.

Nothing here imports ``hitl``: every model is re-coded directly in numpy with
numpy's own generator, so agreement with the package is a real cross-check.
Run once; the printed JSON is what ``tests/frozen.py`` holds.

    python scripts/oracles.py            # all oracles (a few minutes)
    python scripts/oracles.py ddm race   # a subset
"""

import argparse
import json
import math
import sys
import time

import numpy as np
from scipy.linalg import expm
from scipy.stats import norm


def ddm_free_response(mu=1.0, sigma=1.0, theta=1.0, dt=1e-4, n=100_000, seed=20240501, horizon=10.0):
    """Brute-force Euler paths, dropping each path once it leaves (-theta, theta)."""
    rng = np.random.default_rng(seed)
    x = np.zeros(n)
    alive = np.arange(n)
    choice = np.full(n, -1)
    dtime = np.full(n, horizon)
    sd = sigma * math.sqrt(dt)
    k = 0
    n_steps = math.ceil(horizon / dt - 1e-9)
    while alive.size and k < n_steps:
        k += 1
        xa = x[alive] + mu * dt + sd * rng.standard_normal(alive.size)
        up = xa >= theta
        down = xa <= -theta
        hit = up | down
        idx = alive[hit]
        choice[idx] = np.where(up[hit], 0, 1)
        dtime[idx] = k * dt
        x[alive] = xa
        alive = alive[~hit]
    acc = float(np.mean(choice == 0))
    dec = choice >= 0
    return {
        "accuracy": acc,
        "accuracy_se": math.sqrt(acc * (1 - acc) / n),
        "mean_dt": float(dtime[dec].mean()),
        "mean_dt_se": float(dtime[dec].std(ddof=1) / math.sqrt(dec.sum())),
        "n": n,
        "dt": dt,
        "analytic_accuracy": 1 / (1 + math.exp(-2 * mu * theta / sigma**2)),
        "analytic_mean_dt": theta / mu * math.tanh(mu * theta / sigma**2),
    }


def multicue_2afc(n=100_000, dt=1e-4, seed=7):
    """Cue drifts [2, 0.5] for half a second each, sign of x at T=1."""
    rng = np.random.default_rng(seed)
    x = np.zeros(n)
    steps = round(1.0 / dt)
    for k in range(steps):
        mu = 2.0 if k < steps // 2 else 0.5
        x += mu * dt + math.sqrt(dt) * rng.standard_normal(n)
    p = float(np.mean(x >= 0))
    return {"p_a": p, "se": math.sqrt(p * (1 - p) / n), "exact": float(norm.cdf(1.25)), "dt": dt, "n": n}


def _gaussian_endpoint(A, b, g, T, n_quad=4001):
    """Mean and covariance of the linear SDE dx = (A x + b) dt + diag(g) dW from 0 at time T."""
    s = np.linspace(0.0, T, n_quad)
    Es = [expm(A * si) for si in s]
    w = np.full(n_quad, s[1] - s[0])
    w[0] = w[-1] = w[0] / 2
    mean = sum(wi * E @ b for wi, E in zip(w, Es))
    G = np.diag(g)
    cov = sum(wi * E @ G @ G.T @ E.T for wi, E in zip(w, Es))
    return mean, cov


def race_interrogation(n=2_000_000, seed=11):
    """K=3, S=[1.2, 1.0, 0.8], leak 2, inhibition 1, sigma 0.5, argmax at T=2.

    The endpoint of a linear SDE is Gaussian, so sample it exactly instead of
    stepping paths.
    """
    k, w, sig = 2.0, 1.0, 0.5
    A = -k * np.eye(3) - w * (np.ones((3, 3)) - np.eye(3))
    mean, cov = _gaussian_endpoint(A, np.array([1.2, 1.0, 0.8]), np.full(3, sig), 2.0)
    rng = np.random.default_rng(seed)
    x = rng.multivariate_normal(mean, cov, size=n)
    wins = np.bincount(np.argmax(x, axis=1), minlength=3) / n
    return {"p_win": wins.tolist(), "n": n, "mean": mean.tolist(), "cov": cov.tolist()}


def multicue_race(n=100_000, dt=1e-3, seed=13):
    """K=2, M=2, S=[[1, .2], [.2, 1]], cue 0 on [0, .5), cue 1 on [.5, 1).

    No leak or inhibition, sigma 0.5 per pool, absolute threshold 0.5 on each
    pool's sum over cues, free response with a 1 s horizon.  Only the scheduled
    cue's accumulators move.
    """
    S = np.array([[1.0, 0.2], [0.2, 1.0]])
    sig, theta, steps = 0.5, 0.5, round(1.0 / dt)
    rng = np.random.default_rng(seed)
    x = np.zeros((n, 2, 2))  # trial, pool, cue
    choice = np.full(n, -1)
    dtime = np.full(n, 1.0)
    alive = np.ones(n, bool)
    for k in range(steps):
        m = 0 if k < steps // 2 else 1
        idx = np.flatnonzero(alive)
        x[idx, :, m] += S[:, m] * dt + sig * math.sqrt(dt) * rng.standard_normal((idx.size, 2))
        tot = x[idx].sum(axis=2)
        hit = (tot >= theta).any(axis=1)
        first = np.argmax(tot >= theta, axis=1)
        choice[idx[hit]] = first[hit]
        dtime[idx[hit]] = (k + 1) * dt
        alive[idx[hit]] = False
    p = np.array([np.mean(choice == 0), np.mean(choice == 1), np.mean(choice < 0)])
    return {"p": p.tolist(), "n": n, "dt": dt, "mean_dt_decided": float(dtime[choice >= 0].mean())}


def lip_sweep(n=10_000, dt=1e-3, seed=17, gains=(0.4, 1.0, 1.8)):
    """LIP pools S=(1, .5), sigma 1, threshold 1, no leak or inhibition, absolute criterion."""
    S = np.array([1.0, 0.5])
    out = []
    rng = np.random.default_rng(seed)
    for ge in gains:
        x = np.zeros((n, 2))
        alive = np.arange(n)
        choice = np.full(n, -1)
        dtime = np.full(n, 10.0)
        k = 0
        while alive.size and k < 10_000:
            k += 1
            xa = x[alive] + ge * S * dt + ge * math.sqrt(dt) * rng.standard_normal((alive.size, 2))
            over = xa >= 1.0
            hit = over.any(axis=1)
            choice[alive[hit]] = np.argmax(over[hit], axis=1)
            dtime[alive[hit]] = k * dt
            x[alive] = xa
            alive = alive[~hit]
        acc = float(np.mean(choice == 0))
        dec = choice >= 0
        out.append({
            "gamma_e": ge,
            "accuracy": acc,
            "accuracy_se": math.sqrt(acc * (1 - acc) / n),
            "mean_dt": float(dtime[dec].mean()),
            "mean_dt_se": float(dtime[dec].std(ddof=1) / math.sqrt(dec.sum())),
        })
    return out


def closed_forms():
    q = np.array([0.9, 0.6, 0.55, 0.5])
    idx = {}
    for g in (0, 1, 2, 5, 10, 20):
        e = np.exp(g * q - (g * q).max())
        idx[g] = float((e / e.sum()).max())
    return {
        "reward_rate_085_076": 0.85 / (0.76 + 0.3 + 1.0),
        "ou_discrete_var_dt1e-3": 1 / (2 - 1e-3),
        "strategy_index": idx,
        "softmax_1_05_g2": (np.exp([2.0, 1.0]) / np.exp([2.0, 1.0]).sum()).tolist(),
    }


ORACLES = {
    "ddm": ddm_free_response,
    "multicue_2afc": multicue_2afc,
    "race": race_interrogation,
    "multicue_race": multicue_race,
    "lip": lip_sweep,
    "closed": closed_forms,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("names", nargs="*", help=f"any of {', '.join(ORACLES)}")
    args = ap.parse_args()
    unknown = set(args.names) - set(ORACLES)
    if unknown:
        ap.error(f"unknown oracle(s): {', '.join(sorted(unknown))}")
    res = {}
    for name in args.names or ORACLES:
        t0 = time.perf_counter()
        res[name] = ORACLES[name]()
        print(f"# {name}: {time.perf_counter() - t0:.1f}s", file=sys.stderr, flush=True)
    print(json.dumps(res, indent=2))


if __name__ == "__main__":
    main()
