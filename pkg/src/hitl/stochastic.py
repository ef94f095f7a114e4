"""Counter-based random streams and a fixed-step Euler-Maruyama integrator.

Every random number is a pure function of ``(seed, stream_id, lane, index)``.
The generator is Philox4x32-10: the 64-bit seed is the key, and the counter
holds the block index, the lane and the 64-bit stream id.  One block yields two
uniforms in [0, 1) or, through Box-Muller, two standard normals, so index ``k``
of a lane lives in block ``k >> 1``.

Lanes give each state dimension its own sequence.  A D-dimensional system
integrated on ``RngStream(seed, sid, lane=l)`` draws the noise of dimension
``j`` at step ``k`` from lane ``l + j``, index ``k``.  A pool of a coupled
system therefore sees exactly the noise a one-dimensional system would see on
the matching lane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import numba
from numba import njit, prange

from .errors import DivergenceError, InvalidGridError

# TBB on this platform is too old for numba; workqueue is always available.
numba.config.THREADING_LAYER = "workqueue"

__all__ = [
    "RngStream",
    "TimeGrid",
    "FixedTime",
    "FirstCrossing",
    "SdeResult",
    "derive_stream",
    "gaussian_increments",
    "integrate_sde",
    "stream_id",
]

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S5 = np.uint64(5)
_S6 = np.uint64(6)
_TWO_PI = 2.0 * math.pi

U64_MAX = (1 << 64) - 1


@njit(cache=True, inline="always")
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Philox4x32 with 10 rounds. All arguments are uint64 holding 32-bit words."""
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> _S32
        lo0 = p0 & _MASK
        hi1 = p1 >> _S32
        lo1 = p1 & _MASK
        c0, c1, c2, c3 = (hi1 ^ c1 ^ k0) & _MASK, lo1, (hi0 ^ c3 ^ k1) & _MASK, lo0
        k0 = (k0 + _W0) & _MASK
        k1 = (k1 + _W1) & _MASK
    return c0, c1, c2, c3


@njit(cache=True, inline="always")
def _uniform_pair(seed, sid, lane, block):
    w0, w1, w2, w3 = philox4x32(
        block & _MASK,
        lane & _MASK,
        sid & _MASK,
        sid >> _S32,
        seed & _MASK,
        seed >> _S32,
    )
    ua = ((w0 >> _S5) * np.uint64(67108864) + (w1 >> _S6)) / 9007199254740992.0
    ub = ((w2 >> _S5) * np.uint64(67108864) + (w3 >> _S6)) / 9007199254740992.0
    return ua, ub


@njit(cache=True, inline="always")
def _normal_pair(seed, sid, lane, block):
    ua, ub = _uniform_pair(seed, sid, lane, block)
    r = math.sqrt(-2.0 * math.log(1.0 - ua))
    ang = _TWO_PI * ub
    return r * math.cos(ang), r * math.sin(ang)


@njit(cache=True)
def _fill(seed, sid, lane, start, out, normal):
    n = out.shape[0]
    i = 0
    k = start
    while i < n:
        blk = np.uint64(k >> 1)
        if normal:
            a, b = _normal_pair(seed, sid, lane, blk)
        else:
            a, b = _uniform_pair(seed, sid, lane, blk)
        if k & 1 == 0:
            out[i] = a
            i += 1
            k += 1
            if i < n:
                out[i] = b
                i += 1
                k += 1
        else:
            out[i] = b
            i += 1
            k += 1


@njit(cache=True)
def _normals_step(seed, sids, lane0, dim, k, out):
    blk = np.uint64(k >> 1)
    odd = k & 1
    for p in range(sids.shape[0]):
        for j in range(dim):
            a, b = _normal_pair(seed, sids[p], np.uint64(lane0 + j), blk)
            out[p, j] = b if odd else a


def stream_id(namespace, index):
    """Pack a small namespace tag and an index into one 64-bit stream id."""
    if not 0 <= namespace < 1 << 16 or not 0 <= index < 1 << 48:
        raise ValueError("stream namespace or index out of range")
    return (namespace << 48) | index


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed by ``(seed, stream_id)``.

    The stream holds no mutable position; callers address draws by index.
    """

    seed: int
    stream_id: int
    lane: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not 0 <= int(v) <= U64_MAX:
                raise ValueError(f"{name} must be an unsigned 64-bit integer")
        if not 0 <= self.lane < 1 << 32:
            raise ValueError("lane must fit in 32 bits")

    @property
    def _key(self):
        return np.uint64(self.seed), np.uint64(self.stream_id)

    def with_lane(self, lane):
        return RngStream(self.seed, self.stream_id, lane)

    def normals(self, n, start=0, lane=None):
        out = np.empty(n)
        seed, sid = self._key
        _fill(seed, sid, np.uint64(self.lane if lane is None else lane), start, out, True)
        return out

    def uniforms(self, n, start=0, lane=None):
        out = np.empty(n)
        seed, sid = self._key
        _fill(seed, sid, np.uint64(self.lane if lane is None else lane), start, out, False)
        return out


def derive_stream(seed, stream_id):
    return RngStream(int(seed), int(stream_id))


@dataclass(frozen=True)
class TimeGrid:
    dt: float
    horizon: float

    def __post_init__(self):
        if not (self.dt > 0 and self.horizon > 0):
            raise InvalidGridError("dt and horizon must be positive")
        if self.dt > self.horizon * (1 + 1e-12):
            raise InvalidGridError("dt must not exceed horizon")

    @property
    def n_steps(self):
        # guard against 10 / 1e-3 = 10000.000000000002
        return max(1, math.ceil(self.horizon / self.dt - 1e-9))

    def step_of(self, t):
        """Index of the first grid point at or after time ``t``."""
        return max(0, math.ceil(t / self.dt - 1e-9))


def gaussian_increments(rng, dt, n):
    """``n`` i.i.d. Normal(0, dt) increments from the stream's own lane."""
    if not dt > 0:
        raise InvalidGridError("dt must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    return math.sqrt(dt) * rng.normals(n)


@dataclass(frozen=True)
class FixedTime:
    pass


@dataclass(frozen=True)
class FirstCrossing:
    """Stop when any component reaches its upper or lower bound.

    Bounds are scalars or per-component arrays; ``None`` disables a side.
    """

    upper: object = None
    lower: object = None


@dataclass
class SdeResult:
    step: np.ndarray  # steps taken, n_steps if no crossing
    state: np.ndarray  # state at stop, shape (n_paths, D)
    crossed: np.ndarray  # bool per path
    component: np.ndarray  # crossing component or -1
    side: np.ndarray  # +1 upper, -1 lower, 0 none
    dt: float
    path: np.ndarray | None = None  # (n_steps + 1, n_paths, D) if recorded

    @property
    def time(self):
        return self.dt * self.step


def integrate_sde(
    drift: Callable,
    diffusion: Callable,
    x0,
    grid: TimeGrid,
    rng,
    stop=FixedTime(),
    record_path=False,
):
    """Integrate ``dx = drift(x, t) dt + diffusion(x, t) dW`` on a fixed grid.

    ``rng`` is one ``RngStream`` or a sequence of them (one path each).
    ``x0`` has shape (D,) and is broadcast to every path.  ``drift`` and
    ``diffusion`` receive the (n_paths, D) state and must return arrays of the
    same shape; diffusion is diagonal.  A path stops at the first grid point
    where its state meets a bound; stopped paths are frozen.
    """
    streams = [rng] if isinstance(rng, RngStream) else list(rng)
    if not streams:
        raise ValueError("need at least one stream")
    seed = streams[0].seed
    lane0 = streams[0].lane
    if any(s.seed != seed or s.lane != lane0 for s in streams):
        raise ValueError("batched streams must share seed and lane")
    sids = np.array([s.stream_id for s in streams], dtype=np.uint64)

    x = np.array(np.broadcast_to(np.atleast_1d(np.asarray(x0, float)), (len(streams), np.size(x0))))
    n_paths, dim = x.shape
    n_steps = grid.n_steps
    sq = math.sqrt(grid.dt)

    crossing = isinstance(stop, FirstCrossing)
    if crossing:
        upper = None if stop.upper is None else np.broadcast_to(np.asarray(stop.upper, float), (dim,))
        lower = None if stop.lower is None else np.broadcast_to(np.asarray(stop.lower, float), (dim,))

    steps = np.full(n_paths, n_steps)
    crossed = np.zeros(n_paths, bool)
    comp = np.full(n_paths, -1)
    side = np.zeros(n_paths, int)
    active = np.ones(n_paths, bool)
    z = np.empty((n_paths, dim))
    path = np.empty((n_steps + 1, n_paths, dim)) if record_path else None
    if record_path:
        path[0] = x

    for k in range(n_steps):
        t = k * grid.dt
        _normals_step(np.uint64(seed), sids, lane0, dim, k, z)
        xa = x[active]
        new = xa + drift(xa, t) * grid.dt + diffusion(xa, t) * (sq * z[active])
        if not np.all(np.isfinite(new)):
            raise DivergenceError(k + 1)
        x[active] = new
        if record_path:
            path[k + 1] = x
        if crossing:
            idx = np.flatnonzero(active)
            hit_u = new >= upper if upper is not None else np.zeros_like(new, bool)
            hit_l = new <= lower if lower is not None else np.zeros_like(new, bool)
            hit = hit_u | hit_l
            done = hit.any(axis=1)
            if done.any():
                rows = idx[done]
                first = hit[done].argmax(axis=1)
                steps[rows] = k + 1
                crossed[rows] = True
                comp[rows] = first
                side[rows] = np.where(hit_u[done, first], 1, -1)
                active[rows] = False
                if not active.any():
                    if record_path:
                        path[k + 2 :] = x
                    break

    return SdeResult(step=steps, state=x, crossed=crossed, component=comp, side=side, dt=grid.dt, path=path)


# Specialized kernel for piecewise-affine systems with diagonal noise.
# Every decision model reduces to this form; the recurrence and noise layout are
# the same as integrate_sde.

RULE_BOUNDS = 0  # 1-D readout between an upper and a lower bound
RULE_ABSOLUTE = 1  # first readout component reaching its own threshold
RULE_MAX_NEXT = 2
RULE_MAX_AVG = 3

TERM_THRESHOLD = 0
TERM_INTERROGATION = 1
TERM_TIMEOUT = 2


@njit(cache=True, inline="always")
def _argmax_low(y):
    best = 0
    for i in range(1, y.shape[0]):
        if y[i] > y[best]:
            best = i
    return best


@njit(cache=True, inline="always")
def _decide(y, rule, upper, lower, delta):
    p = y.shape[0]
    if rule == RULE_BOUNDS:
        if y[0] >= upper[0]:
            return 0
        if y[0] <= lower[0]:
            return 1
        return -1
    if rule == RULE_ABSOLUTE:
        for i in range(p):
            if y[i] >= upper[i]:
                return i
        return -1
    best = _argmax_low(y)
    if rule == RULE_MAX_NEXT:
        second = -np.inf
        for i in range(p):
            if i != best and y[i] > second:
                second = y[i]
        ref = second
    else:
        ref = 0.0
        for i in range(p):
            ref += y[i]
        ref /= p
    if y[best] - ref >= delta:
        return best
    return -1


@njit(cache=True, parallel=True)
def _linear_kernel(
    seed, sids, lane0, seg_end, A, b, g, x0, R, rule, upper, lower, delta,
    dt, n_steps, interrogate, out_choice, out_steps, out_term, out_y, out_err,
):
    n = sids.shape[0]
    dim = x0.shape[0]
    p = R.shape[0]
    sq = math.sqrt(dt)
    for t in prange(n):
        sid = sids[t]
        x = x0.copy()
        xn = np.empty(dim)
        z = np.empty((dim, 2))
        y = np.empty(p)
        seg = 0
        decided = -1
        k = 0
        err = 0
        while k < n_steps:
            while k >= seg_end[seg]:
                seg += 1
            odd = k & 1
            if odd == 0:
                blk = np.uint64(k >> 1)
                for j in range(dim):
                    z[j, 0], z[j, 1] = _normal_pair(seed, sid, np.uint64(lane0 + j), blk)
            finite = True
            for i in range(dim):
                acc = b[seg, i]
                for j in range(dim):
                    acc += A[seg, i, j] * x[j]
                v = x[i] + acc * dt + g[seg, i] * (sq * z[i, odd])
                if not math.isfinite(v):
                    finite = False
                xn[i] = v
            k += 1
            if not finite:
                err = k
                break
            for i in range(dim):
                x[i] = xn[i]
            if not interrogate:
                for r in range(p):
                    acc = 0.0
                    for j in range(dim):
                        acc += R[r, j] * x[j]
                    y[r] = acc
                decided = _decide(y, rule, upper, lower, delta)
                if decided >= 0:
                    break
        for r in range(p):
            acc = 0.0
            for j in range(dim):
                acc += R[r, j] * x[j]
            y[r] = acc
            out_y[t, r] = acc
        out_err[t] = err
        out_steps[t] = k
        if interrogate:
            out_term[t] = TERM_INTERROGATION
            if p == 1:
                out_choice[t] = 0 if y[0] >= 0.0 else 1
            else:
                out_choice[t] = _argmax_low(y)
        elif decided >= 0:
            out_term[t] = TERM_THRESHOLD
            out_choice[t] = decided
        else:
            out_term[t] = TERM_TIMEOUT
            out_choice[t] = -1


@dataclass(frozen=True)
class AffineSegments:
    """Piecewise-constant affine drift ``A x + b`` with diagonal noise ``g``.

    Segment ``s`` applies to steps ``k`` with ``seg_end[s-1] <= k < seg_end[s]``.
    """

    seg_end: np.ndarray  # (S,) int64, last entry >= n_steps
    A: np.ndarray  # (S, D, D)
    b: np.ndarray  # (S, D)
    g: np.ndarray  # (S, D)


@dataclass(frozen=True)
class Readout:
    R: np.ndarray  # (P, D)
    rule: int
    upper: np.ndarray  # (P,)
    lower: np.ndarray  # (P,)
    delta: float = 0.0


@dataclass
class LinearBatch:
    choice: np.ndarray
    steps: np.ndarray
    termination: np.ndarray
    readout: np.ndarray


def integrate_affine(system, readout, x0, grid, seed, stream_ids, lane=0, interrogate=False):
    """Run the fused affine integrator for many independent trials.

    Trial ``i`` uses stream ``(seed, stream_ids[i])``; results do not depend on
    the number of worker threads.
    """
    sids = np.ascontiguousarray(stream_ids, dtype=np.uint64)
    n = sids.shape[0]
    p = readout.R.shape[0]
    out_choice = np.empty(n, np.int64)
    out_steps = np.empty(n, np.int64)
    out_term = np.empty(n, np.int64)
    out_y = np.empty((n, p))
    out_err = np.empty(n, np.int64)
    seg_end = np.asarray(system.seg_end, np.int64).copy()
    seg_end[-1] = max(seg_end[-1], grid.n_steps)
    _linear_kernel(
        np.uint64(seed), sids, int(lane), seg_end,
        np.ascontiguousarray(system.A, float), np.ascontiguousarray(system.b, float),
        np.ascontiguousarray(system.g, float), np.asarray(x0, float),
        np.ascontiguousarray(readout.R, float), int(readout.rule),
        np.asarray(readout.upper, float), np.asarray(readout.lower, float), float(readout.delta),
        float(grid.dt), int(grid.n_steps), bool(interrogate),
        out_choice, out_steps, out_term, out_y, out_err,
    )
    if out_err.any():
        raise DivergenceError(int(out_err[out_err > 0].min()))
    return LinearBatch(out_choice, out_steps, out_term, out_y)
