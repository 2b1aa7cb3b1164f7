"""Exact kinetic Monte Carlo for the exclusion-plus-spin-flip process on the
discrete torus, generator n^2 L_ex + a L_G.

Events decompose into a uniform-bond exchange channel of constant total rate
n^3 and a thinned flip channel bounded by a n (1+gamma)^2: a proposed flip at
site x is accepted with probability c_x(eta)/(1+gamma)^2, and rejections are
valid no-op events of the uniformized chain. Because the total event rate is
constant, the number of events in a sampling interval is Poisson and the
embedded chain can run in a tight compiled loop; per-step exponential clocks
(kmc_step) and the batched driver (run_stationary) simulate the same law.

Observables are maintained incrementally: the spin sum in exact integer
arithmetic, mode coordinates in floating point with periodic recomputation.
The RNG layout is fixed and documented in run_stationary so that results are
bit-reproducible given (seed, replica_id).
"""

from dataclasses import dataclass, field
import json
import math
import time as _time

import numpy as np
from numba import njit

from critfluct.potentials import ModelParams

__all__ = [
    "Configuration",
    "SimulationSchedule",
    "SampleSeries",
    "ResourceBudgetError",
    "initial_configuration",
    "configuration_from_occupancy",
    "default_schedule",
    "glauber_rate",
    "kmc_step",
    "run_stationary",
    "field_projection",
    "series_to_csv",
    "series_from_csv",
    "write_sidecar",
]

DEFAULT_EVENT_BUDGET = 2.0e11
MODE_REFRESH_EVENTS = 100_000_000
MODE_DRIFT_TOLERANCE = 1e-8

_U64 = np.uint64
_INV53 = 1.0 / 9007199254740992.0  # 2^-53
_MASK64 = (1 << 64) - 1


class ResourceBudgetError(RuntimeError):
    """Projected event count exceeds the configured budget."""


@dataclass
class Configuration:
    """Mutable torus configuration with incrementally maintained observables.

    occupancy is a uint8 vector of 0/1; sum_eta tracks its exact sum;
    mode_coords[k] tracks sum_x mode_samples[k, x] (occupancy[x] - 1/2).
    """

    occupancy: np.ndarray
    sum_eta: int
    mode_coords: np.ndarray
    mode_samples: np.ndarray = field(repr=False)

    @property
    def n(self):
        return self.occupancy.size

    def scaled_magnetization(self):
        """Y^n = n^{-3/4} sum_x (eta(x) - 1/2)."""
        n = self.n
        return (self.sum_eta - 0.5 * n) / n ** 0.75

    def recomputed_modes(self):
        return self.mode_samples @ (self.occupancy.astype(float) - 0.5)

    def validate(self, rel_tol=MODE_DRIFT_TOLERANCE):
        """Check incremental observables against full recomputation."""
        actual = int(self.occupancy.sum())
        if actual != self.sum_eta:
            raise RuntimeError(f"sum_eta drifted: stored {self.sum_eta}, actual {actual}")
        exact = self.recomputed_modes()
        scale = np.maximum(1.0, np.abs(exact))
        drift = np.abs(self.mode_coords - exact) / scale
        if drift.size and float(drift.max()) > rel_tol:
            raise RuntimeError(f"mode coordinate drift {float(drift.max()):.3e}")


def configuration_from_occupancy(occupancy, test_functions=()):
    occ = np.ascontiguousarray(occupancy, dtype=np.uint8)
    if occ.ndim != 1 or not np.all((occ == 0) | (occ == 1)):
        raise ValueError("occupancy must be a flat 0/1 vector")
    if test_functions:
        samples = np.ascontiguousarray(
            np.stack([np.asarray(h.samples, dtype=float) for h in test_functions])
        )
        if samples.shape[1] != occ.size:
            raise ValueError("test function grid does not match lattice size")
    else:
        samples = np.zeros((0, occ.size))
    coords = samples @ (occ.astype(float) - 0.5)
    return Configuration(
        occupancy=occ, sum_eta=int(occ.sum()), mode_coords=coords, mode_samples=samples
    )


def initial_configuration(n, rng, test_functions=()):
    """Product Bernoulli(1/2) start, the natural exchangeable reference state."""
    occ = rng.integers(0, 2, size=int(n), dtype=np.uint8)
    return configuration_from_occupancy(occ, test_functions)


@dataclass(frozen=True)
class SimulationSchedule:
    burn_in_time: float
    sample_interval: float
    sample_count: int
    seed: int
    replica_id: int = 0

    def __post_init__(self):
        if self.burn_in_time < 0.0:
            raise ValueError("burn_in_time must be nonnegative")
        if self.sample_interval <= 0.0:
            raise ValueError("sample_interval must be positive")
        if self.sample_count < 1:
            raise ValueError("sample_count must be at least 1")
        if not 0 <= int(self.seed) <= _MASK64:
            raise ValueError("seed must fit in 64 bits")


def default_schedule(params, sample_count, seed, replica_id=0):
    """Burn-in 10 sqrt(n), spacing sqrt(n)/2: the magnetization relaxes on the
    sqrt(n) generator-time scale, so these are a few relaxation times each."""
    root = math.sqrt(params.n)
    return SimulationSchedule(
        burn_in_time=10.0 * root,
        sample_interval=0.5 * root,
        sample_count=int(sample_count),
        seed=int(seed),
        replica_id=int(replica_id),
    )


@dataclass(frozen=True)
class SampleSeries:
    """Stationary observable rows: (time, Y^n, then one y^n column per mode).

    Mode columns already carry the n^{-1/2} field scaling. modes records the
    (kind, k) labels of the registered test functions in column order.
    """

    params: ModelParams
    schedule: SimulationSchedule
    rows: np.ndarray
    modes: tuple = ()
    n_events: int = 0
    wall_time: float = 0.0
    max_mode_drift: float = 0.0

    def mode_column(self, index):
        """1-based mode column as a flat array."""
        if not 1 <= index <= len(self.modes):
            raise ValueError(f"mode index {index} out of range")
        return self.rows[:, 1 + index]


def _total_rates(params):
    n = params.n
    r_ex = float(n) ** 3
    r_flip = params.a * n * (1.0 + params.gamma) ** 2
    return r_ex, r_flip


def _acceptance_table(gamma):
    """acc[(left<<2)|(mid<<1)|right] = c_x(eta) / (1+gamma)^2 for the 8 local patterns."""
    acc = np.empty(8)
    for pat in range(8):
        s_l = 2.0 * ((pat >> 2) & 1) - 1.0
        s_m = 2.0 * ((pat >> 1) & 1) - 1.0
        s_r = 2.0 * (pat & 1) - 1.0
        c = (1.0 - gamma * s_m * s_l) * (1.0 - gamma * s_m * s_r)
        acc[pat] = c / (1.0 + gamma) ** 2
    return acc


def glauber_rate(config, x, gamma):
    """Flip rate c_x(eta) = (1 - gamma s(x)s(x-1)) (1 - gamma s(x)s(x+1))."""
    occ = config.occupancy
    n = occ.size
    s_m = 2.0 * occ[x % n] - 1.0
    s_l = 2.0 * occ[(x - 1) % n] - 1.0
    s_r = 2.0 * occ[(x + 1) % n] - 1.0
    return (1.0 - gamma * s_m * s_l) * (1.0 - gamma * s_m * s_r)


def _apply_swap(config, x):
    occ = config.occupancy
    n = occ.size
    x1 = (x + 1) % n
    ox, ox1 = occ[x], occ[x1]
    if ox == ox1:
        return
    occ[x], occ[x1] = ox1, ox
    if config.mode_samples.size:
        d = float(ox1) - float(ox)
        config.mode_coords += (config.mode_samples[:, x] - config.mode_samples[:, x1]) * d


def _apply_flip(config, x):
    occ = config.occupancy
    old = occ[x]
    occ[x] = 1 - old
    d = 1.0 - 2.0 * float(old)
    config.sum_eta += int(d)
    if config.mode_samples.size:
        config.mode_coords += config.mode_samples[:, x] * d


def kmc_step(config, params, rng):
    """One exact CTMC transition; returns the exponential waiting time.

    The event is applied to config in place. Channel split: exchange with
    probability n^3 / (n^3 + a n (1+gamma)^2), otherwise a flip proposal at a
    uniform site accepted with c_x/(1+gamma)^2 (rejection is a no-op event).
    """
    n = params.n
    if config.n != n:
        raise ValueError("configuration size does not match params.n")
    gamma = params.gamma
    r_ex, r_flip = _total_rates(params)
    total = r_ex + r_flip
    wait = rng.exponential(1.0 / total)
    if rng.random() < r_ex / total:
        x = int(rng.integers(n))
        _apply_swap(config, x)
    else:
        x = int(rng.integers(n))
        if rng.random() < glauber_rate(config, x, gamma) / (1.0 + gamma) ** 2:
            _apply_flip(config, x)
    return wait


@njit(inline="always")
def _xo_next(s):
    s0, s1, s2, s3 = s[0], s[1], s[2], s[3]
    x = s0 + s3
    result = ((x << _U64(23)) | (x >> _U64(41))) + s0
    t = s1 << _U64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = (s3 << _U64(45)) | (s3 >> _U64(19))
    s[0], s[1], s[2], s[3] = s0, s1, s2, s3
    return result


@njit(cache=True, nogil=True)
def _advance(occ, state, n_events, n, p_ex, n_over_pex, acc, h, modes, sum2):
    """Run n_events embedded-chain events in place; returns the spin sum.

    Draw order per event: one uniform selects the channel, and on the
    exchange branch is reused (rescaled) for the bond index; the flip branch
    draws one uniform for the site and one for thinning acceptance.
    """
    n_modes = h.shape[0]
    for _ in range(n_events):
        u = (_xo_next(state) >> _U64(11)) * _INV53
        if u < p_ex:
            x = int(u * n_over_pex)
            if x >= n:
                x = n - 1
            x1 = x + 1
            if x1 == n:
                x1 = 0
            ox = occ[x]
            ox1 = occ[x1]
            if ox != ox1:
                occ[x] = ox1
                occ[x1] = ox
                d = float(ox1) - float(ox)
                for k in range(n_modes):
                    modes[k] += (h[k, x] - h[k, x1]) * d
        else:
            us = (_xo_next(state) >> _U64(11)) * _INV53
            x = int(us * n)
            if x >= n:
                x = n - 1
            xl = x - 1 if x > 0 else n - 1
            xr = x + 1 if x + 1 < n else 0
            pat = (occ[xl] << 2) | (occ[x] << 1) | occ[xr]
            ua = (_xo_next(state) >> _U64(11)) * _INV53
            if ua < acc[pat]:
                old = occ[x]
                occ[x] = 1 - old
                delta = 1 - 2 * int(old)
                sum2 += 2 * delta
                d = float(delta)
                for k in range(n_modes):
                    modes[k] += h[k, x] * d
    return sum2


def _splitmix64(z):
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    w = z
    w = ((w ^ (w >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    w = ((w ^ (w >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z, w ^ (w >> 31)

def _xoshiro_state(seed, replica_id):
    """Four SplitMix64 outputs seeded by mixing seed with the replica id."""
    z = (int(seed) ^ ((int(replica_id) * 0x9E3779B97F4A7C15) & _MASK64)) & _MASK64
    words = []
    for _ in range(4):
        z, w = _splitmix64(z)
        words.append(w)
    if not any(words):
        words[0] = 1
    return np.array(words, dtype=np.uint64)


def run_stationary(params, test_functions, schedule, event_budget=DEFAULT_EVENT_BUDGET):
    """Burn in from i.i.d. fair coins, then record observables on a fixed grid.

    Exactness rests on uniformization: the total event rate R is constant, so
    event counts over disjoint intervals are independent Poisson(R dt) and the
    embedded chain needs no per-event clocks. RNG draw order is fixed:
      1. numpy Generator seeded by SeedSequence(seed, spawn_key=(replica_id,)):
         initial occupancy, then the burn-in Poisson count, then the vector of
         per-interval Poisson counts;
      2. the embedded chain consumes an independent xoshiro256++ stream seeded
         by SplitMix64 from (seed, replica_id).
    Mode coordinates are recomputed from scratch after burn-in, every
    MODE_REFRESH_EVENTS events, and at the end; drift beyond 1e-8 relative
    aborts the run.
    """
    r_ex, r_flip = _total_rates(params)
    total_rate = r_ex + r_flip
    span = schedule.burn_in_time + schedule.sample_count * schedule.sample_interval
    projected = total_rate * span
    if projected > event_budget:
        raise ResourceBudgetError(
            f"projected {projected:.3e} events exceeds budget {event_budget:.3e}; "
            f"n = {params.n}, time span = {span:.3g}"
        )

    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=int(schedule.seed),
                               spawn_key=(int(schedule.replica_id),))
    )
    config = initial_configuration(params.n, rng, test_functions)
    burn_events = int(rng.poisson(total_rate * schedule.burn_in_time))
    seg_events = rng.poisson(total_rate * schedule.sample_interval,
                             size=schedule.sample_count).astype(np.int64)
    state = _xoshiro_state(schedule.seed, schedule.replica_id)

    n = params.n
    p_ex = r_ex / total_rate
    n_over_pex = n / p_ex
    acc = _acceptance_table(params.gamma)
    h = config.mode_samples
    n_modes = h.shape[0]
    occ = config.occupancy
    modes = config.mode_coords.copy()
    sum2 = 2 * config.sum_eta - n
    sqrt_n = math.sqrt(n)

    t0 = _time.perf_counter()
    sum2 = _advance(occ, state, burn_events, n, p_ex, n_over_pex, acc, h, modes, sum2)
    # reset any float drift accumulated during burn-in
    modes = h @ (occ.astype(float) - 0.5)
    since_refresh = 0
    max_drift = 0.0

    rows = np.empty((schedule.sample_count, 2 + n_modes))
    for i in range(schedule.sample_count):
        sum2 = _advance(occ, state, int(seg_events[i]), n, p_ex, n_over_pex,
                        acc, h, modes, sum2)
        since_refresh += int(seg_events[i])
        if since_refresh >= MODE_REFRESH_EVENTS or i == schedule.sample_count - 1:
            exact_sum2 = 2 * int(occ.sum()) - n
            if exact_sum2 != sum2:
                raise RuntimeError(
                    f"spin sum drifted: tracked {sum2}, actual {exact_sum2}"
                )
            exact_modes = h @ (occ.astype(float) - 0.5)
            if n_modes:
                scale = np.maximum(1.0, np.abs(exact_modes))
                drift = float(np.max(np.abs(modes - exact_modes) / scale))
                max_drift = max(max_drift, drift)
                if drift > MODE_DRIFT_TOLERANCE:
                    raise RuntimeError(f"mode coordinate drift {drift:.3e}")
                modes = exact_modes
            since_refresh = 0
        rows[i, 0] = schedule.burn_in_time + (i + 1) * schedule.sample_interval
        rows[i, 1] = sum2 / (2.0 * n ** 0.75)
        if n_modes:
            rows[i, 2:] = modes / sqrt_n
    wall = _time.perf_counter() - t0

    config.occupancy = occ
    config.sum_eta = (sum2 + n) // 2
    config.mode_coords = modes
    labels = tuple((hh.kind, hh.k) for hh in test_functions)
    return SampleSeries(
        params=params, schedule=schedule, rows=rows, modes=labels,
        n_events=burn_events + int(seg_events.sum()), wall_time=wall,
        max_mode_drift=max_drift,
    )


def field_projection(config, h_samples):
    """(y, Y) = (n^{-1/2}, n^{-3/4}) scalings of sum_x H(x/n)(eta(x) - 1/2)."""
    h = np.asarray(h_samples, dtype=float)
    n = config.n
    if h.shape != (n,):
        raise ValueError(f"H samples must have shape ({n},), got {h.shape}")
    raw = float(h @ (config.occupancy.astype(float) - 0.5))
    y = raw / math.sqrt(n)
    return y, y / n ** 0.25


def series_to_csv(series, path):
    """Write rows as CSV with header time,Y,mode_1,...,mode_K (17 significant digits)."""
    k = len(series.modes)
    header = "time,Y" + "".join(f",mode_{i}" for i in range(1, k + 1))
    np.savetxt(path, series.rows, delimiter=",", header=header, comments="",
               fmt="%.17g")


def write_sidecar(series, path, extra=None):
    """JSON sidecar: params, schedule, mode labels, event count, wall time."""
    p, s = series.params, series.schedule
    doc = {
        "params": {"n": p.n, "theta": p.theta, "a": p.a, "gamma": p.gamma},
        "schedule": {
            "burn_in_time": s.burn_in_time,
            "sample_interval": s.sample_interval,
            "sample_count": s.sample_count,
            "seed": s.seed,
            "replica_id": s.replica_id,
        },
        "modes": [list(m) for m in series.modes],
        "n_events": series.n_events,
        "wall_time": series.wall_time,
        "max_mode_drift": series.max_mode_drift,
    }
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def series_from_csv(path, params, schedule, modes=()):
    """Read rows written by series_to_csv back into a SampleSeries."""
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return SampleSeries(params=params, schedule=schedule, rows=rows,
                        modes=tuple(modes))
