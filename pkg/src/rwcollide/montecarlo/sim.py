"""Monte Carlo estimators built on the event-driven kernels.

Run ``i`` of a batch with master seed ``s`` always uses the 32-bit seed
``run_seeds(s, i)``, so an estimate depends only on (chain, speeds, seed,
n_samples): not on chunk size, worker count or scheduling.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..chain import ChainSpec, SpeedTriple, stationary
from ..collision import TIE_RULES
from ..errors import InconclusiveEstimate, InvalidParameter
from ..hitting import estimate_t_star_hit
from . import kernels
from ._accel import USE_NUMBA

DEFAULT_T_MAX_MULT = 200.0
DEFAULT_CENSOR_CAP = 1e-3
ACCEPTANCE_FLOOR = 0.01
CHUNK = 1 << 14
WINNERS = ("good", "bad", "tie0", "censored")

_M32 = np.uint64(0xFFFFFFFF)


def _fmix32(h: np.ndarray) -> np.ndarray:
    # murmur3 finalizer: a bijection on 32-bit words
    h = h & _M32
    h ^= h >> np.uint64(16)
    h = (h * np.uint64(0x85EBCA6B)) & _M32
    h ^= h >> np.uint64(13)
    h = (h * np.uint64(0xC2B2AE35)) & _M32
    h ^= h >> np.uint64(16)
    return h


def run_seeds(seed: int, start: int, count: int) -> np.ndarray:
    """Per-run 32-bit seeds for runs ``start .. start+count-1``; distinct within a batch."""
    if seed < 0:
        raise InvalidParameter(f"seed must be nonnegative, got {seed}")
    base = _fmix32(np.array([seed & 0xFFFFFFFF], dtype=np.uint64) ^ np.uint64((seed >> 32) * 0x9E3779B1 & 0xFFFFFFFF))
    idx = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _fmix32(base + idx).astype(np.int64)


@dataclass(frozen=True)
class SamplerTables:
    """CSR transition table with per-row cumulative probabilities, plus cumulative pi."""

    indptr: np.ndarray
    indices: np.ndarray
    cum: np.ndarray
    pi_cum: np.ndarray

    @classmethod
    def from_chain(cls, chain: ChainSpec, pi=None) -> "SamplerTables":
        P = chain.matrix
        indptr = P.indptr.astype(np.int64)
        indices = P.indices.astype(np.int64)
        data = P.data.astype(float)
        cum = np.empty_like(data)
        for r in range(chain.n):
            lo, hi = indptr[r], indptr[r + 1]
            c = np.cumsum(data[lo:hi])
            last = lo + int(np.flatnonzero(data[lo:hi] > 0)[-1])
            cum[lo:hi] = c / c[-1]
            cum[last:hi] = 1.0  # guards the search against rounding in the row sum
        if pi is None:
            pi = stationary(chain)
        pc = np.cumsum(pi) / pi.sum()
        pc[np.flatnonzero(pi > 0)[-1]:] = 1.0
        return cls(indptr, indices, cum, pc)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_err: float
    n_samples: int
    seed: int
    censored_fraction: float
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.std_err >= 0 and not np.isnan(self.std_err):
            raise ValueError("std_err must be nonnegative")
        if not 0.0 <= self.censored_fraction <= 1.0:
            raise ValueError("censored_fraction must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std_err": self.std_err,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "censored_fraction": self.censored_fraction,
            **self.extra,
        }


@dataclass(frozen=True)
class TrajectoryOutcome:
    winner: str
    t_good: float | None
    t_bad: float | None
    events: int
    seed: int


@dataclass(frozen=True)
class RaceBatch:
    codes: np.ndarray
    t_good: np.ndarray
    t_bad: np.ndarray
    events: np.ndarray
    seed: int
    t_max: float

    def counts(self) -> dict:
        return {w: int(np.sum(self.codes == i)) for i, w in enumerate(WINNERS)}


def default_t_max(chain: ChainSpec, speeds: SpeedTriple, mult: float = DEFAULT_T_MAX_MULT) -> float:
    """``mult * t*_hit`` in speed-1 time, stretched by the slowest moving walker."""
    slow = min(v for v in speeds.as_array() if v > 0)
    return float(mult * estimate_t_star_hit(chain) / slow)


def _parallel(fn, n_samples: int, workers: int):
    """Split ``range(n_samples)`` into fixed chunks and run ``fn(lo, hi)`` on each."""
    bounds = [(lo, min(lo + CHUNK, n_samples)) for lo in range(0, n_samples, CHUNK)]
    if workers > 1 and USE_NUMBA and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            list(ex.map(lambda b: fn(*b), bounds))
    else:
        # the plain-Python kernels share numpy's global RNG: keep it untouched
        state = None if USE_NUMBA else np.random.get_state()
        try:
            for b in bounds:
                fn(*b)
        finally:
            if state is not None:
                np.random.set_state(state)


def simulate_races(chain: ChainSpec, speeds: SpeedTriple, n_samples: int, seed: int = 0,
                   start=None, t_max: float | None = None, workers: int = 1,
                   tables: SamplerTables | None = None) -> RaceBatch:
    """Run ``n_samples`` independent races, from ``start`` = (x, y, z) or from pi x pi x pi."""
    if n_samples < 1:
        raise InvalidParameter("n_samples must be at least 1")
    if t_max is None:
        t_max = default_t_max(chain, speeds)
    if not t_max > 0:
        raise InvalidParameter(f"t_max must be positive, got {t_max}")
    tab = tables or SamplerTables.from_chain(chain)
    from_pi = start is None
    starts = np.zeros((1, 3), dtype=np.int64)
    if not from_pi:
        s = np.asarray(start, dtype=np.int64).reshape(3)
        if np.any(s < 0) or np.any(s >= chain.n):
            raise InvalidParameter(f"start {tuple(s)} out of range for n={chain.n}")
        starts = np.repeat(s[None, :], n_samples, axis=0)
    sp = speeds.as_array()
    codes = np.empty(n_samples, dtype=np.int64)
    tg = np.empty(n_samples)
    tb = np.empty(n_samples)
    ev = np.empty(n_samples, dtype=np.int64)

    def work(lo, hi):
        kernels.race_batch(tab.indptr, tab.indices, tab.cum, tab.pi_cum, sp,
                           starts if from_pi else starts[lo:hi], from_pi, run_seeds(seed, lo, hi - lo),
                           float(t_max), codes[lo:hi], tg[lo:hi], tb[lo:hi], ev[lo:hi])

    _parallel(work, n_samples, workers)
    return RaceBatch(codes, tg, tb, ev, seed, float(t_max))


def simulate_race(chain: ChainSpec, speeds: SpeedTriple, start=None, seed: int = 0,
                  t_max: float | None = None) -> TrajectoryOutcome:
    """One trajectory; identical to run 0 of :func:`simulate_races` with the same seed."""
    b = simulate_races(chain, speeds, 1, seed=seed, start=start, t_max=t_max)
    tg, tb = float(b.t_good[0]), float(b.t_bad[0])
    return TrajectoryOutcome(WINNERS[b.codes[0]], None if np.isnan(tg) else tg,
                             None if np.isnan(tb) else tb, int(b.events[0]), seed)


def _bernoulli(successes: int, n: int):
    p = successes / n
    return p, float(np.sqrt(p * (1 - p) / n)) if n > 1 else 0.0


def estimate_collision(chain: ChainSpec, speeds: SpeedTriple, tie_rule: str = "strict",
                       n_samples: int = 10_000, seed: int = 0, t_max: float | None = None,
                       t_max_mult: float = DEFAULT_T_MAX_MULT, censor_cap: float = DEFAULT_CENSOR_CAP,
                       start=None, workers: int = 1) -> McEstimate:
    """Empirical good-before-bad frequency with its binomial standard error.

    Censored runs are excluded from the frequency and reported in
    ``censored_fraction``; above ``censor_cap`` the estimate is refused.
    """
    if tie_rule not in TIE_RULES:
        raise InvalidParameter(f"tie_rule must be one of {TIE_RULES}, got {tie_rule!r}")
    if t_max is None:
        t_max = default_t_max(chain, speeds, t_max_mult)
    b = simulate_races(chain, speeds, n_samples, seed, start=start, t_max=t_max, workers=workers)
    c = b.counts()
    cens = c["censored"] / n_samples
    if cens > censor_cap:
        raise InconclusiveEstimate(f"{cens:.2%} of runs censored at t_max={t_max:.4g} (cap {censor_cap:.2%})")
    done = n_samples - c["censored"]
    if done == 0:
        raise InconclusiveEstimate("every run was censored")
    wins = c["good"] + (c["tie0"] if tie_rule == "weak" else 0)
    p, se = _bernoulli(wins, done)
    return McEstimate(p, se, n_samples, seed, cens,
                      {"tie_rule": tie_rule, "t_max": t_max, "counts": c, "n_completed": done})


def sample_path(chain: ChainSpec, start: int, horizon: float, seed: int, speed: float = 1.0):
    """Jump times and states of one continuous-time path on ``[0, horizon]``."""
    rng = np.random.default_rng(seed)
    P = chain.matrix
    times, states = [0.0], [int(start)]
    t, x = 0.0, int(start)
    while True:
        t += rng.exponential(1.0 / speed)
        if t > horizon:
            break
        lo, hi = P.indptr[x], P.indptr[x + 1]
        x = int(P.indices[lo + rng.choice(hi - lo, p=P.data[lo:hi] / P.data[lo:hi].sum())])
        if x != states[-1]:
            times.append(t)
            states.append(x)
    return np.array(times), np.array(states, dtype=np.int64)


def moving_target_check(chain: ChainSpec, x: int, trajectory_seed: int = 0, n_samples: int = 10_000,
                        seed: int = 0, frozen_at: int | None = None, t_max: float | None = None,
                        t_max_mult: float = DEFAULT_T_MAX_MULT, censor_cap: float = DEFAULT_CENSOR_CAP,
                        workers: int = 1) -> McEstimate:
    """Mean first time a speed-1 walker from ``x`` meets a fixed target trajectory ``h``.

    ``h`` is one speed-1 path started from pi and drawn from
    ``trajectory_seed``, or the constant path at ``frozen_at``. The result
    carries the bound ``11 t*_hit`` in ``extra``.
    """
    if n_samples < 1:
        raise InvalidParameter("n_samples must be at least 1")
    t_star = estimate_t_star_hit(chain)
    if t_max is None:
        t_max = t_max_mult * t_star
    tab = SamplerTables.from_chain(chain)
    if frozen_at is not None:
        h_t, h_s = np.zeros(1), np.array([int(frozen_at)], dtype=np.int64)
    else:
        rng = np.random.default_rng(trajectory_seed)
        h0 = int(np.searchsorted(tab.pi_cum, rng.random(), side="right"))
        h_t, h_s = sample_path(chain, h0, t_max, trajectory_seed + 1)
    tau = np.empty(n_samples)
    cens = np.zeros(n_samples, dtype=np.bool_)

    def work(lo, hi):
        kernels.moving_target_batch(tab.indptr, tab.indices, tab.cum, int(x), 1.0, h_t, h_s,
                                    run_seeds(seed, lo, hi - lo), float(t_max), tau[lo:hi], cens[lo:hi])

    _parallel(work, n_samples, workers)
    cf = float(cens.mean())
    if cf > censor_cap:
        raise InconclusiveEstimate(f"{cf:.2%} of runs censored at t_max={t_max:.4g}")
    done = tau[~cens]
    se = float(done.std(ddof=1) / np.sqrt(len(done))) if len(done) > 1 else 0.0
    return McEstimate(float(done.mean()), se, n_samples, seed, cf, {
        "x": int(x), "frozen_at": frozen_at, "trajectory_seed": trajectory_seed,
        "trajectory_jumps": int(len(h_t) - 1), "t_star_hit": t_star, "bound": 11.0 * t_star,
    })


@dataclass(frozen=True)
class OccupationReport:
    n: int
    occupation: np.ndarray  # E_mu[int_0^tau 1(X=Y=v) dt] per v
    occupation_se: np.ndarray
    tau: McEstimate
    residual: np.ndarray  # occupation(v) - E[tau]/n^2
    combined_se: np.ndarray  # SE of the paired per-run differences
    t_integral: McEstimate  # E_mu[int_0^M_bad 1(X=Y) dt]
    t_bound: float  # 22 t*_hit / n
    acceptance_rate: float
    n_accepted: int
    seed: int

    @property
    def max_z(self) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.abs(self.residual) / self.combined_se
        return float(np.nanmax(np.where(self.combined_se > 0, z, np.where(self.residual == 0, 0.0, np.inf))))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "occupation": self.occupation.tolist(),
            "occupation_se": self.occupation_se.tolist(),
            "tau": self.tau.to_dict(),
            "residual": self.residual.tolist(),
            "combined_se": self.combined_se.tolist(),
            "max_z": self.max_z,
            "t_integral": self.t_integral.to_dict(),
            "t_bound": self.t_bound,
            "acceptance_rate": self.acceptance_rate,
            "n_accepted": self.n_accepted,
            "seed": self.seed,
        }


def occupation_check(chain: ChainSpec, speeds: SpeedTriple, n_samples: int = 20_000, seed: int = 0,
                     t_max: float | None = None, t_max_mult: float = DEFAULT_T_MAX_MULT,
                     censor_cap: float = DEFAULT_CENSOR_CAP, acceptance_floor: float = ACCEPTANCE_FLOOR,
                     workers: int = 1) -> OccupationReport:
    """Both sides of the diagonal occupation identity under the good-first meeting law.

    ``n_samples`` proposals are drawn from pi x pi x pi; those whose first
    class entry is a strict good meeting are kept and continued to the
    first X = Y return after the bad time.
    """
    if n_samples < 2:
        raise InvalidParameter("n_samples must be at least 2")
    n = chain.n
    pi = stationary(chain)
    if np.max(np.abs(pi - 1.0 / n)) > 1e-9:
        raise InvalidParameter("occupation identity needs a uniform stationary law")
    t_star = estimate_t_star_hit(chain)
    if t_max is None:
        t_max = default_t_max(chain, speeds, t_max_mult)
    tab = SamplerTables.from_chain(chain, pi)
    sp = speeds.as_array()
    acc = np.zeros(n_samples, dtype=np.bool_)
    cens = np.zeros(n_samples, dtype=np.bool_)
    tau = np.empty(n_samples)
    mbad = np.empty(n_samples)
    occ = np.zeros((n_samples, n))

    def work(lo, hi):
        kernels.occupation_batch(tab.indptr, tab.indices, tab.cum, tab.pi_cum, sp,
                                 run_seeds(seed, lo, hi - lo), float(t_max),
                                 acc[lo:hi], cens[lo:hi], tau[lo:hi], mbad[lo:hi], occ[lo:hi])

    _parallel(work, n_samples, workers)
    cf = float(cens.mean())
    if cf > censor_cap:
        raise InconclusiveEstimate(f"{cf:.2%} of runs censored at t_max={t_max:.4g}")
    keep = acc & ~cens
    rate = float(acc.mean())
    m = int(keep.sum())
    if rate < acceptance_floor or m < 2:
        raise InconclusiveEstimate(f"acceptance rate {rate:.3%} below floor {acceptance_floor:.1%}")
    o, t = occ[keep], tau[keep]
    root = np.sqrt(m)
    d = o - t[:, None] / n**2
    T = o.sum(axis=1)
    tau_est = McEstimate(float(t.mean()), float(t.std(ddof=1) / root), m, seed, cf)
    t_est = McEstimate(float(T.mean()), float(T.std(ddof=1) / root), m, seed, cf)
    return OccupationReport(
        n=n,
        occupation=o.mean(axis=0),
        occupation_se=o.std(axis=0, ddof=1) / root,
        tau=tau_est,
        residual=d.mean(axis=0),
        combined_se=d.std(axis=0, ddof=1) / root,
        t_integral=t_est,
        t_bound=22.0 * t_star / n,
        acceptance_rate=rate,
        n_accepted=m,
        seed=seed,
    )


def exponential_clock_check(rate: float, n_events: int = 100_000, seed: int = 0) -> McEstimate:
    """Sample mean of the kernels' holding times at ``rate`` (expected ``1/rate``)."""
    if not rate > 0:
        raise InvalidParameter("rate must be positive")
    per = 1000
    runs = -(-n_events // per)
    out = np.empty(runs * per)
    state = None if USE_NUMBA else np.random.get_state()
    try:
        kernels.exponential_samples(float(rate), run_seeds(seed, 0, runs), per, out)
    finally:
        if state is not None:
            np.random.set_state(state)
    out = out[:n_events]
    return McEstimate(float(out.mean()), float(out.std(ddof=1) / np.sqrt(n_events)), n_events, seed, 0.0,
                      {"expected": 1.0 / rate})
