"""Event-driven simulation kernels for up to three independent walkers.

Every walker runs on one merged exponential clock of rate ``sum(speeds)``;
at each event a walker is picked with probability proportional to its
speed and takes one step of ``P``. Each run reseeds the Mersenne Twister
from its own 32-bit seed, so runs are independent of batching and order.

Outcome codes for races: GOOD, BAD, TIE0 (x = y = z at time 0), CENSORED.
"""
import math

import numpy as np

from ._accel import jit

GOOD = 0
BAD = 1
TIE0 = 2
CENSORED = 3


@jit
def _exp(rate):
    return -math.log(1.0 - np.random.random()) / rate


@jit
def _search(cum, lo, hi, u):
    # first index in [lo, hi) with cum[idx] > u; cum is nondecreasing and ends at 1
    a = lo
    b = hi - 1
    while a < b:
        m = (a + b) // 2
        if cum[m] > u:
            b = m
        else:
            a = m + 1
    return a


@jit
def _step(x, indptr, indices, cum):
    return indices[_search(cum, indptr[x], indptr[x + 1], np.random.random())]


@jit
def _sample_pi(pi_cum):
    return _search(pi_cum, 0, pi_cum.shape[0], np.random.random())


@jit
def _pick(l0, l1, total):
    u = np.random.random() * total
    if u < l0:
        return 0
    if u < l0 + l1:
        return 1
    return 2


@jit
def race_batch(indptr, indices, cum, pi_cum, speeds, starts, from_pi, seeds, t_max,
               out_code, out_tgood, out_tbad, out_events):
    """Good-vs-bad race for each seed. Writes outcome code, first Good/Bad times, event counts."""
    lx = speeds[0]
    ly = speeds[1]
    lz = speeds[2]
    total = lx + ly + lz
    for r in range(seeds.shape[0]):
        np.random.seed(seeds[r])
        if from_pi:
            x = _sample_pi(pi_cum)
            y = _sample_pi(pi_cum)
            z = _sample_pi(pi_cum)
        else:
            x = starts[r, 0]
            y = starts[r, 1]
            z = starts[r, 2]
        out_tgood[r] = np.nan
        out_tbad[r] = np.nan
        events = 0
        if x == y and x == z:
            out_code[r] = TIE0
            out_tgood[r] = 0.0
            out_tbad[r] = 0.0
        elif x == y:
            out_code[r] = GOOD
            out_tgood[r] = 0.0
        elif x == z or y == z:
            out_code[r] = BAD
            out_tbad[r] = 0.0
        else:
            t = 0.0
            while True:
                t += _exp(total)
                if t > t_max:
                    out_code[r] = CENSORED
                    break
                events += 1
                c = _pick(lx, ly, total)
                if c == 0:
                    x = _step(x, indptr, indices, cum)
                elif c == 1:
                    y = _step(y, indptr, indices, cum)
                else:
                    z = _step(z, indptr, indices, cum)
                if x == z or y == z:
                    out_code[r] = BAD
                    out_tbad[r] = t
                    break
                if x == y:
                    out_code[r] = GOOD
                    out_tgood[r] = t
                    break
        out_events[r] = events


@jit
def occupation_batch(indptr, indices, cum, pi_cum, speeds, seeds, t_max,
                     out_accept, out_censored, out_tau, out_mbad, out_occ):
    """Rejection-sample the state at a strict good-first meeting, then follow it.

    From that state (x, x, z) the walkers run until the first return of
    X = Y after the bad time. ``out_occ[r, v]`` is the time spent with
    X = Y = v before the bad time, ``out_tau`` the return time and
    ``out_mbad`` the bad time.
    """
    lx = speeds[0]
    ly = speeds[1]
    lz = speeds[2]
    total = lx + ly + lz
    lxy = lx + ly
    for r in range(seeds.shape[0]):
        np.random.seed(seeds[r])
        out_accept[r] = False
        out_censored[r] = False
        out_tau[r] = np.nan
        out_mbad[r] = np.nan
        x = _sample_pi(pi_cum)
        y = _sample_pi(pi_cum)
        z = _sample_pi(pi_cum)
        if x == z or y == z:
            continue
        t = 0.0
        ok = x == y
        while not ok:
            t += _exp(total)
            if t > t_max:
                out_censored[r] = True
                break
            c = _pick(lx, ly, total)
            if c == 0:
                x = _step(x, indptr, indices, cum)
            elif c == 1:
                y = _step(y, indptr, indices, cum)
            else:
                z = _step(z, indptr, indices, cum)
            if x == z or y == z:
                break
            if x == y:
                ok = True
        if not ok:
            continue
        out_accept[r] = True
        # second phase, clock restarted at the meeting state
        t = 0.0
        while True:
            dt = _exp(total)
            if t + dt > t_max:
                out_censored[r] = True
                break
            if x == y:
                out_occ[r, x] += dt
            t += dt
            c = _pick(lx, ly, total)
            if c == 0:
                x = _step(x, indptr, indices, cum)
            elif c == 1:
                y = _step(y, indptr, indices, cum)
            else:
                z = _step(z, indptr, indices, cum)
            if x == z or y == z:
                break
        if out_censored[r]:
            continue
        out_mbad[r] = t
        if x == y:
            out_tau[r] = t
            continue
        if lxy <= 0.0:
            out_censored[r] = True
            continue
        while True:
            t += _exp(lxy)
            if t > t_max:
                out_censored[r] = True
                break
            if _pick(lx, ly, lxy) == 0:
                x = _step(x, indptr, indices, cum)
            else:
                y = _step(y, indptr, indices, cum)
            if x == y:
                out_tau[r] = t
                break


@jit
def moving_target_batch(indptr, indices, cum, x0, speed, h_times, h_states, seeds, t_max,
                        out_tau, out_censored):
    """First time a speed-``speed`` walker from ``x0`` sits where the trajectory ``h`` is.

    ``h`` is piecewise constant: ``h_states[j]`` on ``[h_times[j], h_times[j+1])``.
    """
    m = h_times.shape[0]
    for r in range(seeds.shape[0]):
        np.random.seed(seeds[r])
        out_censored[r] = False
        x = x0
        j = 0
        t = 0.0
        if x == h_states[0]:
            out_tau[r] = 0.0
            continue
        tx = _exp(speed) if speed > 0 else np.inf
        while True:
            th = h_times[j + 1] if j + 1 < m else np.inf
            if th <= tx:
                t = th
                if t > t_max:
                    out_censored[r] = True
                    out_tau[r] = np.nan
                    break
                j += 1
                if h_states[j] == x:
                    out_tau[r] = t
                    break
            else:
                t = tx
                if t > t_max:
                    out_censored[r] = True
                    out_tau[r] = np.nan
                    break
                x = _step(x, indptr, indices, cum)
                if x == h_states[j]:
                    out_tau[r] = t
                    break
                tx = t + _exp(speed)


@jit
def exponential_samples(rate, seeds, draws_per_seed, out):
    k = 0
    for r in range(seeds.shape[0]):
        np.random.seed(seeds[r])
        for _ in range(draws_per_seed):
            out[k] = _exp(rate)
            k += 1
