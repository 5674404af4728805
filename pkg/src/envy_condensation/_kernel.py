"""Compiled inner loop of the replicator dynamics.

Mirrors ``dynamics.step`` exactly in formula; summation order differs from
the numpy reference, so the two agree to rounding, not bit for bit.
"""

import numba
import numpy as np

INCOME_ENVY = 0
DIVIDE_THE_CAKE = 1
REWARD_ENVY = 2

# strictly below this a strategy entry is flushed to zero; subnormal
# arithmetic is ~30x slower and such entries cannot matter over 1e5 steps
FLUSH_BELOW = np.finfo(np.float64).tiny


@numba.njit(cache=True, nogil=True)
def run_steps(p, prev_rewards, v, kappa, envy, variant, offset, floor, log_guard,
              steps, stop_tol):
    """Advance ``p`` in place by up to ``steps`` synchronous updates.

    ``prev_rewards`` (length M) is read as the lagged reward for the
    reward-envy variant and overwritten with the rewards of every step.

    Returns ``(steps_done, last_delta, bad_agent)``; ``bad_agent == M`` flags a
    nonpositive mean income under envy, other ``bad_agent >= 0``
    flags a row whose fitness-weighted sum vanished (``p`` is then left at
    the state before the failing step).
    """
    M, N = p.shape
    src = p
    dst = np.empty_like(p)
    new_rewards = np.empty(M)
    occ = np.empty(N)
    a0 = np.empty(N)
    a1 = np.empty(N)
    inc = np.empty(M)
    log_ratio = np.empty(M)
    row = np.empty(N)
    last_delta = 0.0
    done = steps
    bad = -1
    flipped = False
    has_envy = False
    for a in range(M):
        if envy[a] != 0.0:
            has_envy = True
    for t in range(steps):
        occ[:] = 0.0
        for a in range(M):
            for i in range(N):
                occ[i] += src[a, i]
        # income of option i for agent a is a0[i] + a1[i] * src[a, i]
        if variant == INCOME_ENVY:
            for i in range(N):
                a0[i] = v[i] * (1.0 - kappa * occ[i])
                a1[i] = kappa * v[i]
        elif variant == REWARD_ENVY:
            for i in range(N):
                a0[i] = v[i] - kappa * occ[i]
                a1[i] = kappa
        total = 0.0
        for a in range(M):
            s = 0.0
            if variant == DIVIDE_THE_CAKE:
                for i in range(N):
                    pi = src[a, i]
                    s += v[i] / (1.0 + occ[i] - pi) * pi
            else:
                for i in range(N):
                    pi = src[a, i]
                    s += (a0[i] + a1[i] * pi) * pi
            inc[a] = s
            total += s
        if variant == REWARD_ENVY:
            total = 0.0
            for a in range(M):
                total += prev_rewards[a]
        ref = total / M
        if not ref > 0.0:
            # the envy log needs a positive population mean
            if has_envy:
                bad = M
                done = t
                break
            ref = 1.0
        if variant == REWARD_ENVY:
            for a in range(M):
                r = prev_rewards[a] / ref
                log_ratio[a] = np.log(r if r > log_guard else log_guard)
        else:
            for a in range(M):
                r = inc[a] / ref
                log_ratio[a] = np.log(r if r > log_guard else log_guard)
        track = stop_tol > 0.0 or t == steps - 1
        delta = 0.0
        for a in range(M):
            g = envy[a] * log_ratio[a]
            s = 0.0
            rew = 0.0
            for i in range(N):
                pi = src[a, i]
                if pi == 0.0:
                    row[i] = 0.0
                    continue
                if variant == DIVIDE_THE_CAKE:
                    ri = v[i] / (1.0 + occ[i] - pi) + g * pi
                else:
                    ri = a0[i] + (a1[i] + g) * pi
                rew += ri * pi
                f = ri + offset
                if f < floor:
                    f = floor
                row[i] = pi * f
                s += row[i]
            if not s > 0.0:
                bad = a
                break
            new_rewards[a] = rew
            for i in range(N):
                x = row[i] / s
                if x < FLUSH_BELOW:
                    x = 0.0
                if track:
                    d = abs(x - src[a, i])
                    if d > delta:
                        delta = d
                dst[a, i] = x
        if bad >= 0:
            done = t
            break
        src, dst = dst, src
        flipped = not flipped
        prev_rewards[:] = new_rewards
        if track:
            last_delta = delta
            if stop_tol > 0.0 and delta < stop_tol:
                done = t + 1
                break
    if flipped:
        p[:, :] = src
    return done, last_delta, bad
