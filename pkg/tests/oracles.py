"""Independent oracles the tests check the planners and scheduler against.

Nothing here reuses the library's closed forms: terminal speeds come from
time-domain integration, minimum-time plans are compared against brute-force
profile families on a fine switch-position grid, the decelerate-first
alternative is computed from its own equations, and scheduling slots from an
exhaustive candidate set.
"""

import math

import numpy as np
from numba import njit, prange

from cavcoord.scheduler import HEADWAY_TOL


def terminal_speed_after_distance(v0: float, u: float, d: float) -> float | None:
    """Speed after covering distance d at constant acceleration u, via the time root.

    Returns None when the vehicle stops before covering d (braking case).
    """
    if d == 0.0:
        return v0
    if u == 0.0:
        return v0
    disc = v0 * v0 + 2.0 * u * d
    if disc < 0.0:
        return None
    t = (-v0 + math.sqrt(disc)) / u
    if t < 0.0:
        t = (-v0 - math.sqrt(disc)) / u
    if t < 0.0:
        return None
    return v0 + u * t


def decel_first_alternative(v_s: float, v_e: float, p_s: float, p_e: float, a: float):
    """Decelerate-then-accelerate switching state and travel time for symmetric limits +-a.

    Returns (p_c', v_c', t_e') or None when that profile does not exist
    (the vehicle would have to stop before switching).
    """
    rad = (v_s * v_s + v_e * v_e - 2.0 * a * (p_e - p_s)) / 2.0
    if rad <= 0.0:
        return None
    p_c = (-(v_e * v_e - v_s * v_s) + 2.0 * a * (p_s + p_e)) / (4.0 * a)
    v_c = math.sqrt(rad)
    t_e = (v_s + v_e - 2.0 * v_c) / a
    return p_c, v_c, t_e


@njit(cache=True)
def _family_min_one(v_s, v_e, dp, u_min, u_max, v_lo, v_hi, dx):
    """Min traversal time over admissible switch-grid profiles reaching (dp, v_e) exactly.

    Two families: a bang first arc to a grid switch position followed by the
    exact constant control that meets the endpoint, and three all-bang arcs
    whose middle-arc length is fixed by the endpoint condition.
    """
    best = np.inf
    ve2 = v_e * v_e
    vs2 = v_s * v_s

    for s in range(2):
        u1 = u_max if s == 0 else u_min
        n = int(dp / dx)
        for i in range(1, n):
            x = i * dx
            v1sq = vs2 + 2.0 * u1 * x
            if v1sq <= 0.0:
                continue
            v1 = math.sqrt(v1sq)
            if v1 < v_lo or v1 > v_hi:
                continue
            rem = dp - x
            u2 = (ve2 - v1sq) / (2.0 * rem)
            if u2 < u_min or u2 > u_max:
                continue
            if abs(u2) > 1e-12:
                t2 = (v_e - v1) / u2
            else:
                t2 = rem / v1
            if t2 < 0.0:
                continue
            t = (v1 - v_s) / u1 + t2
            if t < best:
                best = t

    for s in range(2):
        if s == 0:
            u1, u2b, u3 = u_max, u_min, u_max
        else:
            u1, u2b, u3 = u_min, u_max, u_min
        g = (ve2 - vs2 - 2.0 * u1 * dp) / (2.0 * (u2b - u1))
        if g <= 0.0 or g >= dp:
            continue
        n = int((dp - g) / dx)
        for i in range(1, n):
            x1 = i * dx
            v1sq = vs2 + 2.0 * u1 * x1
            if v1sq <= 0.0:
                continue
            v1 = math.sqrt(v1sq)
            if v1 < v_lo or v1 > v_hi:
                continue
            v2sq = v1sq + 2.0 * u2b * g
            if v2sq <= 0.0:
                continue
            v2 = math.sqrt(v2sq)
            if v2 < v_lo or v2 > v_hi:
                continue
            t = (v1 - v_s) / u1 + (v2 - v1) / u2b + (v_e - v2) / u3
            if t < best:
                best = t
    return best


@njit(parallel=True, cache=True)
def family_min_batch(v_s, v_e, dp, u_min, u_max, v_lo, v_hi, dx):
    out = np.empty(v_s.size)
    for k in prange(v_s.size):
        out[k] = _family_min_one(v_s[k], v_e[k], dp[k], u_min[k], u_max[k], v_lo[k], v_hi[k], dx)
    return out


def random_interior_instances(rng: np.random.Generator, n: int):
    """Random feasible zone boundaries with per-instance limits, strictly interior.

    Spans traversal lengths up to 400 m; the speed cap is set above the fastest
    reachable speed so the switching state never saturates (cruise plans are
    covered by targeted tests).
    """
    dp = rng.uniform(10.0, 400.0, n)
    u_max = rng.uniform(1.0, 4.0, n)
    u_min = -rng.uniform(1.0, 4.0, n)
    v_min = rng.uniform(0.3, 1.0, n)
    v_s = rng.uniform(2.0, 30.0, n)
    hi = np.sqrt(v_s**2 + 2.0 * u_max * dp)
    lo_rad = v_s**2 + 2.0 * u_min * dp
    lo = np.where(lo_rad > 0.0, np.sqrt(np.abs(lo_rad)), 0.0)
    floor = np.maximum(v_min, lo)
    frac = rng.uniform(0.05, 0.95, n)
    v_e = floor + frac * (hi - floor)
    v_max = hi * 1.05
    return dp, v_s, v_e, u_min, u_max, v_min, v_max


def candidate_slot_optimum(release: float, deadline: float, occupied, headway: float):
    """Exhaustive-candidate optimum for one job against fixed committed times.

    The optimum provably lies in {release} U {T_j + headway}; feasibility uses
    the same float-noise band as the implementation. Returns None when no
    candidate fits the deadline.
    """
    candidates = [release] + [t + headway for t in occupied]
    feasible = [
        c
        for c in candidates
        if c >= release and c <= deadline and all(abs(c - t) >= headway - HEADWAY_TOL for t in occupied)
    ]
    return min(feasible) if feasible else None
