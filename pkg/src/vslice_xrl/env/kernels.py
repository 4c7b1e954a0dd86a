"""Batched hot kernels for the environment step.

Every kernel exists twice: a numba ``@njit`` loop version and a vectorized numpy
version. ``vslice_xrl._accel.USE_NUMBA`` picks which one the module-level names
point at; both stay importable so they can be cross-checked and benchmarked.

Array conventions (B = batch of environment copies, N vehicles, M gNBs):

* mobility: ``axis`` (0 = travelling along x, 1 = along y), ``lane`` (fixed
  coordinate of the road), ``along`` (coordinate along the road), ``heading``
  (+1/-1) and ``turn`` (pending choice at the next intersection: 0 straight,
  1 left, 2 right); all shaped (B, N)
* actions: ``q`` and ``b`` shaped (B, N, M) with entries in [0, 1]
"""
import numpy as np

from .._accel import USE_NUMBA, njit

N_TURNS = 3
N_ENTRIES = 8  # 4 roads x 2 ends


# ---------------------------------------------------------------- projection

def project_numpy(q, b, active, capacity):
    B, N, M = q.shape
    assoc = np.argmax(q, axis=2).astype(np.int64)
    frac = np.take_along_axis(b, assoc[..., None], axis=2)[..., 0]
    req = np.floor(frac * capacity[assoc] + 0.5).astype(np.int64)
    req = np.where(active, req, 0)
    assoc = np.where(active, assoc, -1)
    onehot = assoc[..., None] == np.arange(M)
    totals = np.sum(np.where(onehot, req[..., None], 0), axis=1)  # (B, M)
    safe = np.where(assoc >= 0, assoc, 0)
    tot = np.take_along_axis(totals, safe, axis=1)
    cap = capacity[safe]
    granted = np.where(tot > cap, (req * cap) // np.maximum(tot, 1), req)
    prbs = np.where(onehot, granted[..., None], 0).astype(np.int64)
    return assoc, prbs


@njit
def project_loop(q, b, active, capacity):
    B, N, M = q.shape
    assoc = np.full((B, N), -1, dtype=np.int64)
    prbs = np.zeros((B, N, M), dtype=np.int64)
    req = np.zeros(N, dtype=np.int64)
    totals = np.zeros(M, dtype=np.int64)
    for k in range(B):
        totals[:] = 0
        for i in range(N):
            req[i] = 0
            if not active[k, i]:
                continue
            best = 0
            for m in range(1, M):
                if q[k, i, m] > q[k, i, best]:
                    best = m
            assoc[k, i] = best
            req[i] = np.int64(np.floor(b[k, i, best] * capacity[best] + 0.5))
            totals[best] += req[i]
        for i in range(N):
            m = assoc[k, i]
            if m < 0:
                continue
            if totals[m] > capacity[m]:
                prbs[k, i, m] = (req[i] * capacity[m]) // totals[m]
            else:
                prbs[k, i, m] = req[i]
    return assoc, prbs


# ---------------------------------------------------------------- link metrics

def links_numpy(gains, assoc, prbs, demand, s_urllc, s_embb, active, params):
    (p_tx, noise, bw, fixed, t_th, r_th, cap, w_u, w_e) = params
    safe = np.where(assoc >= 0, assoc, 0)[..., None]
    g = np.take_along_axis(gains, safe, axis=2)[..., 0]
    interf = p_tx * (gains.sum(axis=2) - g)
    n_prb = np.take_along_axis(prbs, safe, axis=2)[..., 0].astype(np.float64)
    rate = n_prb * bw * np.log2(1.0 + p_tx * g / (noise + interf))
    rate = np.where(active, rate, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        tx = np.where(demand > 0, demand / rate, 0.0)
    dly = np.where((rate <= 0) & (demand > 0), np.inf, tx + fixed)
    pen_u = np.minimum(np.maximum(0.0, dly - t_th) / t_th, cap)
    pen_e = np.minimum(np.maximum(0.0, r_th - rate) / r_th, cap)
    pen_u = np.where(active & s_urllc, pen_u, 0.0)
    pen_e = np.where(active & s_embb, pen_e, 0.0)
    # accumulate vehicle by vehicle, in the same order as the loop kernel
    total = np.zeros(gains.shape[0])
    for i in range(gains.shape[1]):
        total += w_u * pen_u[:, i] + w_e * pen_e[:, i]
    reward = -total
    return rate, dly, pen_u, pen_e, reward


@njit
def links_loop(gains, assoc, prbs, demand, s_urllc, s_embb, active, params):
    p_tx, noise, bw, fixed, t_th, r_th, cap, w_u, w_e = params
    B, N, M = gains.shape
    rate = np.zeros((B, N))
    dly = np.zeros((B, N))
    pen_u = np.zeros((B, N))
    pen_e = np.zeros((B, N))
    reward = np.zeros(B)
    for k in range(B):
        total = 0.0
        for i in range(N):
            m = assoc[k, i]
            if m < 0 or not active[k, i]:
                dly[k, i] = np.inf if demand[k, i] > 0 else fixed
                continue
            gsum = 0.0
            for j in range(M):
                gsum += gains[k, i, j]
            g = gains[k, i, m]
            interf = p_tx * (gsum - g)
            r = prbs[k, i, m] * bw * np.log2(1.0 + p_tx * g / (noise + interf))
            rate[k, i] = r
            if demand[k, i] > 0:
                d = np.inf if r <= 0 else demand[k, i] / r + fixed
            else:
                d = fixed
            dly[k, i] = d
            if s_urllc[k, i]:
                pu = max(0.0, d - t_th) / t_th
                pen_u[k, i] = min(pu, cap)
            if s_embb[k, i]:
                pe = max(0.0, r_th - r) / r_th
                pen_e[k, i] = min(pe, cap)
            total += w_u * pen_u[k, i] + w_e * pen_e[k, i]
        reward[k] = -total
    return rate, dly, pen_u, pen_e, reward


# ---------------------------------------------------------------- mobility

def _turn(axis, heading, turn):
    """New (axis, heading) after a left (1) or right (2) turn."""
    new_axis = 1 - axis
    left = turn == 1
    new_heading = np.where(axis == 0, np.where(left, heading, -heading), np.where(left, -heading, heading))
    return new_axis, new_heading


def advance_numpy(axis, lane, along, heading, turn, dist, cross):
    """Deterministic move by ``dist``; returns new arrays plus a crossed-intersection mask."""
    new = along + heading * dist
    crossed = np.zeros(along.shape, dtype=bool)
    c_hit = np.zeros(along.shape)
    for c in cross:
        hit = np.where(heading > 0, (along < c) & (c <= new), (new <= c) & (c < along))
        hit &= ~crossed
        c_hit = np.where(hit, c, c_hit)
        crossed |= hit
    turning = crossed & (turn != 0)
    rem = dist - np.abs(c_hit - along)
    t_axis, t_heading = _turn(axis, heading, turn)
    out_axis = np.where(turning, t_axis, axis)
    out_heading = np.where(turning, t_heading, heading)
    out_along = np.where(turning, lane + t_heading * rem, new)
    out_lane = np.where(turning, c_hit, lane)
    return out_axis, out_lane, out_along, out_heading, crossed


def move_numpy(axis, lane, along, heading, turn, u_turn, u_spawn, dist, area, cross):
    """Advance one slot in place; crossings redraw the pending turn, exits re-spawn."""
    n_axis, n_lane, n_along, n_heading, crossed = advance_numpy(axis, lane, along, heading, turn, dist, cross)
    fresh_turn = np.minimum((u_turn * N_TURNS).astype(np.int64), N_TURNS - 1)
    exited = (n_along < 0.0) | (n_along > area)
    entry = np.minimum((u_spawn * N_ENTRIES).astype(np.int64), N_ENTRIES - 1)
    road = entry // 2
    from_far_end = (entry % 2) == 1
    axis[...] = np.where(exited, road // 2, n_axis)
    lane[...] = np.where(exited, np.asarray(cross)[road % 2], n_lane)
    along[...] = np.where(exited, np.where(from_far_end, area, 0.0), n_along)
    heading[...] = np.where(exited, np.where(from_far_end, -1, 1), n_heading)
    turn[...] = np.where(crossed | exited, fresh_turn, turn)
    return exited


@njit
def _advance_one(axis, lane, along, heading, turn, dist, cross):
    new = along + heading * dist
    for j in range(cross.shape[0]):
        c = cross[j]
        if (heading > 0 and along < c and c <= new) or (heading < 0 and new <= c and c < along):
            if turn == 0:
                return axis, lane, new, heading, True
            rem = dist - abs(c - along)
            left = turn == 1
            if axis == 0:
                nh = heading if left else -heading
            else:
                nh = -heading if left else heading
            return 1 - axis, c, lane + nh * rem, nh, True
    return axis, lane, new, heading, False


@njit
def move_loop(axis, lane, along, heading, turn, u_turn, u_spawn, dist, area, cross):
    B, N = axis.shape
    exited = np.zeros((B, N), dtype=np.bool_)
    for k in range(B):
        for i in range(N):
            a, l, s, h, crossed = _advance_one(axis[k, i], lane[k, i], along[k, i], heading[k, i],
                                               turn[k, i], dist, cross)
            fresh = min(np.int64(u_turn[k, i] * N_TURNS), N_TURNS - 1)
            if s < 0.0 or s > area:
                entry = min(np.int64(u_spawn[k, i] * N_ENTRIES), N_ENTRIES - 1)
                road = entry // 2
                a = road // 2
                l = cross[road % 2]
                if entry % 2 == 1:
                    s = area
                    h = -1
                else:
                    s = 0.0
                    h = 1
                exited[k, i] = True
                turn[k, i] = fresh
            elif crossed:
                turn[k, i] = fresh
            axis[k, i] = a
            lane[k, i] = l
            along[k, i] = s
            heading[k, i] = h
    return exited


if USE_NUMBA:
    project = project_loop
    links = links_loop
    move = move_loop
else:
    project = project_numpy
    links = links_numpy
    move = move_numpy
