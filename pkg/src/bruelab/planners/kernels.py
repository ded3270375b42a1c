"""Compiled MCTS search over a :class:`TabularModel`.

Mirrors ``mcts.PythonSearch`` step for step (same selection rules, same draw
order, same floating-point update formulas) so the two routes agree exactly.
Nodes live in flat arrays; an open-addressing hash maps node keys to ids:
``state * (H + 1) + depth`` in dag mode, ``(parent * K + a) * S + state`` in
tree mode.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..rng import nb_choice_index, nb_random

ALG_UCT, ALG_GCT, ALG_BRUE = 0, 1, 2
ERR_OK, ERR_NODES = 0, 1
_CEIL_SLACK = 1e-9


@njit(cache=True)
def _hash_slot(key, mask):
    z = np.uint64(key) * np.uint64(0x9E3779B97F4A7C15)
    z = z ^ (z >> np.uint64(29))
    return np.int64(z & np.uint64(mask))


@njit(cache=True)
def _lookup(hkeys, hvals, key):
    mask = hkeys.shape[0] - 1
    i = _hash_slot(key, mask)
    while hkeys[i] != -1:
        if hkeys[i] == key:
            return hvals[i]
        i = (i + 1) & mask
    return -1


@njit(cache=True)
def _insert(hkeys, hvals, key, val):
    mask = hkeys.shape[0] - 1
    i = _hash_slot(key, mask)
    while hkeys[i] != -1:
        i = (i + 1) & mask
    hkeys[i] = key
    hvals[i] = val


@njit(cache=True)
def _sample(n_out, next_state, prob, reward, s, a, st):
    no = n_out[s, a]
    if no == 1:
        return next_state[s, a, 0], reward[s, a, 0]
    u = nb_random(st)
    acc = 0.0
    for j in range(no):
        acc += prob[s, a, j]
        if u < acc:
            return next_state[s, a, j], reward[s, a, j]
    return next_state[s, a, no - 1], reward[s, a, no - 1]


@njit(cache=True)
def _greedy(nq, nn, node, na, sgn, st, buf):
    # uniform over visited maximisers of sgn * q; all-unvisited -> uniform
    cnt = 0
    best = -np.inf
    for a in range(na):
        if nn[node, a] > 0:
            v = sgn * nq[node, a]
            if cnt == 0 or v > best:
                best = v
                cnt = 0
                buf[cnt] = a
                cnt = 1
            elif v == best:
                buf[cnt] = a
                cnt += 1
    if cnt == 0:
        return nb_choice_index(st, na)
    return buf[nb_choice_index(st, cnt)]


@njit(cache=True)
def _ucb(nq, nn, ntot, node, na, sgn, c_auto, c_fixed, st, buf, scores):
    cnt = 0
    for a in range(na):
        if nn[node, a] == 0:
            buf[cnt] = a
            cnt += 1
    if cnt > 0:
        return buf[nb_choice_index(st, cnt)]
    if c_auto:
        best = -np.inf
        for a in range(na):
            v = sgn * nq[node, a]
            if v > best:
                best = v
        coef = abs(best)
    else:
        coef = c_fixed
    log_total = np.log(np.float64(ntot[node]))
    top = -np.inf
    for a in range(na):
        sc = sgn * nq[node, a] + coef * np.sqrt(log_total / nn[node, a])
        scores[a] = sc
        if sc > top:
            top = sc
    for a in range(na):
        if scores[a] == top:
            buf[cnt] = a
            cnt += 1
    return buf[nb_choice_index(st, cnt)]


@njit(cache=True)
def _window_size(alpha, n):
    m = np.int64(np.ceil(alpha * n - _CEIL_SLACK))
    if m < 1:
        m = 1
    if m > n:
        m = n
    return m


@njit(cache=True)
def search_kernel(n_actions, n_out, next_state, prob, reward, sign,
                  root, H, alg, c_auto, c_fixed, eps, alpha, windowed, permissive,
                  tree_keys, cap, checkpoints, snap_q, snap_n, st):
    """Run ``checkpoints[-1]`` iterations; returns (error code, nodes used)."""
    S = n_actions.shape[0]
    K = next_state.shape[1]
    budget = checkpoints[checkpoints.shape[0] - 1]

    node_state = np.empty(cap, np.int64)
    nq = np.zeros((cap, K))
    nn = np.zeros((cap, K), np.int64)
    ntot = np.zeros(cap, np.int64)
    T = 16
    while T < 2 * cap:
        T *= 2
    hkeys = np.full(T, -1, np.int64)
    hvals = np.empty(T, np.int64)

    # BRUE(alpha) reward lists, stored as prefix sums in a growable pool
    cell_start = np.full((cap if windowed else 1, K), -1, np.int64)
    cell_cap = np.zeros((cap if windowed else 1, K), np.int64)
    pool = np.empty(1024 if windowed else 1)
    pool_top = 0

    node_state[0] = root
    n_nodes = 1
    if not tree_keys:
        _insert(hkeys, hvals, root * (H + 1), 0)

    traj_a = np.empty(H, np.int64)
    traj_r = np.empty(H)
    traj_node = np.full(H + 1, -1, np.int64)
    rtg = np.empty(H)
    flags = np.zeros(H, np.bool_)
    buf = np.empty(K, np.int64)
    scores = np.empty(K)
    ck = 0

    for it in range(1, budget + 1):
        if alg == ALG_BRUE:
            sigma = H - ((it - 1) % H)
        else:
            sigma = 0
        s = root
        node = 0
        traj_node[0] = 0
        depth = 0
        expanded = False
        while depth < H and n_actions[s] > 0:
            na = n_actions[s]
            if alg == ALG_BRUE:
                if depth < sigma:
                    a = nb_choice_index(st, na)
                elif node >= 0:
                    a = _greedy(nq, nn, node, na, sign[s], st, buf)
                else:
                    a = nb_choice_index(st, na)
            elif node >= 0:
                if alg == ALG_GCT and depth == 0:
                    coin = nb_random(st)
                    if coin < eps:
                        a = nb_choice_index(st, na)
                    else:
                        a = _greedy(nq, nn, node, na, sign[s], st, buf)
                else:
                    a = _ucb(nq, nn, ntot, node, na, sign[s], c_auto, c_fixed, st, buf, scores)
            else:
                a = nb_choice_index(st, na)
            s2, r = _sample(n_out, next_state, prob, reward, s, a, st)
            traj_a[depth] = a
            traj_r[depth] = r
            depth += 1
            nxt = -1
            if depth < H and n_actions[s2] > 0 and (node >= 0 or not tree_keys):
                if tree_keys:
                    key = (node * K + a) * S + s2
                else:
                    key = s2 * (H + 1) + depth
                nxt = _lookup(hkeys, hvals, key)
                if alg == ALG_BRUE:
                    create = depth <= sigma - 1
                else:
                    create = not expanded
                if nxt < 0 and create:
                    if n_nodes >= cap:
                        return ERR_NODES, n_nodes
                    nxt = n_nodes
                    n_nodes += 1
                    node_state[nxt] = s2
                    _insert(hkeys, hvals, key, nxt)
                    expanded = True
            traj_node[depth] = nxt
            node = nxt
            s = s2
        k = depth

        if alg != ALG_BRUE:
            ret = 0.0
            for i in range(k - 1, -1, -1):
                ret = traj_r[i] + ret
                nd = traj_node[i]
                if nd >= 0:
                    a = traj_a[i]
                    nn[nd, a] += 1
                    ntot[nd] += 1
                    nq[nd, a] += (ret - nq[nd, a]) / nn[nd, a]
        elif k >= sigma:
            ret = 0.0
            for i in range(k - 1, -1, -1):
                ret = traj_r[i] + ret
                rtg[i] = ret
            # permissive qualification is judged before any update
            for i in range(sigma - 1):
                flags[i] = False
                if permissive:
                    nd = traj_node[i]
                    na = n_actions[node_state[nd]]
                    sgn = sign[node_state[nd]]
                    any_fresh = False
                    best = -np.inf
                    for b in range(na):
                        if nn[nd, b] == 0:
                            any_fresh = True
                        elif sgn * nq[nd, b] > best:
                            best = sgn * nq[nd, b]
                    a = traj_a[i]
                    flags[i] = any_fresh or sgn * nq[nd, a] == best
            for j in range(sigma):
                # j == 0 is the switching cell, then ancestors in depth order
                if j == 0:
                    i = sigma - 1
                else:
                    i = j - 1
                    if not flags[i]:
                        continue
                nd = traj_node[i]
                a = traj_a[i]
                ret = rtg[i]
                nn[nd, a] += 1
                ntot[nd] += 1
                n = nn[nd, a]
                if windowed:
                    if cell_start[nd, a] < 0 or n + 1 > cell_cap[nd, a]:
                        new_cap = 8 if cell_start[nd, a] < 0 else 2 * cell_cap[nd, a]
                        while pool_top + new_cap > pool.shape[0]:
                            grown = np.empty(2 * pool.shape[0])
                            grown[:pool_top] = pool[:pool_top]
                            pool = grown
                        if cell_start[nd, a] < 0:
                            pool[pool_top] = 0.0
                        else:
                            old = cell_start[nd, a]
                            for t in range(n):
                                pool[pool_top + t] = pool[old + t]
                        cell_start[nd, a] = pool_top
                        cell_cap[nd, a] = new_cap
                        pool_top += new_cap
                    base = cell_start[nd, a]
                    pool[base + n] = pool[base + n - 1] + ret
                    m = _window_size(alpha, n)
                    if m == n:
                        nq[nd, a] += (ret - nq[nd, a]) / n
                    else:
                        nq[nd, a] = (pool[base + n] - pool[base + n - m]) / m
                else:
                    nq[nd, a] += (ret - nq[nd, a]) / n

        while ck < checkpoints.shape[0] and checkpoints[ck] == it:
            for a in range(K):
                snap_q[ck, a] = nq[0, a]
                snap_n[ck, a] = nn[0, a]
            ck += 1
    return ERR_OK, n_nodes
