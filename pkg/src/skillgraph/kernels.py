"""Hot numeric kernels with twin builds: Numba ``@njit`` and pure NumPy.

Everything here works on plain int64/float64 arrays; graph/flow objects are
flattened by their owners before calling in. The four kernels:

* ``power_iterate``     -- teleporting random-walk stationary distribution
* ``partition_cost``    -- two-level codebook description length of a labeling
* ``local_move_pass``   -- one greedy sweep of single-unit community moves
* ``propagate_step``    -- one meta-path hop (masked weighted scatter-add)

``BACKENDS`` keeps both builds so the benchmark can compare them in one
process; the module-level names are bound to the active backend.
"""
from __future__ import annotations

import math

import numpy as np

from ._backend import NUMBA_AVAILABLE, USE_NUMBA, jit_compile


def _plogp(x):
    return x * math.log2(x) if x > 0.0 else 0.0


# ---------------------------------------------------------------------------
# pure-NumPy builds
# ---------------------------------------------------------------------------

def _power_iterate_numpy(esrc, edst, eweight, dangling, n, teleport, tol, max_iter):
    p = np.full(n, 1.0 / n)
    resid = np.inf
    uniform = 1.0 / n
    for it in range(max_iter):
        dangling_mass = float(p[dangling].sum())
        pulled = np.bincount(edst, weights=eweight * p[esrc], minlength=n)
        p_next = teleport * uniform + (1.0 - teleport) * (pulled + dangling_mass * uniform)
        resid = float(np.abs(p_next - p).sum())
        p = p_next
        if resid <= tol:
            return p, it + 1, resid
    return p, max_iter, resid


def _partition_cost_numpy(labels, visit, tele, size, esrc, edst, eflow,
                          n_orig, node_plogp_sum):
    k = int(labels.max()) + 1 if labels.size else 0
    if k == 0:
        return 0.0
    mod_visit = np.bincount(labels, weights=visit, minlength=k)
    mod_tele = np.bincount(labels, weights=tele, minlength=k)
    mod_size = np.bincount(labels, weights=size, minlength=k)
    lsrc = labels[esrc]
    cross = lsrc != labels[edst]
    mod_cross = np.bincount(lsrc[cross], weights=eflow[cross], minlength=k)
    q = mod_tele * (n_orig - mod_size) / n_orig + mod_cross
    q_sum = float(q.sum())
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp_q = np.where(q > 0.0, q * np.log2(np.where(q > 0.0, q, 1.0)), 0.0)
        p_mod = q + mod_visit
        plogp_p = np.where(p_mod > 0.0, p_mod * np.log2(np.where(p_mod > 0.0, p_mod, 1.0)), 0.0)
    return (_plogp(q_sum) - 2.0 * float(plogp_q.sum())
            + float(plogp_p.sum()) - node_plogp_sum)


def _propagate_step_numpy(scores, esrc, edst, eweight, mask, n):
    contrib = eweight * scores[esrc]
    out = np.bincount(edst, weights=contrib, minlength=n)
    return out * mask


# ---------------------------------------------------------------------------
# loop builds (same source compiles under numba; runs as-is as the fallback
# for the sequential move sweep, which has no vectorizable shape)
# ---------------------------------------------------------------------------

def _make_power_iterate(plogp_unused):
    def power_iterate(esrc, edst, eweight, dangling, n, teleport, tol, max_iter):
        p = np.full(n, 1.0 / n)
        p_next = np.zeros(n)
        resid = np.inf
        uniform = 1.0 / n
        it_done = 0
        for it in range(max_iter):
            dangling_mass = 0.0
            for v in range(n):
                if dangling[v]:
                    dangling_mass += p[v]
            for v in range(n):
                p_next[v] = 0.0
            for e in range(esrc.shape[0]):
                p_next[edst[e]] += eweight[e] * p[esrc[e]]
            resid = 0.0
            for v in range(n):
                val = teleport * uniform + (1.0 - teleport) * (p_next[v] + dangling_mass * uniform)
                resid += abs(val - p[v])
                p_next[v] = val
            for v in range(n):
                p[v] = p_next[v]
            it_done = it + 1
            if resid <= tol:
                break
        return p, it_done, resid

    return power_iterate


def _make_partition_cost(plogp):
    def partition_cost(labels, visit, tele, size, esrc, edst, eflow,
                       n_orig, node_plogp_sum):
        n = labels.shape[0]
        if n == 0:
            return 0.0
        k = 0
        for u in range(n):
            if labels[u] + 1 > k:
                k = labels[u] + 1
        mod_visit = np.zeros(k)
        mod_tele = np.zeros(k)
        mod_size = np.zeros(k)
        mod_cross = np.zeros(k)
        for u in range(n):
            m = labels[u]
            mod_visit[m] += visit[u]
            mod_tele[m] += tele[u]
            mod_size[m] += size[u]
        for e in range(esrc.shape[0]):
            ms = labels[esrc[e]]
            if ms != labels[edst[e]]:
                mod_cross[ms] += eflow[e]
        q_sum = 0.0
        acc = 0.0
        for m in range(k):
            q = mod_tele[m] * (n_orig - mod_size[m]) / n_orig + mod_cross[m]
            q_sum += q
            acc += plogp(q + mod_visit[m]) - 2.0 * plogp(q)
        return plogp(q_sum) + acc - node_plogp_sum

    return partition_cost


def _make_local_move_pass(plogp):
    def local_move_pass(order, labels, visit, tele, size, sout,
                        out_ptr, out_idx, out_flow, in_ptr, in_idx, in_flow,
                        mod_visit, mod_tele, mod_size, mod_cross, mod_exit,
                        exit_sum, n_orig, eps):
        n_units = labels.shape[0]
        conn_out = np.zeros(n_units)
        conn_in = np.zeros(n_units)
        mark = np.full(n_units, -1, dtype=np.int64)
        cand = np.zeros(n_units, dtype=np.int64)
        moves = 0
        delta_sum = 0.0
        for oi in range(order.shape[0]):
            u = order[oi]
            a = labels[u]
            ncand = 0
            for e in range(out_ptr[u], out_ptr[u + 1]):
                v = out_idx[e]
                if v == u:
                    continue
                m = labels[v]
                if mark[m] != u:
                    mark[m] = u
                    conn_out[m] = 0.0
                    conn_in[m] = 0.0
                    cand[ncand] = m
                    ncand += 1
                conn_out[m] += out_flow[e]
            for e in range(in_ptr[u], in_ptr[u + 1]):
                v = in_idx[e]
                if v == u:
                    continue
                m = labels[v]
                if mark[m] != u:
                    mark[m] = u
                    conn_out[m] = 0.0
                    conn_in[m] = 0.0
                    cand[ncand] = m
                    ncand += 1
                conn_in[m] += in_flow[e]
            if ncand == 0:
                continue
            # candidate modules scanned in ascending index order so that
            # equal gains resolve to the lowest module id
            for i in range(1, ncand):
                key = cand[i]
                j = i - 1
                while j >= 0 and cand[j] > key:
                    cand[j + 1] = cand[j]
                    j -= 1
                cand[j + 1] = key
            ca_out = conn_out[a] if mark[a] == u else 0.0
            ca_in = conn_in[a] if mark[a] == u else 0.0
            t_a = mod_tele[a] - tele[u]
            s_a = mod_size[a] - size[u]
            v_a = mod_visit[a] - visit[u]
            x_a = mod_cross[a] - (sout[u] - ca_out) + ca_in
            q_a_new = t_a * (n_orig - s_a) / n_orig + x_a
            q_a_old = mod_exit[a]
            base_a = (plogp(q_a_new) - plogp(q_a_old)) * -2.0 + (
                plogp(q_a_new + v_a) - plogp(q_a_old + mod_visit[a]))
            best_dl = -eps
            best = -1
            best_q_b = 0.0
            best_x_b = 0.0
            best_exit = 0.0
            for ci in range(ncand):
                b = cand[ci]
                if b == a:
                    continue
                q_b_old = mod_exit[b]
                t_b = mod_tele[b] + tele[u]
                s_b = mod_size[b] + size[u]
                v_b = mod_visit[b] + visit[u]
                x_b = mod_cross[b] - conn_in[b] + (sout[u] - conn_out[b])
                q_b_new = t_b * (n_orig - s_b) / n_orig + x_b
                exit_new = exit_sum - q_a_old - q_b_old + q_a_new + q_b_new
                dl = (plogp(exit_new) - plogp(exit_sum)
                      - 2.0 * (plogp(q_b_new) - plogp(q_b_old))
                      + (plogp(q_b_new + v_b) - plogp(q_b_old + mod_visit[b]))
                      + base_a)
                if dl < best_dl:
                    best_dl = dl
                    best = b
                    best_q_b = q_b_new
                    best_x_b = x_b
                    best_exit = exit_new
            if best >= 0:
                labels[u] = best
                mod_tele[a] = t_a
                mod_size[a] = s_a
                mod_visit[a] = v_a
                mod_cross[a] = x_a
                mod_exit[a] = q_a_new
                mod_tele[best] += tele[u]
                mod_size[best] += size[u]
                mod_visit[best] += visit[u]
                mod_cross[best] = best_x_b
                mod_exit[best] = best_q_b
                exit_sum = best_exit
                moves += 1
                delta_sum += best_dl
        return moves, delta_sum, exit_sum

    return local_move_pass


def _make_propagate_step(plogp_unused):
    def propagate_step(scores, esrc, edst, eweight, mask, n):
        out = np.zeros(n)
        for e in range(esrc.shape[0]):
            s = scores[esrc[e]]
            if s != 0.0:
                out[edst[e]] += eweight[e] * s
        for v in range(n):
            out[v] *= mask[v]
        return out

    return propagate_step


# ---------------------------------------------------------------------------
# backend registry
# ---------------------------------------------------------------------------

BACKENDS: dict[str, dict] = {
    "numpy": {
        "power_iterate": _power_iterate_numpy,
        "partition_cost": _partition_cost_numpy,
        "local_move_pass": _make_local_move_pass(_plogp),
        "propagate_step": _propagate_step_numpy,
    }
}

if NUMBA_AVAILABLE:
    _plogp_jit = jit_compile(_plogp)
    BACKENDS["numba"] = {
        "power_iterate": jit_compile(_make_power_iterate(_plogp_jit)),
        "partition_cost": jit_compile(_make_partition_cost(_plogp_jit)),
        "local_move_pass": jit_compile(_make_local_move_pass(_plogp_jit)),
        "propagate_step": jit_compile(_make_propagate_step(_plogp_jit)),
    }

ACTIVE_BACKEND = "numba" if USE_NUMBA else "numpy"

power_iterate = BACKENDS[ACTIVE_BACKEND]["power_iterate"]
partition_cost = BACKENDS[ACTIVE_BACKEND]["partition_cost"]
local_move_pass = BACKENDS[ACTIVE_BACKEND]["local_move_pass"]
propagate_step = BACKENDS[ACTIVE_BACKEND]["propagate_step"]
