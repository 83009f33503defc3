"""Numba kernels for the Monte-Carlo decoding engine.

The decoder is the hot path: a single low-rate simulation point can run
millions of message-passing iterations, so the flooding schedule is compiled.
Edges are stored sorted by check node, which makes the check-side adjacency a
set of contiguous ranges and leaves only the variable side needing an index
array.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["bp_flood", "gf2_rank_packed", "pack_rows"]


@njit(cache=True)
def bp_flood(llr, edge_var, chk_ptr, var_ptr, var_edges, msg_cv, max_iter, clamp,
             hard_out, early_exit=True):
    """Flooding-schedule sum-product decoding in the log domain.

    llr       : (n,) channel log-likelihood ratios (positive favours bit 0)
    edge_var  : (E,) variable index of each edge; edges grouped by check
    chk_ptr   : (m+1,) edge range of each check node
    var_ptr   : (n+1,) range into var_edges for each variable node
    var_edges : (E,) edge indices grouped by variable
    msg_cv    : (E,) check-to-variable messages; zeros for a cold start, or
                the previous call's messages to warm-start (rateless decoding)
    clamp     : message magnitude limit (tanh update is clamped at +-clamp)
    hard_out  : (n,) uint8 output, hard decisions of the final posterior
    early_exit: stop at the first zero syndrome; disable to run max_iter
                rounds regardless (posterior-marginal evaluation)

    Returns (converged, iterations_used); converged is True only when the
    hard decisions satisfy every check, which is re-tested from scratch at
    the start of each iteration (iteration 0 tests the raw channel word).
    """
    n = llr.shape[0]
    m = chk_ptr.shape[0] - 1

    max_dc = 0
    for c in range(m):
        deg = chk_ptr[c + 1] - chk_ptr[c]
        if deg > max_dc:
            max_dc = deg
    tanh_vals = np.empty(max_dc, dtype=np.float64)
    fwd = np.empty(max_dc + 1, dtype=np.float64)

    total = np.empty(n, dtype=np.float64)

    for it in range(max_iter + 1):
        # Posterior totals and hard decisions.
        for v in range(n):
            acc = llr[v]
            for q in range(var_ptr[v], var_ptr[v + 1]):
                acc += msg_cv[var_edges[q]]
            total[v] = acc
            hard_out[v] = 1 if acc < 0.0 else 0

        # Syndrome check.
        ok = True
        for c in range(m):
            parity = 0
            for e in range(chk_ptr[c], chk_ptr[c + 1]):
                parity ^= hard_out[edge_var[e]]
            if parity != 0:
                ok = False
                break
        if ok and (early_exit or it == max_iter):
            return True, it
        if it == max_iter:
            return False, max_iter

        # Check-node update with exact exclusion via forward/backward products.
        for c in range(m):
            lo = chk_ptr[c]
            deg = chk_ptr[c + 1] - lo
            fwd[0] = 1.0
            for j in range(deg):
                e = lo + j
                m_vc = total[edge_var[e]] - msg_cv[e]
                if m_vc > clamp:
                    m_vc = clamp
                elif m_vc < -clamp:
                    m_vc = -clamp
                t = np.tanh(0.5 * m_vc)
                tanh_vals[j] = t
                fwd[j + 1] = fwd[j] * t
            bwd = 1.0
            for j in range(deg - 1, -1, -1):
                prod = fwd[j] * bwd
                bwd *= tanh_vals[j]
                if prod > 0.999999999999999:
                    prod = 0.999999999999999
                elif prod < -0.999999999999999:
                    prod = -0.999999999999999
                val = 2.0 * np.arctanh(prod)
                if val > clamp:
                    val = clamp
                elif val < -clamp:
                    val = -clamp
                msg_cv[lo + j] = val

    return False, max_iter


@njit(cache=True)
def gf2_rank_packed(rows, n_cols):
    """Rank over GF(2) of a bit-packed matrix (one uint64 word per 64 columns).

    Forward elimination only; `rows` is modified in place.
    """
    m, words = rows.shape
    rank = 0
    for col in range(n_cols):
        w = col >> 6
        mask = np.uint64(1) << np.uint64(col & 63)
        pivot = -1
        for r in range(rank, m):
            if rows[r, w] & mask:
                pivot = r
                break
        if pivot < 0:
            continue
        if pivot != rank:
            for j in range(words):
                tmp = rows[rank, j]
                rows[rank, j] = rows[pivot, j]
                rows[pivot, j] = tmp
        for r in range(rank + 1, m):
            if rows[r, w] & mask:
                for j in range(w, words):
                    rows[r, j] ^= rows[rank, j]
        rank += 1
        if rank == m:
            break
    return rank


def pack_rows(edge_var: np.ndarray, edge_chk: np.ndarray, m: int, n: int) -> np.ndarray:
    """Bit-pack a sparse parity-check matrix into uint64 rows."""
    words = (n + 63) // 64
    packed = np.zeros((m, words), dtype=np.uint64)
    flat = packed.reshape(-1)
    idx = edge_chk.astype(np.int64) * words + (edge_var >> 6)
    bits = (np.uint64(1) << (edge_var.astype(np.uint64) & np.uint64(63)))
    np.bitwise_or.at(flat, idx, bits)
    return packed
