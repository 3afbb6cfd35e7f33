"""Compiled inner loops for CRC and decoder-tree traversal.

Tree buffers use the usual flat layout: the node at level ``s`` (holding
``2**s`` values) lives at offsets ``[2**s, 2**(s+1))``.  Level ``m`` (the
root) is the caller's input array and is never written.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def crc_register(bits, poly, width, init):
    mask = (np.int64(1) << width) - 1
    reg = np.int64(init)
    for k in range(bits.size):
        fb = ((reg >> (width - 1)) & 1) ^ np.int64(bits[k])
        reg = (reg << 1) & mask
        if fb:
            reg ^= poly
    return reg


@njit(cache=True)
def _ctz(i):
    c = 0
    while (i & 1) == 0:
        i >>= 1
        c += 1
    return c


@njit(cache=True)
def _f(a, b):
    mag = min(abs(a), abs(b))
    return -mag if (a < 0.0) != (b < 0.0) else mag


@njit(cache=True)
def sc_kernel(root, frozen, u_hat):
    """Successive-cancellation decoding of one subtree."""
    M = root.size
    m = 0
    while (1 << m) < M:
        m += 1
    alpha = np.empty(max(M, 2))
    beta = np.zeros(max(M, 2), dtype=np.uint8)
    tmp = np.empty(M, dtype=np.uint8)
    for i in range(M):
        if m > 0:
            if i == 0:
                top = m
            else:
                top = _ctz(i) + 1
                # g at the right child of the deepest common ancestor
                h = 1 << (top - 1)
                for k in range(h):
                    if top == m:
                        a = root[k]
                        b = root[k + h]
                    else:
                        a = alpha[2 * h + k]
                        b = alpha[3 * h + k]
                    bl = beta[h + k]
                    alpha[h + k] = b - a if bl else b + a
                top -= 1
            for s in range(top, 0, -1):
                h = 1 << (s - 1)
                for k in range(h):
                    if s == m:
                        a = root[k]
                        b = root[k + h]
                    else:
                        a = alpha[2 * h + k]
                        b = alpha[3 * h + k]
                    alpha[h + k] = _f(a, b)
            llr = alpha[1]
        else:
            llr = root[0]
        bit = 0 if frozen[i] or llr >= 0.0 else 1
        u_hat[i] = bit
        tmp[0] = bit
        s = 0
        while s < m:
            h = 1 << s
            if (i >> s) & 1 == 0:
                for k in range(h):
                    beta[h + k] = tmp[k]
                break
            for k in range(h):
                tmp[h + k] = tmp[k]
                tmp[k] ^= beta[h + k]
            s += 1


@njit(cache=True)
def _own(ptr, ref, row, s, L):
    """Give ``row`` exclusive use of its level-``s`` slot before a write."""
    slot = ptr[row, s]
    if ref[s, slot] > 1:
        ref[s, slot] -= 1
        for k in range(L):
            if ref[s, k] == 0:
                slot = k
                break
        ref[s, slot] = 1
        ptr[row, s] = slot
    return slot


@njit(cache=True)
def scl_kernel(root, frozen, L, out_bits, out_metrics):
    """List decoding of one subtree with at most ``L`` live paths.

    Fills ``out_bits[:n]`` and ``out_metrics[:n]`` with the surviving paths
    in ascending (metric, path index) order and returns ``n``.

    Paths share per-level buffers by reference; a path takes a private slot
    only when it writes a level it shares.  Writes always overwrite a whole
    level, so no data is ever copied.  Leaf decisions are kept as a
    (parent, bit) history and recovered by backtracking.
    """
    M = root.size
    m = 0
    while (1 << m) < M:
        m += 1
    lv = max(m, 1)
    alpha = np.empty((L, max(M, 2)))
    beta = np.zeros((L, max(M, 2)), dtype=np.uint8)
    a_ptr = np.zeros((L, lv), dtype=np.int64)
    b_ptr = np.zeros((L, lv), dtype=np.int64)
    a_ref = np.zeros((lv, L), dtype=np.int64)
    b_ref = np.zeros((lv, L), dtype=np.int64)
    a_ref[:, 0] = 1
    b_ref[:, 0] = 1
    pm = np.zeros(L)
    leaf = np.empty(L)
    hist_parent = np.empty((M, L), dtype=np.int64)
    hist_bit = np.empty((M, L), dtype=np.uint8)
    tmp = np.empty(M, dtype=np.uint8)
    cand_pm = np.empty(2 * L)
    order = np.empty(2 * L, dtype=np.int64)
    new_a = np.empty((L, lv), dtype=np.int64)
    new_b = np.empty((L, lv), dtype=np.int64)
    new_pm = np.empty(L)
    n_live = 1

    for i in range(M):
        # LLRs down to the leaf, per live path
        for l in range(n_live):
            if m == 0:
                leaf[l] = root[0]
                continue
            if i == 0:
                top = m
            else:
                top = _ctz(i) + 1
                h = 1 << (top - 1)
                dst = _own(a_ptr, a_ref, l, top - 1, L)
                bsl = b_ptr[l, top - 1]
                if top == m:
                    for k in range(h):
                        a = root[k]
                        b = root[k + h]
                        alpha[dst, h + k] = b - a if beta[bsl, h + k] else b + a
                else:
                    src = a_ptr[l, top]
                    for k in range(h):
                        a = alpha[src, 2 * h + k]
                        b = alpha[src, 3 * h + k]
                        alpha[dst, h + k] = b - a if beta[bsl, h + k] else b + a
                top -= 1
            for s in range(top, 0, -1):
                h = 1 << (s - 1)
                dst = _own(a_ptr, a_ref, l, s - 1, L)
                if s == m:
                    for k in range(h):
                        alpha[dst, h + k] = _f(root[k], root[k + h])
                else:
                    src = a_ptr[l, s]
                    for k in range(h):
                        alpha[dst, h + k] = _f(alpha[src, 2 * h + k], alpha[src, 3 * h + k])
            leaf[l] = alpha[a_ptr[l, 0], 1]

        if frozen[i]:
            for l in range(n_live):
                if leaf[l] < 0.0:
                    pm[l] -= leaf[l]
                hist_parent[i, l] = l
                hist_bit[i, l] = 0
        else:
            nc = 2 * n_live
            for l in range(n_live):
                a = leaf[l]
                cand_pm[2 * l] = pm[l] - a if a < 0.0 else pm[l]
                cand_pm[2 * l + 1] = pm[l] + a if a >= 0.0 else pm[l]
            # stable insertion sort: ties keep (parent, bit) order
            for c in range(nc):
                order[c] = c
            for c in range(1, nc):
                key = order[c]
                d = c - 1
                while d >= 0 and cand_pm[order[d]] > cand_pm[key]:
                    order[d + 1] = order[d]
                    d -= 1
                order[d + 1] = key
            keep = min(L, nc)
            for j in range(keep):
                c = order[j]
                parent = c >> 1
                new_pm[j] = cand_pm[c]
                hist_parent[i, j] = parent
                hist_bit[i, j] = c & 1
                for s in range(lv):
                    new_a[j, s] = a_ptr[parent, s]
                    new_b[j, s] = b_ptr[parent, s]
            n_live = keep
            a_ref[:, :] = 0
            b_ref[:, :] = 0
            for j in range(n_live):
                pm[j] = new_pm[j]
                for s in range(lv):
                    a_ptr[j, s] = new_a[j, s]
                    b_ptr[j, s] = new_b[j, s]
                    a_ref[s, a_ptr[j, s]] += 1
                    b_ref[s, b_ptr[j, s]] += 1

        # partial sums up to the first pending left sibling
        for l in range(n_live):
            tmp[0] = hist_bit[i, l]
            s = 0
            while s < m:
                h = 1 << s
                if (i >> s) & 1 == 0:
                    dst = _own(b_ptr, b_ref, l, s, L)
                    for k in range(h):
                        beta[dst, h + k] = tmp[k]
                    break
                src = b_ptr[l, s]
                for k in range(h):
                    tmp[h + k] = tmp[k]
                    tmp[k] ^= beta[src, h + k]
                s += 1

    # final ranking by (metric, path index)
    for c in range(n_live):
        order[c] = c
    for c in range(1, n_live):
        key = order[c]
        d = c - 1
        while d >= 0 and pm[order[d]] > pm[key]:
            order[d + 1] = order[d]
            d -= 1
        order[d + 1] = key
    for j in range(n_live):
        r = order[j]
        out_metrics[j] = pm[r]
        for i in range(M - 1, -1, -1):
            out_bits[j, i] = hist_bit[i, r]
            r = hist_parent[i, r]
    return n_live
