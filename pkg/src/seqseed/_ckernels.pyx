# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; see ``_pykernels`` for the reference semantics."""
import numpy as np

from libc.stdint cimport int8_t, int32_t, int64_t, uint8_t, uint64_t
from libc.stdlib cimport qsort


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef int _cmp_int32(const void* a, const void* b) noexcept nogil:
    cdef int32_t x = (<const int32_t*>a)[0]
    cdef int32_t y = (<const int32_t*>b)[0]
    return (x > y) - (x < y)


cdef int32_t _diffuse(const int64_t[::1] indptr, const int32_t[::1] indices,
                      const int32_t[::1] channel, const uint8_t[::1] states,
                      int32_t[::1] act, int32_t* cur, int32_t* nxt, int32_t nc,
                      int32_t stage, int8_t[::1] log, bint has_log) noexcept nogil:
    cdef int32_t steps = 0, nn, i, u, w, c
    cdef int64_t e
    cdef int32_t* tmp
    while nc > 0:
        qsort(cur, nc, sizeof(int32_t), _cmp_int32)
        nn = 0
        for i in range(nc):
            u = cur[i]
            for e in range(indptr[u], indptr[u + 1]):
                w = indices[e]
                if act[w] >= 0:
                    continue
                c = channel[e]
                if has_log:
                    log[c] = states[c]
                if states[c]:
                    act[w] = stage
                    nxt[nn] = w
                    nn += 1
        if nn == 0:
            break
        steps += 1
        tmp = cur
        cur = nxt
        nxt = tmp
        nc = nn
    return steps


def cascade(const int64_t[::1] indptr, const int32_t[::1] indices,
            const int32_t[::1] channel, const uint8_t[::1] states,
            order, int n_seeds, bint sequential, query_log=None):
    cdef int32_t node_count = indptr.shape[0] - 1
    cdef int32_t n_stages = n_seeds if sequential else 1
    if n_stages < 1:
        n_stages = 1
    cdef const int32_t[::1] ord_ = np.ascontiguousarray(order, dtype=np.int32)
    cdef int32_t n_order = ord_.shape[0]
    act_arr = np.full(node_count, -1, dtype=np.int32)
    seed_arr = np.full(n_stages, -1, dtype=np.int32)
    new_arr = np.zeros(n_stages, dtype=np.int32)
    steps_arr = np.zeros(n_stages, dtype=np.int32)
    buf = np.empty(2 * node_count + 2, dtype=np.int32)
    cdef int32_t[::1] act = act_arr
    cdef int32_t[::1] stage_seed = seed_arr
    cdef int32_t[::1] stage_new = new_arr
    cdef int32_t[::1] stage_steps = steps_arr
    cdef int32_t[::1] b = buf
    cdef int32_t* cur = &b[0]
    cdef int32_t* nxt = &b[node_count + 1]
    cdef bint has_log = query_log is not None
    cdef int8_t[::1] log
    if has_log:
        log = query_log
        log[:] = -1
    else:
        log = np.empty(1, dtype=np.int8)
    cdef int32_t s, k, v, ptr = 0, nc

    with nogil:
        if not sequential:
            nc = 0
            for k in range(min(n_seeds, n_order)):
                v = ord_[k]
                if act[v] < 0:
                    act[v] = 0
                    cur[nc] = v
                    nc += 1
            stage_steps[0] = _diffuse(indptr, indices, channel, states, act, cur, nxt,
                                      nc, 0, log, has_log)
        else:
            for s in range(n_seeds):
                while ptr < n_order and act[ord_[ptr]] >= 0:
                    ptr += 1
                if ptr == n_order:
                    continue
                v = ord_[ptr]
                act[v] = s
                stage_seed[s] = v
                cur[0] = v
                stage_steps[s] = _diffuse(indptr, indices, channel, states, act, cur, nxt,
                                          1, s, log, has_log)
        for v in range(node_count):
            if act[v] >= 0:
                stage_new[act[v]] += 1
    return act_arr, seed_arr, new_arr, steps_arr


def reach_counts(const int64_t[::1] indptr, const int32_t[::1] indices,
                 const int32_t[::1] channel, const uint8_t[::1] states):
    cdef int32_t node_count = indptr.shape[0] - 1
    out_arr = np.empty(node_count, dtype=np.int64)
    stamp_arr = np.full(node_count, -1, dtype=np.int32)
    stack_arr = np.empty(node_count + 1, dtype=np.int32)
    cdef int64_t[::1] out = out_arr
    cdef int32_t[::1] stamp = stamp_arr
    cdef int32_t[::1] stack = stack_arr
    cdef int32_t s, u, w, top, count
    cdef int64_t e
    with nogil:
        for s in range(node_count):
            stamp[s] = s
            stack[0] = s
            top = 1
            count = 1
            while top > 0:
                top -= 1
                u = stack[top]
                for e in range(indptr[u], indptr[u + 1]):
                    w = indices[e]
                    if stamp[w] != s and states[channel[e]]:
                        stamp[w] = s
                        stack[top] = w
                        top += 1
                        count += 1
            out[s] = count
    return out_arr


def reach_bitsets(const int64_t[::1] indptr, const int32_t[::1] indices,
                  const int32_t[::1] channel, const uint8_t[::1] states):
    cdef int32_t node_count = indptr.shape[0] - 1
    if node_count > 64:
        raise ValueError("reach_bitsets supports at most 64 nodes")
    out_arr = np.empty(node_count, dtype=np.uint64)
    stack_arr = np.empty(node_count + 1, dtype=np.int32)
    cdef uint64_t[::1] out = out_arr
    cdef int32_t[::1] stack = stack_arr
    cdef int32_t s, u, w, top
    cdef int64_t e
    cdef uint64_t mask, bit
    with nogil:
        for s in range(node_count):
            mask = (<uint64_t>1) << s
            stack[0] = s
            top = 1
            while top > 0:
                top -= 1
                u = stack[top]
                for e in range(indptr[u], indptr[u + 1]):
                    w = indices[e]
                    bit = (<uint64_t>1) << w
                    if not (mask & bit) and states[channel[e]]:
                        mask |= bit
                        stack[top] = w
                        top += 1
            out[s] = mask
    return out_arr


def best_subset(reach, int n):
    cdef const uint64_t[::1] r = np.ascontiguousarray(reach, dtype=np.uint64)
    cdef int m = r.shape[0]
    if n < 1 or n > m:
        raise ValueError("subset size out of range")
    idx_arr = np.arange(n, dtype=np.int32)
    best_arr = np.arange(n, dtype=np.int32)
    pre_arr = np.zeros(n + 1, dtype=np.uint64)
    cdef int32_t[::1] idx = idx_arr
    cdef int32_t[::1] best = best_arr
    cdef uint64_t[::1] prefix = pre_arr
    cdef int i, j, cnt, best_count = -1
    with nogil:
        for i in range(n):
            prefix[i + 1] = prefix[i] | r[idx[i]]
        while True:
            cnt = __builtin_popcountll(prefix[n])
            if cnt > best_count:
                best_count = cnt
                for j in range(n):
                    best[j] = idx[j]
            # advance to the next combination in lexicographic order
            i = n - 1
            while i >= 0 and idx[i] == m - n + i:
                i -= 1
            if i < 0:
                break
            idx[i] += 1
            for j in range(i + 1, n):
                idx[j] = idx[j - 1] + 1
            for j in range(i, n):
                prefix[j + 1] = prefix[j] | r[idx[j]]
    return best_count, tuple(int(x) for x in best_arr)


cdef int64_t _find(int64_t[::1] parent, int64_t x) noexcept nogil:
    cdef int64_t root = x, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


def component_labels(int64_t node_count, src, dst, states):
    cdef const int32_t[::1] a = np.ascontiguousarray(src, dtype=np.int32)
    cdef const int32_t[::1] b = np.ascontiguousarray(dst, dtype=np.int32)
    cdef const uint8_t[::1] st = np.ascontiguousarray(states, dtype=np.uint8)
    parent_arr = np.arange(node_count, dtype=np.int64)
    label_arr = np.full(node_count, -1, dtype=np.int64)
    cdef int64_t[::1] parent = parent_arr
    cdef int64_t[::1] label = label_arr
    cdef int64_t i, ra, rb, nxt_label = 0
    with nogil:
        for i in range(a.shape[0]):
            if st[i]:
                ra = _find(parent, a[i])
                rb = _find(parent, b[i])
                if ra != rb:
                    if ra < rb:
                        parent[rb] = ra
                    else:
                        parent[ra] = rb
        for i in range(node_count):
            ra = _find(parent, i)
            if label[ra] < 0:
                label[ra] = nxt_label
                nxt_label += 1
            label[i] = label[ra]
    return label_arr
