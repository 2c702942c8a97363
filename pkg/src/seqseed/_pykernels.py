"""Pure-Python implementations of the hot kernels.

Same signatures and results as the compiled ``_ckernels`` module; used when
the extension is unavailable or ``SEQSEED_PURE_PYTHON`` is set.
"""
from __future__ import annotations

from itertools import combinations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

_POPCOUNT8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


def _diffuse(indptr, indices, channel, states, act, frontier, stage, log):
    steps = 0
    while frontier:
        nxt = []
        for u in sorted(frontier):
            for e in range(indptr[u], indptr[u + 1]):
                w = indices[e]
                if act[w] >= 0:
                    continue
                c = channel[e]
                if log is not None:
                    log[c] = states[c]
                if states[c]:
                    act[w] = stage
                    nxt.append(w)
        if not nxt:
            break
        steps += 1
        frontier = nxt
    return steps


def cascade(indptr, indices, channel, states, order, n_seeds, sequential, query_log=None):
    """Run one seeding protocol to completion.

    Returns ``(act_stage, stage_seed, stage_new, stage_steps)``: the stage in
    which each node became active (-1 if never), and per-stage seed, count of
    new activations and productive diffusion steps.  Single-stage runs fill
    only stage 0 and report seed -1 there.
    """
    node_count = len(indptr) - 1
    indptr = indptr.tolist()
    indices = indices.tolist()
    channel = channel.tolist()
    states = states.tolist()
    order = [int(v) for v in order]
    act = [-1] * node_count
    n_stages = n_seeds if sequential else 1
    stage_seed = [-1] * max(n_stages, 1)
    stage_new = [0] * max(n_stages, 1)
    stage_steps = [0] * max(n_stages, 1)
    log = None if query_log is None else [-1] * len(states)

    if not sequential:
        seeds = order[:n_seeds]
        for v in seeds:
            act[v] = 0
        stage_steps[0] = _diffuse(indptr, indices, channel, states, act, seeds, 0, log)
        stage_new[0] = sum(1 for a in act if a == 0)
    else:
        ptr = 0
        for s in range(n_seeds):
            while ptr < len(order) and act[order[ptr]] >= 0:
                ptr += 1
            if ptr == len(order):
                continue
            v = order[ptr]
            act[v] = s
            stage_seed[s] = v
            stage_steps[s] = _diffuse(indptr, indices, channel, states, act, [v], s, log)
        counts = np.bincount([a for a in act if a >= 0], minlength=max(n_stages, 1))
        stage_new = counts.tolist()

    if query_log is not None:
        query_log[:] = log
    return (np.array(act, dtype=np.int32), np.array(stage_seed, dtype=np.int32),
            np.array(stage_new, dtype=np.int32), np.array(stage_steps, dtype=np.int32))


def reach_counts(indptr, indices, channel, states):
    """Number of nodes reachable from each node over active channels (itself included)."""
    node_count = len(indptr) - 1
    indptr = indptr.tolist()
    indices = indices.tolist()
    channel = channel.tolist()
    states = states.tolist()
    out = np.empty(node_count, dtype=np.int64)
    for s in range(node_count):
        seen = {s}
        stack = [s]
        while stack:
            u = stack.pop()
            for e in range(indptr[u], indptr[u + 1]):
                w = indices[e]
                if w not in seen and states[channel[e]]:
                    seen.add(w)
                    stack.append(w)
        out[s] = len(seen)
    return out


def reach_bitsets(indptr, indices, channel, states):
    """Per-node reachability sets as uint64 masks; requires at most 64 nodes."""
    node_count = len(indptr) - 1
    if node_count > 64:
        raise ValueError("reach_bitsets supports at most 64 nodes")
    indptr = indptr.tolist()
    indices = indices.tolist()
    channel = channel.tolist()
    states = states.tolist()
    out = np.empty(node_count, dtype=np.uint64)
    for s in range(node_count):
        mask = 1 << s
        stack = [s]
        while stack:
            u = stack.pop()
            for e in range(indptr[u], indptr[u + 1]):
                bit = 1 << indices[e]
                if not mask & bit and states[channel[e]]:
                    mask |= bit
                    stack.append(indices[e])
        out[s] = mask
    return out


def _popcount(a: np.ndarray) -> np.ndarray:
    return _POPCOUNT8[a.view(np.uint8).reshape(a.shape + (8,))].sum(axis=-1, dtype=np.int64)


def best_subset(reach, n, chunk=1 << 16):
    """Lexicographically first ``n``-subset maximizing the popcount of the OR of masks."""
    reach = np.asarray(reach, dtype=np.uint64)
    best_count, best_combo = -1, ()
    it = combinations(range(reach.size), n)
    while True:
        block = np.fromiter((i for combo in _take(it, chunk) for i in combo), dtype=np.int64)
        if block.size == 0:
            break
        combos = block.reshape(-1, n)
        union = np.bitwise_or.reduce(reach[combos], axis=1)
        counts = _popcount(union)
        k = int(np.argmax(counts))
        if counts[k] > best_count:
            best_count, best_combo = int(counts[k]), tuple(int(i) for i in combos[k])
    return best_count, best_combo


def _take(it, k):
    for _ in range(k):
        try:
            yield next(it)
        except StopIteration:
            return


def component_labels(node_count, src, dst, states):
    """Connected-component label per node of the undirected active subgraph."""
    mask = np.asarray(states, dtype=bool)
    a = np.asarray(src)[mask]
    b = np.asarray(dst)[mask]
    mat = coo_matrix((np.ones(a.size, dtype=np.int8), (a, b)), shape=(node_count, node_count))
    _, labels = connected_components(mat, directed=False)
    return labels.astype(np.int64)
