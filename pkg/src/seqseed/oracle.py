"""Exact maximum coverage per coordinated instance.

Undirected: the best ``n`` seeds sit in the ``n`` largest connected
components of the active subgraph, one seed each.  Directed: exhaustive
search over all ``n``-subsets of per-node reachability sets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ._backend import kernels
from .engine import reachable_from
from .instances import EdgeStateInstance

DEFAULT_SUBSET_CAP = 10_000_000


class OracleError(ValueError):
    """Wrong oracle for the graph type."""


class OracleInfeasible(RuntimeError):
    """Exhaustive directed search would exceed the configured subset cap."""


@dataclass(frozen=True)
class OracleResult:
    c_max: int
    optimal_seed_set: tuple[int, ...]
    method: str  # "components" or "exhaustive"


def component_sizes(inst: EdgeStateInstance) -> tuple[np.ndarray, np.ndarray]:
    """Component label per node and size per label for the active subgraph."""
    g = inst.graph
    labels = kernels.component_labels(g.node_count, g.src, g.dst, inst.states)
    return labels, np.bincount(labels)


def max_coverage_undirected(inst: EdgeStateInstance, n: int) -> OracleResult:
    g = inst.graph
    if g.directed:
        raise OracleError("max_coverage_undirected called on a directed instance")
    if not 1 <= n <= g.node_count:
        raise ValueError(f"seed count must lie in [1, {g.node_count}], got {n}")
    labels, sizes = component_sizes(inst)
    # representative = smallest node id of each component
    rep = np.full(sizes.size, g.node_count, dtype=np.int64)
    np.minimum.at(rep, labels, np.arange(g.node_count))
    chosen = np.lexsort((rep, -sizes))[:n]
    return OracleResult(int(sizes[chosen].sum()), tuple(sorted(int(rep[c]) for c in chosen)),
                        "components")


def max_coverage_directed(inst: EdgeStateInstance, n: int,
                          cap: int = DEFAULT_SUBSET_CAP) -> OracleResult:
    g = inst.graph
    if not g.directed:
        raise OracleError("max_coverage_directed called on an undirected instance")
    if not 1 <= n <= g.node_count:
        raise ValueError(f"seed count must lie in [1, {g.node_count}], got {n}")
    subsets = math.comb(g.node_count, n)
    if subsets > cap:
        raise OracleInfeasible(f"C({g.node_count}, {n}) = {subsets} subsets exceeds cap {cap}")
    if g.node_count <= 64:
        reach = kernels.reach_bitsets(g.indptr, g.indices, g.channel, inst.states)
        count, combo = kernels.best_subset(reach, n)
    else:
        masks = [sum(1 << v for v in reachable_from(inst, [s])) for s in range(g.node_count)]
        count, combo = -1, ()
        for c in combinations(range(g.node_count), n):
            u = 0
            for v in c:
                u |= masks[v]
            k = u.bit_count()
            if k > count:
                count, combo = k, c
    return OracleResult(int(count), tuple(combo), "exhaustive")


def max_coverage(inst: EdgeStateInstance, n: int, cap: int = DEFAULT_SUBSET_CAP) -> OracleResult:
    if inst.graph.directed:
        return max_coverage_directed(inst, n, cap)
    return max_coverage_undirected(inst, n)


def mean_c_max(instances, n: int, cap: int = DEFAULT_SUBSET_CAP) -> float:
    values = [max_coverage(inst, n, cap).c_max for inst in instances]
    if not values:
        raise ValueError("mean_c_max needs at least one instance")
    return float(np.mean(values))


def brute_force_max_coverage(inst: EdgeStateInstance, n: int) -> int:
    """Reference oracle: BFS union over every ``n``-subset, no bitsets or components."""
    reach = [frozenset(reachable_from(inst, [s])) for s in range(inst.graph.node_count)]
    return max(len(frozenset().union(*(reach[v] for v in c)))
               for c in combinations(range(inst.graph.node_count), n))
