"""Node orderings consumed by both seeding protocols."""
from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._backend import kernels
from .graph import Graph
from .instances import derive_seed, sample_states

STRATEGIES = ("random", "degree", "greedy", "greedy_marginal")

# keeps greedy's private simulations apart from coordinated instance streams
_GREEDY_STREAM = 0x6772


@dataclass(frozen=True, eq=False)
class SeedRanking:
    strategy: str
    order: np.ndarray
    params: dict = field(default_factory=dict)
    scores: np.ndarray | None = None

    def __post_init__(self):
        order = np.ascontiguousarray(self.order, dtype=np.int32)
        order.setflags(write=False)
        object.__setattr__(self, "order", order)

    def __len__(self) -> int:
        return int(self.order.size)

    def top(self, n: int) -> list[int]:
        return self.order[:n].tolist()


def _sorted_by_score(scores: np.ndarray) -> np.ndarray:
    """Descending score, ties by ascending node id."""
    ids = np.arange(scores.size)
    return np.lexsort((ids, -scores)).astype(np.int32)


def rank_random(g: Graph, rng_seed: int) -> SeedRanking:
    order = np.random.default_rng(rng_seed).permutation(g.node_count)
    return SeedRanking("random", order, {"rng_seed": int(rng_seed)})


def rank_degree(g: Graph) -> SeedRanking:
    deg = g.degrees()
    return SeedRanking("degree", _sorted_by_score(deg.astype(np.float64)), {},
                       deg.astype(np.float64))


def cascade_sizes(g: Graph, states: np.ndarray) -> np.ndarray:
    """Final cascade size for every node as the sole seed on one configuration."""
    if g.directed:
        return kernels.reach_counts(g.indptr, g.indices, g.channel, states)
    labels = kernels.component_labels(g.node_count, g.src, g.dst, states)
    return np.bincount(labels)[labels]


def greedy_scores(g: Graph, pp: float, sims: int, rng_seed: int) -> np.ndarray:
    """Mean single-seed cascade size per node over ``sims`` fresh simulations."""
    if sims < 1:
        raise ValueError("greedy ranking needs at least one simulation")
    total = np.zeros(g.node_count, dtype=np.int64)
    for i in range(sims):
        states = sample_states(g.edge_count, pp, derive_seed(rng_seed, _GREEDY_STREAM, i))
        total += cascade_sizes(g, states)
    return total / sims


def rank_greedy(g: Graph, pp: float, sims: int, rng_seed: int) -> SeedRanking:
    """Order nodes by their Monte-Carlo expected coverage as a single seed."""
    scores = greedy_scores(g, pp, sims, rng_seed)
    return SeedRanking("greedy", _sorted_by_score(scores),
                       {"pp": float(pp), "sims": int(sims), "rng_seed": int(rng_seed)}, scores)


def rank_greedy_marginal(g: Graph, pp: float, sims: int, rng_seed: int, length: int | None = None) -> SeedRanking:
    """Hill-climbing variant: each next node maximizes the mean marginal coverage.

    Uses the same simulated configurations for every candidate.  Only the
    first ``length`` positions are chosen greedily; the rest follow by
    single-seed score.  Cost grows with ``length * node_count * sims``.
    """
    if sims < 1:
        raise ValueError("greedy ranking needs at least one simulation")
    length = g.node_count if length is None else min(length, g.node_count)
    reach = []  # per simulation: list of python-int reachability masks
    for i in range(sims):
        states = sample_states(g.edge_count, pp, derive_seed(rng_seed, _GREEDY_STREAM, i))
        reach.append(_reach_masks(g, states))
    covered = [0] * sims
    chosen: list[int] = []
    gains = []
    remaining = set(range(g.node_count))
    for _ in range(length):
        best, best_gain = -1, -1.0
        for v in sorted(remaining):
            gain = sum(bin(r[v] & ~c).count("1") for r, c in zip(reach, covered)) / sims
            if gain > best_gain:
                best, best_gain = v, gain
        chosen.append(best)
        gains.append(best_gain)
        remaining.discard(best)
        covered = [c | r[best] for r, c in zip(reach, covered)]
    if remaining:
        rest = [int(v) for v in _sorted_by_score(greedy_scores(g, pp, sims, rng_seed)) if v in remaining]
        chosen.extend(rest)
        gains.extend([0.0] * len(rest))
    return SeedRanking("greedy_marginal", np.array(chosen),
                       {"pp": float(pp), "sims": int(sims), "rng_seed": int(rng_seed)},
                       np.array(gains))


def _reach_masks(g: Graph, states: np.ndarray) -> list[int]:
    if g.node_count <= 64:
        return [int(x) for x in kernels.reach_bitsets(g.indptr, g.indices, g.channel, states)]
    out = []
    for s in range(g.node_count):
        mask = 1 << s
        stack = [s]
        while stack:
            u = stack.pop()
            for e in range(g.indptr[u], g.indptr[u + 1]):
                w = int(g.indices[e])
                if not (mask >> w) & 1 and states[g.channel[e]]:
                    mask |= 1 << w
                    stack.append(w)
        out.append(mask)
    return out


def make_ranking(g: Graph, strategy: str, *, pp: float | None = None, sims: int = 10000,
                 rng_seed: int = 0) -> SeedRanking:
    if strategy == "random":
        return rank_random(g, rng_seed)
    if strategy == "degree":
        return rank_degree(g)
    if strategy in ("greedy", "greedy_marginal"):
        if pp is None:
            raise ValueError(f"{strategy} ranking needs a propagation probability")
        if strategy == "greedy":
            return rank_greedy(g, pp, sims, rng_seed)
        return rank_greedy_marginal(g, pp, sims, rng_seed)
    raise ValueError(f"unknown ranking strategy {strategy!r}")


# ---------------------------------------------------------------- CSV cache

RANKING_HEADER = ("rank", "node_label", "score")


def write_ranking(ranking: SeedRanking, g: Graph, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RANKING_HEADER)
        for r, v in enumerate(ranking.order.tolist(), start=1):
            score = "" if ranking.scores is None else repr(float(ranking.scores[v]))
            writer.writerow((r, int(g.labels[v]), score))


def read_ranking(g: Graph, path, strategy: str = "cached") -> SeedRanking:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    rows.sort(key=lambda row: int(row["rank"]))
    lm = g.label_map
    order = [lm[int(row["node_label"])] for row in rows]
    if sorted(order) != list(range(g.node_count)):
        raise ValueError(f"{path}: ranking is not a permutation of the graph's nodes")
    scores = None
    if all(row["score"] != "" for row in rows):
        scores = np.zeros(g.node_count)
        for v, row in zip(order, rows):
            scores[v] = float(row["score"])
    return SeedRanking(strategy, np.array(order), {"source": str(path)}, scores)


def graph_digest(g: Graph) -> str:
    h = hashlib.sha256()
    h.update(b"D" if g.directed else b"U")
    for arr in (g.labels, g.src, g.dst):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


def cached_greedy(g: Graph, pp: float, sims: int, rng_seed: int, cache_dir=None) -> SeedRanking:
    """``rank_greedy`` memoized on disk by a hash of (graph, pp, sims, seed)."""
    if cache_dir is None:
        return rank_greedy(g, pp, sims, rng_seed)
    key = hashlib.sha256(f"{graph_digest(g)}|{float(pp)!r}|{sims}|{rng_seed}".encode()).hexdigest()[:20]
    path = Path(cache_dir) / f"greedy-{key}.csv"
    if path.exists():
        cached = read_ranking(g, path)
        return SeedRanking("greedy", cached.order,
                           {"pp": float(pp), "sims": int(sims), "rng_seed": int(rng_seed)}, cached.scores)
    ranking = rank_greedy(g, pp, sims, rng_seed)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_ranking(ranking, g, path)
    return ranking
