"""Independent cascade diffusion and the two seeding protocols.

Single-stage (SN) activates the top ``n`` ranked nodes at once and lets the
cascade run out.  Sequential (SQ) activates one seed per stage, waits for
quiescence, and picks the next seed as the highest-ranked node that is
still inactive, so nodes reached by earlier cascades are skipped.
"""
from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .instances import EdgeStateInstance


@dataclass(frozen=True)
class SeedBudget:
    n: int
    percent: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("seed budget must be at least 1")

    @classmethod
    def from_percent(cls, percent: float, node_count: int) -> "SeedBudget":
        """``percent`` of the nodes, rounded half up and clamped to ``[1, node_count]``."""
        n = int(math.floor(percent / 100.0 * node_count + 0.5))
        return cls(min(max(n, 1), node_count), float(percent))

    @classmethod
    def parse(cls, text: str, node_count: int) -> "SeedBudget":
        text = str(text).strip()
        if text.endswith("%"):
            return cls.from_percent(float(text[:-1]), node_count)
        n = int(text)
        if n > node_count:
            raise ValueError(f"budget {n} exceeds node count {node_count}")
        return cls(n)


@dataclass(frozen=True)
class StageRecord:
    stage: int
    seed: int | None          # None for the single SN stage or an exhausted SQ stage
    new_nodes: tuple[int, ...]
    steps: int


@dataclass
class DiffusionOutcome:
    protocol: str
    activated: frozenset[int]
    seeds_used: list[int]
    seeds_saved: int
    stages: list[StageRecord]
    activation_stage: np.ndarray = field(repr=False)
    queried: np.ndarray | None = field(default=None, repr=False)

    @property
    def coverage(self) -> int:
        return len(self.activated)

    @property
    def total_steps(self) -> int:
        return sum(s.steps for s in self.stages)


def _order(ranking) -> np.ndarray:
    order = getattr(ranking, "order", ranking)
    return np.ascontiguousarray(order, dtype=np.int32)


def _budget(budget) -> int:
    return budget.n if isinstance(budget, SeedBudget) else int(budget)


def diffuse(inst: EdgeStateInstance, frontier, activated) -> tuple[set[int], int]:
    """Spread from ``frontier`` until a step adds nothing.

    Returns the grown activated set and the number of productive steps.
    Each frontier node tries every outgoing channel once; an inactive
    neighbour joins iff the channel is active.
    """
    g = inst.graph
    states = inst.states
    active = set(activated)
    frontier = sorted(set(frontier))
    if not active.issuperset(frontier):
        raise ValueError("frontier must be a subset of the activated set")
    steps = 0
    while frontier:
        nxt = []
        for u in frontier:
            for e in range(g.indptr[u], g.indptr[u + 1]):
                w = int(g.indices[e])
                if w not in active and states[g.channel[e]]:
                    active.add(w)
                    nxt.append(w)
        if not nxt:
            break
        steps += 1
        frontier = sorted(nxt)
    return active, steps


def _run(inst, ranking, budget, sequential, record_queries):
    g = inst.graph
    order = _order(ranking)
    n = _budget(budget)
    log = np.full(g.edge_count, -1, dtype=np.int8) if record_queries else None
    act, stage_seed, stage_new, stage_steps = kernels.cascade(
        g.indptr, g.indices, g.channel, inst.states, order, n, sequential, log)
    activated = frozenset(np.flatnonzero(act >= 0).tolist())
    top = set(order[:n].tolist())
    if sequential:
        seeds = [int(v) for v in stage_seed if v >= 0]
        saved = n - len(top.intersection(seeds))
        stages = [StageRecord(s, int(stage_seed[s]) if stage_seed[s] >= 0 else None,
                              tuple(np.flatnonzero(act == s).tolist()), int(stage_steps[s]))
                  for s in range(n)]
        protocol = "SQ"
    else:
        seeds = [int(v) for v in order[:n]]
        saved = 0
        stages = [StageRecord(0, None, tuple(sorted(activated)), int(stage_steps[0]))]
        protocol = "SN"
    return DiffusionOutcome(protocol, activated, seeds, saved, stages, act, log)


def run_single_stage(inst: EdgeStateInstance, ranking, budget, record_queries=False) -> DiffusionOutcome:
    """All top-``n`` seeds active at stage one, then diffuse to quiescence."""
    return _run(inst, ranking, budget, False, record_queries)


def run_sequential(inst: EdgeStateInstance, ranking, budget, record_queries=False) -> DiffusionOutcome:
    """One seed per stage; already-active candidates are skipped and replaced."""
    return _run(inst, ranking, budget, True, record_queries)


def coverage_pair(g, states, order, n) -> tuple[int, int, int, int, int]:
    """Fast path for the harness: ``(c_sn, c_sq, seeds_saved, sn_steps, sq_steps)``."""
    act, _, new, steps = kernels.cascade(g.indptr, g.indices, g.channel, states, order, n, False, None)
    c_sn = int(new[0])
    sn_steps = int(steps[0])
    act, stage_seed, new, steps = kernels.cascade(g.indptr, g.indices, g.channel, states, order, n, True, None)
    top = set(order[:n].tolist())
    saved = n - len(top.intersection(stage_seed.tolist()))
    return c_sn, int(new.sum()), saved, sn_steps, int(steps.sum())


def queries_agree(a: DiffusionOutcome, b: DiffusionOutcome) -> bool:
    """True when every channel queried by both runs was seen in the same state."""
    if a.queried is None or b.queried is None:
        raise ValueError("both outcomes need record_queries=True")
    both = (a.queried >= 0) & (b.queried >= 0)
    return bool(np.array_equal(a.queried[both], b.queried[both]))


def reachable_from(inst: EdgeStateInstance, sources) -> set[int]:
    """Plain BFS over active channels; independent of the cascade kernels."""
    g = inst.graph
    seen = set(int(s) for s in sources)
    queue = deque(seen)
    while queue:
        u = queue.popleft()
        for w, c in g.out_adjacency(u):
            if inst.states[c] and w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def _shortest_path(g, s, u):
    prev = {s: None}
    queue = deque([s])
    while queue:
        x = queue.popleft()
        if x == u:
            break
        for w, c in g.out_adjacency(x):
            if w not in prev:
                prev[w] = (x, c)
                queue.append(w)
    if u not in prev:
        return None
    channels = []
    while prev[u] is not None:
        u, c = prev[u]
        channels.append(c)
    return channels[::-1]


def build_strict_improvement_instance(g, ranking, budget) -> EdgeStateInstance | None:
    """Configuration on which sequential seeding beats single-stage seeding.

    Looks for a top-``n`` seed ``u`` reachable in ``g`` from a better-ranked
    seed ``s``, activates exactly the channels of a shortest ``s -> u`` path
    and checks the strict inequality.  Returns None when no such pair yields
    one (no reachability, or single-stage already covers every node).
    """
    order = _order(ranking)
    n = _budget(budget)
    top = [int(v) for v in order[:n]]
    for i, s in enumerate(top):
        for u in top[i + 1:]:
            path = _shortest_path(g, s, u)
            if path is None:
                continue
            states = np.zeros(g.edge_count, dtype=np.uint8)
            states[path] = 1
            inst = EdgeStateInstance(g, 1.0, None, states)
            if run_sequential(inst, order, n).coverage > run_single_stage(inst, order, n).coverage:
                return inst
    return None


TRACE_HEADER = ("instance_seed", "protocol", "stage", "seed_node", "new_activations", "steps")


def trace_rows(inst: EdgeStateInstance, outcome: DiffusionOutcome, labels=None):
    labels = inst.graph.labels if labels is None else labels
    seed = "" if inst.instance_seed is None else inst.instance_seed
    for st in outcome.stages:
        yield (seed, outcome.protocol, st.stage + 1,
               "" if st.seed is None else int(labels[st.seed]), len(st.new_nodes), st.steps)


def write_trace(rows, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    writer.writerows(rows)
