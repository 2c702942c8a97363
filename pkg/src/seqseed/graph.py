"""Graph container, edge-list I/O, synthetic generators and network statistics.

Nodes carry arbitrary nonnegative integer labels externally and dense ids
``0..node_count-1`` internally.  Dense ids follow ascending label order, so a
file whose labels are already ``0..n-1`` keeps its numbering.
"""
from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class GraphFormatError(ValueError):
    """Malformed edge-list input or an invalid graph construction."""


class Graph:
    """Immutable simple graph with per-node out-adjacency in CSR form.

    Every edge has a stable index ``0..edge_count-1`` which doubles as its
    transmission channel.  Undirected edges are stored once with
    ``src < dst`` and exposed from both endpoints under the same index.
    """

    __slots__ = ("node_count", "directed", "src", "dst", "labels",
                 "indptr", "indices", "channel", "_label_map")

    def __init__(self, node_count: int, directed: bool, src, dst, labels=None):
        src = np.asarray(src, dtype=np.int32).reshape(-1)
        dst = np.asarray(dst, dtype=np.int32).reshape(-1)
        if node_count < 1:
            raise GraphFormatError("graph must have at least one node")
        if src.shape != dst.shape:
            raise GraphFormatError("src and dst must have equal length")
        if src.size and (min(src.min(), dst.min()) < 0
                         or max(src.max(), dst.max()) >= node_count):
            raise GraphFormatError("edge endpoint out of range")
        if np.any(src == dst):
            raise GraphFormatError("self-loops are not allowed")
        if not directed:
            src, dst = np.minimum(src, dst), np.maximum(src, dst)
        # dedupe and fix a canonical edge order
        key = src.astype(np.int64) * node_count + dst
        key = np.unique(key)
        src = (key // node_count).astype(np.int32)
        dst = (key % node_count).astype(np.int32)

        if labels is None:
            labels = np.arange(node_count, dtype=np.int64)
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (node_count,):
            raise GraphFormatError("labels must have one entry per node")

        if directed:
            a_src, a_dst = src, dst
            a_ch = np.arange(src.size, dtype=np.int32)
        else:
            a_src = np.concatenate([src, dst])
            a_dst = np.concatenate([dst, src])
            a_ch = np.tile(np.arange(src.size, dtype=np.int32), 2)
        order = np.lexsort((a_dst, a_src))
        indptr = np.zeros(node_count + 1, dtype=np.int64)
        np.cumsum(np.bincount(a_src, minlength=node_count), out=indptr[1:])

        for name, arr in (("src", src), ("dst", dst), ("labels", labels),
                          ("indptr", indptr),
                          ("indices", np.ascontiguousarray(a_dst[order], dtype=np.int32)),
                          ("channel", np.ascontiguousarray(a_ch[order], dtype=np.int32))):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "node_count", int(node_count))
        object.__setattr__(self, "directed", bool(directed))
        object.__setattr__(self, "_label_map", None)

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    def __reduce__(self):
        return (Graph, (self.node_count, self.directed, np.array(self.src),
                        np.array(self.dst), np.array(self.labels)))

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"Graph({self.node_count} nodes, {self.edge_count} {kind} edges)"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.node_count == other.node_count
                and self.directed == other.directed
                and np.array_equal(self.labels, other.labels)
                and np.array_equal(self.src, other.src)
                and np.array_equal(self.dst, other.dst))

    __hash__ = None

    @classmethod
    def from_edges(cls, pairs: Iterable[tuple[int, int]], directed: bool,
                   nodes: Iterable[int] = ()) -> "Graph":
        """Build a graph from ``(label, label)`` pairs plus optional extra node labels."""
        pairs = list(pairs)
        for a, b in pairs:
            if a == b:
                raise GraphFormatError(f"self-loop on node {a}")
        all_labels = {int(x) for pair in pairs for x in pair}
        all_labels.update(int(x) for x in nodes)
        if not all_labels:
            raise GraphFormatError("graph has no nodes")
        if min(all_labels) < 0:
            raise GraphFormatError("node labels must be nonnegative")
        labels = np.array(sorted(all_labels), dtype=np.int64)
        if pairs:
            raw = np.array(pairs, dtype=np.int64)
            ids = np.searchsorted(labels, raw)
        else:
            ids = np.empty((0, 2), dtype=np.int64)
        return cls(labels.size, directed, ids[:, 0], ids[:, 1], labels)

    @property
    def edge_count(self) -> int:
        return int(self.src.size)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.src.tolist(), self.dst.tolist()))

    @property
    def label_map(self) -> dict[int, int]:
        if self._label_map is None:
            object.__setattr__(self, "_label_map",
                               {int(lab): i for i, lab in enumerate(self.labels)})
        return self._label_map

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def out_adjacency(self, v: int) -> list[tuple[int, int]]:
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return list(zip(self.indices[lo:hi].tolist(), self.channel[lo:hi].tolist()))

    def degrees(self) -> np.ndarray:
        """Total degree per node (in + out for directed graphs)."""
        deg = np.bincount(self.src, minlength=self.node_count)
        deg += np.bincount(self.dst, minlength=self.node_count)
        return deg.astype(np.int64)

    def undirected_adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.node_count)]
        for a, b in zip(self.src.tolist(), self.dst.tolist()):
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def edge_subgraph(self, mask) -> "Graph":
        """Same node set, only the edges where ``mask`` is true."""
        mask = np.asarray(mask, dtype=bool)
        return Graph(self.node_count, self.directed, self.src[mask], self.dst[mask],
                     self.labels)


# ---------------------------------------------------------------- edge lists

def parse_edge_list(text: str, directed: bool) -> Graph:
    pairs = []
    nodes = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            # "# node <label>" declares an isolated node; other comments are ignored
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "node" and parts[1].isdigit():
                nodes.append(int(parts[1]))
            continue
        parts = line.split()
        if len(parts) != 2 or not (parts[0].isdigit() and parts[1].isdigit()):
            raise GraphFormatError(f"line {lineno}: expected two nonnegative integer labels, got {raw!r}")
        a, b = int(parts[0]), int(parts[1])
        if a == b:
            raise GraphFormatError(f"line {lineno}: self-loop on node {a}")
        pairs.append((a, b))
    if not pairs and not nodes:
        raise GraphFormatError("edge list is empty")
    return Graph.from_edges(pairs, directed, nodes)


def load_edge_list(path, directed: bool) -> Graph:
    """Read a whitespace-separated edge list; ``#`` starts a comment line."""
    return parse_edge_list(Path(path).read_text(), directed)


def format_edge_list(g: Graph) -> str:
    out = io.StringIO()
    out.write(f"# {'directed' if g.directed else 'undirected'} {g.node_count} nodes {g.edge_count} edges\n")
    touched = np.zeros(g.node_count, dtype=bool)
    touched[g.src] = True
    touched[g.dst] = True
    for v in np.flatnonzero(~touched):
        out.write(f"# node {g.labels[v]}\n")
    for a, b in zip(g.src.tolist(), g.dst.tolist()):
        out.write(f"{g.labels[a]} {g.labels[b]}\n")
    return out.getvalue()


def write_edge_list(g: Graph, path) -> None:
    Path(path).write_text(format_edge_list(g))


def bundled_path(name: str) -> Path:
    path = Path(__file__).with_name("data") / f"{name}.edges"
    if not path.exists():
        raise FileNotFoundError(f"no bundled network named {name!r}")
    return path


# ---------------------------------------------------------------- generators

def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p) on labels 0..n-1, undirected."""
    if n < 2:
        raise ValueError("erdos_renyi needs n >= 2")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return Graph(n, False, iu[keep], ju[keep])


def barabasi_albert(n: int, m: int, seed: int) -> Graph:
    """Preferential attachment grown from a star on ``m + 1`` nodes.

    Each of the remaining ``n - m - 1`` nodes attaches to ``m`` distinct
    existing nodes picked proportionally to degree, so the graph has
    exactly ``m * (n - m)`` edges.
    """
    if n < 2:
        raise ValueError("barabasi_albert needs n >= 2")
    if not 1 <= m < n:
        raise ValueError(f"m must satisfy 1 <= m < n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    src = [0] * m
    dst = list(range(1, m + 1))
    pool = src + dst  # one entry per edge endpoint
    for v in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(pool[int(rng.integers(len(pool)))])
        for t in sorted(targets):
            src.append(t)
            dst.append(v)
            pool.extend((t, v))
    return Graph(n, False, src, dst)


def generate_synthetic(model: str, rng_seed: int, **params) -> Graph:
    if model in ("er", "erdos_renyi"):
        return erdos_renyi(int(params["n"]), float(params["p"]), rng_seed)
    if model in ("ba", "barabasi_albert"):
        return barabasi_albert(int(params["n"]), int(params["m"]), rng_seed)
    raise ValueError(f"unknown graph model {model!r}")


# ---------------------------------------------------------------- statistics

@dataclass(frozen=True)
class NetworkStats:
    node_count: int
    edge_count: int
    component_count: int
    mean_clustering_coefficient: float
    diameter_of_largest_component: int

    CSV_HEADER = ("name", "nodes", "edges", "components", "cc", "diameter")

    def csv_row(self, name: str) -> list[str]:
        return [name, str(self.node_count), str(self.edge_count), str(self.component_count),
                f"{self.mean_clustering_coefficient:.6f}", str(self.diameter_of_largest_component)]


def _bfs_dist(adj: Sequence[set[int]], start: int) -> dict[int, int]:
    dist = {start: 0}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def compute_stats(g: Graph) -> NetworkStats:
    """Component count, mean local clustering and largest-component diameter.

    Directed graphs are measured on their undirected projection (weak
    components).
    """
    adj = g.undirected_adjacency()
    seen: set[int] = set()
    components = []
    for v in range(g.node_count):
        if v not in seen:
            comp = _bfs_dist(adj, v)
            seen.update(comp)
            components.append(sorted(comp))

    local = []
    for v in range(g.node_count):
        nb = list(adj[v])
        k = len(nb)
        if k < 2:
            local.append(0.0)
            continue
        links = sum(1 for i in range(k) for j in range(i + 1, k) if nb[j] in adj[nb[i]])
        local.append(2.0 * links / (k * (k - 1)))

    largest = max(components, key=len)
    diameter = max(max(_bfs_dist(adj, v).values()) for v in largest)
    return NetworkStats(g.node_count, g.edge_count, len(components),
                        float(np.mean(local)), int(diameter))


def write_stats_csv(rows: Iterable[tuple[str, NetworkStats]], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(NetworkStats.CSV_HEADER)
    for name, stats in rows:
        writer.writerow(stats.csv_row(name))
