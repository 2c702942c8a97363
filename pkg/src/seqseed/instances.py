"""Coordinated execution: pre-sampled activity states for every transmission channel.

A channel is an undirected edge (one shared state for both directions) or
a directed edge.  The state of channel ``i`` under ``instance_seed`` is a
pure function of the pair, computed with a SplitMix64-style mixing hash,
so any single state can be recomputed on demand and a whole instance is
reproducible from its seed alone.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .graph import Graph

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_STREAM = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def _mix(x: np.ndarray) -> np.ndarray:
    x = x ^ (x >> np.uint64(30))
    x = x * _M1
    x = x ^ (x >> np.uint64(27))
    x = x * _M2
    return x ^ (x >> np.uint64(31))


def channel_uniforms(instance_seed: int, channels) -> np.ndarray:
    """Uniform [0, 1) variates keyed by ``(instance_seed, channel index)``."""
    idx = np.asarray(channels, dtype=np.uint64)
    seed = np.full(idx.shape, int(instance_seed) & _MASK64, dtype=np.uint64)
    with np.errstate(over="ignore"):
        key = _mix(seed * _GOLDEN + _STREAM)
        x = _mix(key ^ ((idx + np.uint64(1)) * _GOLDEN))
    return (x >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def derive_seed(master_seed: int, *path: int) -> int:
    """64-bit child seed for ``(master_seed, *path)``; distinct paths give independent streams."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _check_pp(pp: float) -> float:
    pp = float(pp)
    if not 0.0 < pp <= 1.0:
        raise ValueError(f"propagation probability must lie in (0, 1], got {pp}")
    return pp


class EdgeStateInstance:
    """One coordinated-execution sample: an activity bit per channel of ``graph``."""

    __slots__ = ("graph", "pp", "instance_seed", "states")

    def __init__(self, graph: Graph, pp: float, instance_seed: int | None, states):
        states = np.ascontiguousarray(states, dtype=np.uint8)
        if states.shape != (graph.edge_count,):
            raise ValueError(f"expected {graph.edge_count} channel states, got {states.shape}")
        states.setflags(write=False)
        self.graph = graph
        self.pp = pp
        self.instance_seed = instance_seed
        self.states = states

    @classmethod
    def from_states(cls, graph: Graph, states, pp: float = 1.0) -> "EdgeStateInstance":
        """Instance with explicitly chosen states (hand-built configurations)."""
        return cls(graph, pp, None, np.asarray(states, dtype=bool).astype(np.uint8))

    @classmethod
    def from_active_edges(cls, graph: Graph, active) -> "EdgeStateInstance":
        """Instance whose active channels are the listed ``(src, dst)`` dense-id pairs."""
        index = {e: i for i, e in enumerate(graph.edges)}
        states = np.zeros(graph.edge_count, dtype=np.uint8)
        for a, b in active:
            if not graph.directed and a > b:
                a, b = b, a
            states[index[(a, b)]] = 1
        return cls(graph, 1.0, None, states)

    @property
    def channel_count(self) -> int:
        return int(self.states.size)

    @property
    def active_count(self) -> int:
        return int(self.states.sum())

    def channel_state(self, channel: int) -> bool:
        """State of one channel, recomputed from the seed when the instance is seeded."""
        if self.instance_seed is None:
            return bool(self.states[channel])
        return bool(channel_uniforms(self.instance_seed, [channel])[0] < self.pp)

    def to_bytes(self) -> bytes:
        """Little-endian uint64 channel count followed by LSB-first packed bits."""
        return struct.pack("<Q", self.channel_count) + np.packbits(self.states, bitorder="little").tobytes()

    @staticmethod
    def states_from_bytes(data: bytes) -> np.ndarray:
        (count,) = struct.unpack_from("<Q", data)
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8, offset=8), bitorder="little")
        if bits.size < count:
            raise ValueError("truncated instance dump")
        return bits[:count]

    def dump(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, graph: Graph, path, pp: float = 1.0) -> "EdgeStateInstance":
        return cls(graph, pp, None, cls.states_from_bytes(Path(path).read_bytes()))


def sample_states(channel_count: int, pp: float, instance_seed: int) -> np.ndarray:
    pp = _check_pp(pp)
    u = channel_uniforms(instance_seed, np.arange(channel_count, dtype=np.uint64))
    return (u < pp).astype(np.uint8)


def sample_instance(g: Graph, pp: float, instance_seed: int) -> EdgeStateInstance:
    """Draw every channel independently active with probability ``pp``."""
    pp = _check_pp(pp)
    return EdgeStateInstance(g, pp, int(instance_seed), sample_states(g.edge_count, pp, instance_seed))


def active_subgraph(inst: EdgeStateInstance) -> Graph:
    return inst.graph.edge_subgraph(inst.states.astype(bool))
