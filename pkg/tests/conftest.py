import itertools

import numpy as np
import pytest

from seqseed import _backend
from seqseed.graph import Graph
from seqseed.instances import EdgeStateInstance


def path_graph(n, directed=False):
    return Graph(n, directed, range(n - 1), range(1, n))


def cycle_graph(n, directed=False):
    return Graph(n, directed, range(n), [(i + 1) % n for i in range(n)])


def star_graph(leaves):
    return Graph(leaves + 1, False, [0] * leaves, range(1, leaves + 1))


def complete_graph(n, directed=False):
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b and (directed or a < b)]
    src, dst = zip(*pairs)
    return Graph(n, directed, src, dst)


def small_topologies():
    """Named graphs with at most 10 edges, undirected and directed."""
    g = {}
    for n in (2, 3, 4, 6, 8):
        g[f"path{n}"] = path_graph(n)
    for k in (3, 5, 7):
        g[f"star{k}"] = star_graph(k)
    for n in (3, 4, 6):
        g[f"cycle{n}"] = cycle_graph(n)
    g["k3"] = complete_graph(3)
    g["k4"] = complete_graph(4)
    g["tree7"] = Graph(7, False, [0, 0, 1, 1, 2, 2], [1, 2, 3, 4, 5, 6])
    g["spider"] = Graph(7, False, [0, 1, 0, 3, 0, 5], [1, 2, 3, 4, 5, 6])
    g["two_edges"] = Graph(4, False, [0, 2], [1, 3])
    g["triangle_plus_path"] = Graph(7, False, [0, 1, 2, 3, 4, 5], [1, 2, 0, 4, 5, 6])
    g["isolated_mix"] = Graph(6, False, [0, 1], [1, 2])
    g["bowtie"] = Graph(5, False, [0, 1, 2, 2, 3, 4], [1, 2, 0, 3, 4, 2])
    g["dpath5"] = path_graph(5, directed=True)
    g["dcycle5"] = cycle_graph(5, directed=True)
    g["dk3"] = complete_graph(3, directed=True)
    g["dstar_in"] = Graph(5, True, [1, 2, 3, 4], [0, 0, 0, 0])
    g["dstar_out"] = Graph(5, True, [0, 0, 0, 0], [1, 2, 3, 4])
    g["dmixed"] = Graph(6, True, [0, 1, 2, 3, 4, 5, 1, 3], [1, 2, 0, 4, 5, 3, 0, 2])
    return g


def all_instances(g):
    """Every channel-state configuration of ``g`` (2**edge_count of them)."""
    for bits in itertools.product((0, 1), repeat=g.edge_count):
        yield EdgeStateInstance(g, 1.0, None, np.array(bits, dtype=np.uint8))


@pytest.fixture(params=sorted(_backend.available()))
def kernels(request):
    return _backend.available()[request.param]


def staged_instance():
    """Hand-built 16-node directed configuration where one cascade swallows two seeds.

    Labels 1..16.  Active channels: 6->11, 11->15, 11->9, 9->10, 16->11,
    12->14 and, off the ranked nodes, 2->3->4.  A few inactive channels
    give the hubs extra edges.
    """
    active = [(6, 11), (11, 15), (11, 9), (9, 10), (16, 11), (12, 14), (2, 3), (3, 4)]
    inactive = [(6, 1), (6, 12), (11, 6), (15, 1), (16, 5), (1, 7), (12, 13), (8, 6)]
    g = Graph.from_edges(active + inactive, directed=True, nodes=range(1, 17))
    lm = g.label_map
    inst = EdgeStateInstance.from_active_edges(g, [(lm[a], lm[b]) for a, b in active])
    ranking = [lm[v] for v in (6, 11, 15, 16, 1, 12, 2, 3, 4, 5, 7, 8, 9, 10, 13, 14)]
    return g, inst, ranking


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def report():
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    def _report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
