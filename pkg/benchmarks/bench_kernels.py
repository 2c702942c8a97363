"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--instances 200]

Each workload is run on identical inputs with both backends; outputs are
compared before timings are reported.
"""
import argparse
import timeit

import numpy as np

from seqseed import _backend, _pykernels
from seqseed.graph import barabasi_albert, bundled_path, load_edge_list
from seqseed.instances import derive_seed, sample_states
from seqseed.ranking import rank_degree


def workloads(instances):
    ba = barabasi_albert(1000, 2, 1)
    ba_states = [sample_states(ba.edge_count, 0.1, derive_seed(1, i)) for i in range(instances)]
    ba_order = rank_degree(ba).order
    tribes = load_edge_list(bundled_path("tribes16"), directed=True)
    tr_states = [sample_states(tribes.edge_count, 0.2, derive_seed(2, i)) for i in range(instances)]

    def cascade_pair(k):
        out = []
        for st in ba_states:
            for sequential in (False, True):
                out.append(k.cascade(ba.indptr, ba.indices, ba.channel, st, ba_order, 30, sequential, None)[2])
        return out

    def directed_oracle(k):
        return [k.best_subset(k.reach_bitsets(tribes.indptr, tribes.indices, tribes.channel, st), 4)
                for st in tr_states]

    def components(k):
        return [k.component_labels(ba.node_count, ba.src, ba.dst, st) for st in ba_states]

    return {
        f"SN+SQ cascade, BA(1000,2), n=30, {instances} instances": cascade_pair,
        f"directed oracle, 16 nodes, n=4, {instances} instances": directed_oracle,
        f"union-find components, BA(1000,2), {instances} instances": components,
    }


def same(a, b):
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    if isinstance(a, (list, tuple)):
        return len(a) == len(b) and all(same(x, y) for x, y in zip(a, b))
    return a == b


def same_partition(a, b):
    return all(np.array_equal(x[:, None] == x[None, :], y[:, None] == y[None, :]) for x, y in zip(a, b))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--instances", type=int, default=200)
    args = parser.parse_args(argv)

    backends = _backend.available()
    if "cython" not in backends:
        print("compiled kernels not built; only the fallback is timed")
    print(f"{'workload':58s} " + " ".join(f"{name:>10s}" for name in backends) + "   speedup")
    for label, fn in workloads(args.instances).items():
        results = {name: fn(k) for name, k in backends.items()}
        check = same_partition if "components" in label else same
        if "cython" in results and not check(results["cython"], results["python"]):
            raise SystemExit(f"backends disagree on {label}")
        best = {name: min(timeit.repeat(lambda k=k: fn(k), number=1, repeat=args.repeat))
                for name, k in backends.items()}
        speed = f"{best['python'] / best['cython']:8.1f}x" if "cython" in best else ""
        print(f"{label:58s} " + " ".join(f"{t * 1e3:8.1f}ms" for t in best.values()) + f"  {speed}")


if __name__ == "__main__":
    main()
