"""Regenerate src/seqseed/data/tribes16.edges.

A 16-node stand-in for the small dense directed tribes network: 57
reciprocated ties (114 directed edges), one component, diameter 3, mean
clustering within 0.02 of 0.519.  Candidates come from a three-group
planted-partition family; among those matching the structural profile the
kept graph is the one whose single-stage coverages (random, degree and
greedy rankings, 4 seeds, five propagation probabilities) are closest to
the published single-stage column.  Sequential coverage, gains, maximum
coverage and seed savings play no part in the selection.

Runtime is a few minutes with the compiled kernels.
"""
from pathlib import Path

import numpy as np

from seqseed._backend import kernels
from seqseed.graph import Graph, compute_stats, format_edge_list
from seqseed.instances import derive_seed, sample_states
from seqseed.ranking import rank_degree, rank_greedy

N, PAIRS, TARGET_CC = 16, 57, 0.519
PPS = (0.05, 0.1, 0.15, 0.2, 0.25)
# published single-stage means, rows random / degree / greedy
PUBLISHED_SN = np.array([
    [5.43, 7.43, 9.65, 11.76, 13.34],
    [5.59, 7.54, 9.56, 11.45, 12.96],
    [5.73, 7.88, 10.14, 12.22, 13.72],
])
INSTANCES, GREEDY_SIMS, CANDIDATES = 2000, 2000, 400


def candidate(seed):
    rng = np.random.default_rng(seed)
    sizes = rng.choice([[6, 5, 5], [7, 5, 4], [8, 4, 4], [6, 6, 4]])
    groups = np.repeat([0, 1, 2], sizes)
    inter = rng.uniform(0.1, 0.7)
    iu, ju = np.triu_indices(N, k=1)
    same = groups[iu] == groups[ju]
    weight = np.where(same, 1.0, inter) * rng.uniform(0.3, 1.7, iu.size)
    keep = np.argsort(-weight, kind="stable")[:PAIRS]
    return Graph(N, False, iu[keep], ju[keep])


def directed(und):
    return Graph(N, True, np.concatenate([und.src, und.dst]), np.concatenate([und.dst, und.src]))


def sn_means(g):
    out = np.zeros((3, len(PPS)))
    degree = rank_degree(g).order
    for k, pp in enumerate(PPS):
        greedy = rank_greedy(g, pp, GREEDY_SIMS, 1).order
        for i in range(INSTANCES):
            states = sample_states(g.edge_count, pp, derive_seed(7, k, i))
            rnd = np.random.default_rng(derive_seed(8, i)).permutation(N).astype(np.int32)
            for r, order in enumerate((rnd, degree, greedy)):
                _, _, new, _ = kernels.cascade(g.indptr, g.indices, g.channel, states, order, 4, False, None)
                out[r, k] += new[0]
    return out / INSTANCES


def main():
    best = None
    for seed in range(CANDIDATES):
        und = candidate(seed)
        st = compute_stats(und)
        if st.component_count != 1 or st.diameter_of_largest_component != 3 \
                or abs(st.mean_clustering_coefficient - TARGET_CC) > 0.02:
            continue
        g = directed(und)
        err = float(np.sum(((sn_means(g) - PUBLISHED_SN) / PUBLISHED_SN) ** 2))
        if best is None or err < best[0]:
            best = (err, seed, g, st)
            print(f"seed {seed}: cc={st.mean_clustering_coefficient:.3f} sn-error={err:.5f}")
    err, seed, g, st = best
    header = (f"# synthetic 16-node directed stand-in (generator seed {seed}, sn-error {err:.5f}); "
              f"cc={st.mean_clustering_coefficient:.3f} diameter={st.diameter_of_largest_component}\n")
    out = Path(__file__).resolve().parents[1] / "src/seqseed/data/tribes16.edges"
    out.write_text(header + format_edge_list(g))
    print(f"kept seed {seed}: {g!r}")


if __name__ == "__main__":
    main()
