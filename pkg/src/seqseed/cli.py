"""Command-line entry point: ``seqseed <subcommand> ...``."""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import __version__
from .engine import SeedBudget, run_sequential, run_single_stage, trace_rows, write_trace
from .graph import (GraphFormatError, bundled_path, compute_stats, generate_synthetic,
                    load_edge_list, write_edge_list, write_stats_csv)
from .harness import ConfigError, load_config, read_records, run_grid, summarize_records, write_summary
from .instances import derive_seed, sample_instance
from .oracle import DEFAULT_SUBSET_CAP, OracleInfeasible, max_coverage
from .ranking import STRATEGIES, make_ranking, write_ranking


def _load_graph(args):
    spec = args.graph
    path = bundled_path(spec[8:]) if spec.startswith("bundled:") else Path(spec)
    return load_edge_list(path, args.directed)


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout
    return open(path, "w", newline="")


def _add_graph_args(p):
    p.add_argument("--graph", required=True, help="edge-list file or bundled:<name>")
    p.add_argument("--directed", action="store_true", help="treat edges as directed")


def cmd_run(args):
    overrides = {"master_seed": args.master_seed, "instances": args.instances}
    grid = load_config(args.config, overrides)
    log = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    result = run_grid(grid, args.out, workers=args.workers, log=log)
    print(f"{len(result.records)} records, {len(result.summaries)} summary rows -> {args.out}")


def cmd_oracle(args):
    g = _load_graph(args)
    budget = SeedBudget.parse(args.n, g.node_count)
    out = _open_out(args.out)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("instance", "instance_seed", "c_max", "optimal_seeds"))
    for i in range(args.instances):
        inst = sample_instance(g, args.pp, derive_seed(args.seed, i))
        if args.dump_dir:
            Path(args.dump_dir).mkdir(parents=True, exist_ok=True)
            inst.dump(Path(args.dump_dir) / f"instance-{i}.bin")
        res = max_coverage(inst, budget.n, args.cap)
        writer.writerow((i, inst.instance_seed, res.c_max,
                         ";".join(str(int(g.labels[v])) for v in res.optimal_seed_set)))
    if out is not sys.stdout:
        out.close()


def cmd_rank(args):
    g = _load_graph(args)
    ranking = make_ranking(g, args.strategy, pp=args.pp, sims=args.sims, rng_seed=args.seed)
    write_ranking(ranking, g, args.out if args.out else "/dev/stdout")


def cmd_stats(args):
    rows = summarize_records(read_records(args.records))
    out = _open_out(args.out)
    write_summary(rows, out)
    if out is not sys.stdout:
        out.close()


def cmd_gen(args):
    params = {"n": args.n}
    if args.model == "ba":
        params["m"] = args.m
    else:
        params["p"] = args.p
    g = generate_synthetic(args.model, args.seed, **params)
    write_edge_list(g, args.out)
    print(f"{g!r} -> {args.out}")


def cmd_stats_net(args):
    g = _load_graph(args)
    name = args.name or Path(args.graph).stem
    out = _open_out(args.out)
    write_stats_csv([(name, compute_stats(g))], out)
    if out is not sys.stdout:
        out.close()


def cmd_trace(args):
    g = _load_graph(args)
    budget = SeedBudget.parse(args.n, g.node_count)
    rows = []
    for i in range(args.instances):
        inst = sample_instance(g, args.pp, derive_seed(args.seed, i))
        ranking = make_ranking(g, args.ranking, pp=args.pp, sims=args.sims,
                               rng_seed=derive_seed(args.seed, 1 << 20, i))
        for run in (run_single_stage, run_sequential):
            rows.extend(trace_rows(inst, run(inst, ranking, budget)))
    out = _open_out(args.out)
    write_trace(rows, out)
    if out is not sys.stdout:
        out.close()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqseed", description=__doc__)
    parser.add_argument("--version", action="version", version=f"seqseed {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment grid from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--master-seed", type=int)
    p.add_argument("--instances", type=int)
    p.add_argument("--workers", type=int, help="worker processes (default: $SEQSEED_WORKERS or 1)")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="exact maximum coverage per sampled instance")
    _add_graph_args(p)
    p.add_argument("--pp", type=float, required=True)
    p.add_argument("--n", required=True, help="seed count or percentage like 3%%")
    p.add_argument("--instances", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="master seed for instance streams")
    p.add_argument("--cap", type=int, default=DEFAULT_SUBSET_CAP)
    p.add_argument("--dump-dir", help="write each instance's packed bitset here")
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("rank", help="compute and export a seed ranking")
    _add_graph_args(p)
    p.add_argument("--strategy", choices=STRATEGIES, required=True)
    p.add_argument("--pp", type=float)
    p.add_argument("--sims", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("stats", help="per-configuration summaries from a record CSV")
    p.add_argument("records")
    p.add_argument("--by", choices=["config"], default="config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("gen", help="write a synthetic graph as an edge list")
    p.add_argument("--model", choices=["ba", "er"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("stats-net", help="node/edge/component/clustering/diameter summary")
    _add_graph_args(p)
    p.add_argument("--name")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats_net)

    p = sub.add_parser("trace", help="per-stage SN/SQ trace for sampled instances")
    _add_graph_args(p)
    p.add_argument("--pp", type=float, required=True)
    p.add_argument("--n", required=True)
    p.add_argument("--ranking", choices=STRATEGIES, default="degree")
    p.add_argument("--sims", type=int, default=1000)
    p.add_argument("--instances", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_trace)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ConfigError, GraphFormatError, OracleInfeasible, ValueError, OSError) as exc:
        print(f"seqseed {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
