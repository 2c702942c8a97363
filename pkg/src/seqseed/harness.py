"""Coordinated experiment grids: config parsing, execution and CSV/manifest output.

Config files are plain ``key = value`` lines (``#`` comments)::

    network.tribes = bundled:tribes16 directed
    network.ba = ba n=1000 m=2 seed=1
    network.mine = file:/data/graph.edges undirected
    pp = 0.05, 0.1
    budget = 4, 3%
    ranking = random, degree, greedy
    instances = 10000
    master_seed = 42
    oracle = on
    oracle_cap = 10000000
    greedy_sims = 10000
    greedy_seed = 1
    random_seed = 2
    greedy_cache =
    audit_every = 1000

Keys starting with ``meta.`` are ignored, so a run manifest is itself a
valid config that reproduces the run.
"""
from __future__ import annotations

import csv
import io
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import NAME as BACKEND_NAME
from .engine import SeedBudget, coverage_pair, queries_agree, run_sequential, run_single_stage
from .graph import Graph, bundled_path, generate_synthetic, load_edge_list
from .instances import EdgeStateInstance, derive_seed, sample_states
from .oracle import max_coverage
from .ranking import STRATEGIES, cached_greedy, rank_degree, rank_greedy_marginal, rank_random
from .stats import ComparisonRecord, SUMMARY_COLUMNS, format_summary_row, gain, summarize_config

RECORD_COLUMNS = ("network", "pp", "budget", "ranking", "instance_seed", "c_sn", "c_sq", "c_max",
                  "gain_pct", "seeds_saved", "sn_steps", "sq_steps", "optimal_seeds")

# stream tags for derive_seed
_INSTANCE_STREAM = 1
_RANDOM_RANK_STREAM = 2


class ConfigError(ValueError):
    """Invalid or incomplete grid configuration."""


class AuditError(RuntimeError):
    """SN and SQ runs observed different states for a shared channel."""


@dataclass(frozen=True)
class NetworkSource:
    name: str
    spec: str

    def load(self) -> Graph:
        kind, *rest = self.spec.split()
        opts = dict(tok.split("=", 1) for tok in rest if "=" in tok)
        flags = {tok for tok in rest if "=" not in tok}
        if kind.startswith("bundled:") or kind.startswith("file:"):
            if flags - {"directed", "undirected"} or len(flags) != 1:
                raise ConfigError(f"network {self.name}: give exactly one of directed/undirected")
            path = bundled_path(kind[8:]) if kind.startswith("bundled:") else Path(kind[5:])
            return load_edge_list(path, "directed" in flags)
        if kind in ("ba", "er"):
            try:
                seed = int(opts.pop("seed", 0))
                return generate_synthetic(kind, seed, **opts)
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"network {self.name}: {exc}") from exc
        raise ConfigError(f"network {self.name}: unknown source {self.spec!r}")


@dataclass(frozen=True)
class ExperimentGrid:
    networks: tuple[NetworkSource, ...]
    pp_values: tuple[float, ...]
    budgets: tuple[str, ...]
    rankings: tuple[str, ...]
    instances: int = 10000
    master_seed: int = 0
    oracle: bool = True
    oracle_cap: int = 10_000_000
    greedy_sims: int = 10000
    greedy_seed: int = 1
    random_seed: int = 2
    greedy_cache: str = ""
    audit_every: int = 1000

    def __post_init__(self):
        if not (self.networks and self.pp_values and self.budgets and self.rankings):
            raise ConfigError("grid needs at least one network, pp, budget and ranking")
        if self.instances < 1:
            raise ConfigError("instances must be >= 1")
        for pp in self.pp_values:
            if not 0 < pp <= 1:
                raise ConfigError(f"pp {pp} outside (0, 1]")
        for r in self.rankings:
            if r not in STRATEGIES:
                raise ConfigError(f"unknown ranking {r!r}")
        names = [n.name for n in self.networks]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate network names")

    @property
    def cell_count(self) -> int:
        return len(self.networks) * len(self.pp_values) * len(self.budgets) * len(self.rankings)

    def to_config(self) -> str:
        lines = [f"network.{n.name} = {n.spec}" for n in self.networks]
        lines += [
            "pp = " + ", ".join(repr(p) for p in self.pp_values),
            "budget = " + ", ".join(self.budgets),
            "ranking = " + ", ".join(self.rankings),
            f"instances = {self.instances}",
            f"master_seed = {self.master_seed}",
            f"oracle = {'on' if self.oracle else 'off'}",
            f"oracle_cap = {self.oracle_cap}",
            f"greedy_sims = {self.greedy_sims}",
            f"greedy_seed = {self.greedy_seed}",
            f"random_seed = {self.random_seed}",
            f"greedy_cache = {self.greedy_cache}",
            f"audit_every = {self.audit_every}",
        ]
        return "\n".join(lines) + "\n"


_INT_KEYS = ("instances", "master_seed", "oracle_cap", "greedy_sims", "greedy_seed",
             "random_seed", "audit_every")


def _split_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def parse_config(text: str, overrides: dict | None = None) -> ExperimentGrid:
    networks = []
    kw: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key.startswith("meta."):
            continue
        if key.startswith("network."):
            networks.append(NetworkSource(key[8:], value))
        elif key == "pp":
            kw["pp_values"] = tuple(float(v) for v in _split_list(value))
        elif key == "budget":
            kw["budgets"] = tuple(_split_list(value))
        elif key == "ranking":
            kw["rankings"] = tuple(_split_list(value))
        elif key == "oracle":
            if value not in ("on", "off"):
                raise ConfigError(f"line {lineno}: oracle must be on or off")
            kw["oracle"] = value == "on"
        elif key == "greedy_cache":
            kw["greedy_cache"] = value
        elif key in _INT_KEYS:
            try:
                kw[key] = int(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: {key} must be an integer") from None
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    kw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    for required in ("pp_values", "budgets", "rankings"):
        if required not in kw:
            raise ConfigError(f"missing key {required.split('_')[0]!r}")
    try:
        return ExperimentGrid(networks=tuple(networks), **kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, overrides: dict | None = None) -> ExperimentGrid:
    return parse_config(Path(path).read_text(), overrides)


# ---------------------------------------------------------------- execution

@dataclass
class _Group:
    """Everything needed to run one (network, pp) block of instances."""
    net_index: int
    pp_index: int
    name: str
    graph: Graph
    pp: float
    budgets: list[int]
    rankings: tuple[str, ...]
    fixed_orders: dict = field(default_factory=dict)
    oracle_budgets: frozenset = frozenset()
    master_seed: int = 0
    random_seed: int = 0
    oracle_cap: int = 0
    audit_every: int = 0


def _label_join(g: Graph, nodes) -> str:
    return ";".join(str(int(g.labels[v])) for v in nodes)


def _run_chunk(group: _Group, start: int, stop: int):
    """Rows for instances ``start..stop-1`` keyed by (budget index, ranking index)."""
    g = group.graph
    out = {(b, r): [] for b in range(len(group.budgets)) for r in range(len(group.rankings))}
    audits = 0
    for i in range(start, stop):
        seed = derive_seed(group.master_seed, _INSTANCE_STREAM, group.net_index, group.pp_index, i)
        states = sample_states(g.edge_count, group.pp, seed)
        orders = dict(group.fixed_orders)
        if "random" in group.rankings:
            orders["random"] = rank_random(
                g, derive_seed(group.random_seed, _RANDOM_RANK_STREAM, group.net_index, i)).order
        inst = None
        for b, n in enumerate(group.budgets):
            c_max, witness = None, ""
            if n in group.oracle_budgets:
                inst = inst or EdgeStateInstance(g, group.pp, seed, states)
                res = max_coverage(inst, n, group.oracle_cap)
                c_max, witness = res.c_max, _label_join(g, res.optimal_seed_set)
            for r, strategy in enumerate(group.rankings):
                order = orders[strategy]
                c_sn, c_sq, saved, sn_steps, sq_steps = coverage_pair(g, states, order, n)
                rec = ComparisonRecord(group.name, group.pp, n, strategy, seed, c_sn, c_sq, c_max,
                                       saved, sn_steps, sq_steps, witness)
                rec.check()
                out[(b, r)].append(rec)
                if group.audit_every and i % group.audit_every == 0:
                    inst = inst or EdgeStateInstance(g, group.pp, seed, states)
                    if not queries_agree(run_single_stage(inst, order, n, record_queries=True),
                                         run_sequential(inst, order, n, record_queries=True)):
                        raise AuditError(f"coordination audit failed on instance {seed}")
                    audits += 1
    return out, audits


def _run_chunk_star(args):
    return _run_chunk(*args)


def record_row(rec: ComparisonRecord) -> list:
    g = "" if rec.c_max is None else f"{gain(rec.c_sq, rec.c_sn, rec.c_max):.6f}"
    return [rec.network, repr(rec.pp), rec.budget, rec.ranking, rec.instance_seed, rec.c_sn, rec.c_sq,
            "" if rec.c_max is None else rec.c_max, g, rec.seeds_saved, rec.sn_steps, rec.sq_steps,
            rec.optimal_seeds]


def read_records(path) -> list[ComparisonRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(ComparisonRecord(
                row["network"], float(row["pp"]), int(row["budget"]), row["ranking"],
                int(row["instance_seed"]), int(row["c_sn"]), int(row["c_sq"]),
                int(row["c_max"]) if row["c_max"] else None, int(row["seeds_saved"]),
                int(row["sn_steps"]), int(row["sq_steps"]), row["optimal_seeds"]))
    return out


def summarize_records(records) -> list[dict]:
    """One summary per configuration, in first-appearance order."""
    cells: dict = {}
    for rec in records:
        cells.setdefault(rec.config, []).append(rec)
    return [summarize_config(recs) for recs in cells.values()]


def write_summary(rows, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for row in rows:
        writer.writerow(format_summary_row(row))


def worker_count(default: int = 1) -> int:
    value = os.environ.get("SEQSEED_WORKERS", "")
    return max(1, int(value)) if value.strip() else default


@dataclass
class RunResult:
    records: list[ComparisonRecord]
    summaries: list[dict]
    manifest: str
    out_dir: Path | None


def run_grid(grid: ExperimentGrid, out_dir=None, workers: int | None = None, log=None) -> RunResult:
    """Run every (network, pp, budget, ranking) cell on shared coordinated instances.

    Instances depend only on (master_seed, network, pp, instance index), so
    all budgets and rankings of a (network, pp) pair see identical channel
    states.  Output order is fixed by the grid, independent of ``workers``.
    """
    workers = worker_count() if workers is None else max(1, workers)
    started = time.time()
    meta = [f"meta.version = {__version__}", f"meta.backend = {BACKEND_NAME}",
            f"meta.python = {platform.python_version()}", f"meta.numpy = {np.__version__}"]
    cells: dict[tuple, list[ComparisonRecord]] = {}
    audits = 0
    for ni, src in enumerate(grid.networks):
        t0 = time.time()
        g = src.load()
        budgets = [SeedBudget.parse(b, g.node_count).n for b in grid.budgets]
        meta.append(f"meta.network.{src.name} = nodes={g.node_count} edges={g.edge_count} "
                    f"directed={g.directed} budgets={','.join(map(str, budgets))}")
        oracle_ok = set()
        if grid.oracle:
            for n in budgets:
                if not g.directed or math.comb(g.node_count, n) <= grid.oracle_cap:
                    oracle_ok.add(n)
                else:
                    meta.append(f"meta.oracle_skipped.{src.name}.{n} = C({g.node_count},{n}) exceeds cap")
        degree = rank_degree(g).order if "degree" in grid.rankings else None
        for pi, pp in enumerate(grid.pp_values):
            fixed = {}
            if degree is not None:
                fixed["degree"] = degree
            if "greedy" in grid.rankings:
                fixed["greedy"] = cached_greedy(g, pp, grid.greedy_sims, grid.greedy_seed,
                                                grid.greedy_cache or None).order
            if "greedy_marginal" in grid.rankings:
                fixed["greedy_marginal"] = rank_greedy_marginal(g, pp, grid.greedy_sims,
                                                                grid.greedy_seed, max(budgets)).order
            group = _Group(ni, pi, src.name, g, pp, budgets, grid.rankings, fixed,
                           frozenset(oracle_ok), grid.master_seed, grid.random_seed,
                           grid.oracle_cap, grid.audit_every)
            chunk = max(1, math.ceil(grid.instances / (workers * 4)))
            spans = [(group, s, min(s + chunk, grid.instances)) for s in range(0, grid.instances, chunk)]
            if workers == 1:
                parts = [_run_chunk(*span) for span in spans]
            else:
                with ProcessPoolExecutor(max_workers=workers) as pool:
                    parts = list(pool.map(_run_chunk_star, spans))
            for b, n in enumerate(budgets):
                for r, strategy in enumerate(grid.rankings):
                    key = (src.name, pp, n, strategy)
                    cells.setdefault(key, [])
                    for part, _ in parts:
                        cells[key].extend(part[(b, r)])
            audits += sum(a for _, a in parts)
            if log:
                log(f"{src.name} pp={pp}: {grid.instances} instances done")
        meta.append(f"meta.seconds.{src.name} = {time.time() - t0:.3f}")

    records = [rec for recs in cells.values() for rec in recs]
    summaries = [summarize_config(recs) for recs in cells.values()]
    meta += [f"meta.cells = {len(cells)}", f"meta.records = {len(records)}",
             f"meta.audits = {audits}", f"meta.seconds.total = {time.time() - started:.3f}"]
    manifest = grid.to_config() + "\n".join(meta) + "\n"

    out = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _atomic_write(out / "records.csv", lambda fh: _write_records(records, fh))
        _atomic_write(out / "summary.csv", lambda fh: write_summary(summaries, fh))
        _atomic_write(out / "manifest.txt", lambda fh: fh.write(manifest))
    return RunResult(records, summaries, manifest, out)


def _write_records(records, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(RECORD_COLUMNS)
    for rec in records:
        writer.writerow(record_row(rec))


def _atomic_write(path: Path, fill) -> None:
    partial = path.with_name(path.name + ".partial")
    with open(partial, "w", newline="") as fh:
        fill(fh)
    partial.replace(path)


def records_csv_text(records) -> str:
    buf = io.StringIO()
    _write_records(records, buf)
    return buf.getvalue()


def grid_with(grid: ExperimentGrid, **changes) -> ExperimentGrid:
    return replace(grid, **changes)
