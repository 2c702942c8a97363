"""Gain metric, greedy upper bound and paired nonparametric statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

E_RATIO = math.e / (math.e - 1.0)
EXACT_MAX_N = 25


class MetricError(ValueError):
    """Coverage values that violate c_sn <= c_sq <= c_max."""


@dataclass(frozen=True)
class ComparisonRecord:
    network: str
    pp: float
    budget: int
    ranking: str
    instance_seed: int
    c_sn: int
    c_sq: int
    c_max: int | None
    seeds_saved: int
    sn_steps: int = 0
    sq_steps: int = 0
    optimal_seeds: str = ""

    @property
    def config(self) -> tuple:
        return (self.network, self.pp, self.budget, self.ranking)

    def check(self) -> None:
        if self.c_sq < self.c_sn:
            raise MetricError(f"c_sq={self.c_sq} < c_sn={self.c_sn} (instance {self.instance_seed})")
        if self.c_max is not None and self.c_max < self.c_sq:
            raise MetricError(f"c_max={self.c_max} < c_sq={self.c_sq} (instance {self.instance_seed})")


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    delta: float
    n_effective: int
    method: str = "none"


def gain(c_sq: float, c_sn: float, c_max: float) -> float:
    """Percentage of the gap between single-stage and maximum coverage closed by SQ."""
    if c_max < c_sn:
        raise MetricError(f"c_max={c_max} below c_sn={c_sn}")
    if c_max == c_sn:
        if c_sq == c_sn:
            return 0.0
        raise MetricError(f"c_sq={c_sq} exceeds c_sn=c_max={c_max}")
    return (c_sq - c_sn) / (c_max - c_sn) * 100.0


def greedy_upper_bound(c_greedy_sn: float) -> float:
    if c_greedy_sn < 0:
        raise ValueError("coverage cannot be negative")
    return c_greedy_sn * E_RATIO


def _differences(paired) -> np.ndarray:
    arr = np.asarray(paired, dtype=np.float64)
    if arr.ndim == 1:
        return arr
    return arr[:, 0] - arr[:, 1]


def midranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""
    order = np.argsort(values, kind="mergesort")
    sorted_vals = values[order]
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _exact_p(doubled_ranks: np.ndarray, doubled_stat: int) -> float:
    """Two-sided p from the sign-flip distribution of the rank sum."""
    total = int(doubled_ranks.sum())
    dist = np.zeros(total + 1, dtype=np.float64)
    dist[0] = 1.0
    for r in doubled_ranks.astype(np.int64):
        shifted = np.zeros_like(dist)
        shifted[r:] = dist[:dist.size - r]
        dist = dist + shifted
    dist /= dist.sum()
    lower = dist[:doubled_stat + 1].sum()
    upper = dist[doubled_stat:].sum()
    return float(min(1.0, 2.0 * min(lower, upper)))


def wilcoxon_signed_rank(paired, exact_max_n: int = EXACT_MAX_N) -> TestResult:
    """Two-sided signed-rank test on ``c_sq - c_sn``.

    Zero differences are dropped.  Exact sign-flip distribution up to
    ``exact_max_n`` nonzero differences, else normal approximation with tie
    and continuity corrections.  ``paired`` is a sequence of ``(c_sq, c_sn)``
    pairs or a 1-D array of differences.
    """
    d = _differences(paired)
    if d.size == 0:
        raise ValueError("wilcoxon_signed_rank needs at least one pair")
    delta = hodges_lehmann(d)
    nz = d[d != 0]
    n = int(nz.size)
    if n == 0:
        return TestResult(0.0, 1.0, delta, 0)
    ranks = midranks(np.abs(nz))
    w_plus = float(ranks[nz > 0].sum())
    if n <= exact_max_n:
        p = _exact_p(np.rint(2 * ranks).astype(np.int64), int(round(2 * w_plus)))
        return TestResult(w_plus, p, delta, n, "exact")
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(np.abs(nz), return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_counts ** 3 - tie_counts)) / 48.0
    dev = abs(w_plus - mean) - 0.5
    z = max(dev, 0.0) / math.sqrt(var) if var > 0 else 0.0
    p = min(1.0, math.erfc(z / math.sqrt(2.0)))
    return TestResult(w_plus, p, delta, n, "normal")


def _count_le(d: np.ndarray, t: float) -> int:
    """Number of pairs i <= j with d[i] + d[j] <= t (d sorted ascending)."""
    j = np.searchsorted(d, t - d, side="right")
    return int(np.maximum(j - np.arange(d.size), 0).sum())


def _kth_walsh_sum(d: np.ndarray, k: int) -> float:
    """k-th smallest (1-based) of d[i] + d[j] over i <= j, d sorted ascending."""
    m = d.size
    idx = np.arange(m)
    lo, hi = 2 * d[0] - 1.0, 2 * d[-1]
    c_lo = 0
    while True:
        c_hi = _count_le(d, hi)
        if c_hi - c_lo <= 4 * m + 16:
            # enumerate the sums in (lo, hi]
            start = np.maximum(np.searchsorted(d, lo - d, side="right"), idx)
            stop = np.searchsorted(d, hi - d, side="right")
            vals = np.concatenate([d[i] + d[start[i]:stop[i]] for i in range(m) if stop[i] > start[i]])
            vals.sort()
            return float(vals[k - c_lo - 1])
        first = np.maximum(np.searchsorted(d, lo - d, side="right"), idx)
        ok = first < m
        smallest = float((d[ok] + d[first[ok]]).min())
        last = np.searchsorted(d, hi - d, side="right") - 1
        ok = last >= idx
        largest = float((d[ok] + d[last[ok]]).max())
        if smallest == largest:
            return smallest
        mid = smallest + (largest - smallest) / 2.0
        if mid >= largest:
            mid = smallest
        c_mid = _count_le(d, mid)
        if c_mid >= k:
            hi = mid
        else:
            lo, c_lo = mid, c_mid


def hodges_lehmann(paired) -> float:
    """Median of the Walsh averages of the paired differences (zeros kept)."""
    d = np.sort(_differences(paired))
    if d.size == 0:
        raise ValueError("hodges_lehmann needs at least one pair")
    total = d.size * (d.size + 1) // 2
    if total % 2:
        s = _kth_walsh_sum(d, total // 2 + 1)
    else:
        s = (_kth_walsh_sum(d, total // 2) + _kth_walsh_sum(d, total // 2 + 1)) / 2.0
    return s / 2.0


SUMMARY_COLUMNS = (
    "network", "pp", "budget", "ranking", "instances",
    "single_stage", "pct_of_max", "sequential", "increase", "gain_pct",
    "mean_c_max", "mean_gain_pct",
    "frac_sq_gt_sn", "frac_improve_gt_5pct", "mean_seeds_saved_pct",
    "wilcoxon_p", "hl_delta",
)


def summarize_config(records: Sequence[ComparisonRecord]) -> dict:
    """Table-style aggregate over the instances of one configuration.

    ``gain_pct`` is computed from the mean coverages; ``mean_gain_pct`` is the
    mean of per-instance gains.  Oracle-derived columns are None when any
    record lacks ``c_max``.
    """
    if not records:
        raise ValueError("summarize_config needs at least one record")
    key = records[0].config
    for r in records:
        if r.config != key:
            raise ValueError(f"mixed configurations: {key} and {r.config}")
        r.check()
    sn = np.array([r.c_sn for r in records], dtype=np.float64)
    sq = np.array([r.c_sq for r in records], dtype=np.float64)
    mean_sn, mean_sq = float(sn.mean()), float(sq.mean())
    have_max = all(r.c_max is not None for r in records)
    row = dict(zip(SUMMARY_COLUMNS[:4], key))
    row["instances"] = len(records)
    row["single_stage"] = mean_sn
    row["sequential"] = mean_sq
    row["increase"] = mean_sq / mean_sn
    if have_max:
        cmax = np.array([r.c_max for r in records], dtype=np.float64)
        mean_max = float(cmax.mean())
        row["mean_c_max"] = mean_max
        row["pct_of_max"] = mean_sn / mean_max
        row["gain_pct"] = gain(mean_sq, mean_sn, mean_max)
        row["mean_gain_pct"] = float(np.mean([gain(a, b, c) for a, b, c in zip(sq, sn, cmax)]))
    else:
        row["mean_c_max"] = row["pct_of_max"] = row["gain_pct"] = row["mean_gain_pct"] = None
    row["frac_sq_gt_sn"] = float(np.mean(sq > sn))
    row["frac_improve_gt_5pct"] = float(np.mean((sq - sn) / sn > 0.05))
    row["mean_seeds_saved_pct"] = float(np.mean([r.seeds_saved / r.budget for r in records])) * 100.0
    test = wilcoxon_signed_rank(np.column_stack([sq, sn]))
    row["wilcoxon_p"] = test.p_value
    row["hl_delta"] = test.delta
    return row


def format_summary_row(row: dict) -> list[str]:
    out = []
    for col in SUMMARY_COLUMNS:
        v = row[col]
        if v is None:
            out.append("")
        elif isinstance(v, float) and col != "pp":
            out.append(f"{v:.6g}" if col == "wilcoxon_p" else f"{v:.6f}")
        else:
            out.append(str(v))
    return out
