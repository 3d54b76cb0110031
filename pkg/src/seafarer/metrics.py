"""ROC-AUC and cross-seed run summaries."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


def roc_auc(pairs: Iterable[tuple[float, int]]) -> float:
    """Probability a random positive outscores a random negative (ties count 0.5).

    Rank-based O(n log n) computation of the Mann-Whitney statistic with
    average ranks for tied scores.
    """
    pairs = list(pairs)
    scores = np.asarray([s for s, _ in pairs], dtype=np.float64)
    labels = np.asarray([int(l) for _, l in pairs])
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    if not np.all((labels == 0) | (labels == 1)):
        raise ValueError("labels must be 0 or 1")
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError(
            f"AUC needs at least one positive and one negative (got {n_pos} pos, {n_neg} neg)"
        )
    n = len(pairs)
    order = np.argsort(scores, kind="mergesort")
    s_sorted = scores[order]
    new_group = np.r_[True, s_sorted[1:] != s_sorted[:-1]]
    starts = np.flatnonzero(new_group)
    counts = np.diff(np.r_[starts, n])
    # 1-based rank averaged within each tie group
    group_rank = starts + (counts + 1) / 2.0
    ranks = np.empty(n)
    ranks[order] = group_rank[np.cumsum(new_group) - 1]
    rank_sum_pos = float(ranks[labels == 1].sum())
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


@dataclass
class RunSummary:
    """Mean/sd AUC per iteration across same-shape runs."""

    iters: list[int]
    mean_auc: list[float]
    sd_auc: list[float]
    n_runs: int
    final_auc_mean: float
    label_efficiency: float

    def rows(self) -> list[tuple[int, float, float, int]]:
        return [
            (it, m, s, self.n_runs)
            for it, m, s in zip(self.iters, self.mean_auc, self.sd_auc)
        ]


def summarize(records: Sequence) -> RunSummary:
    """Aggregate a list of same-config RunRecords (or bare AUC curves).

    Standard deviation uses the n-1 denominator (0.0 for a single run).
    ``label_efficiency`` is the area under the (iteration, mean AUC) curve
    normalized by the iteration span, a scalar in [0, 1] for full curves.
    """
    if not records:
        raise ValueError("no records to summarize")
    curves = []
    iters = None
    for rec in records:
        if hasattr(rec, "rows"):
            cur_iters = [row.iter for row in rec.rows]
            curve = [row.auc for row in rec.rows]
        else:
            curve = list(rec)
            cur_iters = list(range(1, len(curve) + 1))
        if iters is None:
            iters = cur_iters
        elif cur_iters != iters:
            raise ValueError("records do not share the same iteration grid")
        curves.append(curve)
    matrix = np.asarray(curves, dtype=np.float64)
    mean = matrix.mean(axis=0)
    sd = matrix.std(axis=0, ddof=1) if len(curves) > 1 else np.zeros(matrix.shape[1])
    if len(iters) > 1:
        efficiency = float(np.trapezoid(mean, iters) / (iters[-1] - iters[0]))
    else:
        efficiency = float(mean[0])
    return RunSummary(
        iters=list(iters),
        mean_auc=mean.tolist(),
        sd_auc=sd.tolist(),
        n_runs=len(curves),
        final_auc_mean=float(mean[-1]),
        label_efficiency=efficiency,
    )


def write_summary_csv(summary: RunSummary, path: str) -> None:
    """Write the documented ``iter,mean_auc,sd_auc,n_runs`` table."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iter", "mean_auc", "sd_auc", "n_runs"])
        for it, m, s, n in summary.rows():
            writer.writerow([it, repr(m), repr(s), n])
