"""Scalar metrics, ranking curves, cross-validation, and candidate ranking.

Conventions frozen here:

* scalar metrics predict +1 iff score > threshold (strict);
* any 0/0 metric denominator yields 0, so every metric is total;
* ROC area is trapezoidal (equals the tie-corrected pair-ordering
  statistic); PR area is the step-wise sum, not interpolated, which runs a
  little lower than interpolating tools on the same scores;
* curve points carry the threshold that produced them: a sample is called
  positive at a point when its score is at least that point's threshold.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import balance as balance_mod
from . import boost as boost_mod


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def p(self) -> int:
        return self.tp + self.fn

    @property
    def n(self) -> int:
        return self.tn + self.fp

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass
class ScoredSet:
    """Parallel scores and ±1 labels for one evaluated split."""

    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.scores.shape != self.labels.shape or self.scores.ndim != 1:
            raise ValueError("scores and labels must be parallel 1-d arrays")
        if self.scores.size == 0:
            raise ValueError("scored set must contain at least one sample")
        if not np.all(np.isin(self.labels, (-1, 1))):
            raise ValueError("labels must be +1 or -1")

    def __len__(self) -> int:
        return self.scores.size


def confusion(scored: ScoredSet, threshold: float) -> ConfusionCounts:
    """Counts under the strict rule: predict +1 iff score > threshold."""
    predicted_pos = scored.scores > threshold
    actual_pos = scored.labels == 1
    return ConfusionCounts(
        tp=int(np.sum(predicted_pos & actual_pos)),
        tn=int(np.sum(~predicted_pos & ~actual_pos)),
        fp=int(np.sum(predicted_pos & ~actual_pos)),
        fn=int(np.sum(~predicted_pos & actual_pos)),
    )


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def sensitivity(c: ConfusionCounts) -> float:
    """TP / (TP + FN), the true positive rate."""
    return _ratio(c.tp, c.tp + c.fn)


def specificity(c: ConfusionCounts) -> float:
    """TN / (TN + FP), the true negative rate."""
    return _ratio(c.tn, c.tn + c.fp)


def precision(c: ConfusionCounts) -> float:
    """TP / (TP + FP), the positive predictive value."""
    return _ratio(c.tp, c.tp + c.fp)


def fpr(c: ConfusionCounts) -> float:
    """FP / (FP + TN), the fraction of negatives called positive."""
    return _ratio(c.fp, c.fp + c.tn)


def f1(c: ConfusionCounts) -> float:
    """Harmonic mean of precision and sensitivity: 2TP / (2TP + FP + FN)."""
    return _ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn)


def mcc(c: ConfusionCounts) -> float:
    """Matthews correlation; 0 when any marginal is empty."""
    den = math.sqrt(
        float(c.tp + c.fp) * float(c.tp + c.fn) * float(c.tn + c.fp) * float(c.tn + c.fn)
    )
    return _ratio(float(c.tp) * c.tn - float(c.fp) * c.fn, den)


def _grouped_counts(scored: ScoredSet):
    """Distinct scores descending with cumulative tp/fp after each group."""
    order = np.argsort(-scored.scores, kind="stable")
    s = scored.scores[order]
    pos = (scored.labels[order] == 1).astype(int)
    boundaries = np.flatnonzero(np.diff(s)) + 1  # first index of each new group
    ends = np.append(boundaries, s.size) - 1  # last index within each group
    cum_pos = np.cumsum(pos)
    tp = cum_pos[ends].astype(float)
    fp = (ends + 1) - tp
    thresholds = s[ends]
    return thresholds, tp, fp


def roc_curve(scored: ScoredSet) -> list[tuple[float, float, float]]:
    """(threshold, fpr, tpr) per distinct score, descending, plus anchors.

    The first point is (inf, 0, 0); the last always reaches (1, 1). Tied
    scores collapse into one point.
    """
    n_pos = int(np.sum(scored.labels == 1))
    n_neg = len(scored) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs at least one positive and one negative label")
    thresholds, tp, fp = _grouped_counts(scored)
    points = [(math.inf, 0.0, 0.0)]
    points.extend(
        (float(t), float(fp_i) / n_neg, float(tp_i) / n_pos)
        for t, tp_i, fp_i in zip(thresholds, tp, fp)
    )
    return points


def auroc(scored: ScoredSet) -> float:
    """Trapezoidal area under the ROC curve."""
    points = roc_curve(scored)
    area = 0.0
    for (_, x0, y0), (_, x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def pr_curve(scored: ScoredSet) -> list[tuple[float, float, float]]:
    """(threshold, recall, precision) per distinct score, descending."""
    n_pos = int(np.sum(scored.labels == 1))
    if n_pos == 0:
        raise ValueError("PR needs at least one positive label")
    thresholds, tp, fp = _grouped_counts(scored)
    return [
        (float(t), float(tp_i) / n_pos, _ratio(float(tp_i), float(tp_i + fp_i)))
        for t, tp_i, fp_i in zip(thresholds, tp, fp)
    ]


def aupr(scored: ScoredSet) -> float:
    """Step-wise area: sum of (R_i - R_{i-1}) * P_i with R_0 = 0."""
    area = 0.0
    prev_recall = 0.0
    for _, recall, prec in pr_curve(scored):
        area += (recall - prev_recall) * prec
        prev_recall = recall
    return area


def stratified_kfold(dataset, folds: int, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Seeded stratified partition into ``folds`` (train, test) index pairs.

    Each class is shuffled independently and dealt round-robin, so per-fold
    class ratios track the global ratio as closely as integer counts allow.
    Returned index arrays are sorted ascending.
    """
    if folds < 2:
        raise ValueError("folds must be >= 2")
    labels = np.asarray(dataset.labels)
    rng = np.random.default_rng(seed)
    test_sets: list[list[np.ndarray]] = [[] for _ in range(folds)]
    for cls in (-1, 1):
        members = np.flatnonzero(labels == cls)
        if members.size < folds:
            raise ValueError(
                f"class {cls} has {members.size} members, fewer than {folds} folds"
            )
        shuffled = members[rng.permutation(members.size)]
        for j in range(folds):
            test_sets[j].append(shuffled[j::folds])
    out = []
    everything = np.arange(labels.size)
    for j in range(folds):
        test = np.sort(np.concatenate(test_sets[j]))
        train = np.setdiff1d(everything, test, assume_unique=True)
        out.append((train, test))
    return out


METRIC_FIELDS = (
    "sensitivity", "specificity", "precision", "fpr", "f1", "mcc", "auroc", "aupr",
)


@dataclass(frozen=True)
class MetricRecord:
    sensitivity: float
    specificity: float
    precision: float
    fpr: float
    f1: float
    mcc: float
    auroc: float
    aupr: float

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_FIELDS}


def score_metrics(scored: ScoredSet, threshold: float = 0.5) -> MetricRecord:
    """All scalar metrics at one threshold plus both curve areas."""
    c = confusion(scored, threshold)
    return MetricRecord(
        sensitivity=sensitivity(c),
        specificity=specificity(c),
        precision=precision(c),
        fpr=fpr(c),
        f1=f1(c),
        mcc=mcc(c),
        auroc=auroc(scored),
        aupr=aupr(scored),
    )


def mean_record(records: Sequence[MetricRecord]) -> MetricRecord:
    if not records:
        raise ValueError("cannot average zero records")
    return MetricRecord(
        **{
            name: float(np.mean([getattr(r, name) for r in records]))
            for name in METRIC_FIELDS
        }
    )


@dataclass
class FoldResult:
    repeat: int
    fold: int
    metrics: MetricRecord
    roc: list[tuple[float, float, float]]
    pr: list[tuple[float, float, float]]


@dataclass
class EvalReport:
    """Cross-validation outcome: every fold, per-repeat means, grand mean."""

    per_fold: list[FoldResult]
    repeat_means: list[MetricRecord]
    mean: MetricRecord

    def __post_init__(self):
        recomputed = mean_record([f.metrics for f in self.per_fold])
        for name in METRIC_FIELDS:
            if abs(getattr(recomputed, name) - getattr(self.mean, name)) > 1e-12:
                raise ValueError(f"mean {name} does not match the per-fold average")


def _run_fold(dataset, train_idx, test_idx, balance_config, tree_params, rounds,
              threshold, repeat, fold):
    assert np.intersect1d(train_idx, test_idx).size == 0, "train/test overlap"
    train = dataset.subset(train_idx)
    balanced = balance_mod.rebalance(train, balance_config)
    model = boost_mod.train_adaboost(
        balanced.features, balanced.labels, rounds=rounds, tree_params=tree_params
    )
    test = dataset.subset(test_idx)
    scored = ScoredSet(boost_mod.predict_proba(model, test.features), test.labels)
    return FoldResult(repeat=repeat, fold=fold, metrics=score_metrics(scored, threshold),
                      roc=roc_curve(scored), pr=pr_curve(scored))


def cross_validate(
    dataset,
    balance_config: balance_mod.BalanceConfig,
    tree_params: boost_mod.TreeParams = boost_mod.TreeParams(),
    rounds: int = 100,
    folds: int = 5,
    repeats: int = 5,
    seed: int = 0,
    threshold: float = 0.5,
    threads: int = 1,
) -> EvalReport:
    """Repeated stratified k-fold with rebalancing applied to training only.

    Seeds for the per-repeat splits and per-fold rebalances are all derived
    from ``seed``, so the whole protocol is reproducible from one integer and
    independent of ``threads`` (folds are independent jobs; results are
    gathered in fold order). Test folds are scored exactly as they come.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if threads < 1:
        raise ValueError("threads must be >= 1")
    rng = np.random.default_rng(seed)
    split_seeds = rng.integers(2**31, size=repeats)
    balance_seeds = rng.integers(2**31, size=(repeats, folds))
    n = len(dataset.labels)

    jobs = []
    for r in range(repeats):
        splits = stratified_kfold(dataset, folds, int(split_seeds[r]))
        test_union = np.sort(np.concatenate([test for _, test in splits]))
        assert np.array_equal(test_union, np.arange(n)), (
            "test folds do not partition the dataset"
        )
        for f, (train_idx, test_idx) in enumerate(splits):
            cfg = dataclasses.replace(balance_config, seed=int(balance_seeds[r, f]))
            jobs.append((train_idx, test_idx, cfg, r, f))

    def run(job):
        train_idx, test_idx, cfg, r, f = job
        return _run_fold(dataset, train_idx, test_idx, cfg, tree_params, rounds,
                         threshold, r, f)

    if threads == 1:
        per_fold = [run(job) for job in jobs]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_fold = list(pool.map(run, jobs))

    repeat_means = [
        mean_record([fr.metrics for fr in per_fold if fr.repeat == r])
        for r in range(repeats)
    ]
    return EvalReport(
        per_fold=per_fold,
        repeat_means=repeat_means,
        mean=mean_record([fr.metrics for fr in per_fold]),
    )


def rank_candidates(ensemble, dataset, n: int | None = None) -> list[tuple[str, str, float]]:
    """Score the non-interacting pairs and order them most-likely first.

    Ties in probability fall back to (drug_id, target_id) lexicographic
    order; ``n`` truncates the list.
    """
    neg_idx = np.flatnonzero(dataset.labels == -1)
    if neg_idx.size == 0:
        return []
    subset = dataset.subset(neg_idx)
    probs = boost_mod.predict_proba(ensemble, subset.features)
    rows = sorted(
        ((d, t, float(p)) for (d, t), p in zip(subset.pairs, probs)),
        key=lambda row: (-row[2], row[0], row[1]),
    )
    return rows[:n] if n is not None else rows


def write_report(report: EvalReport, path: str) -> None:
    """JSON dump: one record per fold, per-repeat means, grand mean."""
    doc = {
        "folds": [
            {"repeat": fr.repeat, "fold": fr.fold, **fr.metrics.as_dict()}
            for fr in report.per_fold
        ],
        "repeat_means": [m.as_dict() for m in report.repeat_means],
        "mean": report.mean.as_dict(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _write_curve(points, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("threshold,x,y\n")
        for t, x, y in points:
            fh.write(f"{t:.17g},{x:.17g},{y:.17g}\n")


def write_curves(report: EvalReport, directory: str) -> list[str]:
    """One CSV per fold per curve kind; rows are threshold,x,y."""
    os.makedirs(directory, exist_ok=True)
    written = []
    for fr in report.per_fold:
        for kind, points in (("roc", fr.roc), ("pr", fr.pr)):
            path = os.path.join(directory, f"{kind}_repeat{fr.repeat}_fold{fr.fold}.csv")
            _write_curve(points, path)
            written.append(path)
    return written


def write_candidates(ranked: Sequence[tuple[str, str, float]], path: str) -> None:
    """TSV: rank, drug_id, target_id, probability (rank starts at 1)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("rank\tdrug_id\ttarget_id\tprobability\n")
        for i, (drug_id, target_id, prob) in enumerate(ranked, start=1):
            fh.write(f"{i}\t{drug_id}\t{target_id}\t{prob:.17g}\n")
