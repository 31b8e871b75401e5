"""Class rebalancing by undersampling the majority class.

Two methods:

* ``random``: draw without replacement from the majority class until its
  size is at most ``target_ratio`` times the minority count;
* ``clustered``: k-means over the majority class, then keep at most ``h``
  members per cluster, so dense redundant regions shed points while sparse
  regions keep theirs.

Both keep the minority class untouched and return a row subset of the input
in its original order; nothing is synthesized or duplicated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

METHODS = ("random", "clustered", "none")


@dataclass(frozen=True)
class BalanceConfig:
    """Undersampling method and its knobs.

    ``h=None`` means: derive the per-cluster retention cap as
    ceil(minority / k), which lands the kept majority near the minority
    count. ``method="none"`` turns balancing off.
    """

    method: str = "random"
    target_ratio: float = 1.0
    k: int = 23
    h: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown balancing method {self.method!r}")
        if self.target_ratio < 1:
            raise ValueError("target_ratio must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.h is not None and self.h < 1:
            raise ValueError("h must be >= 1 when given")


@dataclass
class Clustering:
    """k-means result: integer labels per row, centroids, and distortion."""

    labels: np.ndarray
    centroids: np.ndarray
    distortion: float
    iterations: int


def _major_minor_indices(labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(majority rows, minority rows); a tie makes -1 the majority."""
    labels = np.asarray(labels)
    pos = np.flatnonzero(labels == 1)
    neg = np.flatnonzero(labels == -1)
    if pos.size + neg.size != labels.size:
        raise ValueError("labels must be +1 or -1")
    if pos.size == 0 or neg.size == 0:
        raise ValueError("both classes must be present to split major/minor")
    if neg.size >= pos.size:
        return neg, pos
    return pos, neg


def split_major_minor(dataset) -> tuple[object, object]:
    """Partition into (majority, minority) datasets; ties favor -1 as major."""
    major_idx, minor_idx = _major_minor_indices(dataset.labels)
    return dataset.subset(major_idx), dataset.subset(minor_idx)


def kmeans(
    points: np.ndarray,
    k: int,
    seed: int = 0,
    max_iters: int = 300,
) -> Clustering:
    """Lloyd's algorithm with deterministic tie handling.

    Initial centroids are k distinct rows chosen by the seeded generator.
    Points tie-break to the lowest centroid index. A cluster left empty is
    reseeded to the point farthest from that cluster's previous centroid
    (ties again to the lowest point index). Stops when assignments repeat or
    after ``max_iters`` sweeps.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("points must be a nonempty 2-d array")
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    centroids = points[rng.choice(n, size=k, replace=False)].copy()
    labels = np.full(n, -1)
    iterations = 0
    for _ in range(max_iters):
        iterations += 1
        # argmin over squared distances; argmin takes the first (lowest) index on ties
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(d2, axis=1)
        for j in range(k):
            members = new_labels == j
            if members.any():
                centroids[j] = points[members].mean(axis=0)
            else:
                dist_from_old = ((points - centroids[j]) ** 2).sum(axis=1)
                farthest = int(np.argmax(dist_from_old))
                centroids[j] = points[farthest]
                new_labels[farthest] = j
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    distortion = float(d2[np.arange(n), labels].sum())
    return Clustering(labels=labels, centroids=centroids, distortion=distortion,
                      iterations=iterations)


def random_selection(labels: np.ndarray, config: BalanceConfig) -> np.ndarray:
    """Row indices kept by random undersampling, ascending.

    All minority rows survive; the majority is sampled without replacement
    down to min(floor(target_ratio * minority), majority).
    """
    major_idx, minor_idx = _major_minor_indices(labels)
    quota = min(int(math.floor(config.target_ratio * minor_idx.size)), major_idx.size)
    rng = np.random.default_rng(config.seed)
    kept_major = major_idx[rng.choice(major_idx.size, size=quota, replace=False)]
    return np.sort(np.concatenate([minor_idx, kept_major]))


def clustered_selection(
    features: np.ndarray, labels: np.ndarray, config: BalanceConfig
) -> np.ndarray:
    """Row indices kept by cluster-based undersampling, ascending.

    The majority class is split into k clusters; each cluster retains at
    most h members, drawn uniformly without replacement. h defaults to
    ceil(minority / k).
    """
    features = np.asarray(features, dtype=float)
    major_idx, minor_idx = _major_minor_indices(labels)
    if major_idx.size < config.k:
        raise ValueError(
            f"majority class has {major_idx.size} samples, fewer than k={config.k}"
        )
    h = config.h if config.h is not None else math.ceil(minor_idx.size / config.k)
    rng = np.random.default_rng(config.seed)
    clustering = kmeans(features[major_idx], config.k, seed=config.seed)
    kept = [minor_idx]
    for j in range(config.k):
        members = major_idx[clustering.labels == j]
        take = min(h, members.size)
        kept.append(members[rng.choice(members.size, size=take, replace=False)])
    return np.sort(np.concatenate(kept))


def random_undersample(dataset, config: BalanceConfig):
    """Random undersampling at the dataset level; original row order kept."""
    return dataset.subset(random_selection(dataset.labels, config))


def cluster_undersample(dataset, config: BalanceConfig):
    """Cluster-based undersampling at the dataset level."""
    return dataset.subset(clustered_selection(dataset.features, dataset.labels, config))


def rebalance(dataset, config: BalanceConfig):
    """Dispatch on method; ``none`` returns the dataset as is."""
    if config.method == "none":
        return dataset
    if config.method == "random":
        return random_undersample(dataset, config)
    return cluster_undersample(dataset, config)
