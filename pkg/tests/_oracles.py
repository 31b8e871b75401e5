"""Independent naive-loop oracles used to cross-check the library.

Everything here is written with explicit Python loops and scalar math,
deliberately avoiding the vectorized formulations in the package, so the two
implementations share no code path.
"""

import math


def logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def pssm_bigram(n_rows) -> list:
    """(1/L) * sum over consecutive rows of n[i][k] * n[i+1][l], row-major."""
    length = len(n_rows)
    out = []
    for k in range(20):
        for l in range(20):
            total = 0.0
            for i in range(length - 1):
                total += n_rows[i][k] * n_rows[i + 1][l]
            out.append(total / length)
    return out


def ss_composition(ss: str) -> list:
    length = len(ss)
    return [sum(1 for ch in ss if ch == sym) / length for sym in "HEC"]


def asa_composition(asa) -> float:
    return sum(asa) / len(asa)


def angle_matrix(angles_deg) -> list:
    out = []
    for row in angles_deg:
        expanded = []
        for angle in row:
            rad = angle * math.pi / 180.0
            expanded.append(math.sin(rad))
            expanded.append(math.cos(rad))
        out.append(expanded)
    return out


def column_composition(matrix) -> list:
    length = len(matrix)
    width = len(matrix[0])
    return [sum(row[j] for row in matrix) / length for j in range(width)]


def bigram(matrix) -> list:
    """Generic adjacent-row bigram of any per-residue matrix, row-major."""
    length = len(matrix)
    width = len(matrix[0])
    out = []
    for k in range(width):
        for l in range(width):
            total = 0.0
            for i in range(length - 1):
                total += matrix[i][k] * matrix[i + 1][l]
            out.append(total / length)
    return out


def autocovariance(matrix, df: int) -> list:
    """Lag-major: all columns for lag 1, then lag 2, and so on."""
    length = len(matrix)
    width = len(matrix[0])
    out = []
    for k in range(1, df + 1):
        for j in range(width):
            total = 0.0
            for i in range(length - k):
                total += matrix[i][j] * matrix[i + k][j]
            out.append(total / length)
    return out


def mann_whitney_auc(scores, labels) -> float:
    """Probability a random (positive, negative) pair is ordered correctly;
    ties count one half."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == -1]
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def step_aupr(scores, labels) -> float:
    """Step-sum area from scratch: confusion counts at every distinct score."""
    n_pos = sum(1 for y in labels if y == 1)
    thresholds = sorted(set(scores), reverse=True)
    area = 0.0
    prev_recall = 0.0
    for t in thresholds:
        tp = sum(1 for s, y in zip(scores, labels) if s >= t and y == 1)
        fp = sum(1 for s, y in zip(scores, labels) if s >= t and y == -1)
        recall = tp / n_pos
        prec = tp / (tp + fp) if tp + fp else 0.0
        area += (recall - prev_recall) * prec
        prev_recall = recall
    return area


def trapezoid_auroc(scores, labels) -> float:
    """Trapezoidal ROC area from scratch via per-threshold confusion counts."""
    n_pos = sum(1 for y in labels if y == 1)
    n_neg = sum(1 for y in labels if y == -1)
    points = [(0.0, 0.0)]
    for t in sorted(set(scores), reverse=True):
        tp = sum(1 for s, y in zip(scores, labels) if s >= t and y == 1)
        fp = sum(1 for s, y in zip(scores, labels) if s >= t and y == -1)
        points.append((fp / n_neg, tp / n_pos))
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def weighted_gini_split(xs, ys, ws):
    """Exhaustive best (feature, threshold) by weighted Gini; None if no split.

    Mirrors the frozen tie rules: lowest impurity, then lowest feature index,
    then lowest threshold.
    """
    n = len(ys)
    d = len(xs[0])
    best = None
    for j in range(d):
        values = sorted(set(x[j] for x in xs))
        for a, b in zip(values, values[1:]):
            thr = (a + b) / 2.0
            wl_pos = wl_neg = wr_pos = wr_neg = 0.0
            n_left = 0
            for x, y, w in zip(xs, ys, ws):
                if x[j] <= thr:
                    n_left += 1
                    if y == 1:
                        wl_pos += w
                    else:
                        wl_neg += w
                else:
                    if y == 1:
                        wr_pos += w
                    else:
                        wr_neg += w
            if n_left == 0 or n_left == n:
                continue
            def gini(wp, wn):
                tot = wp + wn
                if tot <= 0:
                    return 0.0
                p = wp / tot
                return 2.0 * p * (1.0 - p)
            cost = (wl_pos + wl_neg) * gini(wl_pos, wl_neg) + (
                wr_pos + wr_neg
            ) * gini(wr_pos, wr_neg)
            key = (cost, j, thr)
            if best is None or key < best:
                best = key
    if best is None:
        return None
    return best[1], best[2], best[0]


def best_two_partition_wcss(points) -> float:
    """Global minimum within-cluster sum of squares over all 2-partitions."""
    n = len(points)
    d = len(points[0])
    best = math.inf
    for mask in range(1, 2 ** (n - 1)):  # fix point 0 in group A to kill symmetry
        groups = ([], [])
        groups[0].append(points[0])
        for i in range(1, n):
            groups[(mask >> (i - 1)) & 1].append(points[i])
        if not groups[0] or not groups[1]:
            continue
        total = 0.0
        for grp in groups:
            mean = [sum(p[j] for p in grp) / len(grp) for j in range(d)]
            for p in grp:
                total += sum((p[j] - mean[j]) ** 2 for j in range(d))
        best = min(best, total)
    return best
