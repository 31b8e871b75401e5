"""Boosted decision trees: weighted CART base learners and the AdaBoost loop.

Everything here is deterministic given its inputs. Tree induction breaks
ties toward the lowest feature index, then the lowest threshold; leaf votes
tie toward -1 (the conservative call for interaction screening). The boost
loop reweights multiplicatively and divides by the closed-form normalizer
2*sqrt(eps*(1-eps)), so the training-error bound prod(Z_t) holds exactly and
is asserted at train time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ModelFormatError

MODEL_FORMAT_VERSION = 1

#: error floor for perfect rounds; alpha is capped as if eps were this value
EPSILON_FLOOR = 1e-10


@dataclass(frozen=True)
class TreeParams:
    """CART stopping rules."""

    max_depth: int = 3
    min_samples_split: int = 2
    min_samples_leaf: int = 1

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


@dataclass
class Node:
    """One tree node; leaves carry the vote and the weighted class mix."""

    feature: int = -1
    threshold: float = 0.0
    left: "Node | None" = None
    right: "Node | None" = None
    label: int = 0
    class_weights: tuple[float, float] = (0.0, 0.0)  # (w_neg, w_pos) fractions

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass
class DecisionTree:
    root: Node
    params: TreeParams
    n_features: int


def _gini(w_neg: float, w_pos: float) -> float:
    total = w_neg + w_pos
    if total <= 0.0:
        return 0.0
    p = w_pos / total
    return 2.0 * p * (1.0 - p)


def _leaf(w_neg: float, w_pos: float) -> Node:
    total = w_neg + w_pos
    label = 1 if w_pos > w_neg else -1  # tie votes -1
    mix = (w_neg / total, w_pos / total) if total > 0 else (0.0, 0.0)
    return Node(label=label, class_weights=mix)


def _best_split(x, y, w, min_leaf):
    """(feature, threshold, impurity) of the best weighted-Gini split, or None.

    Candidate thresholds are midpoints between consecutive distinct sorted
    values per feature. Strict < comparison on impurity keeps the first
    (lowest feature, lowest threshold) optimum.
    """
    n, d = x.shape
    w_pos_total = float(w[y == 1].sum())
    w_neg_total = float(w.sum()) - w_pos_total
    best = None  # (impurity, feature, threshold)
    pos_w = np.where(y == 1, w, 0.0)
    for j in range(d):
        order = np.argsort(x[:, j], kind="stable")
        xs = x[order, j]
        cum_w = np.cumsum(w[order])
        cum_pos = np.cumsum(pos_w[order])
        # split after position i keeps rows [0..i] left
        boundary = np.flatnonzero(xs[:-1] < xs[1:])
        if boundary.size == 0:
            continue
        counts_left = boundary + 1
        valid = (counts_left >= min_leaf) & (n - counts_left >= min_leaf)
        boundary = boundary[valid]
        if boundary.size == 0:
            continue
        wl = cum_w[boundary]
        pl = cum_pos[boundary]
        wr = cum_w[-1] - wl
        pr = cum_pos[-1] - pl
        nl = wl - pl
        nr = wr - pr
        with np.errstate(divide="ignore", invalid="ignore"):
            gini_l = np.where(wl > 0, 2.0 * (pl / wl) * (nl / wl), 0.0)
            gini_r = np.where(wr > 0, 2.0 * (pr / wr) * (nr / wr), 0.0)
        impurity = wl * gini_l + wr * gini_r
        i = int(np.argmin(impurity))  # lowest threshold on ties within a feature
        if best is None or impurity[i] < best[0]:
            thr = (xs[boundary[i]] + xs[boundary[i] + 1]) / 2.0
            best = (float(impurity[i]), j, thr)
    if best is None:
        return None
    _, feature, threshold = best
    return feature, threshold, best[0]


def _grow(x, y, w, params, depth):
    w_pos = float(w[y == 1].sum())
    w_neg = float(w.sum()) - w_pos
    if (
        depth >= params.max_depth
        or len(y) < params.min_samples_split
        or w_pos == 0.0
        or w_neg == 0.0
    ):
        return _leaf(w_neg, w_pos)
    found = _best_split(x, y, w, params.min_samples_leaf)
    if found is None:
        return _leaf(w_neg, w_pos)
    feature, threshold, _ = found
    mask = x[:, feature] <= threshold
    stats = _leaf(w_neg, w_pos)
    node = Node(feature=feature, threshold=float(threshold),
                label=stats.label, class_weights=stats.class_weights)
    node.left = _grow(x[mask], y[mask], w[mask], params, depth + 1)
    node.right = _grow(x[~mask], y[~mask], w[~mask], params, depth + 1)
    return node


def train_tree(
    features: np.ndarray,
    labels: np.ndarray,
    weights: np.ndarray | None = None,
    params: TreeParams = TreeParams(),
    seed: int = 0,
) -> DecisionTree:
    """Fit a weighted classification tree minimizing weighted Gini impurity.

    Splits are taken even at zero impurity gain as long as both children
    satisfy ``min_samples_leaf``; depth alone does not make a node a leaf
    until ``max_depth``. ``seed`` is accepted for interface stability; the
    procedure is fully deterministic (all ties break toward the lowest
    index), so it has no effect.
    """
    del seed
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=int)
    if x.ndim != 2 or x.shape[0] != y.shape[0] or x.shape[0] == 0:
        raise ValueError("features must be (n, d) with one label per row")
    if not np.all(np.isin(y, (-1, 1))):
        raise ValueError("labels must be +1 or -1")
    if weights is None:
        w = np.full(len(y), 1.0 / len(y))
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != y.shape or np.any(w < 0):
            raise ValueError("weights must be nonnegative, one per row")
        if abs(float(w.sum()) - 1.0) > 1e-6:
            raise ValueError("weights must sum to 1")
    root = _grow(x, y, w, params, depth=0)
    return DecisionTree(root=root, params=params, n_features=x.shape[1])


def tree_predict(tree: DecisionTree, features: np.ndarray) -> np.ndarray:
    """Vector of +1/-1 votes; rows route left when x[feature] <= threshold."""
    x = np.atleast_2d(np.asarray(features, dtype=float))
    if x.shape[1] != tree.n_features:
        raise ValueError(f"expected {tree.n_features} features, got {x.shape[1]}")
    out = np.empty(x.shape[0], dtype=int)

    def descend(node: Node, idx: np.ndarray):
        if node.is_leaf:
            out[idx] = node.label
            return
        go_left = x[idx, node.feature] <= node.threshold
        if go_left.any():
            descend(node.left, idx[go_left])
        if not go_left.all():
            descend(node.right, idx[~go_left])

    descend(tree.root, np.arange(x.shape[0]))
    return out


def alpha_from_error(eps: float) -> float:
    """Round weight 0.5 * ln((1 - eps) / eps); eps is clamped to the floor."""
    eps = max(float(eps), EPSILON_FLOOR)
    if eps >= 1.0:
        raise ValueError("round error must be < 1")
    return 0.5 * math.log((1.0 - eps) / eps)


@dataclass
class BoostedEnsemble:
    """AdaBoost ensemble over CART trees.

    ``training_log`` has one row per retained round with that round's
    weighted error, alpha, normalizer z = 2*sqrt(err*(1-err)), and the
    post-update weight sum (should stay at 1).
    """

    trees: list[DecisionTree] = field(default_factory=list)
    alphas: list[float] = field(default_factory=list)
    n_features: int = 0
    tree_params: TreeParams = TreeParams()
    groups: tuple[str, ...] = ("A", "B", "C", "D")
    distance_factor: int = 10
    training_log: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if len(self.trees) != len(self.alphas):
            raise ValueError("one alpha per tree")
        for row in self.training_log:
            err = row["error"]
            if not 0.0 < err <= 0.5:
                raise ValueError(f"logged round error {err} outside (0, 0.5]")
            z = 2.0 * math.sqrt(err * (1.0 - err))
            if abs(row["z"] - z) > 1e-9:
                raise ValueError("logged z inconsistent with logged error")

    def __len__(self) -> int:
        return len(self.trees)

    @property
    def rounds(self) -> int:
        """Retained round count (discarded rounds are not part of the model)."""
        return len(self.trees)


def train_adaboost(
    features: np.ndarray,
    labels: np.ndarray,
    rounds: int = 100,
    tree_params: TreeParams = TreeParams(),
    groups: Iterable[str] = ("A", "B", "C", "D"),
    distance_factor: int = 10,
    seed: int = 0,
) -> BoostedEnsemble:
    """Run the reweighting loop for up to ``rounds`` rounds.

    Per round: fit a tree under the current weights, measure the weighted
    error eps. eps >= 0.5 discards the round and stops (the ensemble may end
    up empty); eps <= the floor retains the round with a capped alpha and
    stops; otherwise weights are scaled by exp(-alpha * y * h(x)) and divided
    by z = 2*sqrt(eps*(1-eps)), which renormalizes exactly. ``seed`` is
    accepted for interface stability; training is deterministic.
    """
    del seed
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=int)
    if x.shape[0] != y.shape[0] or x.shape[0] == 0:
        raise ValueError("features must be (n, d) with one label per row")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if not (np.any(y == 1) and np.any(y == -1)):
        raise ValueError("training data must contain both classes")
    m = len(y)
    weights = np.full(m, 1.0 / m)
    ensemble = BoostedEnsemble(
        n_features=x.shape[1],
        tree_params=tree_params,
        groups=tuple(groups),
        distance_factor=distance_factor,
    )
    votes = np.zeros(m)  # running sum of alpha_t * h_t(x_i)
    for _ in range(rounds):
        tree = train_tree(x, y, weights, tree_params)
        predictions = tree_predict(tree, x)
        wrong = predictions != y
        eps = float(weights[wrong].sum())
        if eps >= 0.5:
            break
        capped = eps <= EPSILON_FLOOR
        logged_eps = EPSILON_FLOOR if capped else eps
        alpha = alpha_from_error(logged_eps)
        z = 2.0 * math.sqrt(logged_eps * (1.0 - logged_eps))
        if not capped:
            weights = weights * np.exp(-alpha * y * predictions) / z
        weight_sum = float(weights.sum())
        if abs(weight_sum - 1.0) > 1e-6:
            raise ValueError(f"weight sum drifted to {weight_sum}")
        ensemble.trees.append(tree)
        ensemble.alphas.append(alpha)
        ensemble.training_log.append(
            {"error": logged_eps, "alpha": alpha, "z": z, "weight_sum": weight_sum}
        )
        votes += alpha * predictions
        if capped:
            break
    if ensemble.trees:
        # exponential-loss bound: err <= prod(z_t); margin 0 counts as wrong
        train_err = float(np.mean(votes * y <= 0))
        bound = float(np.prod([row["z"] for row in ensemble.training_log]))
        assert train_err <= bound + 1e-9, (
            f"training error {train_err} exceeds bound {bound}"
        )
    return ensemble


def ensemble_margin(ensemble: BoostedEnsemble, features: np.ndarray) -> np.ndarray:
    """Normalized vote sum(alpha_t h_t(x)) / sum(alpha_t), in [-1, 1]."""
    alpha_total = float(sum(ensemble.alphas))
    if not ensemble.trees or alpha_total == 0.0:
        raise ValueError("ensemble has no weighted votes")
    x = np.atleast_2d(np.asarray(features, dtype=float))
    acc = np.zeros(x.shape[0])
    for tree, alpha in zip(ensemble.trees, ensemble.alphas):
        acc += alpha * tree_predict(tree, x)
    return acc / alpha_total


def predict(ensemble: BoostedEnsemble, features: np.ndarray) -> np.ndarray:
    """Hard votes: sign of the margin, ties to -1."""
    margin = ensemble_margin(ensemble, features)
    return np.where(margin > 0, 1, -1)


def predict_proba(ensemble: BoostedEnsemble, features: np.ndarray) -> np.ndarray:
    """Margin mapped affinely onto [0, 1]: (margin + 1) / 2."""
    return (ensemble_margin(ensemble, features) + 1.0) / 2.0


def _serialize_node(node: Node, out: list) -> None:
    if node.is_leaf:
        out.append({"label": node.label, "class_weights": list(node.class_weights)})
    else:
        out.append(
            {
                "feature": node.feature,
                "threshold": node.threshold,
                "label": node.label,
                "class_weights": list(node.class_weights),
            }
        )
        _serialize_node(node.left, out)
        _serialize_node(node.right, out)


def _deserialize_nodes(nodes: list, cursor: list[int]) -> Node:
    if cursor[0] >= len(nodes):
        raise ModelFormatError("truncated node list")
    raw = nodes[cursor[0]]
    cursor[0] += 1
    node = Node(
        feature=int(raw.get("feature", -1)),
        threshold=float(raw.get("threshold", 0.0)),
        label=int(raw["label"]),
        class_weights=tuple(raw.get("class_weights", (0.0, 0.0))),
    )
    if "feature" in raw:
        node.left = _deserialize_nodes(nodes, cursor)
        node.right = _deserialize_nodes(nodes, cursor)
    return node


def save_model(ensemble: BoostedEnsemble, path: str) -> None:
    """Write the ensemble as JSON; floats round-trip exactly via repr."""
    trees = []
    for tree in ensemble.trees:
        nodes: list = []
        _serialize_node(tree.root, nodes)
        trees.append(nodes)
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "n_features": ensemble.n_features,
        "groups": list(ensemble.groups),
        "distance_factor": ensemble.distance_factor,
        "tree_params": {
            "max_depth": ensemble.tree_params.max_depth,
            "min_samples_split": ensemble.tree_params.min_samples_split,
            "min_samples_leaf": ensemble.tree_params.min_samples_leaf,
        },
        "alphas": ensemble.alphas,
        "trees": trees,
        "training_log": ensemble.training_log,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path: str) -> BoostedEnsemble:
    """Inverse of :func:`save_model`; bad structure raises ModelFormatError."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported format version {version!r}, expected {MODEL_FORMAT_VERSION}"
        )
    try:
        params = TreeParams(**doc["tree_params"])
        trees = []
        for nodes in doc["trees"]:
            cursor = [0]
            root = _deserialize_nodes(nodes, cursor)
            if cursor[0] != len(nodes):
                raise ModelFormatError("trailing nodes after tree root")
            trees.append(DecisionTree(root=root, params=params,
                                      n_features=int(doc["n_features"])))
        ensemble = BoostedEnsemble(
            trees=trees,
            alphas=[float(a) for a in doc["alphas"]],
            n_features=int(doc["n_features"]),
            tree_params=params,
            groups=tuple(doc["groups"]),
            distance_factor=int(doc["distance_factor"]),
            training_log=[dict(r) for r in doc["training_log"]],
        )
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc
    return ensemble


@dataclass(frozen=True)
class Preset:
    """Named hyperparameter bundle for one benchmark dataset + strategy."""

    tree_params: TreeParams
    balance_strategy: str


#: tuned tree settings per benchmark family and balancing strategy, all with
#: the Gini criterion. A min-split of 1 is meaningless for a binary split and
#: clamps up to 2.
PRESETS: dict[str, Preset] = {
    "enzymes-random": Preset(TreeParams(100, 16, 1), "random"),
    "ion-channels-random": Preset(TreeParams(8, 4, 1), "random"),
    "gpcrs-random": Preset(TreeParams(6, 3, 1), "random"),
    "nuclear-receptors-random": Preset(TreeParams(5, 7, 2), "random"),
    "enzymes-clustered": Preset(TreeParams(110, 2, 1), "clustered"),
    "ion-channels-clustered": Preset(TreeParams(9, 2, 1), "clustered"),
    "gpcrs-clustered": Preset(TreeParams(6, 3, 1), "clustered"),
    "nuclear-receptors-clustered": Preset(TreeParams(150, 2, 1), "clustered"),
}
