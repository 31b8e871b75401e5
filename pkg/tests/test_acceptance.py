"""Acceptance gate: eight independent checks, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
print. Every check states its own tolerance and, where it applies, its time
budget; the line is printed before the assertion so a failure still reports.
"""

import math
import time

import numpy as np

import _oracles
from conftest import make_pssm, make_struct

from dtiboost.balance import BalanceConfig
from dtiboost.boost import (
    EPSILON_FLOOR,
    TreeParams,
    ensemble_margin,
    train_adaboost,
    tree_predict,
)
from dtiboost.cli import main
from dtiboost.corpus import InteractionGraph, PairDataset, build_dataset
from dtiboost.evaluation import ScoredSet, aupr, auroc, cross_validate
from dtiboost.features import (
    FeatureGroupConfig,
    asa_composition,
    group_widths,
    normalize_pssm,
    pssm_bigram,
    sp_autocovariance,
    sp_bigram,
    ss_composition,
    ta_autocovariance,
    ta_bigram,
    ta_composition,
)


def report(number: int, ok: bool, detail: str) -> None:
    print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {number} failed: {detail}"


def test_criterion_1_feature_ops_match_oracles():
    rng = np.random.default_rng(11)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        length = int(rng.integers(2, 11))
        df = int(rng.integers(1, length))
        pssm = normalize_pssm(make_pssm(rng, length))
        s = make_struct(rng, length)
        torsion = _oracles.angle_matrix(s.angles.tolist())
        checks = [
            (pssm_bigram(pssm), _oracles.pssm_bigram(pssm.normalized.tolist())),
            (ss_composition(s), _oracles.ss_composition(s.ss)),
            (asa_composition(s), [_oracles.asa_composition(s.asa.tolist())]),
            (ta_composition(s), _oracles.column_composition(torsion)),
            (ta_bigram(s), _oracles.bigram(torsion)),
            (sp_bigram(s), _oracles.bigram(s.probs.tolist())),
            (ta_autocovariance(s, df), _oracles.autocovariance(torsion, df)),
            (sp_autocovariance(s, df), _oracles.autocovariance(s.probs.tolist(), df)),
        ]
        for got, want in checks:
            gap = float(np.max(np.abs(np.asarray(got) - np.asarray(want))))
            worst = max(worst, gap)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 10.0
    report(1, ok, f"1000 profiles, max |op - oracle| {worst:.3g} "
                  f"(tol 1e-12), {elapsed:.1f}s (limit 10s)")


def test_criterion_2_assembled_widths():
    expected = {
        ("A",): 1281,
        ("A", "B"): 1293,
        ("A", "B", "C"): 1403,
        ("A", "B", "C", "D"): 1476,
    }
    got = {
        groups: sum(group_widths(FeatureGroupConfig(groups=groups)).values())
        for groups in expected
    }
    ok = got == expected
    report(2, ok, f"group-combination widths {sorted(got.values())} "
                  f"(want [1281, 1293, 1403, 1476])")


def test_criterion_3_pair_enumeration():
    rng = np.random.default_rng(3)
    drugs = tuple(f"d{i:02d}" for i in range(54))
    targets = tuple(f"t{i:02d}" for i in range(26))
    grid = [(d, t) for d in drugs for t in targets]
    picked = rng.choice(len(grid), size=90, replace=False)
    edges = tuple(grid[i] for i in picked)
    graph = InteractionGraph(drugs, targets, edges)
    ds = build_dataset(
        graph,
        {d: np.zeros(1) for d in drugs},
        {t: np.zeros(1) for t in targets},
    )
    n_pos = int(np.sum(ds.labels == 1))
    n_neg = int(np.sum(ds.labels == -1))
    ok = len(ds.pairs) == 1404 and n_pos == 90 and n_neg == 1314
    report(3, ok, f"54x26 graph with 90 edges -> {len(ds.pairs)} pairs, "
                  f"{n_pos} positive, {n_neg} negative")


def test_criterion_4_boosting_invariants():
    rng = np.random.default_rng(44)
    start = time.perf_counter()
    worst_sum = 0.0
    worst_z = 0.0
    bound_ok = True
    rounds_checked = 0
    for _ in range(100):
        n = int(rng.integers(10, 201))
        d = int(rng.integers(1, 21))
        x = rng.normal(size=(n, d))
        y = rng.choice([-1, 1], size=n)
        while not (np.any(y == 1) and np.any(y == -1)):
            y = rng.choice([-1, 1], size=n)
        model = train_adaboost(x, y, rounds=10,
                               tree_params=TreeParams(max_depth=2))
        # replay the weight recursion independently of the trainer
        w = np.full(n, 1.0 / n)
        for tree, row in zip(model.trees, model.training_log):
            h = tree_predict(tree, x)
            eps = float(w[h != y].sum())
            z_formula = 2.0 * math.sqrt(row["error"] * (1.0 - row["error"]))
            worst_z = max(worst_z, abs(row["z"] - z_formula))
            if row["error"] == EPSILON_FLOOR:
                assert eps <= EPSILON_FLOOR  # capped round: no weight update
            else:
                assert abs(eps - row["error"]) <= 1e-12
                w = w * np.exp(-row["alpha"] * y * h) / row["z"]
            worst_sum = max(worst_sum, abs(float(w.sum()) - 1.0))
            rounds_checked += 1
        if model.trees:
            margins = ensemble_margin(model, x)
            train_err = float(np.mean(margins * y <= 0))
            z_prod = float(np.prod([r["z"] for r in model.training_log]))
            bound_ok = bound_ok and train_err <= z_prod + 1e-9
    elapsed = time.perf_counter() - start
    ok = (worst_sum <= 1e-12 and worst_z <= 1e-12 and bound_ok
          and rounds_checked > 0 and elapsed < 60.0)
    report(4, ok, f"100 datasets, {rounds_checked} rounds replayed: "
                  f"max |sum(D)-1| {worst_sum:.3g}, max z gap {worst_z:.3g} "
                  f"(tol 1e-12), error<=prod(z) {bound_ok}, "
                  f"{elapsed:.1f}s (limit 60s)")


def test_criterion_5_curve_areas_match_oracles():
    rng = np.random.default_rng(55)
    worst_roc = 0.0
    worst_pr = 0.0
    for trial in range(1000):
        n = int(rng.integers(2, 201))
        labels = rng.choice([-1, 1], size=n)
        while not (np.any(labels == 1) and np.any(labels == -1)):
            labels = rng.choice([-1, 1], size=n)
        scores = rng.normal(size=n)
        if trial % 2:
            scores = np.round(scores, 1)  # plateaus of tied scores
        scored = ScoredSet(scores, labels)
        mw = _oracles.mann_whitney_auc(scores.tolist(), labels.tolist())
        brute = _oracles.step_aupr(scores.tolist(), labels.tolist())
        worst_roc = max(worst_roc, abs(auroc(scored) - mw))
        worst_pr = max(worst_pr, abs(aupr(scored) - brute))
    ok = worst_roc <= 1e-9 and worst_pr <= 1e-12
    report(5, ok, f"1000 scored sets: max auROC gap {worst_roc:.3g} "
                  f"(tol 1e-9), max auPR gap {worst_pr:.3g} (tol 1e-12)")


def _imbalanced_dataset(seed: int) -> PairDataset:
    """1:15 skew; the majority sits in eight blobs, one hugging the minority."""
    rng = np.random.default_rng(seed)
    minority = 94
    blob_sizes = [40, 195, 195, 196, 196, 196, 196, 196]
    angles = np.linspace(0.0, 2 * np.pi, 8)[:-1]
    centers = [(2.2, 0.0)] + [(6 * np.cos(a), 6 * np.sin(a)) for a in angles]
    pos = rng.normal(0.0, 0.6, (minority, 2))
    neg_parts = [
        np.asarray(c) + rng.normal(0.0, 0.5, (size, 2))
        for c, size in zip(centers, blob_sizes)
    ]
    informative = np.vstack([pos] + neg_parts)
    n = informative.shape[0]
    features = np.hstack([informative, rng.normal(0.0, 1.0, (n, 18))])
    labels = np.concatenate(
        [np.ones(minority, dtype=int), -np.ones(n - minority, dtype=int)]
    )
    pairs = [(f"p{i}", "x") for i in range(n)]
    return PairDataset(pairs, labels, features, {"A": (0, 20)})


def test_criterion_6_clustered_vs_random_undersampling():
    start = time.perf_counter()
    params = TreeParams(max_depth=3)
    rus_rocs, rus_prs, cus_rocs, cus_prs = [], [], [], []
    for seed in range(10):
        ds = _imbalanced_dataset(seed)
        rus = cross_validate(ds, BalanceConfig(method="random"), params,
                             rounds=25, folds=5, repeats=1, seed=seed)
        cus = cross_validate(ds, BalanceConfig(method="clustered"), params,
                             rounds=25, folds=5, repeats=1, seed=seed)
        rus_rocs.append(rus.mean.auroc)
        rus_prs.append(rus.mean.aupr)
        cus_rocs.append(cus.mean.auroc)
        cus_prs.append(cus.mean.aupr)
    elapsed = time.perf_counter() - start
    rus_pr = float(np.mean(rus_prs))
    cus_pr = float(np.mean(cus_prs))
    rus_roc = float(np.mean(rus_rocs))
    cus_roc = float(np.mean(cus_rocs))
    ok = (cus_pr >= rus_pr - 0.02 and rus_roc >= 0.90 and cus_roc >= 0.90
          and elapsed < 300.0)
    report(6, ok, f"10 seeds: mean auPR clustered {cus_pr:.4f} vs random "
                  f"{rus_pr:.4f} (floor: random - 0.02); strict win: "
                  f"{cus_pr > rus_pr}; mean auROC {cus_roc:.4f}/{rus_roc:.4f} "
                  f"(floor 0.90); {elapsed:.1f}s (limit 300s)")


def test_criterion_7_end_to_end_pipeline(fixture_corpus, tmp_path, capsys):
    start = time.perf_counter()

    def pipeline(tag: str) -> dict[str, bytes]:
        root = tmp_path / tag
        built = root / "built"
        model = root / "model.json"
        steps = [
            ["build",
             "--interactions", fixture_corpus["interactions"],
             "--pssm-dir", fixture_corpus["pssm_dir"],
             "--spd-dir", fixture_corpus["spd_dir"],
             "--fingerprints", fixture_corpus["fingerprints"],
             "--out", str(built)],
            ["train", "--matrix", str(built / "features.tsv"),
             "--out", str(model), "--rounds", "10", "--max-depth", "2"],
            ["evaluate", "--matrix", str(built / "features.tsv"),
             "--out", str(root / "eval"), "--rounds", "5", "--repeats", "2",
             "--max-depth", "2"],
            ["rank", "--model", str(model),
             "--matrix", str(built / "features.tsv"),
             "--n", "10", "--out", str(root / "ranked.tsv")],
        ]
        for argv in steps:
            code = main(argv)
            captured = capsys.readouterr()
            assert code == 0, captured.err
        return {
            str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()
        }

    first = pipeline("run1")
    second = pipeline("run2")
    elapsed = time.perf_counter() - start
    identical = (first.keys() == second.keys()
                 and all(first[k] == second[k] for k in first))
    ok = identical and len(first) == 27 and elapsed < 60.0
    report(7, ok, f"build/train/evaluate/rank produced {len(first)} files, "
                  f"rerun byte-identical: {identical}, {elapsed:.1f}s "
                  f"(limit 60s)")


def test_criterion_8_label_permutation_is_chance():
    rng_base = np.random.default_rng(1234)
    half = 100
    features = np.vstack([
        rng_base.normal(1.0, 1.0, (half, 10)),
        rng_base.normal(-1.0, 1.0, (half, 10)),
    ])
    labels = np.concatenate([np.ones(half, dtype=int),
                             -np.ones(half, dtype=int)])
    pairs = [(f"p{i}", "x") for i in range(2 * half)]
    params = TreeParams(max_depth=3)
    means = []
    for seed in range(10):
        shuffled = np.random.default_rng(seed).permutation(labels)
        ds = PairDataset(pairs, shuffled, features, {"A": (0, 10)})
        rep = cross_validate(ds, BalanceConfig(method="none"), params,
                             rounds=10, folds=5, repeats=1, seed=seed)
        means.append(rep.mean.auroc)
    overall = float(np.mean(means))
    ok = 0.4 <= overall <= 0.6
    report(8, ok, f"permuted labels, 10 seeds: mean auROC {overall:.4f} "
                  f"(band [0.4, 0.6])")
