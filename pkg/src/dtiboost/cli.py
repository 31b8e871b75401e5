"""Command-line pipeline: build features, train, evaluate, predict, rank.

Commands are staged through files (feature matrix + manifest, model JSON)
so the expensive extraction step is paid once. Configuration can come from
a flat ``key = value`` file via --config; explicit command-line flags always
win over file values. A --preset applies a named tree/balancing bundle and
is itself overridable field by field.

Every command is deterministic for fixed inputs and seeds: reruns produce
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import balance as balance_mod
from . import boost as boost_mod
from . import corpus, features
from . import evaluation as eval_mod
from .errors import DtiboostError

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _parse_groups(raw) -> tuple[str, ...]:
    if isinstance(raw, tuple):
        return raw
    letters = [p for chunk in raw.split(",") for p in chunk.strip()]
    return tuple(letters)


def _parse_optional_int(raw: str) -> int | None:
    raw = raw.strip()
    return int(raw) if raw else None


@dataclass
class RunConfig:
    """Fully resolved settings for one command invocation."""

    interactions: str | None = None
    pssm_dir: str | None = None
    spd_dir: str | None = None
    fingerprints: str | None = None
    cache_dir: str | None = None
    matrix: str | None = None
    manifest: str | None = None
    model: str | None = None
    out: str | None = None
    groups: tuple[str, ...] = ("A", "B", "C", "D")
    distance_factor: int = 10
    allow_skips: bool = False
    balance: str = "random"
    target_ratio: float = 1.0
    k: int = 23
    h: int | None = None
    rounds: int = 100
    max_depth: int = 3
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    folds: int = 5
    repeats: int = 5
    threshold: float = 0.5
    seed: int = 0
    threads: int = 1
    preset: str | None = None
    n: int = 10

    def feature_config(self) -> features.FeatureGroupConfig:
        return features.FeatureGroupConfig(self.groups, self.distance_factor)

    def balance_config(self) -> balance_mod.BalanceConfig:
        return balance_mod.BalanceConfig(
            method=self.balance, target_ratio=self.target_ratio,
            k=self.k, h=self.h, seed=self.seed,
        )

    def tree_params(self) -> boost_mod.TreeParams:
        return boost_mod.TreeParams(
            max_depth=self.max_depth,
            min_samples_split=self.min_samples_split,
            min_samples_leaf=self.min_samples_leaf,
        )


#: config-file key -> coercion from string
_COERCERS = {
    "interactions": str, "pssm_dir": str, "spd_dir": str, "fingerprints": str,
    "cache_dir": str, "matrix": str, "manifest": str, "model": str, "out": str,
    "groups": _parse_groups, "distance_factor": int, "allow_skips": _parse_bool,
    "balance": str, "target_ratio": float, "k": int, "h": _parse_optional_int,
    "rounds": int, "max_depth": int, "min_samples_split": int,
    "min_samples_leaf": int, "folds": int, "repeats": int, "threshold": float,
    "seed": int, "threads": int, "preset": str, "n": int,
}

#: fields a preset is allowed to fill
_PRESET_FIELDS = ("max_depth", "min_samples_split", "min_samples_leaf", "balance")


def parse_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` comments; unknown keys are errors."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            key, sep, raw = stripped.partition("=")
            if not sep:
                raise DtiboostError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
            key = key.strip()
            if key not in _COERCERS:
                raise DtiboostError(f"{path}:{lineno}: unknown configuration key {key!r}")
            try:
                values[key] = _COERCERS[key](raw.strip())
            except ValueError as exc:
                raise DtiboostError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """defaults < config file < preset < explicit flags."""
    merged: dict = {}
    if getattr(args, "config", None):
        merged.update(parse_config_file(args.config))
    explicit = {
        key: value
        for key, value in vars(args).items()
        if key in _COERCERS and value is not None
    }
    if "groups" in explicit:
        explicit["groups"] = _parse_groups(explicit["groups"])
    merged.update(explicit)
    preset_name = merged.get("preset")
    if preset_name is not None:
        if preset_name not in boost_mod.PRESETS:
            known = ", ".join(sorted(boost_mod.PRESETS))
            raise DtiboostError(f"unknown preset {preset_name!r}; known presets: {known}")
        preset = boost_mod.PRESETS[preset_name]
        fills = {
            "max_depth": preset.tree_params.max_depth,
            "min_samples_split": preset.tree_params.min_samples_split,
            "min_samples_leaf": preset.tree_params.min_samples_leaf,
            "balance": preset.balance_strategy,
        }
        for key in _PRESET_FIELDS:
            if key not in explicit:
                merged[key] = fills[key]
    return RunConfig(**merged)


def _require(config: RunConfig, command: str, *fields: str) -> None:
    missing = [f for f in fields if getattr(config, f) is None]
    if missing:
        raise DtiboostError(
            f"{command} requires {', '.join('--' + f.replace('_', '-') for f in missing)}"
        )


def _load_profiles(config: RunConfig, graph: corpus.InteractionGraph):
    """Parse every per-target file, aggregating problems across files."""
    problems: list[str] = []
    pssms: dict[str, corpus.PssmProfile] = {}
    structs: dict[str, corpus.StructProfile] = {}
    for target in graph.targets:
        pssm_path = os.path.join(config.pssm_dir, f"{target}.pssm")
        spd_path = os.path.join(config.spd_dir, f"{target}.spd")
        for path, parser, pool in (
            (pssm_path, corpus.parse_pssm, pssms),
            (spd_path, corpus.parse_spd, structs),
        ):
            if not os.path.exists(path):
                problems.append(f"target {target}: missing file {path}")
                continue
            try:
                with open(path, encoding="utf-8") as fh:
                    pool[target] = parser(fh, target)
            except (DtiboostError, ValueError) as exc:
                problems.append(f"{path}: {exc}")
        if target in pssms and target in structs:
            lp, ls = pssms[target].length, structs[target].length
            if lp != ls:
                problems.append(
                    f"target {target}: PSSM has {lp} residues but SPD has {ls}"
                )
    if problems:
        raise DtiboostError("input problems:\n  " + "\n  ".join(problems))
    return pssms, structs


def cmd_build(config: RunConfig) -> int:
    """Extract features for every pair and write matrix + manifest."""
    _require(config, "build", "interactions", "pssm_dir", "spd_dir", "fingerprints", "out")
    with open(config.interactions, encoding="utf-8") as fh:
        graph = corpus.parse_interactions(fh)
    with open(config.fingerprints, encoding="utf-8") as fh:
        prints = corpus.parse_fingerprints(fh)
    missing_drugs = [d for d in graph.drugs if d not in prints]
    if missing_drugs:
        raise DtiboostError(
            "no fingerprint for drugs: " + ", ".join(missing_drugs)
        )
    pssms, structs = _load_profiles(config, graph)
    fconfig = config.feature_config()

    target_feats: dict[str, np.ndarray] = {}
    skipped: dict[str, str] = {}
    for target in graph.targets:
        profile = pssms[target]
        if profile.normalized is None:
            features.normalize_pssm(profile)
        try:
            target_feats[target] = features.target_block(profile, structs[target], fconfig)
        except DtiboostError as exc:
            skipped[target] = str(exc)
    if skipped and not config.allow_skips:
        listing = "\n  ".join(f"{t}: {reason}" for t, reason in skipped.items())
        raise DtiboostError(
            "targets too short for the requested features "
            "(rerun with --allow-skips to exclude them):\n  " + listing
        )
    kept_targets = tuple(t for t in graph.targets if t in target_feats)
    if not kept_targets:
        raise DtiboostError("every target was skipped; nothing to build")
    graph = corpus.InteractionGraph(
        drugs=graph.drugs,
        targets=kept_targets,
        edges=tuple((d, t) for d, t in graph.edges if t in target_feats),
    )
    drug_feats = {d: features.drug_block(prints[d], fconfig) for d in graph.drugs}
    spans = features.group_spans(fconfig)
    dataset = corpus.build_dataset(graph, drug_feats, target_feats, spans)

    os.makedirs(config.out, exist_ok=True)
    matrix_path = os.path.join(config.out, "features.tsv")
    manifest_path = os.path.join(config.out, "manifest.json")
    features.write_feature_matrix(dataset, matrix_path)
    manifest = {
        "n_rows": len(dataset),
        "n_columns": dataset.features.shape[1] + 1,
        "n_drugs": len(graph.drugs),
        "n_targets": len(graph.targets),
        "n_positive": dataset.n_positive,
        "n_negative": dataset.n_negative,
        "groups": list(fconfig.groups),
        "distance_factor": fconfig.distance_factor,
        "group_spans": {g: list(span) for g, span in spans.items()},
        "drugs": list(graph.drugs),
        "targets": list(graph.targets),
        "target_lengths": {t: pssms[t].length for t in graph.targets},
        "skipped_targets": skipped,
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")
    print(
        f"wrote {matrix_path} ({manifest['n_rows']} rows x {manifest['n_columns']} columns,"
        f" {dataset.n_positive} positive) and {manifest_path}"
    )
    if skipped:
        print(f"skipped {len(skipped)} target(s): " + ", ".join(sorted(skipped)))
    return 0


def _load_matrix(config: RunConfig):
    pairs = None
    manifest_path = config.manifest
    if manifest_path is None and config.matrix is not None:
        sibling = os.path.join(os.path.dirname(config.matrix) or ".", "manifest.json")
        if os.path.exists(sibling):
            manifest_path = sibling
    if manifest_path is not None:
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
        pairs = [(d, t) for d in manifest["drugs"] for t in manifest["targets"]]
    return features.read_feature_matrix(config.matrix, pairs=pairs)


def _infer_groups(dataset) -> tuple[tuple[str, ...], int]:
    groups = tuple(dataset.group_spans)
    if "C" in dataset.group_spans:
        start, stop = dataset.group_spans["C"]
        df = (stop - start) // 11
    else:
        df = features.DEFAULT_DISTANCE_FACTOR
    return groups, df


def cmd_train(config: RunConfig) -> int:
    """Rebalance the full matrix, train the ensemble, write the model."""
    _require(config, "train", "matrix", "out")
    dataset = _load_matrix(config)
    if dataset.n_positive == 0 or dataset.n_negative == 0:
        raise DtiboostError("training data contains a single class")
    balanced = balance_mod.rebalance(dataset, config.balance_config())
    groups, df = _infer_groups(dataset)
    ensemble = boost_mod.train_adaboost(
        balanced.features,
        balanced.labels,
        rounds=config.rounds,
        tree_params=config.tree_params(),
        groups=groups,
        distance_factor=df,
    )
    for i, row in enumerate(ensemble.training_log, start=1):
        print(
            f"round {i:3d}  error={row['error']:.6g}  alpha={row['alpha']:.6g}"
            f"  z={row['z']:.6g}"
        )
    if ensemble.trees:
        margin = boost_mod.ensemble_margin(ensemble, balanced.features)
        train_err = float(np.mean(np.where(margin > 0, 1, -1) != balanced.labels))
        print(f"retained {len(ensemble)} round(s), training error {train_err:.6g}")
    else:
        print("retained 0 rounds: first weak learner was no better than chance")
    boost_mod.save_model(ensemble, config.out)
    print(f"wrote {config.out}")
    return 0


def cmd_evaluate(config: RunConfig) -> int:
    """Cross-validate and write report, curve CSVs, and figures."""
    _require(config, "evaluate", "matrix", "out")
    dataset = _load_matrix(config)
    report = eval_mod.cross_validate(
        dataset,
        config.balance_config(),
        tree_params=config.tree_params(),
        rounds=config.rounds,
        folds=config.folds,
        repeats=config.repeats,
        seed=config.seed,
        threshold=config.threshold,
        threads=config.threads,
    )
    os.makedirs(config.out, exist_ok=True)
    report_path = os.path.join(config.out, "report.json")
    eval_mod.write_report(report, report_path)
    eval_mod.write_curves(report, os.path.join(config.out, "curves"))
    from . import plots

    plots.render_roc(report, os.path.join(config.out, "roc.png"))
    plots.render_pr(report, os.path.join(config.out, "pr.png"))
    print(f"mean auROC {report.mean.auroc:.4f}")
    print(f"mean auPR {report.mean.aupr:.4f}")
    print(f"wrote {report_path}, curve CSVs, roc.png, pr.png")
    return 0


def cmd_predict(config: RunConfig, drug_id: str, pssm_file: str, spd_file: str) -> int:
    """Score one (drug, target) pair; prints probability and class."""
    _require(config, "predict", "model", "fingerprints")
    ensemble = boost_mod.load_model(config.model)
    with open(config.fingerprints, encoding="utf-8") as fh:
        prints = corpus.parse_fingerprints(fh)
    if drug_id not in prints:
        raise DtiboostError(f"drug {drug_id!r} not in fingerprint table")
    fconfig = features.FeatureGroupConfig(
        tuple(ensemble.groups), ensemble.distance_factor
    )
    with open(pssm_file, encoding="utf-8") as fh:
        pssm = corpus.parse_pssm(fh, target_id=os.path.basename(pssm_file))
    with open(spd_file, encoding="utf-8") as fh:
        struct = corpus.parse_spd(fh, target_id=os.path.basename(spd_file))
    features.normalize_pssm(pssm)
    vector = np.concatenate([
        features.drug_block(prints[drug_id], fconfig),
        features.target_block(pssm, struct, fconfig),
    ])
    if vector.size != ensemble.n_features:
        raise DtiboostError(
            f"feature vector has {vector.size} values but the model expects "
            f"{ensemble.n_features}"
        )
    prob = float(boost_mod.predict_proba(ensemble, vector)[0])
    label = 1 if prob > config.threshold else -1
    print(f"{prob:.6f}\t{label:+d}")
    return 0


def cmd_rank(config: RunConfig) -> int:
    """Rank non-interacting pairs by predicted probability, top n first."""
    _require(config, "rank", "model", "matrix")
    dataset = _load_matrix(config)
    if all(d == "" for d, _ in dataset.pairs):
        raise DtiboostError(
            "no manifest found next to the matrix; pass --manifest to recover pair ids"
        )
    ensemble = boost_mod.load_model(config.model)
    ranked = eval_mod.rank_candidates(ensemble, dataset, n=config.n)
    if config.out is None:
        sys.stdout.write("rank\tdrug_id\ttarget_id\tprobability\n")
        for i, (d, t, p) in enumerate(ranked, start=1):
            sys.stdout.write(f"{i}\t{d}\t{t}\t{p:.17g}\n")
    else:
        eval_mod.write_candidates(ranked, config.out)
        print(f"wrote {config.out} ({len(ranked)} rows)")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value configuration file")
    parser.add_argument("--seed", type=int, help="base seed (default 0)")
    parser.add_argument("--threads", type=int,
                        help="data-parallel width for evaluation (default 1)")
    parser.add_argument("--out", help="output file or directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtiboost",
        description="drug-target interaction prediction with boosted trees",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="extract the pair feature matrix")
    _add_common(p)
    p.add_argument("--interactions", help="edge list file")
    p.add_argument("--pssm-dir", dest="pssm_dir", help="directory of <target>.pssm files")
    p.add_argument("--spd-dir", dest="spd_dir", help="directory of <target>.spd files")
    p.add_argument("--fingerprints", help="drug fingerprint table")
    p.add_argument("--groups", help="feature groups, e.g. A,B,C,D or ABC")
    p.add_argument("--distance-factor", dest="distance_factor", type=int,
                   help="autocovariance depth (default 10)")
    p.add_argument("--allow-skips", dest="allow_skips", action="store_true",
                   default=None, help="exclude too-short targets instead of failing")

    for name, help_text in (
        ("train", "rebalance and fit the boosted ensemble"),
        ("evaluate", "repeated stratified cross-validation"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        p.add_argument("--matrix", help="feature matrix from build")
        p.add_argument("--manifest", help="manifest from build (default: sibling file)")
        p.add_argument("--preset", help="named tree/balancing bundle, e.g. gpcrs-random")
        p.add_argument("--balance", choices=["random", "clustered", "none"])
        p.add_argument("--target-ratio", dest="target_ratio", type=float)
        p.add_argument("--k", type=int, help="majority clusters (default 23)")
        p.add_argument("--h", type=int, help="per-cluster retention cap")
        p.add_argument("--rounds", type=int, help="boosting rounds (default 100)")
        p.add_argument("--max-depth", dest="max_depth", type=int)
        p.add_argument("--min-samples-split", dest="min_samples_split", type=int)
        p.add_argument("--min-samples-leaf", dest="min_samples_leaf", type=int)
        if name == "evaluate":
            p.add_argument("--folds", type=int, help="default 5")
            p.add_argument("--repeats", type=int, help="default 5")
            p.add_argument("--threshold", type=float, help="default 0.5")

    p = sub.add_parser("predict", help="score one drug-target pair")
    _add_common(p)
    p.add_argument("--model", help="model file from train")
    p.add_argument("--fingerprints", help="drug fingerprint table")
    p.add_argument("--threshold", type=float, help="default 0.5")
    p.add_argument("drug_id")
    p.add_argument("pssm_file")
    p.add_argument("spd_file")

    p = sub.add_parser("rank", help="rank non-interacting pairs")
    _add_common(p)
    p.add_argument("--model", help="model file from train")
    p.add_argument("--matrix", help="feature matrix from build")
    p.add_argument("--manifest", help="manifest from build (default: sibling file)")
    p.add_argument("--n", type=int, help="rows to keep (default 10)")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        if args.command == "build":
            return cmd_build(config)
        if args.command == "train":
            return cmd_train(config)
        if args.command == "evaluate":
            return cmd_evaluate(config)
        if args.command == "predict":
            return cmd_predict(config, args.drug_id, args.pssm_file, args.spd_file)
        return cmd_rank(config)
    except (DtiboostError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())
