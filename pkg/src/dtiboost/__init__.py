"""Drug-target interaction prediction from protein profiles and drug
fingerprints, using undersampling and AdaBoost over CART trees.

Typical flow: parse inputs (:mod:`dtiboost.corpus`), assemble feature groups
(:mod:`dtiboost.features`), rebalance (:mod:`dtiboost.balance`), train
(:mod:`dtiboost.boost`), evaluate and rank (:mod:`dtiboost.evaluation`).
The ``dtiboost`` command drives the same steps from the shell.
"""

from .balance import (
    BalanceConfig,
    Clustering,
    cluster_undersample,
    kmeans,
    random_undersample,
    rebalance,
    split_major_minor,
)
from .boost import (
    PRESETS,
    BoostedEnsemble,
    DecisionTree,
    TreeParams,
    load_model,
    predict,
    predict_proba,
    save_model,
    train_adaboost,
    train_tree,
)
from .corpus import (
    FingerprintTable,
    InteractionGraph,
    PairDataset,
    PssmProfile,
    StructProfile,
    build_dataset,
    fetch_record,
    parse_fingerprints,
    parse_interactions,
    parse_pssm,
    parse_spd,
)
from .errors import (
    DegenerateInputError,
    DtiboostError,
    MissingDataError,
    ModelFormatError,
    ParseError,
    ParseWarning,
    RemoteError,
    UnavailableError,
)
from .evaluation import (
    ConfusionCounts,
    EvalReport,
    MetricRecord,
    ScoredSet,
    aupr,
    auroc,
    confusion,
    cross_validate,
    pr_curve,
    rank_candidates,
    roc_curve,
    stratified_kfold,
)
from .features import (
    FeatureGroupConfig,
    assemble_blocks,
    assemble_features,
    group_spans,
    group_widths,
    normalize_pssm,
    read_feature_matrix,
    write_feature_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "BalanceConfig",
    "BoostedEnsemble",
    "Clustering",
    "ConfusionCounts",
    "DecisionTree",
    "DegenerateInputError",
    "DtiboostError",
    "EvalReport",
    "FeatureGroupConfig",
    "FingerprintTable",
    "InteractionGraph",
    "MetricRecord",
    "MissingDataError",
    "ModelFormatError",
    "PairDataset",
    "ParseError",
    "ParseWarning",
    "PRESETS",
    "PssmProfile",
    "RemoteError",
    "ScoredSet",
    "StructProfile",
    "TreeParams",
    "UnavailableError",
    "assemble_blocks",
    "assemble_features",
    "aupr",
    "auroc",
    "build_dataset",
    "cluster_undersample",
    "confusion",
    "cross_validate",
    "fetch_record",
    "group_spans",
    "group_widths",
    "kmeans",
    "load_model",
    "normalize_pssm",
    "parse_fingerprints",
    "parse_interactions",
    "parse_pssm",
    "parse_spd",
    "pr_curve",
    "predict",
    "predict_proba",
    "random_undersample",
    "rank_candidates",
    "read_feature_matrix",
    "rebalance",
    "roc_curve",
    "save_model",
    "split_major_minor",
    "stratified_kfold",
    "train_adaboost",
    "train_tree",
    "write_feature_matrix",
]
