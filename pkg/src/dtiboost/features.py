"""Feature extraction from protein profiles and assembly of the pair matrix.

Four feature groups, concatenated in letter order:

* A: drug substructure fingerprint (881) + evolutionary bigram (400)
* B: secondary structure composition (3) + mean relative ASA (1)
       + torsion-angle composition (8)
* C: torsion-angle autocovariance (8 * DF) + structural-probability
       autocovariance (3 * DF)
* D: torsion-angle bigram (64) + structural-probability bigram (9)

Every summed operation divides by the full profile length L, not by the
number of summands, so short profiles are penalized rather than rescaled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
import pandas as pd

from .corpus import FINGERPRINT_BITS, PssmProfile, StructProfile
from .errors import DegenerateInputError, ParseError

#: group letters in concatenation order
GROUP_ORDER = ("A", "B", "C", "D")

DEFAULT_DISTANCE_FACTOR = 10


def normalize_pssm(profile: PssmProfile) -> PssmProfile:
    """Fill ``normalized`` with the logistic transform of the raw scores."""
    x = profile.raw
    # stable two-branch logistic: never exponentiates a positive argument
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    profile.normalized = out
    return profile


def _require_normalized(profile: PssmProfile) -> np.ndarray:
    if profile.normalized is None:
        raise ValueError(f"profile {profile.target_id!r} has not been normalized")
    return profile.normalized


def pssm_bigram(profile: PssmProfile) -> np.ndarray:
    """Adjacent-position co-occurrence of normalized scores, flattened row-major.

    Entry (k, l) sums N[i, k] * N[i + 1, l] over i = 1..L-1 and divides by L.
    Needs L >= 2.
    """
    n = _require_normalized(profile)
    length = n.shape[0]
    if length < 2:
        raise DegenerateInputError(
            f"bigram needs at least 2 residues, profile {profile.target_id!r} has {length}"
        )
    return (n[:-1].T @ n[1:]).ravel() / length


def ss_composition(profile: StructProfile) -> np.ndarray:
    """Fractions of H, E and C states, in that order."""
    ss = profile.ss
    length = len(ss)
    return np.array([ss.count(s) for s in ("H", "E", "C")], dtype=float) / length


def asa_composition(profile: StructProfile) -> np.ndarray:
    """Mean accessible surface area, as a length-1 vector."""
    return np.array([profile.asa.mean()])


def angle_matrix(profile: StructProfile) -> np.ndarray:
    """L x 8 matrix of (sin, cos) pairs of the four torsion angles.

    Angles arrive in degrees and are converted to radians; columns are
    (sin phi, cos phi, sin psi, cos psi, sin theta, cos theta, sin tau,
    cos tau). Bounded in [-1, 1], which keeps downstream sums on the same
    scale as the probability features.
    """
    rad = np.deg2rad(profile.angles)
    out = np.empty((rad.shape[0], 8))
    out[:, 0::2] = np.sin(rad)
    out[:, 1::2] = np.cos(rad)
    return out


def ta_composition(profile: StructProfile) -> np.ndarray:
    """Column sums of the angle matrix divided by L (8 values)."""
    t = angle_matrix(profile)
    return t.sum(axis=0) / t.shape[0]


def ta_bigram(profile: StructProfile) -> np.ndarray:
    """Adjacent-position products of angle-matrix columns, 64 values row-major."""
    t = angle_matrix(profile)
    length = t.shape[0]
    if length < 2:
        raise DegenerateInputError(
            f"bigram needs at least 2 residues, profile {profile.target_id!r} has {length}"
        )
    return (t[:-1].T @ t[1:]).ravel() / length


def sp_bigram(profile: StructProfile) -> np.ndarray:
    """Adjacent-position products of the three structural probabilities (9 values)."""
    p = profile.probs
    length = p.shape[0]
    if length < 2:
        raise DegenerateInputError(
            f"bigram needs at least 2 residues, profile {profile.target_id!r} has {length}"
        )
    return (p[:-1].T @ p[1:]).ravel() / length


def _autocovariance(matrix: np.ndarray, distance_factor: int, what: str, who: str) -> np.ndarray:
    length, width = matrix.shape
    if distance_factor < 1:
        raise ValueError(f"distance factor must be >= 1, got {distance_factor}")
    if length <= distance_factor:
        raise DegenerateInputError(
            f"{what} autocovariance with distance factor {distance_factor} needs "
            f"L > {distance_factor}, profile {who!r} has {length}"
        )
    out = np.empty(distance_factor * width)
    for k in range(1, distance_factor + 1):
        prods = (matrix[:-k] * matrix[k:]).sum(axis=0) / length
        out[(k - 1) * width : k * width] = prods
    return out


def ta_autocovariance(profile: StructProfile, distance_factor: int = DEFAULT_DISTANCE_FACTOR) -> np.ndarray:
    """Lag-k products of angle-matrix columns for k = 1..DF, lag-major (8 * DF).

    Entry (k, j) sums T[i, j] * T[i + k, j] over i and divides by L.
    """
    return _autocovariance(angle_matrix(profile), distance_factor, "torsion-angle",
                           profile.target_id)


def sp_autocovariance(profile: StructProfile, distance_factor: int = DEFAULT_DISTANCE_FACTOR) -> np.ndarray:
    """Lag-k products of the probability columns, lag-major (3 * DF)."""
    return _autocovariance(profile.probs, distance_factor, "structural-probability",
                           profile.target_id)


@dataclass(frozen=True)
class FeatureGroupConfig:
    """Which feature groups are active and the autocovariance depth."""

    groups: tuple[str, ...] = GROUP_ORDER
    distance_factor: int = DEFAULT_DISTANCE_FACTOR

    def __post_init__(self):
        seen = set()
        for g in self.groups:
            if g not in GROUP_ORDER:
                raise ValueError(f"unknown feature group {g!r}")
            if g in seen:
                raise ValueError(f"duplicate feature group {g!r}")
            seen.add(g)
        if not self.groups:
            raise ValueError("at least one feature group is required")
        if self.distance_factor < 1:
            raise ValueError("distance factor must be >= 1")
        # canonical letter order regardless of how the caller spelled it
        object.__setattr__(
            self, "groups", tuple(g for g in GROUP_ORDER if g in seen)
        )


def group_widths(config: FeatureGroupConfig) -> dict[str, int]:
    """Column count contributed by each active group."""
    df = config.distance_factor
    widths = {"A": FINGERPRINT_BITS + 400, "B": 3 + 1 + 8, "C": 11 * df, "D": 64 + 9}
    return {g: widths[g] for g in config.groups}


def group_spans(config: FeatureGroupConfig) -> dict[str, tuple[int, int]]:
    """Half-open column ranges of the active groups, in concatenation order."""
    spans = {}
    offset = 0
    for g, width in group_widths(config).items():
        spans[g] = (offset, offset + width)
        offset += width
    return spans


def drug_block(fingerprint: np.ndarray, config: FeatureGroupConfig) -> np.ndarray:
    """The drug-side slice of a pair vector (fingerprint if group A is active)."""
    if "A" not in config.groups:
        return np.empty(0)
    fingerprint = np.asarray(fingerprint, dtype=float)
    if fingerprint.shape != (FINGERPRINT_BITS,):
        raise ValueError(f"fingerprint must have {FINGERPRINT_BITS} bits")
    return fingerprint


def target_block(
    pssm: PssmProfile, struct: StructProfile, config: FeatureGroupConfig
) -> np.ndarray:
    """The target-side slice of a pair vector, in group letter order."""
    parts = []
    if "A" in config.groups:
        parts.append(pssm_bigram(pssm))
    if "B" in config.groups:
        parts.append(ss_composition(struct))
        parts.append(asa_composition(struct))
        parts.append(ta_composition(struct))
    if "C" in config.groups:
        parts.append(ta_autocovariance(struct, config.distance_factor))
        parts.append(sp_autocovariance(struct, config.distance_factor))
    if "D" in config.groups:
        parts.append(ta_bigram(struct))
        parts.append(sp_bigram(struct))
    return np.concatenate(parts) if parts else np.empty(0)


def assemble_features(
    fingerprint: np.ndarray,
    pssm: PssmProfile,
    struct: StructProfile,
    config: FeatureGroupConfig,
) -> tuple[np.ndarray, dict[str, tuple[int, int]]]:
    """One pair's full feature vector plus the group index ranges.

    The PSSM is normalized in place if it has not been already.
    """
    if pssm.normalized is None:
        normalize_pssm(pssm)
    vector = np.concatenate([
        drug_block(fingerprint, config),
        target_block(pssm, struct, config),
    ])
    return vector, group_spans(config)


def assemble_blocks(
    fingerprints: Mapping[str, np.ndarray],
    pssms: Mapping[str, PssmProfile],
    structs: Mapping[str, StructProfile],
    config: FeatureGroupConfig,
) -> tuple[dict[str, np.ndarray], dict[str, np.ndarray]]:
    """Per-id drug and target feature blocks for :func:`corpus.build_dataset`.

    PSSMs are normalized in place if they have not been already.
    """
    drug_feats = {d: drug_block(fp, config) for d, fp in fingerprints.items()}
    target_feats = {}
    for t, pssm in pssms.items():
        if t not in structs:
            raise ValueError(f"target {t!r} has a PSSM but no structural profile")
        if pssm.normalized is None:
            normalize_pssm(pssm)
        target_feats[t] = target_block(pssm, structs[t], config)
    return drug_feats, target_feats


def _column_names(spans: dict[str, tuple[int, int]]) -> list[str]:
    names = []
    for g, (start, stop) in spans.items():
        names.extend(f"{g}:{i}" for i in range(stop - start))
    return names


def write_feature_matrix(dataset, path_or_buf) -> None:
    """Write the pair matrix as TSV: one ``group:index`` column per feature,
    then a ``label`` column of +1/-1. Floats use repr-faithful %.17g."""
    frame = pd.DataFrame(dataset.features, columns=_column_names(dataset.group_spans))
    frame["label"] = dataset.labels
    frame.to_csv(path_or_buf, sep="\t", float_format="%.17g", index=False)


def read_feature_matrix(path_or_buf, pairs=None):
    """Read a matrix written by :func:`write_feature_matrix`.

    Returns a :class:`corpus.PairDataset`; pair identities are taken from
    ``pairs`` when given (e.g. reconstructed from a manifest) and are
    otherwise synthesized as ("", "row<i>") placeholders.
    """
    from .corpus import PairDataset

    # the default float parser is fast but inexact; %.17g demands round-trip
    frame = pd.read_csv(path_or_buf, sep="\t", float_precision="round_trip")
    if "label" not in frame.columns:
        raise ParseError("feature matrix is missing the label column")
    labels = frame.pop("label").to_numpy()
    spans: dict[str, tuple[int, int]] = {}
    for idx, name in enumerate(frame.columns):
        group, _, local = name.partition(":")
        if group not in GROUP_ORDER or not local.isdigit():
            raise ParseError(f"unrecognized feature column {name!r}")
        start, stop = spans.get(group, (idx, idx))
        spans[group] = (min(start, idx), idx + 1)
    if pairs is None:
        pairs = [("", f"row{i}") for i in range(len(frame))]
    return PairDataset(list(pairs), labels, frame.to_numpy(dtype=float), spans)
