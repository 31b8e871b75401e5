"""Input file parsing and construction of the labeled drug-target pair dataset.

File formats handled here:

* interaction lists: one ``<drug_id><TAB><target_id>`` edge per line, ``#``
  comments, optional ``#drug:<id>`` / ``#target:<id>`` declarations so that
  vertices without edges are representable;
* PSI-BLAST ASCII profiles (the first 20 numeric columns per residue row,
  i.e. the log-odds block);
* SPIDER2-style ``.spd`` columnar files with a ``#``-prefixed header row
  (parsing is header-driven, so column order does not matter);
* fingerprint tables: ``<drug_id><TAB><881-char bit string>``.

All parsers are pure functions of their input stream and return immutable
values that are safe to share across threads.
"""

from __future__ import annotations

import os
import threading
import urllib.error
import urllib.request
import warnings
from dataclasses import dataclass
from typing import IO, Iterable, Mapping

import numpy as np

from .errors import (
    MissingDataError,
    ParseError,
    ParseWarning,
    RemoteError,
    UnavailableError,
)

FINGERPRINT_BITS = 881

#: record kinds understood by :func:`fetch_record`
RECORD_KINDS = ("drug_structure", "target_sequence")


@dataclass(frozen=True)
class InteractionGraph:
    """Bipartite interaction graph: drugs on one side, protein targets on the other.

    ``drugs`` and ``targets`` keep first-seen order; ``edges`` keeps file
    order with duplicates removed.
    """

    drugs: tuple[str, ...]
    targets: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self):
        drug_set, target_set = set(self.drugs), set(self.targets)
        overlap = drug_set & target_set
        if overlap:
            raise ValueError(f"ids used as both drug and target: {sorted(overlap)}")
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("duplicate edges in interaction graph")
        for d, t in self.edges:
            if d not in drug_set:
                raise ValueError(f"edge references unknown drug {d!r}")
            if t not in target_set:
                raise ValueError(f"edge references unknown target {t!r}")

    @property
    def edge_set(self) -> frozenset[tuple[str, str]]:
        return frozenset(self.edges)


@dataclass
class PssmProfile:
    """Per-target evolutionary scoring matrix (L rows, 20 residue columns).

    ``raw`` holds log-odds scores as parsed; ``normalized`` stays ``None``
    until filled by ``features.normalize_pssm``.
    """

    target_id: str
    raw: np.ndarray
    normalized: np.ndarray | None = None

    def __post_init__(self):
        self.raw = np.asarray(self.raw, dtype=float)
        if self.raw.ndim != 2 or self.raw.shape[1] != 20 or self.raw.shape[0] < 1:
            raise ValueError(f"raw matrix must be Lx20 with L >= 1, got {self.raw.shape}")
        if self.normalized is not None:
            self.normalized = np.asarray(self.normalized, dtype=float)
            if self.normalized.shape != self.raw.shape:
                raise ValueError("normalized matrix must match raw shape")

    @property
    def length(self) -> int:
        return self.raw.shape[0]


SS_SYMBOLS = ("H", "E", "C")


@dataclass
class StructProfile:
    """Per-residue structural predictions for one target.

    ``angles`` columns are (phi, psi, theta, tau) in degrees exactly as read;
    ``probs`` columns are (prob_C, prob_E, prob_H).
    """

    target_id: str
    ss: str
    asa: np.ndarray
    angles: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        self.asa = np.asarray(self.asa, dtype=float)
        self.angles = np.asarray(self.angles, dtype=float)
        self.probs = np.asarray(self.probs, dtype=float)
        n = len(self.ss)
        if n < 1:
            raise ValueError("profile must contain at least one residue")
        if self.asa.shape != (n,) or self.angles.shape != (n, 4) or self.probs.shape != (n, 3):
            raise ValueError("per-residue arrays must share the profile length")
        for i, sym in enumerate(self.ss):
            if sym not in SS_SYMBOLS:
                raise ValueError(f"unknown secondary structure symbol {sym!r} at position {i + 1}")
        if np.any(self.asa < 0):
            raise ValueError("accessible surface area must be nonnegative")
        if np.any(self.probs < 0) or np.any(self.probs > 1):
            raise ValueError("structural probabilities must lie in [0, 1]")

    @property
    def length(self) -> int:
        return len(self.ss)


@dataclass
class FingerprintTable:
    """Mapping drug id -> 881-bit substructure presence vector."""

    entries: dict[str, np.ndarray]

    def __post_init__(self):
        for drug_id, bits in self.entries.items():
            bits = np.asarray(bits, dtype=np.uint8)
            if bits.shape != (FINGERPRINT_BITS,) or not np.all((bits == 0) | (bits == 1)):
                raise ValueError(f"fingerprint for {drug_id!r} must be {FINGERPRINT_BITS} bits")
            self.entries[drug_id] = bits

    def __contains__(self, drug_id: str) -> bool:
        return drug_id in self.entries

    def __getitem__(self, drug_id: str) -> np.ndarray:
        return self.entries[drug_id]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class PairDataset:
    """Labeled drug-target pairs with assembled feature vectors.

    Labels are +1 for interacting pairs and -1 otherwise, matching the sign
    algebra the boosted ensemble votes in. ``group_spans`` maps each active
    feature group letter to its half-open column range.
    """

    pairs: list[tuple[str, str]]
    labels: np.ndarray
    features: np.ndarray
    group_spans: dict[str, tuple[int, int]]

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=int)
        self.features = np.asarray(self.features, dtype=float)
        n = len(self.pairs)
        if self.labels.shape != (n,) or self.features.shape[0] != n:
            raise ValueError("pairs, labels and features must have equal lengths")
        if not np.all(np.isin(self.labels, (-1, 1))):
            raise ValueError("labels must be +1 or -1")
        if len(set(self.pairs)) != n:
            raise ValueError("duplicate (drug, target) pairs")
        width = sum(stop - start for start, stop in self.group_spans.values())
        if self.group_spans and self.features.shape[1] != width:
            raise ValueError(
                f"feature width {self.features.shape[1]} does not match group spans ({width})"
            )

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def n_positive(self) -> int:
        return int(np.sum(self.labels == 1))

    @property
    def n_negative(self) -> int:
        return int(np.sum(self.labels == -1))

    def subset(self, indices) -> "PairDataset":
        """Row subset preserving order of ``indices``."""
        indices = np.asarray(indices, dtype=int)
        return PairDataset(
            pairs=[self.pairs[i] for i in indices],
            labels=self.labels[indices],
            features=self.features[indices],
            group_spans=dict(self.group_spans),
        )


def _lines(text: str | IO[str]) -> Iterable[str]:
    if hasattr(text, "read"):
        text = text.read()
    return text.splitlines()


def parse_interactions(text: str | IO[str]) -> InteractionGraph:
    """Parse a TAB-separated interaction list into a bipartite graph.

    Duplicate edges are dropped with a :class:`ParseWarning`; a line with a
    field count other than two raises :class:`ParseError` with its line
    number.
    """
    drugs: dict[str, None] = {}
    targets: dict[str, None] = {}
    edges: dict[tuple[str, str], None] = {}
    for lineno, line in enumerate(_lines(text), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            for prefix, pool in (("#drug:", drugs), ("#target:", targets)):
                if stripped.startswith(prefix):
                    declared = stripped[len(prefix):].strip()
                    if not declared:
                        raise ParseError(f"empty id in {prefix} declaration", line=lineno)
                    pool.setdefault(declared, None)
                    break
            continue
        fields = stripped.split()
        if len(fields) != 2:
            raise ParseError(
                f"expected 2 fields (drug, target), got {len(fields)}", line=lineno
            )
        drug_id, target_id = fields
        drugs.setdefault(drug_id, None)
        targets.setdefault(target_id, None)
        if (drug_id, target_id) in edges:
            warnings.warn(
                f"duplicate edge ({drug_id}, {target_id}) at line {lineno}", ParseWarning
            )
            continue
        edges[(drug_id, target_id)] = None
    return InteractionGraph(tuple(drugs), tuple(targets), tuple(edges))


def serialize_interactions(graph: InteractionGraph) -> str:
    """Inverse of :func:`parse_interactions` up to edge-set equality.

    Vertices are declared explicitly so isolated drugs/targets survive the
    round trip.
    """
    out = []
    for d in graph.drugs:
        out.append(f"#drug:{d}")
    for t in graph.targets:
        out.append(f"#target:{t}")
    for d, t in graph.edges:
        out.append(f"{d}\t{t}")
    return "\n".join(out) + "\n"


def build_dataset(
    graph: InteractionGraph,
    drug_features: Mapping[str, np.ndarray],
    target_features: Mapping[str, np.ndarray],
    group_spans: dict[str, tuple[int, int]] | None = None,
) -> PairDataset:
    """Emit one labeled pair per (drug, target) in D x T, row-major.

    A pair's vector is the drug block followed by the target block; the label
    is +1 exactly when the edge exists. Raises :class:`MissingDataError`
    naming the first id lacking features.
    """
    if not graph.drugs or not graph.targets:
        raise ValueError("graph must contain at least one drug and one target")
    for d in graph.drugs:
        if d not in drug_features:
            raise MissingDataError(f"no features for drug {d!r}")
    for t in graph.targets:
        if t not in target_features:
            raise MissingDataError(f"no features for target {t!r}")
    edge_set = graph.edge_set
    pairs = []
    labels = np.empty(len(graph.drugs) * len(graph.targets), dtype=int)
    rows = []
    i = 0
    for d in graph.drugs:
        dvec = np.asarray(drug_features[d], dtype=float)
        for t in graph.targets:
            pairs.append((d, t))
            labels[i] = 1 if (d, t) in edge_set else -1
            rows.append(np.concatenate([dvec, np.asarray(target_features[t], dtype=float)]))
            i += 1
    return PairDataset(pairs, labels, np.vstack(rows), dict(group_spans or {}))


def _looks_like_residue_row(tokens: list[str]) -> bool:
    if len(tokens) < 2:
        return False
    try:
        int(tokens[0])
    except ValueError:
        return False
    return len(tokens[1]) == 1 and tokens[1].isalpha()


def parse_pssm(text: str | IO[str], target_id: str = "") -> PssmProfile:
    """Parse a PSI-BLAST ASCII profile.

    Header and footer lines are skipped; for each residue row (integer index,
    residue letter, numeric columns) the first 20 numeric columns are taken
    as the scoring matrix. ``normalized`` is left unfilled.
    """
    rows = []
    for lineno, line in enumerate(_lines(text), start=1):
        tokens = line.split()
        if not _looks_like_residue_row(tokens):
            continue
        values = []
        for tok in tokens[2:]:
            try:
                values.append(float(tok))
            except ValueError:
                break
            if len(values) == 20:
                break
        if len(values) < 20:
            raise ParseError(
                f"residue row has {len(values)} numeric columns, expected at least 20",
                line=lineno,
            )
        rows.append(values)
    if not rows:
        raise ParseError("no residue rows found in PSSM input")
    return PssmProfile(target_id=target_id, raw=np.array(rows, dtype=float))


#: header names required in an SPD file, after normalization
_SPD_REQUIRED = ("SS", "ASA", "Phi", "Psi", "Theta", "Tau", "P(C)", "P(E)", "P(H)")
_SPD_ANGLES = ("Phi", "Psi", "Theta", "Tau")
_SPD_PROBS = ("P(C)", "P(E)", "P(H)")


def _normalize_spd_name(name: str) -> str:
    # SPIDER2 writes e.g. "Theta(i-1=>i+1)"; probability names keep their parens.
    for prefix in ("Theta", "Tau", "Phi", "Psi"):
        if name.startswith(prefix):
            return prefix
    return name


def parse_spd(text: str | IO[str], target_id: str = "") -> StructProfile:
    """Parse an SPD structural profile; column lookup is by header name.

    The first ``#``-prefixed line names the columns. A data row may carry one
    extra leading field (an unnamed residue index), which is ignored.
    """
    lines = list(_lines(text))
    names: list[str] | None = None
    header_line = 0
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if stripped.startswith("#"):
            names = [_normalize_spd_name(tok) for tok in stripped[1:].split()]
            header_line = lineno
            break
        if stripped:
            raise ParseError("expected a #-prefixed header row before data", line=lineno)
    if names is None:
        raise ParseError("missing header row")
    for required in _SPD_REQUIRED:
        if required not in names:
            raise ParseError(f"missing column {required}")

    ss_chars = []
    asa, angles, probs = [], [], []
    row = 0
    for lineno, line in enumerate(lines[header_line:], start=header_line + 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split()
        if len(fields) == len(names) + 1:
            fields = fields[1:]  # unnamed leading residue index
        if len(fields) != len(names):
            raise ParseError(
                f"expected {len(names)} fields, got {len(fields)}", line=lineno
            )
        record = dict(zip(names, fields))
        row += 1

        def numeric(column: str) -> float:
            try:
                return float(record[column])
            except ValueError:
                raise ParseError(
                    f"non-numeric value {record[column]!r}", line=lineno, column=column
                ) from None

        ss_chars.append(record["SS"])
        asa.append(numeric("ASA"))
        angles.append([numeric(c) for c in _SPD_ANGLES])
        probs.append([numeric(c) for c in _SPD_PROBS])
    if row == 0:
        raise ParseError("no residue rows found in SPD input")
    return StructProfile(
        target_id=target_id,
        ss="".join(ss_chars),
        asa=np.array(asa),
        angles=np.array(angles),
        probs=np.array(probs),
    )


def parse_fingerprints(text: str | IO[str]) -> FingerprintTable:
    """Parse a fingerprint table: drug id, TAB, 881-character {0,1} string."""
    entries: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(_lines(text), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split()
        if len(fields) != 2:
            raise ParseError(f"expected 2 fields (id, bits), got {len(fields)}", line=lineno)
        drug_id, bits = fields
        if drug_id in entries:
            raise ParseError(f"duplicate drug id {drug_id!r}", line=lineno)
        if len(bits) != FINGERPRINT_BITS:
            raise ParseError(
                f"expected {FINGERPRINT_BITS} bits for {drug_id!r}, got {len(bits)}",
                line=lineno,
            )
        if set(bits) - {"0", "1"}:
            raise ParseError(f"fingerprint for {drug_id!r} contains non-binary characters",
                             line=lineno)
        entries[drug_id] = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    return FingerprintTable(entries)


_fetch_locks: dict[tuple[str, str], threading.Lock] = {}
_fetch_locks_guard = threading.Lock()


def _cache_path(cache_dir: str, kind: str, record_id: str) -> str:
    safe = "".join(c if c.isalnum() or c in "._-" else "_" for c in record_id)
    return os.path.join(cache_dir, kind, safe + ".txt")


def fetch_record(
    record_id: str,
    kind: str,
    cache_dir: str,
    url_templates: Mapping[str, str] | None = None,
    offline: bool = False,
    timeout: float = 30.0,
) -> str:
    """Return the raw registry record for ``record_id``, cache-first.

    On a cache miss one HTTP GET is issued against the kind's URL template
    (``{id}`` placeholder) and the body is stored verbatim under
    ``cache_dir``. With ``offline=True`` only cache hits succeed. Writes per
    (kind, id) key are serialized and the final rename is atomic.
    """
    if kind not in RECORD_KINDS:
        raise ValueError(f"unknown record kind {kind!r}, expected one of {RECORD_KINDS}")
    path = _cache_path(cache_dir, kind, record_id)
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    if offline:
        raise UnavailableError(f"{kind} record {record_id!r} not cached and networking disabled")
    template = (url_templates or {}).get(kind)
    if not template:
        raise UnavailableError(f"no URL template configured for kind {kind!r}")
    url = template.format(id=record_id)
    try:
        with urllib.request.urlopen(url, timeout=timeout) as response:
            body = response.read().decode("utf-8")
            status = getattr(response, "status", 200)
    except urllib.error.HTTPError as exc:
        raise RemoteError(f"GET {url} failed with status {exc.code}", status=exc.code) from exc
    except urllib.error.URLError as exc:
        raise RemoteError(f"GET {url} failed: {exc.reason}") from exc
    if status != 200:
        raise RemoteError(f"GET {url} failed with status {status}", status=status)

    with _fetch_locks_guard:
        lock = _fetch_locks.setdefault((kind, record_id), threading.Lock())
    with lock:
        os.makedirs(os.path.dirname(path), exist_ok=True)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(body)
        os.replace(tmp, path)
    return body
