"""Shared fixtures: synthetic profiles and on-disk corpus writers."""

import numpy as np
import pytest

from dtiboost.corpus import FINGERPRINT_BITS, PssmProfile, StructProfile

AMINO = "ARNDCQEGHILKMFPSTWYV"


def make_pssm(rng, length, target_id="t"):
    raw = rng.integers(-10, 12, size=(length, 20)).astype(float)
    return PssmProfile(target_id=target_id, raw=raw)


def make_struct(rng, length, target_id="t"):
    ss = "".join(rng.choice(list("HEC"), size=length))
    asa = rng.uniform(0.0, 250.0, size=length)
    angles = rng.uniform(-180.0, 180.0, size=(length, 4))
    probs = rng.uniform(0.0, 1.0, size=(length, 3))
    return StructProfile(target_id=target_id, ss=ss, asa=asa, angles=angles, probs=probs)


def make_fingerprint(rng):
    return rng.integers(0, 2, size=FINGERPRINT_BITS).astype(np.uint8)


def pssm_text(profile):
    """Render a profile the way the alignment tool prints it: banner lines,
    a residue letter column, 20 scores, then 20 percentages and two floats
    that must be ignored."""
    rng = np.random.default_rng(profile.raw.shape[0])
    lines = [
        "",
        "Last position-specific scoring matrix computed, weighted observed"
        " percentages rounded down, information per position, and relative"
        " weight of gapless real matches to pseudocounts",
        "            " + "   ".join(AMINO) + "   " + "   ".join(AMINO),
    ]
    for i, row in enumerate(profile.raw, start=1):
        scores = " ".join(f"{int(v):3d}" for v in row)
        percents = " ".join(f"{int(p):3d}" for p in rng.integers(0, 100, size=20))
        lines.append(
            f"{i:5d} {AMINO[i % 20]}  {scores}  {percents}  {rng.uniform(0, 2):.2f}"
            f" {rng.uniform(0, 2):.2f}"
        )
    lines.extend(["", "                      K         Lambda", "Standard Ungapped    0.13     0.31"])
    return "\n".join(lines) + "\n"


def spd_text(profile, shuffle_columns=False, named_index=False):
    """Render a structural profile in the columnar format with a # header."""
    names = ["SEQ", "SS", "ASA", "Phi", "Psi", "Theta(i-1=>i+1)",
             "Tau(i-2=>i+2)", "P(C)", "P(E)", "P(H)"]
    if named_index:
        names = ["index"] + names

    def fields_for(i):
        row = {
            "index": str(i + 1),
            "SEQ": AMINO[i % 20],
            "SS": profile.ss[i],
            "ASA": f"{profile.asa[i]:.4f}",
            "Phi": f"{profile.angles[i, 0]:.4f}",
            "Psi": f"{profile.angles[i, 1]:.4f}",
            "Theta(i-1=>i+1)": f"{profile.angles[i, 2]:.4f}",
            "Tau(i-2=>i+2)": f"{profile.angles[i, 3]:.4f}",
            "P(C)": f"{profile.probs[i, 0]:.4f}",
            "P(E)": f"{profile.probs[i, 1]:.4f}",
            "P(H)": f"{profile.probs[i, 2]:.4f}",
        }
        return row

    order = list(names)
    if shuffle_columns:
        order = list(reversed(names))
    lines = ["# " + "\t".join(order)]
    for i in range(profile.length):
        row = fields_for(i)
        values = [row[name] for name in order]
        if not named_index:
            values = [str(i + 1)] + values
        lines.append("\t".join(values))
    return "\n".join(lines) + "\n"


def fingerprint_text(entries):
    lines = ["# drug_id\tbits"]
    for drug_id, bits in entries.items():
        lines.append(drug_id + "\t" + "".join(str(int(b)) for b in bits))
    return "\n".join(lines) + "\n"


def interaction_text(edges, drugs=(), targets=()):
    lines = [f"#drug:{d}" for d in drugs] + [f"#target:{t}" for t in targets]
    lines += [f"{d}\t{t}" for d, t in edges]
    return "\n".join(lines) + "\n"


@pytest.fixture
def fixture_corpus(tmp_path):
    """On-disk corpus: 6 drugs x 5 targets, 10 edges, profiles of length 12.

    Returns a dict of paths plus the ground-truth objects.
    """
    rng = np.random.default_rng(7)
    drugs = [f"D{i:02d}" for i in range(6)]
    targets = [f"T{i:02d}" for i in range(5)]
    edges = [
        ("D00", "T00"), ("D00", "T01"), ("D01", "T01"), ("D01", "T02"),
        ("D02", "T02"), ("D02", "T03"), ("D03", "T03"), ("D04", "T04"),
        ("D05", "T00"), ("D05", "T04"),
    ]
    pssm_dir = tmp_path / "pssm"
    spd_dir = tmp_path / "spd"
    pssm_dir.mkdir()
    spd_dir.mkdir()
    pssms, structs = {}, {}
    for t in targets:
        pssms[t] = make_pssm(rng, 12, t)
        structs[t] = make_struct(rng, 12, t)
        (pssm_dir / f"{t}.pssm").write_text(pssm_text(pssms[t]))
        (spd_dir / f"{t}.spd").write_text(spd_text(structs[t]))
    prints = {d: make_fingerprint(rng) for d in drugs}
    fp_path = tmp_path / "fingerprints.tsv"
    fp_path.write_text(fingerprint_text(prints))
    inter_path = tmp_path / "interactions.tsv"
    inter_path.write_text(interaction_text(edges))
    return {
        "root": tmp_path,
        "interactions": str(inter_path),
        "pssm_dir": str(pssm_dir),
        "spd_dir": str(spd_dir),
        "fingerprints": str(fp_path),
        "drugs": drugs,
        "targets": targets,
        "edges": edges,
        "pssms": pssms,
        "structs": structs,
        "prints": prints,
    }
