import csv
import json
import os

import numpy as np
import pytest

from ddipred.corpus import ClinicalProfile


def write_drugs(path, drug_ids):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["drug_id", "smiles"])
        for d in drug_ids:
            writer.writerow([d, ""])


def write_embeddings(path, source, vectors):
    with open(path, "w") as fh:
        for drug_id, vec in vectors.items():
            fh.write(json.dumps({"drug_id": drug_id, "source": source, "vector": list(vec)}) + "\n")


def write_profiles(path, profiles):
    with open(path, "w") as fh:
        for drug_id, profile in profiles.items():
            fh.write(json.dumps({"drug_id": drug_id, **profile}) + "\n")


def write_pairs(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["drug_a", "drug_b", "documented"])
        writer.writerows(rows)


def random_profile(rng) -> ClinicalProfile:
    def pick(prefix, pool, max_n):
        n = int(rng.integers(0, max_n + 1))
        return {f"{prefix}{int(i)}" for i in rng.choice(pool, size=n, replace=False)}

    return ClinicalProfile(
        enzymes=pick("cyp", 12, 3),
        targets=pick("tgt", 15, 3),
        atc_codes={f"{'ABC'[int(rng.integers(3))]}{int(rng.integers(1, 4)):02d}{'XY'[int(rng.integers(2))]}A{int(rng.integers(1, 10)):02d}"
                   for _ in range(int(rng.integers(0, 3)))},
        therapeutic_groups=pick("grp", 6, 2),
        side_effects=pick("se", 20, 6),
        strong_pk_modulator=bool(rng.random() < 0.2),
        scaffold_id=f"scaf{int(rng.integers(5))}",
    )


@pytest.fixture
def tiny_corpus(tmp_path):
    """Three drugs, two embedding sources, consistent dims; plus handy paths."""
    drugs = ["dA", "dB", "dC"]
    vec = {d: np.arange(4, dtype=float) + i for i, d in enumerate(drugs)}
    paths = {
        "drugs": tmp_path / "drugs.csv",
        "mol2vec": tmp_path / "mol2vec.jsonl",
        "smilesbert": tmp_path / "smilesbert.jsonl",
        "profiles": tmp_path / "profiles.jsonl",
        "pairs": tmp_path / "pairs.csv",
    }
    write_drugs(paths["drugs"], drugs)
    write_embeddings(paths["mol2vec"], "mol2vec", vec)
    write_embeddings(paths["smilesbert"], "smilesbert", {d: v * 0.5 for d, v in vec.items()})
    write_profiles(
        paths["profiles"],
        {
            "dA": {"enzymes": ["CYP3A4"], "targets": ["t1"], "atc": ["A10BA02"],
                   "groups": ["g1"], "side_effects": ["s1", "s2"], "strong_pk_modulator": False,
                   "scaffold": "scafX"},
            "dB": {"enzymes": ["cyp3a4"], "targets": ["t2"], "atc": ["A10BB01"],
                   "groups": ["g2"], "side_effects": ["s3"], "strong_pk_modulator": True,
                   "scaffold": "scafY"},
            "dC": {"enzymes": [], "targets": [], "atc": ["C09AA01"],
                   "groups": [], "side_effects": [], "strong_pk_modulator": False,
                   "scaffold": "scafZ"},
        },
    )
    write_pairs(paths["pairs"], [["dA", "dB", 1], ["dA", "dC", 0], ["dB", "dC", 0]])
    return paths
