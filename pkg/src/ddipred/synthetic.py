"""Synthetic corpus generator with a planted interaction rule.

Ground truth: a pair interacts iff the drugs share a metabolic enzyme OR
their fused embeddings have cosine similarity above a threshold. The
`documented` column is that truth with symmetric label noise applied.

Drugs live in embedding clusters (same-cluster pairs are the high-cosine
ones). Cluster members draw 5 of 7 cluster side-effect tokens, so any two
of them share at least 3 and a noise-flipped high-cosine pair always
fails the reliable-negative filter, landing in Unknown instead of
polluting the negatives. Enzyme assignment is independent of the
clusters, which keeps the clinical-score channel complementary to the
embedding channel; carried enzymes pull in a matching target token most
of the time, so enzyme-sharing pairs usually light up two clinical rules.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BenchmarkSpec:
    n_drugs: int = 200
    n_clusters: int = 10
    dim: int = 24
    cos_threshold: float = 0.8
    label_noise: float = 0.15
    n_same_cluster_pairs: int = 700
    n_enzyme_pairs: int = 600
    n_random_pairs: int = 700
    intra_cluster_sigma: float = 0.06
    source_jitter: float = 0.05
    n_enzyme_tokens: int = 40
    enzyme_target_rate: float = 0.7
    n_target_tokens: int = 80
    n_group_tokens: int = 20
    n_global_side_effects: int = 40
    side_effects_per_cluster: int = 7
    pk_modulator_rate: float = 0.05
    seed: int = 7


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


def _atc_pool(rng, n: int) -> list:
    letters = "ABCDGHJLMNPRSV"
    pool = set()
    while len(pool) < n:
        code = (
            letters[int(rng.integers(len(letters)))]
            + f"{int(rng.integers(1, 17)):02d}"
            + letters[int(rng.integers(len(letters)))]
            + letters[int(rng.integers(len(letters)))]
            + f"{int(rng.integers(1, 100)):02d}"
        )
        pool.add(code)
    return sorted(pool)


def generate_benchmark(out_dir, spec: BenchmarkSpec = BenchmarkSpec()):
    """Write drugs/embeddings/profiles/pairs files plus a ground_truth.csv.

    Returns a summary dict with the planted-rule composition.
    """
    rng = np.random.default_rng(spec.seed)
    os.makedirs(out_dir, exist_ok=True)
    ids = [f"D{i:04d}" for i in range(spec.n_drugs)]
    cluster_of = {ids[i]: i % spec.n_clusters for i in range(spec.n_drugs)}

    centers = rng.standard_normal((spec.n_clusters, spec.dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    fused = {}
    emb1 = {}
    emb2 = {}
    for d in ids:
        vec = centers[cluster_of[d]] + spec.intra_cluster_sigma * rng.standard_normal(spec.dim)
        vec /= np.linalg.norm(vec)
        jitter = spec.source_jitter * rng.standard_normal(spec.dim)
        fused[d] = vec
        emb1[d] = vec + jitter
        emb2[d] = vec - jitter  # 0.5 * (emb1 + emb2) recovers the fused vector

    enzyme_pool = [f"cyp{i}" for i in range(spec.n_enzyme_tokens)]
    target_pool = [f"tgt{i}" for i in range(spec.n_target_tokens)]
    group_pool = [f"grp{i}" for i in range(spec.n_group_tokens)]
    global_se = [f"se{i}" for i in range(spec.n_global_side_effects)]
    cluster_se = {
        c: [f"cse{c}_{j}" for j in range(spec.side_effects_per_cluster)]
        for c in range(spec.n_clusters)
    }
    atc_codes = _atc_pool(rng, 50)

    profiles = {}
    for d in ids:
        c = cluster_of[d]
        enzymes = sorted(rng.choice(enzyme_pool, size=int(rng.integers(0, 3)), replace=False).tolist())
        targets = set(rng.choice(target_pool, size=int(rng.integers(1, 3)), replace=False).tolist())
        # metabolism tends to come with a matching target class
        for e in enzymes:
            if rng.random() < spec.enzyme_target_rate:
                targets.add(f"etgt_{e}")
        profiles[d] = {
            "drug_id": d,
            "enzymes": enzymes,
            "targets": sorted(targets),
            "atc": sorted(rng.choice(atc_codes, size=int(rng.integers(1, 3)), replace=False).tolist()),
            "groups": [group_pool[int(rng.integers(spec.n_group_tokens))]],
            "side_effects": sorted(
                rng.choice(cluster_se[c], size=5, replace=False).tolist()
                + rng.choice(global_se, size=2, replace=False).tolist()
            ),
            "strong_pk_modulator": bool(rng.random() < spec.pk_modulator_rate),
            "scaffold": f"scaf_{c}_{int(rng.integers(3))}",
        }

    enzymes_of = {d: set(profiles[d]["enzymes"]) for d in ids}

    def shares_enzyme(a, b):
        return bool(enzymes_of[a] & enzymes_of[b])

    def canonical(a, b):
        return (a, b) if a < b else (b, a)

    chosen: set = set()

    def take(candidates, n_wanted):
        picked = []
        order = rng.permutation(len(candidates))
        for i in order:
            key = candidates[int(i)]
            if key in chosen:
                continue
            chosen.add(key)
            picked.append(key)
            if len(picked) == n_wanted:
                break
        return picked

    cluster_members = {c: [d for d in ids if cluster_of[d] == c] for c in range(spec.n_clusters)}
    same_cluster_candidates = sorted(
        canonical(a, b)
        for members in cluster_members.values()
        for i, a in enumerate(members)
        for b in members[i + 1 :]
    )
    by_enzyme: dict = {}
    for d in ids:
        for e in enzymes_of[d]:
            by_enzyme.setdefault(e, []).append(d)
    enzyme_candidates = sorted(
        {
            canonical(a, b)
            for members in by_enzyme.values()
            for i, a in enumerate(members)
            for b in members[i + 1 :]
            if cluster_of[a] != cluster_of[b]
        }
    )
    same_cluster = take(same_cluster_candidates, spec.n_same_cluster_pairs)
    enzyme_pairs = take(enzyme_candidates, spec.n_enzyme_pairs)

    random_pairs = []
    while len(random_pairs) < spec.n_random_pairs:
        a, b = (ids[int(i)] for i in rng.integers(0, spec.n_drugs, size=2))
        if a == b or cluster_of[a] == cluster_of[b] or shares_enzyme(a, b):
            continue
        key = canonical(a, b)
        if key in chosen:
            continue
        chosen.add(key)
        random_pairs.append(key)
    pairs = same_cluster + enzyme_pairs + random_pairs

    rows = []
    n_true = 0
    for a, b in pairs:
        cos = _cosine(fused[a], fused[b])
        truth = shares_enzyme(a, b) or cos > spec.cos_threshold
        flip = bool(rng.random() < spec.label_noise)
        documented = truth != flip
        n_true += int(truth)
        rows.append((a, b, int(documented), int(truth), int(shares_enzyme(a, b)), cos))

    with open(os.path.join(out_dir, "drugs.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["drug_id", "smiles"])
        for d in ids:
            writer.writerow([d, ""])
    for source, table in (("mol2vec", emb1), ("smilesbert", emb2)):
        with open(os.path.join(out_dir, f"{source}.jsonl"), "w", encoding="utf-8") as fh:
            for d in ids:
                fh.write(
                    json.dumps({"drug_id": d, "source": source, "vector": table[d].tolist()}) + "\n"
                )
    with open(os.path.join(out_dir, "profiles.jsonl"), "w", encoding="utf-8") as fh:
        for d in ids:
            fh.write(json.dumps(profiles[d]) + "\n")
    with open(os.path.join(out_dir, "pairs.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["drug_a", "drug_b", "documented"])
        for a, b, documented, _, _, _ in rows:
            writer.writerow([a, b, documented])
    with open(os.path.join(out_dir, "ground_truth.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["drug_a", "drug_b", "documented", "truth", "shared_enzyme", "cosine"])
        for a, b, documented, truth, shared, cos in rows:
            writer.writerow([a, b, documented, truth, shared, f"{cos:.6f}"])

    return {
        "n_drugs": spec.n_drugs,
        "n_pairs": len(rows),
        "n_true_interactions": n_true,
        "n_documented": sum(r[2] for r in rows),
        "n_same_cluster_pairs": len(same_cluster),
        "n_enzyme_pairs": len(enzyme_pairs),
        "n_random_pairs": len(random_pairs),
        "files": ["drugs.csv", "mol2vec.jsonl", "smilesbert.jsonl", "profiles.jsonl", "pairs.csv"],
    }
