from fractions import Fraction

import numpy as np
import pytest

from ddipred.corpus import (
    Label,
    PairInstance,
    Protocol,
    assign_pu_labels,
    class_weights,
    load_catalog,
    load_pairs,
    split_dataset,
)
from ddipred.errors import ConfigError, DataError

from conftest import write_drugs, write_embeddings, write_pairs, write_profiles


def load_tiny(paths, scaffolds=None):
    return load_catalog(paths["drugs"], [paths["mol2vec"], paths["smilesbert"]],
                        paths["profiles"], scaffolds)


def test_load_catalog_happy_path(tiny_corpus):
    catalog = load_tiny(tiny_corpus)
    assert len(catalog) == 3
    assert catalog.embedding_dims == {"mol2vec": 4, "smilesbert": 4}
    assert catalog["dA"].profile.enzymes == {"cyp3a4"}  # case-normalized
    assert catalog["dC"].profile.scaffold_id == "scafZ"


def test_load_catalog_unknown_embedding_drug(tiny_corpus, tmp_path):
    bad = tmp_path / "extra.jsonl"
    write_embeddings(bad, "mol2vec", {"ghost": [1.0, 2.0, 3.0, 4.0]})
    with pytest.raises(DataError, match="unknown drug_id"):
        load_catalog(tiny_corpus["drugs"], [bad], tiny_corpus["profiles"])


def test_load_catalog_dimension_mismatch(tmp_path):
    write_drugs(tmp_path / "d.csv", ["a", "b"])
    write_embeddings(tmp_path / "e.jsonl", "mol2vec", {"a": [1.0] * 300, "b": [1.0] * 299})
    write_profiles(tmp_path / "p.jsonl", {"a": {}, "b": {}})
    with pytest.raises(DataError, match="dimension mismatch"):
        load_catalog(tmp_path / "d.csv", [tmp_path / "e.jsonl"], tmp_path / "p.jsonl")


def test_load_catalog_duplicate_drug(tmp_path):
    with open(tmp_path / "d.csv", "w") as fh:
        fh.write("drug_id,smiles\nx,\nx,\n")
    write_embeddings(tmp_path / "e.jsonl", "mol2vec", {})
    write_profiles(tmp_path / "p.jsonl", {})
    with pytest.raises(DataError, match="duplicate drug_id"):
        load_catalog(tmp_path / "d.csv", [tmp_path / "e.jsonl"], tmp_path / "p.jsonl")


def test_load_catalog_malformed_line_reports_lineno(tmp_path):
    write_drugs(tmp_path / "d.csv", ["a"])
    with open(tmp_path / "e.jsonl", "w") as fh:
        fh.write('{"drug_id": "a", "source": "mol2vec", "vector": [1.0]}\n')
        fh.write("not json\n")
    write_profiles(tmp_path / "p.jsonl", {"a": {}})
    with pytest.raises(DataError, match=":2"):
        load_catalog(tmp_path / "d.csv", [tmp_path / "e.jsonl"], tmp_path / "p.jsonl")


def test_scaffold_overlay_file(tiny_corpus, tmp_path):
    overlay = tmp_path / "scaffolds.csv"
    with open(overlay, "w") as fh:
        fh.write("drug_id,scaffold\ndA,ring1\ndB,\n")
    catalog = load_tiny(tiny_corpus, overlay)
    assert catalog["dA"].profile.scaffold_id == "ring1"
    assert catalog["dB"].profile.scaffold_id is None  # empty means absent
    assert catalog["dC"].profile.scaffold_id == "scafZ"


def test_assign_pu_labels_tiny(tiny_corpus):
    catalog = load_tiny(tiny_corpus)
    labeled = assign_pu_labels(load_pairs(tiny_corpus["pairs"]), catalog, tau_neg=0.1)
    by_key = {p.key: p.label for p in labeled}
    assert by_key[("dA", "dB")] is Label.POSITIVE            # documented
    assert by_key[("dA", "dC")] is Label.RELIABLE_NEGATIVE   # fully disjoint
    assert by_key[("dB", "dC")] is Label.RELIABLE_NEGATIVE


def test_assign_pu_labels_shared_enzyme_is_unknown(tiny_corpus):
    catalog = load_tiny(tiny_corpus)
    labeled = assign_pu_labels([("dA", "dB", False)], catalog, tau_neg=0.1)
    assert labeled[0].label is Label.UNKNOWN  # dA/dB share cyp3a4


def test_assign_pu_labels_swap_invariant(tiny_corpus):
    catalog = load_tiny(tiny_corpus)
    fwd = assign_pu_labels([("dA", "dC", False)], catalog, 0.1)[0]
    rev = assign_pu_labels([("dC", "dA", False)], catalog, 0.1)[0]
    assert fwd == rev
    assert fwd.drug_a == "dA"  # canonical order


def test_assign_pu_labels_rejects_self_pair_and_unknown(tiny_corpus):
    catalog = load_tiny(tiny_corpus)
    with pytest.raises(DataError, match="self-pair"):
        assign_pu_labels([("dA", "dA", True)], catalog, 0.1)
    with pytest.raises(DataError, match="unknown drug_id"):
        assign_pu_labels([("dA", "nope", True)], catalog, 0.1)
    with pytest.raises(DataError, match="duplicate pair"):
        assign_pu_labels([("dA", "dB", True), ("dB", "dA", False)], catalog, 0.1)


def test_label_partition_is_total(tiny_corpus):
    catalog = load_tiny(tiny_corpus)
    labeled = assign_pu_labels(load_pairs(tiny_corpus["pairs"]), catalog, 0.1)
    assert all(p.label in (Label.POSITIVE, Label.RELIABLE_NEGATIVE, Label.UNKNOWN) for p in labeled)


def _pairs(n):
    return [PairInstance.canonical(f"d{i:03d}", f"d{i + 1:03d}",
                                   Label.POSITIVE if i % 2 else Label.RELIABLE_NEGATIVE)
            for i in range(0, 2 * n, 2)]


def oracle_sizes(n, ratios):
    """Independent largest-remainder computation over exact fractions."""
    quotas = [Fraction(r).limit_denominator(10**6) * n for r in ratios]
    sizes = [int(q) for q in quotas]
    remainders = [q - s for q, s in zip(quotas, sizes)]
    order = sorted(range(3), key=lambda i: (-remainders[i], i))
    for i in order[: n - sum(sizes)]:
        sizes[i] += 1
    return tuple(sizes)


def test_random_split_sizes_follow_largest_remainder():
    split = split_dataset(_pairs(10), Protocol.RANDOM, (0.8, 0.1, 0.1), seed=13)
    assert split.sizes == (8, 1, 1)
    for n in (10, 11, 17, 23, 57, 100, 149):
        split = split_dataset(_pairs(n), Protocol.RANDOM, (0.8, 0.1, 0.1), seed=1)
        assert split.sizes == oracle_sizes(n, (0.8, 0.1, 0.1))
        assert sum(split.sizes) == n


def test_random_split_partitions_input():
    pairs = _pairs(20)
    split = split_dataset(pairs, Protocol.RANDOM, (0.8, 0.1, 0.1), seed=5)
    rebuilt = sorted(split.train + split.validation + split.test)
    assert rebuilt == sorted(pairs)
    assert split.dropped == []


def test_split_determinism():
    pairs = _pairs(30)
    a = split_dataset(pairs, Protocol.RANDOM, (0.8, 0.1, 0.1), seed=13)
    b = split_dataset(pairs, Protocol.RANDOM, (0.8, 0.1, 0.1), seed=13)
    assert (a.train, a.validation, a.test) == (b.train, b.validation, b.test)
    c = split_dataset(pairs, Protocol.RANDOM, (0.8, 0.1, 0.1), seed=14)
    assert (a.train, a.validation, a.test) != (c.train, c.validation, c.test)


def _dense_pairs(n_drugs):
    ids = [f"d{i:02d}" for i in range(n_drugs)]
    return [PairInstance.canonical(a, b, Label.POSITIVE)
            for i, a in enumerate(ids) for b in ids[i + 1:]]


def test_coldstart_disjoint_drug_sets():
    pairs = _dense_pairs(12)
    split = split_dataset(pairs, Protocol.COLD_START, (0.6, 0.2, 0.2), seed=3)
    train_drugs = {d for p in split.train for d in p.key}
    test_drugs = {d for p in split.test for d in p.key}
    val_drugs = {d for p in split.validation for d in p.key}
    assert train_drugs & test_drugs == set()
    assert train_drugs & val_drugs == set()
    assert val_drugs & test_drugs == set()
    assert len(split.train) + len(split.validation) + len(split.test) + len(split.dropped) == len(pairs)


def test_scaffold_split_disjoint_scaffolds(tmp_path):
    ids = [f"d{i:02d}" for i in range(12)]
    write_drugs(tmp_path / "d.csv", ids)
    write_embeddings(tmp_path / "e1.jsonl", "mol2vec", {d: [1.0, 0.0] for d in ids})
    write_embeddings(tmp_path / "e2.jsonl", "smilesbert", {d: [0.0, 1.0] for d in ids})
    write_profiles(tmp_path / "p.jsonl", {d: {"scaffold": f"s{i % 6}"} for i, d in enumerate(ids)})
    catalog = load_catalog(tmp_path / "d.csv", [tmp_path / "e1.jsonl", tmp_path / "e2.jsonl"],
                           tmp_path / "p.jsonl")
    pairs = _dense_pairs(12)
    split = split_dataset(pairs, Protocol.SCAFFOLD, (0.5, 0.25, 0.25), seed=11, catalog=catalog)
    scaf = lambda d: catalog[d].profile.scaffold_id
    train_scafs = {scaf(d) for p in split.train for d in p.key}
    test_scafs = {scaf(d) for p in split.test for d in p.key}
    assert train_scafs & test_scafs == set()


def test_scaffold_split_requires_scaffolds(tiny_corpus, tmp_path):
    catalog = load_tiny(tiny_corpus)
    catalog["dA"].profile.scaffold_id = None
    pairs = [PairInstance.canonical("dA", "dB", Label.POSITIVE)]
    with pytest.raises(DataError, match="no scaffold_id"):
        split_dataset(pairs * 1, Protocol.SCAFFOLD, (0.8, 0.1, 0.1), 0, catalog)


def test_split_rejects_bad_ratios():
    with pytest.raises(ConfigError):
        split_dataset(_pairs(10), Protocol.RANDOM, (0.5, 0.5, 0.5), seed=0)


def test_split_empty_partition_is_error():
    # 5 pairs at 80/10/10 leaves the test bucket empty
    with pytest.raises(DataError, match="empty partition"):
        split_dataset(_pairs(5), Protocol.RANDOM, (0.8, 0.1, 0.1), seed=0)


def test_class_weights():
    pairs = [PairInstance("a", "b", Label.POSITIVE)] * 2 + [PairInstance("a", "c", Label.RELIABLE_NEGATIVE)] * 8
    assert class_weights(pairs) == (4.0, 1.0)
    balanced = [PairInstance("a", "b", Label.POSITIVE)] * 5 + [PairInstance("a", "c", Label.RELIABLE_NEGATIVE)] * 5
    assert class_weights(balanced) == (1.0, 1.0)


def test_class_weights_degenerate():
    with pytest.raises(DataError, match="degenerate"):
        class_weights([PairInstance("a", "b", Label.POSITIVE)])
