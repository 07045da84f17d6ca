"""Drug catalog loading, positive-unlabeled labeling, and dataset splits.

File formats:
  drugs     CSV with header ``drug_id,smiles`` (smiles may be empty)
  embedding JSON Lines ``{"drug_id": ..., "source": ..., "vector": [...]}``
  profiles  JSON Lines with enzymes/targets/atc/groups/side_effects/
            strong_pk_modulator and an optional scaffold
  pairs     CSV with header ``drug_a,drug_b,documented`` (documented in {1,0})
  scaffolds optional CSV ``drug_id,scaffold`` overlaying the profile field

Loading is streaming and the resulting catalog is immutable in practice:
nothing in this package mutates it after load, so it is safe to share
across parallel workers.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError, DataError
from .rbscore import side_effect_similarity, atc_match

DEFAULT_TAU_NEG = 0.1
DEFAULT_RATIOS = (0.8, 0.1, 0.1)


class Label(str, Enum):
    POSITIVE = "positive"
    RELIABLE_NEGATIVE = "reliable_negative"
    UNKNOWN = "unknown"


class Protocol(str, Enum):
    RANDOM = "random"
    COLD_START = "coldstart"
    SCAFFOLD = "scaffold"


@dataclass
class ClinicalProfile:
    enzymes: set = field(default_factory=set)
    targets: set = field(default_factory=set)
    atc_codes: set = field(default_factory=set)
    therapeutic_groups: set = field(default_factory=set)
    side_effects: set = field(default_factory=set)
    strong_pk_modulator: bool = False
    scaffold_id: str | None = None


@dataclass
class DrugRecord:
    drug_id: str
    smiles: str = ""
    embeddings: dict = field(default_factory=dict)  # source tag -> np.ndarray
    profile: ClinicalProfile = field(default_factory=ClinicalProfile)


@dataclass(frozen=True, order=True)
class PairInstance:
    """An unordered drug pair, stored with the lexicographically smaller id first."""

    drug_a: str
    drug_b: str
    label: Label = Label.UNKNOWN

    @staticmethod
    def canonical(a: str, b: str, label: Label = Label.UNKNOWN) -> "PairInstance":
        if a == b:
            raise DataError(f"self-pair not allowed: {a!r}")
        if b < a:
            a, b = b, a
        return PairInstance(a, b, label)

    @property
    def key(self) -> tuple:
        return (self.drug_a, self.drug_b)


class DrugCatalog:
    """Drug records keyed by id, with per-source embedding dimensions."""

    def __init__(self, drugs: dict):
        self.drugs = drugs
        self.embedding_dims: dict = {}
        for rec in drugs.values():
            for source, vec in rec.embeddings.items():
                self.embedding_dims.setdefault(source, len(vec))

    def __len__(self) -> int:
        return len(self.drugs)

    def __contains__(self, drug_id: str) -> bool:
        return drug_id in self.drugs

    def __getitem__(self, drug_id: str) -> DrugRecord:
        try:
            return self.drugs[drug_id]
        except KeyError:
            raise DataError(f"unknown drug_id: {drug_id!r}") from None

    def ids(self) -> list:
        return sorted(self.drugs)


@dataclass
class DataSplit:
    train: list
    validation: list
    test: list
    protocol: Protocol
    seed: int
    dropped: list = field(default_factory=list)  # cross-partition pairs

    @property
    def sizes(self) -> tuple:
        return (len(self.train), len(self.validation), len(self.test))


def _norm_token(tok) -> str:
    return str(tok).strip().lower()


def _norm_tokens(tokens) -> set:
    return {_norm_token(t) for t in tokens if str(t).strip()}


def load_catalog(
    drug_file_path,
    embedding_file_paths,
    profile_file_path,
    scaffold_file_path=None,
) -> DrugCatalog:
    """Load drugs, attach embeddings by source tag, and merge clinical profiles.

    embedding_file_paths is an iterable of JSON Lines paths; a file may mix
    source tags. Raises DataError with a file/line reference on malformed
    rows, duplicate drug ids, unknown drug references, or a dimension
    mismatch within one source tag.
    """
    drugs: dict = {}
    with open(drug_file_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "drug_id" not in reader.fieldnames:
            raise DataError(f"{drug_file_path}: expected header with drug_id column")
        for lineno, row in enumerate(reader, start=2):
            drug_id = (row.get("drug_id") or "").strip()
            if not drug_id:
                raise DataError(f"{drug_file_path}:{lineno}: empty drug_id")
            if drug_id in drugs:
                raise DataError(f"{drug_file_path}:{lineno}: duplicate drug_id {drug_id!r}")
            drugs[drug_id] = DrugRecord(drug_id=drug_id, smiles=(row.get("smiles") or "").strip())
    if not drugs:
        raise DataError(f"{drug_file_path}: no drugs")

    dims: dict = {}
    for path in embedding_file_paths:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    drug_id = obj["drug_id"]
                    source = obj["source"]
                    vector = obj["vector"]
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise DataError(f"{path}:{lineno}: malformed embedding row ({exc})") from None
                if drug_id not in drugs:
                    raise DataError(f"{path}:{lineno}: unknown drug_id {drug_id!r}")
                vec = np.asarray(vector, dtype=np.float64)
                if vec.ndim != 1 or vec.size == 0 or not np.all(np.isfinite(vec)):
                    raise DataError(f"{path}:{lineno}: vector must be a non-empty finite 1-d list")
                if source in dims and dims[source] != vec.size:
                    raise DataError(
                        f"{path}:{lineno}: dimension mismatch for source {source!r}: "
                        f"{vec.size} vs {dims[source]}"
                    )
                dims.setdefault(source, vec.size)
                if source in drugs[drug_id].embeddings:
                    raise DataError(f"{path}:{lineno}: duplicate embedding for {drug_id!r}/{source!r}")
                drugs[drug_id].embeddings[source] = vec

    with open(profile_file_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                drug_id = obj["drug_id"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DataError(f"{profile_file_path}:{lineno}: malformed profile row ({exc})") from None
            if drug_id not in drugs:
                raise DataError(f"{profile_file_path}:{lineno}: unknown drug_id {drug_id!r}")
            scaffold = obj.get("scaffold")
            scaffold = str(scaffold).strip() if scaffold else None
            drugs[drug_id].profile = ClinicalProfile(
                enzymes=_norm_tokens(obj.get("enzymes", [])),
                targets=_norm_tokens(obj.get("targets", [])),
                atc_codes={str(c).strip().upper() for c in obj.get("atc", []) if str(c).strip()},
                therapeutic_groups=_norm_tokens(obj.get("groups", [])),
                side_effects=_norm_tokens(obj.get("side_effects", [])),
                strong_pk_modulator=bool(obj.get("strong_pk_modulator", False)),
                scaffold_id=scaffold or None,
            )

    if scaffold_file_path is not None:
        with open(scaffold_file_path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "drug_id" not in reader.fieldnames:
                raise DataError(f"{scaffold_file_path}: expected header with drug_id column")
            for lineno, row in enumerate(reader, start=2):
                drug_id = (row.get("drug_id") or "").strip()
                if drug_id not in drugs:
                    raise DataError(f"{scaffold_file_path}:{lineno}: unknown drug_id {drug_id!r}")
                scaffold = (row.get("scaffold") or "").strip()
                drugs[drug_id].profile.scaffold_id = scaffold or None

    return DrugCatalog(drugs)


def load_pairs(pairs_file_path) -> list:
    """Read the raw pairs CSV into (drug_a, drug_b, documented) tuples."""
    rows = []
    with open(pairs_file_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"drug_a", "drug_b", "documented"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise DataError(f"{pairs_file_path}: expected header drug_a,drug_b,documented")
        for lineno, row in enumerate(reader, start=2):
            doc = (row.get("documented") or "").strip()
            if doc not in ("0", "1"):
                raise DataError(f"{pairs_file_path}:{lineno}: documented must be 0 or 1, got {doc!r}")
            rows.append(((row.get("drug_a") or "").strip(), (row.get("drug_b") or "").strip(), doc == "1"))
    return rows


def assign_pu_labels(raw_pairs, catalog: DrugCatalog, tau_neg: float = DEFAULT_TAU_NEG) -> list:
    """Apply the positive-unlabeled protocol to raw (a, b, documented) pairs.

    Documented pairs become Positive. Undocumented pairs with no shared
    enzymes, no shared targets, no ATC level-3 match, and side-effect
    Jaccard < tau_neg become ReliableNegative; every other undocumented
    pair is Unknown. Output order is canonical-pair order of the input;
    the labeling is invariant under swapping drug_a/drug_b.
    """
    if not 0.0 <= tau_neg <= 1.0:
        raise ConfigError(f"tau_neg must be in [0, 1], got {tau_neg}")
    seen: set = set()
    out = []
    for a, b, documented in raw_pairs:
        pa = catalog[a].profile
        pb = catalog[b].profile
        pair = PairInstance.canonical(a, b)
        if pair.key in seen:
            raise DataError(f"duplicate pair {pair.key}")
        seen.add(pair.key)
        if documented:
            label = Label.POSITIVE
        elif (
            not (pa.enzymes & pb.enzymes)
            and not (pa.targets & pb.targets)
            and not atc_match(pa.atc_codes, pb.atc_codes)
            and side_effect_similarity(pa.side_effects, pb.side_effects) < tau_neg
        ):
            label = Label.RELIABLE_NEGATIVE
        else:
            label = Label.UNKNOWN
        out.append(PairInstance(pair.drug_a, pair.drug_b, label))
    return out


def _largest_remainder_sizes(n: int, ratios) -> list:
    """Integer split sizes that sum exactly to n (largest-remainder rounding)."""
    quotas = [n * r for r in ratios]
    sizes = [int(q) for q in quotas]
    remainders = [q - s for q, s in zip(quotas, sizes)]
    leftover = n - sum(sizes)
    # ties broken by position: train, then validation, then test
    order = sorted(range(len(ratios)), key=lambda i: (-remainders[i], i))
    for i in order[:leftover]:
        sizes[i] += 1
    return sizes


def _check_ratios(ratios):
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"ratios must be three positive numbers summing to 1, got {ratios}")


def _partition(items, ratios, rng) -> dict:
    """Shuffle items and map each to 0/1/2 by largest-remainder sizes."""
    items = sorted(items)
    perm = rng.permutation(len(items))
    sizes = _largest_remainder_sizes(len(items), ratios)
    assignment = {}
    cursor = 0
    for part, size in enumerate(sizes):
        for idx in perm[cursor : cursor + size]:
            assignment[items[idx]] = part
        cursor += size
    return assignment


def split_dataset(
    pairs,
    protocol: Protocol = Protocol.RANDOM,
    ratios=DEFAULT_RATIOS,
    seed: int = 0,
    catalog: DrugCatalog | None = None,
) -> DataSplit:
    """Deterministic train/validation/test split under one of three protocols.

    Random shuffles pairs and cuts by largest-remainder sizes. ColdStart
    partitions drug ids and keeps only pairs whose two drugs fall in the
    same partition; Scaffold does the same over scaffold ids (catalog
    required). Cross-partition pairs are dropped and returned on the
    split's ``dropped`` list.
    """
    protocol = Protocol(protocol)
    _check_ratios(ratios)
    pairs = list(pairs)
    if not pairs:
        raise DataError("cannot split an empty pair list")
    rng = np.random.default_rng(seed)

    if protocol is Protocol.RANDOM:
        perm = rng.permutation(len(pairs))
        sizes = _largest_remainder_sizes(len(pairs), ratios)
        buckets = [[], [], []]
        cursor = 0
        for part, size in enumerate(sizes):
            for idx in perm[cursor : cursor + size]:
                buckets[part].append(pairs[idx])
            cursor += size
        split = DataSplit(buckets[0], buckets[1], buckets[2], protocol, seed)
    else:
        if protocol is Protocol.SCAFFOLD:
            if catalog is None:
                raise ConfigError("scaffold protocol requires the drug catalog")
            keys = {}
            for p in pairs:
                for d in (p.drug_a, p.drug_b):
                    scaffold = catalog[d].profile.scaffold_id
                    if not scaffold:
                        raise DataError(f"scaffold protocol: drug {d!r} has no scaffold_id")
                    keys[d] = scaffold
        else:
            keys = {d: d for p in pairs for d in (p.drug_a, p.drug_b)}
        assignment = _partition(set(keys.values()), ratios, rng)
        buckets = [[], [], []]
        dropped = []
        for p in pairs:
            pa, pb = assignment[keys[p.drug_a]], assignment[keys[p.drug_b]]
            if pa == pb:
                buckets[pa].append(p)
            else:
                dropped.append(p)
        split = DataSplit(buckets[0], buckets[1], buckets[2], protocol, seed, dropped)

    if not (split.train and split.validation and split.test):
        raise DataError(f"{protocol.value} split produced an empty partition (sizes {split.sizes})")
    return split


def class_weights(train_pairs) -> tuple:
    """Inverse-frequency weights (w_pos, w_neg) normalized so w_neg = 1."""
    n_pos = sum(1 for p in train_pairs if p.label is Label.POSITIVE)
    n_neg = sum(1 for p in train_pairs if p.label is Label.RELIABLE_NEGATIVE)
    if n_pos == 0 or n_neg == 0:
        raise DataError(f"degenerate training set: {n_pos} positives, {n_neg} reliable negatives")
    return (n_neg / n_pos, 1.0)
