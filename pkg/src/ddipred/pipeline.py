"""End-to-end runs: prepare, optimize, train, evaluate, predict, rank.

Every command resolves a RunConfig, writes its artifacts under the
config's output directory, and records a run.json with the resolved
config, a version string, and content hashes of the input files. Nothing
here embeds timestamps, so reruns with identical inputs are byte-stable.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
import subprocess
from dataclasses import dataclass, field, asdict

import numpy as np

from . import __version__
from .corpus import (
    DrugCatalog,
    Label,
    PairInstance,
    Protocol,
    DataSplit,
    assign_pu_labels,
    class_weights,
    load_catalog,
    load_pairs,
    split_dataset,
    DEFAULT_TAU_NEG,
)
from .errors import ConfigError, DataError
from .features import DEFAULT_LAMBDA1, pair_feature_matrix
from .hyperopt import OptimizerSettings, SearchSpace, optimize
from .metrics import (
    DEFAULT_N_RESAMPLES,
    DEFAULT_THRESHOLD,
    MetricReport,
    evaluate_scores,
    pr_curve_points,
    rank_top_k,
    roc_curve_points,
)
from .mlp import (
    SEARCH_MAX_EPOCHS,
    SEARCH_PATIENCE,
    MlpConfig,
    init_model,
    load_checkpoint,
    predict_batch,
    save_checkpoint,
    train,
)
from .rbscore import DEFAULT_TAU_SE, score_pair

log = logging.getLogger("ddipred")

SPLIT_NAMES = ("train", "validation", "test")


@dataclass
class RunConfig:
    drugs: str
    embeddings: dict  # source tag -> file path (exactly two sources)
    profiles: str
    pairs: str
    output_dir: str
    scaffolds: str | None = None
    lambda1: float = DEFAULT_LAMBDA1
    tau_se: float = DEFAULT_TAU_SE
    tau_neg: float = DEFAULT_TAU_NEG
    threshold: float = DEFAULT_THRESHOLD
    use_rbscore: bool = True
    split: dict = field(default_factory=lambda: {"protocol": "random", "ratios": [0.8, 0.1, 0.1], "seed": 13})
    mlp: dict = field(default_factory=dict)
    optimizer: dict = field(default_factory=dict)
    bootstrap: dict = field(default_factory=lambda: {"n_resamples": DEFAULT_N_RESAMPLES, "seed": 13})
    workers: int | None = None  # None means available parallelism

    def __post_init__(self):
        if len(self.embeddings) != 2:
            raise ConfigError(f"exactly two embedding sources required, got {sorted(self.embeddings)}")
        if not self.workers:
            self.workers = os.cpu_count() or 1

    def validate_paths(self) -> None:
        for path in [self.drugs, self.profiles, self.pairs, *self.embeddings.values()] + (
            [self.scaffolds] if self.scaffolds else []
        ):
            if not os.path.isfile(path):
                raise ConfigError(f"input file not found: {path}")
        os.makedirs(self.output_dir, exist_ok=True)
        if not os.access(self.output_dir, os.W_OK):
            raise ConfigError(f"output dir not writable: {self.output_dir}")

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if overrides:
            for key, value in overrides.items():
                if value is None:
                    continue
                if "." in key:  # e.g. "split.protocol"
                    top, sub = key.split(".", 1)
                    raw.setdefault(top, {})[sub] = value
                else:
                    raw[key] = value
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ConfigError(f"bad config {path}: {exc}") from None

    def out(self, name: str) -> str:
        return os.path.join(self.output_dir, name)


class FeatureBuilder:
    """Turns drug pairs into model inputs: fused embeddings -> symmetric
    pairwise blocks -> optional clinical-score element.

    Sources are fused in sorted tag order (mol2vec before smilesbert), so
    lambda1 weighs the first tag. The builder is read-only after
    construction and safe to share across workers.
    """

    def __init__(self, catalog: DrugCatalog, lambda1: float = DEFAULT_LAMBDA1,
                 tau_se: float = DEFAULT_TAU_SE, use_rbscore: bool = True):
        sources = sorted(catalog.embedding_dims)
        if len(sources) != 2:
            raise DataError(f"exactly two embedding sources required, found {sources}")
        d1, d2 = (catalog.embedding_dims[s] for s in sources)
        if d1 != d2:
            raise DataError(
                f"embedding dimension mismatch between sources: {sources[0]}={d1}, {sources[1]}={d2}"
            )
        self.catalog = catalog
        self.lambda1 = lambda1
        self.tau_se = tau_se
        self.use_rbscore = use_rbscore
        ids = [
            d for d in catalog.ids()
            if all(s in catalog[d].embeddings for s in sources)
        ]
        self._index = {d: i for i, d in enumerate(ids)}
        e1 = np.stack([catalog[d].embeddings[sources[0]] for d in ids]) if ids else np.zeros((0, d1))
        e2 = np.stack([catalog[d].embeddings[sources[1]] for d in ids]) if ids else np.zeros((0, d1))
        if not 0.0 <= lambda1 <= 1.0:
            raise ConfigError(f"lambda1 must be in [0, 1], got {lambda1}")
        self.fused = lambda1 * e1 + (1.0 - lambda1) * e2
        self.dim = d1
        self._score_cache: dict = {}

    @property
    def input_dim(self) -> int:
        return 4 * self.dim + (1 if self.use_rbscore else 0)

    def clinical_score(self, drug_a: str, drug_b: str) -> float:
        key = (drug_a, drug_b) if drug_a < drug_b else (drug_b, drug_a)
        if key not in self._score_cache:
            breakdown = score_pair(self.catalog[key[0]].profile, self.catalog[key[1]].profile, self.tau_se)
            self._score_cache[key] = breakdown.normalized
        return self._score_cache[key]

    def _row_indices(self, pairs):
        idx_a, idx_b = [], []
        for p in pairs:
            for d, acc in ((p.drug_a, idx_a), (p.drug_b, idx_b)):
                if d not in self._index:
                    if d not in self.catalog:
                        raise DataError(f"unknown drug_id: {d!r}")
                    raise DataError(f"drug {d!r} is missing an embedding source")
                acc.append(self._index[d])
        return np.array(idx_a, dtype=int), np.array(idx_b, dtype=int)

    def feature_matrix(self, pairs) -> np.ndarray:
        pairs = list(pairs)
        if not pairs:
            return np.zeros((0, self.input_dim))
        idx_a, idx_b = self._row_indices(pairs)
        scores = np.array([self.clinical_score(p.drug_a, p.drug_b) for p in pairs])
        full = pair_feature_matrix(self.fused[idx_a], self.fused[idx_b], scores)
        return full if self.use_rbscore else full[:, :-1]

    def __call__(self, pairs) -> np.ndarray:
        return self.feature_matrix(pairs)


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def version_string() -> str:
    try:
        described = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=os.path.dirname(os.path.abspath(__file__)),
            capture_output=True,
            text=True,
            timeout=5,
        )
        if described.returncode == 0:
            return f"ddipred {__version__} ({described.stdout.strip()})"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"ddipred {__version__}"


def write_run_manifest(config: RunConfig, command: str) -> None:
    inputs = {"drugs": config.drugs, "profiles": config.profiles, "pairs": config.pairs}
    inputs.update({f"embeddings.{k}": v for k, v in sorted(config.embeddings.items())})
    if config.scaffolds:
        inputs["scaffolds"] = config.scaffolds
    manifest = {
        "command": command,
        "config": config.as_dict(),
        "version": version_string(),
        "input_hashes": {name: _sha256(path) for name, path in inputs.items() if os.path.isfile(path)},
    }
    with open(config.out("run.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


def load_run_catalog(config: RunConfig) -> DrugCatalog:
    paths = [config.embeddings[s] for s in sorted(config.embeddings)]
    return load_catalog(config.drugs, paths, config.profiles, config.scaffolds)


def make_builder(config: RunConfig, catalog: DrugCatalog | None = None) -> FeatureBuilder:
    catalog = catalog or load_run_catalog(config)
    return FeatureBuilder(catalog, config.lambda1, config.tau_se, config.use_rbscore)


def cmd_prepare(config: RunConfig) -> dict:
    """PU-label the raw pairs, split the supervised subset, write the manifest."""
    config.validate_paths()
    catalog = load_run_catalog(config)
    raw = load_pairs(config.pairs)
    labeled = assign_pu_labels(raw, catalog, config.tau_neg)
    supervised = [p for p in labeled if p.label is not Label.UNKNOWN]
    unknown = [p for p in labeled if p.label is Label.UNKNOWN]
    if not supervised:
        raise DataError("PU labeling produced no supervised pairs")
    split = split_dataset(
        supervised,
        Protocol(config.split.get("protocol", "random")),
        tuple(config.split.get("ratios", (0.8, 0.1, 0.1))),
        int(config.split.get("seed", 13)),
        catalog,
    )

    with open(config.out("labeled_pairs.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["drug_a", "drug_b", "label"])
        for p in labeled:
            writer.writerow([p.drug_a, p.drug_b, p.label.value])
    with open(config.out("splits.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["drug_a", "drug_b", "label", "split"])
        for name, bucket in zip(SPLIT_NAMES, (split.train, split.validation, split.test)):
            for p in bucket:
                writer.writerow([p.drug_a, p.drug_b, p.label.value, name])
        for p in split.dropped:
            writer.writerow([p.drug_a, p.drug_b, p.label.value, "dropped"])
    with open(config.out("unknown_pairs.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["drug_a", "drug_b"])
        for p in unknown:
            writer.writerow([p.drug_a, p.drug_b])

    def class_counts(bucket):
        return {
            "positive": sum(1 for p in bucket if p.label is Label.POSITIVE),
            "reliable_negative": sum(1 for p in bucket if p.label is Label.RELIABLE_NEGATIVE),
        }

    manifest = {
        "n_drugs": len(catalog),
        "n_pairs": len(labeled),
        "n_unknown": len(unknown),
        "n_dropped_cross_partition": len(split.dropped),
        "protocol": split.protocol.value,
        "seed": split.seed,
        "splits": {
            name: dict(size=len(bucket), **class_counts(bucket))
            for name, bucket in zip(SPLIT_NAMES, (split.train, split.validation, split.test))
        },
    }
    with open(config.out("prepare_summary.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    write_run_manifest(config, "prepare")
    log.info("prepared %d supervised pairs (%d unknown, %d dropped)",
             sum(split.sizes), len(unknown), len(split.dropped))
    return manifest


def load_prepared_split(config: RunConfig) -> DataSplit:
    """Rehydrate the split written by cmd_prepare."""
    path = config.out("splits.csv")
    if not os.path.isfile(path):
        raise ConfigError(f"prepared dataset not found: {path} (run prepare first)")
    buckets = {name: [] for name in SPLIT_NAMES}
    dropped = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            pair = PairInstance(row["drug_a"], row["drug_b"], Label(row["label"]))
            if row["split"] == "dropped":
                dropped.append(pair)
            else:
                buckets[row["split"]].append(pair)
    return DataSplit(
        buckets["train"],
        buckets["validation"],
        buckets["test"],
        Protocol(config.split.get("protocol", "random")),
        int(config.split.get("seed", 13)),
        dropped,
    )


def make_fitness(builder: FeatureBuilder, train_pairs, val_pairs, weights,
                 max_epochs: int = SEARCH_MAX_EPOCHS, patience: int = SEARCH_PATIENCE):
    """Fitness = best validation ROC-AUC of an MLP trained at search fidelity."""

    def fitness(config: dict, seed: int) -> float:
        mlp_config = MlpConfig(**config, max_epochs=max_epochs, patience=patience, seed=int(seed))
        model = init_model(mlp_config, builder.input_dim)
        _, history = train(model, train_pairs, val_pairs, builder, weights)
        return max(history["val_auc"])

    return fitness


def optimizer_settings(config: RunConfig, seed: int) -> OptimizerSettings:
    opts = dict(config.optimizer)
    opts.pop("seeds", None)
    budget = opts.pop("budget", "full")
    kwargs = dict(opts)
    kwargs["seed"] = seed
    kwargs.setdefault("workers", config.workers)
    try:
        if budget == "smoke":
            return OptimizerSettings.smoke(**kwargs)
        if budget == "full":
            return OptimizerSettings(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad optimizer settings: {exc}") from None
    raise ConfigError(f"unknown optimizer budget {budget!r}")


def cmd_optimize(config: RunConfig) -> dict:
    """Run the three-stage search once per configured seed; keep the overall best."""
    config.validate_paths()
    catalog = load_run_catalog(config)
    builder = make_builder(config, catalog)
    split = load_prepared_split(config)
    weights = class_weights(split.train)
    fitness = make_fitness(builder, split.train, split.validation, weights)
    space = SearchSpace()

    seeds = list(config.optimizer.get("seeds", [13, 29, 47, 61, 83]))
    per_seed = []
    for seed in seeds:
        settings = optimizer_settings(config, seed)
        result = optimize(space, fitness, settings)
        result.write_log(config.out(f"eval_log_seed{seed}.csv"))
        per_seed.append(
            {
                "seed": seed,
                "best_config": result.best_config,
                "best_fitness": result.best_fitness,
                "phase_iterations": result.phase_iterations,
                "n_evaluations": result.n_evaluations,
            }
        )
        log.info("seed %d: fitness %.4f after %d evaluations", seed, result.best_fitness, result.n_evaluations)
    best = max(per_seed, key=lambda r: r["best_fitness"])
    summary = {"best": best, "per_seed": per_seed}
    with open(config.out("best_config.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    write_run_manifest(config, "optimize")
    return summary


def resolve_mlp_config(config: RunConfig) -> MlpConfig:
    """Final-training config: optimizer output if present, overridden by config.mlp."""
    fields = {}
    best_path = config.out("best_config.json")
    if os.path.isfile(best_path):
        with open(best_path, encoding="utf-8") as fh:
            fields.update(json.load(fh)["best"]["best_config"])
    fields.update(config.mlp)
    return MlpConfig(**fields)


def cmd_train(config: RunConfig) -> dict:
    """Train the final model on the prepared train split, keep the best-val epoch."""
    config.validate_paths()
    catalog = load_run_catalog(config)
    builder = make_builder(config, catalog)
    split = load_prepared_split(config)
    weights = class_weights(split.train)
    mlp_config = resolve_mlp_config(config)
    model = init_model(mlp_config, builder.input_dim)
    model, history = train(model, split.train, split.validation, builder, weights)
    save_checkpoint(model, config.out("checkpoint.json"))
    out = {
        "config": mlp_config.as_dict(),
        "input_dim": builder.input_dim,
        "best_epoch": history["best_epoch"],
        "best_val_auc": max(history["val_auc"]),
        "epochs_run": len(history["val_auc"]),
        "class_weights": list(weights),
    }
    with open(config.out("training_history.json"), "w", encoding="utf-8") as fh:
        json.dump({**out, "history": history}, fh, indent=2, sort_keys=True)
    write_run_manifest(config, "train")
    log.info("trained %d epochs, best val AUC %.4f at epoch %d",
             out["epochs_run"], out["best_val_auc"], out["best_epoch"])
    return out


def cmd_evaluate(config: RunConfig, split_name: str = "test", curves: bool = False) -> MetricReport:
    """Score a named split with the saved checkpoint and write the metric report."""
    if split_name not in SPLIT_NAMES:
        raise ConfigError(f"split must be one of {SPLIT_NAMES}, got {split_name!r}")
    config.validate_paths()
    checkpoint = config.out("checkpoint.json")
    if not os.path.isfile(checkpoint):
        raise ConfigError(f"checkpoint not found: {checkpoint} (run train first)")
    model = load_checkpoint(checkpoint)
    catalog = load_run_catalog(config)
    builder = make_builder(config, catalog)
    split = load_prepared_split(config)
    pairs = getattr(split, split_name)
    scores = predict_batch(model, pairs, builder)
    labels = np.array([1.0 if p.label is Label.POSITIVE else 0.0 for p in pairs])
    report = evaluate_scores(
        scores,
        labels,
        threshold=config.threshold,
        n_resamples=int(config.bootstrap.get("n_resamples", DEFAULT_N_RESAMPLES)),
        seed=int(config.bootstrap.get("seed", 13)),
        workers=config.workers,
    )
    with open(config.out(f"report_{split_name}.json"), "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    with open(config.out(f"report_{split_name}.txt"), "w", encoding="utf-8") as fh:
        fh.write(report.to_table())
        fh.write("\n")
    if curves:
        for name, points in (
            (f"roc_{split_name}.csv", roc_curve_points(scores, labels)),
            (f"pr_{split_name}.csv", pr_curve_points(scores, labels)),
        ):
            with open(config.out(name), "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["threshold", "x", "y"])
                for t, x, y in points:
                    writer.writerow([repr(t), repr(x), repr(y)])
    write_run_manifest(config, "evaluate")
    return report


def _load_candidate_pairs(path) -> list:
    pairs = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"drug_a", "drug_b"}.issubset(reader.fieldnames):
            raise DataError(f"{path}: expected header with drug_a,drug_b")
        for row in reader:
            pairs.append((row["drug_a"].strip(), row["drug_b"].strip()))
    return pairs


def cmd_predict(config: RunConfig, pairs_file: str, output_name: str = "predictions.csv") -> dict:
    """Score an arbitrary pairs file; rows with unknown drugs become error records."""
    config.validate_paths()
    model = load_checkpoint(config.out("checkpoint.json"))
    builder = make_builder(config)
    rows = []
    n_errors = 0
    for a, b in _load_candidate_pairs(pairs_file):
        try:
            pair = PairInstance.canonical(a, b)
            prob = float(predict_batch(model, [pair], builder)[0])
            rows.append([a, b, repr(prob), ""])
        except DataError as exc:
            n_errors += 1
            rows.append([a, b, "", str(exc)])
    with open(config.out(output_name), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["drug_a", "drug_b", "probability", "error"])
        writer.writerows(rows)
    write_run_manifest(config, "predict")
    return {"n_scored": len(rows) - n_errors, "n_errors": n_errors, "output": config.out(output_name)}


def cmd_rank(config: RunConfig, k: int = 20, pairs_file: str | None = None) -> list:
    """Top-k candidate interactions by predicted probability."""
    config.validate_paths()
    model = load_checkpoint(config.out("checkpoint.json"))
    builder = make_builder(config)
    path = pairs_file or config.out("unknown_pairs.csv")
    candidates = [PairInstance.canonical(a, b) for a, b in _load_candidate_pairs(path)]
    if not candidates:
        raise DataError(f"no candidate pairs in {path}")
    probs = predict_batch(model, candidates, builder)
    ranked = rank_top_k(probs, candidates, k)
    with open(config.out("topk.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["drug_a", "drug_b", "probability"])
        for pair, prob in ranked:
            writer.writerow([pair.drug_a, pair.drug_b, f"{prob:.6f}"])
    write_run_manifest(config, "rank")
    return ranked


def cmd_rbscore_explain(config: RunConfig, pair_spec: str) -> dict:
    """The six rule indicators and normalized score for one pair 'A,B'."""
    parts = [p.strip() for p in pair_spec.split(",")]
    if len(parts) != 2 or not all(parts):
        raise ConfigError(f"--pair expects 'DRUG_A,DRUG_B', got {pair_spec!r}")
    catalog = load_run_catalog(config)
    breakdown = score_pair(catalog[parts[0]].profile, catalog[parts[1]].profile, config.tau_se)
    return breakdown.as_dict()


def cmd_features_dump(config: RunConfig, pairs_file: str | None = None,
                      output_name: str = "features.csv") -> str:
    """Debug dump of assembled feature rows: drug_a,drug_b,f_0..,rbscore."""
    config.validate_paths()
    builder = make_builder(config)
    if pairs_file:
        pairs = [PairInstance.canonical(a, b) for a, b in _load_candidate_pairs(pairs_file)]
    else:
        labeled = config.out("labeled_pairs.csv")
        if not os.path.isfile(labeled):
            raise ConfigError("no pairs file given and no prepared labeled_pairs.csv found")
        pairs = [PairInstance.canonical(a, b) for a, b in _load_candidate_pairs(labeled)]
    X = builder.feature_matrix(pairs)
    n_embed = 4 * builder.dim
    header = ["drug_a", "drug_b"] + [f"f_{i}" for i in range(n_embed)]
    if builder.use_rbscore:
        header.append("rbscore")
    path = config.out(output_name)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for pair, row in zip(pairs, X):
            writer.writerow([pair.drug_a, pair.drug_b] + [repr(v) for v in row])
    return path
