"""Classification metrics, bootstrap confidence intervals, calibration, ranking.

roc_auc uses the rank-sum (Mann-Whitney) formulation with half credit for
ties; pr_auc is step-integrated average precision with tied scores grouped
into one step. Bootstrap CIs are percentile intervals over pair resamples,
with per-resample seeds derived from (seed, resample index) so a parallel
schedule cannot change the result.
"""

from __future__ import annotations

import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DataError

DEFAULT_THRESHOLD = 0.5
DEFAULT_N_RESAMPLES = 1000
DEFAULT_ECE_BINS = 10
_MAX_REDRAWS = 10


class ConfusionMetrics(NamedTuple):
    accuracy: float
    precision: float
    recall: float
    f1: float


def _check_scores_labels(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ConfigError(f"scores/labels shape mismatch: {scores.shape} vs {labels.shape}")
    if labels.size and not np.all((labels == 0) | (labels == 1)):
        raise DataError("labels must be binary 0/1")
    return scores, labels.astype(np.float64)


def confusion_counts(scores, labels, threshold: float = DEFAULT_THRESHOLD):
    scores, labels = _check_scores_labels(scores, labels)
    pred = scores >= threshold
    pos = labels == 1.0
    tp = int(np.sum(pred & pos))
    fp = int(np.sum(pred & ~pos))
    fn = int(np.sum(~pred & pos))
    tn = int(np.sum(~pred & ~pos))
    return tp, fp, fn, tn


def confusion_metrics(scores, labels, threshold: float = DEFAULT_THRESHOLD) -> ConfusionMetrics:
    """Accuracy, precision, recall, F1 at a threshold; degenerate ratios are 0."""
    tp, fp, fn, tn = confusion_counts(scores, labels, threshold)
    n = tp + fp + fn + tn
    if n == 0:
        raise DataError("confusion_metrics needs at least one sample")
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return ConfusionMetrics((tp + tn) / n, precision, recall, f1)


def degenerate_flags(scores, labels, threshold: float = DEFAULT_THRESHOLD) -> list:
    """Names of ratio metrics whose denominator vanished at this threshold."""
    tp, fp, fn, _ = confusion_counts(scores, labels, threshold)
    flags = []
    if tp + fp == 0:
        flags.append("precision")
    if tp + fn == 0:
        flags.append("recall")
    if tp == 0 and (fp or fn):
        flags.append("f1")
    return flags


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their mean rank."""
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j + 2) / 2.0
        i = j + 1
    return ranks


def roc_auc(scores, labels) -> float:
    """P(score_pos > score_neg) with half credit for ties, via rank sums."""
    scores, labels = _check_scores_labels(scores, labels)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("AUC undefined: both classes must be present")
    ranks = _average_ranks(scores)
    pos_rank_sum = float(ranks[labels == 1.0].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def pr_auc(scores, labels) -> float:
    """Average precision; equal scores enter one precision-recall step."""
    scores, labels = _check_scores_labels(scores, labels)
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise DataError("average precision undefined with zero positives")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    ap = 0.0
    tp = fp = 0
    prev_recall = 0.0
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[j + 1] == s[i]:
            j += 1
        tp += int(y[i : j + 1].sum())
        fp += (j - i + 1) - int(y[i : j + 1].sum())
        recall = tp / n_pos
        precision = tp / (tp + fp)
        ap += (recall - prev_recall) * precision
        prev_recall = recall
        i = j + 1
    return ap


def bootstrap_ci(scores, labels, metric_fn, n_resamples: int = DEFAULT_N_RESAMPLES, seed: int = 0, workers: int = 1):
    """95% percentile interval of metric_fn over with-replacement resamples.

    A resample on which the metric is undefined (e.g. single class) is
    redrawn from its own seed stream, up to 10 attempts per slot. Raises
    when more than 90% of all draws were undefined.
    """
    scores, labels = _check_scores_labels(scores, labels)
    if n_resamples < 100:
        raise ConfigError(f"n_resamples must be >= 100, got {n_resamples}")
    n = len(scores)
    if n == 0:
        raise DataError("cannot bootstrap an empty sample")

    def one_slot(slot: int):
        rng = np.random.default_rng([seed, slot])
        for _ in range(_MAX_REDRAWS):
            idx = rng.integers(0, n, size=n)
            try:
                return metric_fn(scores[idx], labels[idx]), 1
            except (DataError, ZeroDivisionError):
                pass
        return None, _MAX_REDRAWS

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one_slot, range(n_resamples)))
    else:
        outcomes = [one_slot(i) for i in range(n_resamples)]

    values = [v for v, _ in outcomes if v is not None]
    draws = sum(d for _, d in outcomes)
    undefined = draws - len(values)
    if not values or undefined > 0.9 * draws:
        raise DataError(f"metric undefined on {undefined}/{draws} bootstrap draws")
    lo, hi = np.percentile(values, [2.5, 97.5])
    return float(lo), float(hi)


def ece(scores, labels, n_bins: int = DEFAULT_ECE_BINS) -> float:
    """Expected calibration error over equal-width confidence bins."""
    scores, labels = _check_scores_labels(scores, labels)
    if n_bins < 2:
        raise ConfigError(f"n_bins must be >= 2, got {n_bins}")
    if len(scores) == 0:
        warnings.warn("ece of an empty input is 0 by convention")
        return 0.0
    idx = np.minimum((scores * n_bins).astype(int), n_bins - 1)
    total = 0.0
    for b in range(n_bins):
        mask = idx == b
        if not mask.any():
            continue
        conf = float(scores[mask].mean())
        frac_pos = float(labels[mask].mean())
        total += mask.sum() / len(scores) * abs(conf - frac_pos)
    return total


def rank_top_k(probabilities, pairs, k: int) -> list:
    """Top-k (pair, probability) by descending probability, ties by pair id."""
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    probabilities = np.asarray(probabilities, dtype=np.float64)
    pairs = list(pairs)
    if len(probabilities) != len(pairs):
        raise ConfigError("probabilities/pairs length mismatch")
    keyed = sorted(zip(pairs, probabilities), key=lambda t: (-t[1], t[0].key))
    return keyed[:k]


def roc_curve_points(scores, labels) -> list:
    """(threshold, fpr, tpr) rows at each distinct score, descending."""
    scores, labels = _check_scores_labels(scores, labels)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("ROC curve undefined: both classes must be present")
    order = np.argsort(-scores, kind="stable")
    s, y = scores[order], labels[order]
    points = [(float("inf"), 0.0, 0.0)]
    tp = fp = 0
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[j + 1] == s[i]:
            j += 1
        tp += int(y[i : j + 1].sum())
        fp += (j - i + 1) - int(y[i : j + 1].sum())
        points.append((float(s[i]), fp / n_neg, tp / n_pos))
        i = j + 1
    return points


def pr_curve_points(scores, labels) -> list:
    """(threshold, recall, precision) rows at each distinct score, descending."""
    scores, labels = _check_scores_labels(scores, labels)
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise DataError("PR curve undefined with zero positives")
    order = np.argsort(-scores, kind="stable")
    s, y = scores[order], labels[order]
    points = []
    tp = fp = 0
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[j + 1] == s[i]:
            j += 1
        tp += int(y[i : j + 1].sum())
        fp += (j - i + 1) - int(y[i : j + 1].sum())
        points.append((float(s[i]), tp / n_pos, tp / (tp + fp)))
        i = j + 1
    return points


@dataclass
class MetricReport:
    """Point estimates, 95% bootstrap CIs, calibration, and class counts."""

    accuracy: float
    precision: float
    recall: float
    f1: float
    roc_auc: float
    pr_auc: float
    ece: float
    threshold: float
    n_pos: int
    n_neg: int
    ci: dict = field(default_factory=dict)  # metric name -> (lo, hi)
    degenerate: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "roc_auc": self.roc_auc,
            "pr_auc": self.pr_auc,
            "ece": self.ece,
            "threshold": self.threshold,
            "n_pos": self.n_pos,
            "n_neg": self.n_neg,
            "ci": {k: list(v) for k, v in self.ci.items()},
            "degenerate": self.degenerate,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_table(self) -> str:
        """Aligned text table in the usual comparison-column order."""
        names = ["Acc", "Prec", "Rec", "F1", "ROC-AUC", "PR-AUC"]
        keys = ["accuracy", "precision", "recall", "f1", "roc_auc", "pr_auc"]
        values = [getattr(self, k) for k in keys]
        cells = [f"{v:.3f}" for v in values]
        cis = []
        for k in keys:
            lo, hi = self.ci.get(k, (float("nan"), float("nan")))
            cis.append(f"[{lo:.3f}, {hi:.3f}]")
        width = max(len(x) for x in names + cells + cis) + 2
        rows = [
            "".join(n.rjust(width) for n in names),
            "".join(c.rjust(width) for c in cells),
            "".join(c.rjust(width) for c in cis),
        ]
        rows.append(f"ECE {self.ece:.4f}  threshold {self.threshold}  n_pos {self.n_pos}  n_neg {self.n_neg}")
        return "\n".join(rows)


def evaluate_scores(
    scores,
    labels,
    threshold: float = DEFAULT_THRESHOLD,
    n_resamples: int = DEFAULT_N_RESAMPLES,
    seed: int = 0,
    n_bins: int = DEFAULT_ECE_BINS,
    workers: int = 1,
) -> MetricReport:
    """Assemble the full report, bootstrapping a CI for each of the six metrics."""
    scores, labels = _check_scores_labels(scores, labels)
    cm = confusion_metrics(scores, labels, threshold)

    metric_fns = {
        "accuracy": lambda s, l: confusion_metrics(s, l, threshold).accuracy,
        "precision": lambda s, l: confusion_metrics(s, l, threshold).precision,
        "recall": lambda s, l: confusion_metrics(s, l, threshold).recall,
        "f1": lambda s, l: confusion_metrics(s, l, threshold).f1,
        "roc_auc": roc_auc,
        "pr_auc": pr_auc,
    }
    ci = {}
    for name, fn in metric_fns.items():
        ci[name] = bootstrap_ci(scores, labels, fn, n_resamples=n_resamples, seed=seed, workers=workers)

    return MetricReport(
        accuracy=cm.accuracy,
        precision=cm.precision,
        recall=cm.recall,
        f1=cm.f1,
        roc_auc=roc_auc(scores, labels),
        pr_auc=pr_auc(scores, labels),
        ece=ece(scores, labels, n_bins),
        threshold=threshold,
        n_pos=int(labels.sum()),
        n_neg=int(len(labels) - labels.sum()),
        ci=ci,
        degenerate=degenerate_flags(scores, labels, threshold),
        notes=["significance tests (DeLong, McNemar) are out of scope"],
    )
