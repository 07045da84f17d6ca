"""Compact feed-forward binary classifier, trained by manual backpropagation.

ReLU hidden layers, sigmoid output, weighted binary cross-entropy,
inverted dropout, SGD or bias-corrected Adam, and early stopping on
validation ROC-AUC. The model is small (at most 5 layers x 256 units),
so a hand-rolled float64 numpy implementation keeps runs deterministic
and dependency-free.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ConfigError, DataError
from .corpus import Label
from .metrics import roc_auc

CHECKPOINT_FORMAT_VERSION = 1
LOG_EPS = 1e-12

HIDDEN_LAYER_OPTIONS = (1, 2, 3, 4, 5)
NEURON_OPTIONS = (64, 96, 128, 192, 256)
BATCH_OPTIONS = (32, 64, 128)
OPTIMIZER_OPTIONS = ("adam", "sgd")
LR_BOUNDS = (1e-5, 1e-3)
DROPOUT_BOUNDS = (0.1, 0.5)

# Adam constants (the usual defaults; the method is named without them
# in our configuration surface).
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

# Reduced fidelity used while scoring hyperparameter candidates.
SEARCH_MAX_EPOCHS = 30
SEARCH_PATIENCE = 5


@dataclass(frozen=True)
class MlpConfig:
    """Hyperparameters; every field is validated against its search range."""

    hidden_layers: int = 3
    neurons_per_layer: int = 192
    learning_rate: float = 3e-4
    dropout: float = 0.30
    batch_size: int = 64
    optimizer: str = "adam"
    max_epochs: int = 100
    patience: int = 10
    seed: int = 13

    def __post_init__(self):
        if self.hidden_layers not in HIDDEN_LAYER_OPTIONS:
            raise ConfigError(f"hidden_layers must be one of {HIDDEN_LAYER_OPTIONS}")
        if self.neurons_per_layer not in NEURON_OPTIONS:
            raise ConfigError(f"neurons_per_layer must be one of {NEURON_OPTIONS}")
        if not LR_BOUNDS[0] <= self.learning_rate <= LR_BOUNDS[1]:
            raise ConfigError(f"learning_rate must be in {LR_BOUNDS}")
        if not DROPOUT_BOUNDS[0] <= self.dropout <= DROPOUT_BOUNDS[1]:
            raise ConfigError(f"dropout must be in {DROPOUT_BOUNDS}")
        if self.batch_size not in BATCH_OPTIONS:
            raise ConfigError(f"batch_size must be one of {BATCH_OPTIONS}")
        if self.optimizer not in OPTIMIZER_OPTIONS:
            raise ConfigError(f"optimizer must be one of {OPTIMIZER_OPTIONS}")
        if self.max_epochs < 1 or self.patience < 1:
            raise ConfigError("max_epochs and patience must be >= 1")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class MlpModel:
    """Layer parameters plus the configuration that built them.

    weights[l] has shape (fan_in, fan_out); the last entry is the output
    layer with fan_out 1.
    """

    config: MlpConfig
    input_dim: int
    weights: list = field(default_factory=list)
    biases: list = field(default_factory=list)

    def copy_params(self):
        return [w.copy() for w in self.weights], [b.copy() for b in self.biases]

    def set_params(self, weights, biases):
        self.weights = [w.copy() for w in weights]
        self.biases = [b.copy() for b in biases]

    @property
    def layer_shapes(self) -> list:
        return [w.shape for w in self.weights]


def init_model(config: MlpConfig, input_dim: int) -> MlpModel:
    """He-scaled zero-mean weights (variance 2/fan_in), zero biases."""
    if input_dim < 1:
        raise ConfigError(f"input_dim must be >= 1, got {input_dim}")
    rng = np.random.default_rng(config.seed)
    dims = [input_dim] + [config.neurons_per_layer] * config.hidden_layers + [1]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(config=config, input_dim=input_dim, weights=weights, biases=biases)


def _forward_pass(model: MlpModel, X: np.ndarray, masks=None):
    """Returns (yhat, activations, preacts). masks is a per-hidden-layer list
    of inverted-dropout multipliers or None for the deterministic path."""
    activations = [X]
    preacts = []
    h = X
    n_hidden = len(model.weights) - 1
    for l in range(n_hidden):
        z = h @ model.weights[l] + model.biases[l]
        h = np.maximum(z, 0.0)
        if masks is not None:
            h = h * masks[l]
        preacts.append(z)
        activations.append(h)
    z_out = h @ model.weights[-1] + model.biases[-1]
    yhat = 1.0 / (1.0 + np.exp(-z_out[:, 0]))
    return yhat, activations, preacts


def _dropout_masks(model: MlpModel, n_rows: int, rng) -> list:
    p = model.config.dropout
    keep = 1.0 - p
    n_hidden = len(model.weights) - 1
    return [
        (rng.random((n_rows, model.weights[l].shape[1])) < keep) / keep
        for l in range(n_hidden)
    ]


def forward(model: MlpModel, x, train_mode: bool = False, rng=None):
    """Single forward pass; 1-d input gives a scalar, 2-d a vector.

    In train mode inverted dropout is applied to each hidden activation
    (rng required); eval mode is deterministic with no rescaling.
    """
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] != model.input_dim:
        raise ConfigError(f"input dim {X.shape[1]} != model input dim {model.input_dim}")
    masks = None
    if train_mode and model.config.dropout > 0.0:
        if rng is None:
            raise ConfigError("train-mode forward needs an rng for dropout")
        masks = _dropout_masks(model, X.shape[0], rng)
    yhat, _, _ = _forward_pass(model, X, masks)
    return float(yhat[0]) if single else yhat


def bce_loss(yhat, y, w_pos: float = 1.0, w_neg: float = 1.0) -> float:
    """Mean weighted binary cross-entropy with predictions clamped away from 0/1."""
    yhat = np.asarray(yhat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if yhat.shape != y.shape:
        raise ConfigError(f"length mismatch: {yhat.shape} vs {y.shape}")
    p = np.clip(yhat, LOG_EPS, 1.0 - LOG_EPS)
    return float(np.mean(-(w_pos * y * np.log(p) + w_neg * (1.0 - y) * np.log(1.0 - p))))


def loss_and_gradients(model: MlpModel, X, y, w_pos: float = 1.0, w_neg: float = 1.0, masks=None):
    """Weighted BCE plus analytic gradients for every weight and bias.

    masks, when given, must be the dropout multipliers of the forward
    pass being differentiated.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    yhat, activations, preacts = _forward_pass(model, X, masks)
    loss = bce_loss(yhat, y, w_pos, w_neg)

    n = X.shape[0]
    # d(mean BCE)/d(z_out), sigmoid folded in
    delta = ((w_neg * (1.0 - y) * yhat - w_pos * y * (1.0 - yhat)) / n)[:, None]
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.biases)
    grads_w[-1] = activations[-1].T @ delta
    grads_b[-1] = delta.sum(axis=0)
    dh = delta @ model.weights[-1].T
    for l in range(len(model.weights) - 2, -1, -1):
        if masks is not None:
            dh = dh * masks[l]
        dz = dh * (preacts[l] > 0.0)
        grads_w[l] = activations[l].T @ dz
        grads_b[l] = dz.sum(axis=0)
        dh = dz @ model.weights[l].T
    return loss, grads_w, grads_b


class _AdamState:
    def __init__(self, model: MlpModel):
        self.m_w = [np.zeros_like(w) for w in model.weights]
        self.v_w = [np.zeros_like(w) for w in model.weights]
        self.m_b = [np.zeros_like(b) for b in model.biases]
        self.v_b = [np.zeros_like(b) for b in model.biases]
        self.t = 0

    def step(self, model: MlpModel, grads_w, grads_b, lr: float):
        self.t += 1
        bc1 = 1.0 - ADAM_BETA1**self.t
        bc2 = 1.0 - ADAM_BETA2**self.t
        for l in range(len(model.weights)):
            for params, grads, m, v in (
                (model.weights, grads_w, self.m_w, self.v_w),
                (model.biases, grads_b, self.m_b, self.v_b),
            ):
                m[l] = ADAM_BETA1 * m[l] + (1.0 - ADAM_BETA1) * grads[l]
                v[l] = ADAM_BETA2 * v[l] + (1.0 - ADAM_BETA2) * grads[l] ** 2
                params[l] -= lr * (m[l] / bc1) / (np.sqrt(v[l] / bc2) + ADAM_EPS)


def _sgd_step(model: MlpModel, grads_w, grads_b, lr: float):
    for l in range(len(model.weights)):
        model.weights[l] -= lr * grads_w[l]
        model.biases[l] -= lr * grads_b[l]


def _train_epoch(model, X, y, w_pos, w_neg, lr, rng, adam_state=None):
    """One shuffled pass over the data; returns the mean batch loss."""
    n = X.shape[0]
    order = rng.permutation(n)
    batch = model.config.batch_size
    losses = []
    for start in range(0, n, batch):
        idx = order[start : start + batch]
        masks = None
        if model.config.dropout > 0.0:
            masks = _dropout_masks(model, len(idx), rng)
        loss, grads_w, grads_b = loss_and_gradients(model, X[idx], y[idx], w_pos, w_neg, masks)
        if not np.isfinite(loss):
            raise DataError(f"non-finite loss {loss} at batch starting {start}")
        if adam_state is not None:
            adam_state.step(model, grads_w, grads_b, lr)
        else:
            _sgd_step(model, grads_w, grads_b, lr)
        losses.append(loss)
    return float(np.mean(losses))


def pairs_to_xy(pairs, feature_fn):
    """Feature matrix and 0/1 targets for supervised pairs."""
    for p in pairs:
        if p.label is Label.UNKNOWN:
            raise DataError(f"unknown-labeled pair {p.key} cannot enter supervised training")
    X = feature_fn(pairs)
    y = np.array([1.0 if p.label is Label.POSITIVE else 0.0 for p in pairs])
    return X, y


def train(model: MlpModel, train_pairs, val_pairs, feature_fn, weights=(1.0, 1.0)):
    """Mini-batch training with early stopping on validation ROC-AUC.

    Returns (model holding the best-validation parameters, history), where
    history has per-epoch train_loss and val_auc lists plus best_epoch.
    """
    w_pos, w_neg = weights
    X_train, y_train = pairs_to_xy(train_pairs, feature_fn)
    X_val, y_val = pairs_to_xy(val_pairs, feature_fn)
    if y_train.min() == y_train.max():
        raise DataError("training set must contain both classes")
    rng = np.random.default_rng(model.config.seed)
    adam_state = _AdamState(model) if model.config.optimizer == "adam" else None

    best_auc = -np.inf
    best_val_loss = np.inf
    best_params = model.copy_params()
    best_epoch = 0
    since_improvement = 0
    # train_loss is the eval-mode loss over the whole train set at epoch end
    # (smooth); train_loss_online is the mean dropout-mode batch loss.
    history = {"train_loss": [], "train_loss_online": [], "val_auc": [], "best_epoch": 0}
    for epoch in range(1, model.config.max_epochs + 1):
        try:
            online_loss = _train_epoch(
                model, X_train, y_train, w_pos, w_neg, model.config.learning_rate, rng, adam_state
            )
        except DataError as exc:
            raise DataError(f"epoch {epoch}: {exc}") from None
        train_scores, _, _ = _forward_pass(model, X_train, None)
        val_scores, _, _ = _forward_pass(model, X_val, None)
        val_auc = roc_auc(val_scores, y_val)
        val_loss = bce_loss(val_scores, y_val, w_pos, w_neg)
        history["train_loss"].append(bce_loss(train_scores, y_train, w_pos, w_neg))
        history["train_loss_online"].append(online_loss)
        history["val_auc"].append(val_auc)
        # checkpoint on AUC; equal AUC tie-broken by validation loss so the
        # kept model is the best-calibrated among the top-AUC epochs
        if val_auc > best_auc or (val_auc == best_auc and val_loss < best_val_loss):
            best_params = model.copy_params()
            best_epoch = epoch
            best_val_loss = val_loss
        # patience counts epochs without an AUC improvement
        if val_auc > best_auc:
            best_auc = val_auc
            since_improvement = 0
        else:
            since_improvement += 1
            if since_improvement >= model.config.patience:
                break
    model.set_params(*best_params)
    history["best_epoch"] = best_epoch
    return model, history


def predict_batch(model: MlpModel, pairs, feature_fn) -> np.ndarray:
    """Eval-mode probabilities for a list of pairs, each in (0, 1)."""
    X = feature_fn(pairs)
    yhat, _, _ = _forward_pass(model, np.asarray(X, dtype=np.float64), None)
    return yhat


def save_checkpoint(model: MlpModel, path) -> None:
    payload = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "config": model.config.as_dict(),
        "input_dim": model.input_dim,
        "layers": [
            {"weights": w.tolist(), "bias": b.tolist()}
            for w, b in zip(model.weights, model.biases)
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, separators=(",", ":"))


def load_checkpoint(path) -> MlpModel:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise DataError(
            f"checkpoint format version {version!r} not supported "
            f"(expected {CHECKPOINT_FORMAT_VERSION})"
        )
    config = MlpConfig(**payload["config"])
    model = MlpModel(config=config, input_dim=int(payload["input_dim"]))
    for layer in payload["layers"]:
        model.weights.append(np.asarray(layer["weights"], dtype=np.float64))
        model.biases.append(np.asarray(layer["bias"], dtype=np.float64))
    expected = [model.input_dim] + [config.neurons_per_layer] * config.hidden_layers + [1]
    shapes = [w.shape for w in model.weights]
    if shapes != [(a, b) for a, b in zip(expected[:-1], expected[1:])]:
        raise DataError(f"checkpoint layer shapes {shapes} do not match its config")
    return model
