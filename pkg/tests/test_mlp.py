import dataclasses
import math

import numpy as np
import pytest

from ddipred.corpus import Label, PairInstance
from ddipred.errors import ConfigError, DataError
from ddipred.mlp import (
    MlpConfig,
    MlpModel,
    _AdamState,
    _train_epoch,
    bce_loss,
    forward,
    init_model,
    load_checkpoint,
    loss_and_gradients,
    predict_batch,
    save_checkpoint,
    train,
)


def small_model(rng, input_dim=4, hidden=(5, 3)):
    """Hand-built model below the option grid, for numeric tests."""
    model = MlpModel(config=MlpConfig(), input_dim=input_dim)
    dims = [input_dim, *hidden, 1]
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        model.weights.append(rng.normal(0.0, 0.6, (fan_in, fan_out)))
        model.biases.append(rng.normal(0.0, 0.1, fan_out))
    return model


def finite_difference_grads(model, X, y, w_pos, w_neg, eps=1e-5):
    grads_w = [np.zeros_like(w) for w in model.weights]
    grads_b = [np.zeros_like(b) for b in model.biases]
    for arrs, grads in ((model.weights, grads_w), (model.biases, grads_b)):
        for arr, grad in zip(arrs, grads):
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = arr[idx]
                arr[idx] = orig + eps
                up, _, _ = loss_and_gradients(model, X, y, w_pos, w_neg)
                arr[idx] = orig - eps
                down, _, _ = loss_and_gradients(model, X, y, w_pos, w_neg)
                arr[idx] = orig
                grad[idx] = (up - down) / (2 * eps)
    return grads_w, grads_b


def max_relative_error(analytic, numeric):
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-8)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def test_config_validates_search_ranges():
    MlpConfig()  # Table-6 defaults are valid
    with pytest.raises(ConfigError):
        MlpConfig(dropout=0.7)
    with pytest.raises(ConfigError):
        MlpConfig(hidden_layers=6)
    with pytest.raises(ConfigError):
        MlpConfig(neurons_per_layer=100)
    with pytest.raises(ConfigError):
        MlpConfig(learning_rate=0.0)
    with pytest.raises(ConfigError):
        MlpConfig(batch_size=48)
    with pytest.raises(ConfigError):
        MlpConfig(optimizer="rmsprop")


def test_init_model_shapes_and_determinism():
    config = MlpConfig(hidden_layers=3, neurons_per_layer=192)
    model = init_model(config, 1025)
    assert model.layer_shapes == [(1025, 192), (192, 192), (192, 192), (192, 1)]
    assert all(np.all(b == 0) for b in model.biases)
    again = init_model(config, 1025)
    assert all(np.array_equal(a, b) for a, b in zip(model.weights, again.weights))


def test_init_model_he_scaling():
    model = init_model(MlpConfig(neurons_per_layer=256, hidden_layers=1, seed=5), 400)
    observed = model.weights[0].std()
    assert observed == pytest.approx(math.sqrt(2 / 400), rel=0.05)


def test_forward_zero_weights_gives_half():
    model = MlpModel(config=MlpConfig(), input_dim=3)
    model.weights = [np.zeros((3, 4)), np.zeros((4, 1))]
    model.biases = [np.zeros(4), np.zeros(1)]
    assert forward(model, [1.0, -2.0, 3.0]) == 0.5


def test_forward_relu_kills_negative_path():
    model = MlpModel(config=MlpConfig(), input_dim=1)
    model.weights = [np.array([[1.0]]), np.array([[1.0]])]
    model.biases = [np.zeros(1), np.zeros(1)]
    assert forward(model, [-3.0]) == 0.5


def test_forward_eval_mode_is_deterministic():
    rng = np.random.default_rng(0)
    model = small_model(rng)
    x = rng.normal(size=4)
    assert forward(model, x) == forward(model, x)


def test_forward_dimension_mismatch():
    model = small_model(np.random.default_rng(0))
    with pytest.raises(ConfigError):
        forward(model, [1.0, 2.0])


def test_bce_loss_hand_values():
    assert bce_loss([0.5], [1.0]) == pytest.approx(math.log(2), abs=1e-12)
    assert bce_loss([0.5], [1.0], w_pos=2.0) == pytest.approx(2 * math.log(2), abs=1e-12)
    assert bce_loss([1.0 - 1e-9], [1.0]) == pytest.approx(0.0, abs=1e-8)


def test_bce_loss_finite_at_extremes():
    assert math.isfinite(bce_loss([0.0, 1.0], [1.0, 0.0]))
    with pytest.raises(ConfigError):
        bce_loss([0.5], [1.0, 0.0])


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(21)
    for _ in range(10):
        model = small_model(rng, input_dim=int(rng.integers(2, 5)),
                            hidden=tuple(int(rng.integers(2, 6)) for _ in range(int(rng.integers(1, 3)))))
        X = rng.normal(size=(5, model.input_dim))
        y = (rng.random(5) < 0.5).astype(float)
        _, gw, gb = loss_and_gradients(model, X, y, 1.3, 1.0)
        fw, fb = finite_difference_grads(model, X, y, 1.3, 1.0)
        assert max_relative_error(gw + gb, fw + fb) < 1e-6


def test_dropout_expectation_matches_eval():
    rng = np.random.default_rng(9)
    model = small_model(rng, input_dim=4, hidden=(6,))
    model.config = dataclasses.replace(model.config, dropout=0.4)
    x = rng.normal(size=4)
    eval_hidden = np.maximum(x @ model.weights[0] + model.biases[0], 0.0)
    draw_rng = np.random.default_rng(33)
    total = np.zeros_like(eval_hidden)
    n = 20000
    keep = 1 - model.config.dropout
    for _ in range(n):
        mask = (draw_rng.random(6) < keep) / keep
        total += eval_hidden * mask
    assert np.allclose(total / n, eval_hidden, rtol=0.01, atol=1e-3)


def test_train_mode_forward_uses_dropout():
    rng = np.random.default_rng(2)
    model = small_model(rng, input_dim=4, hidden=(8, 8))
    x = rng.normal(size=4)
    outs = {forward(model, x, train_mode=True, rng=np.random.default_rng(i)) for i in range(20)}
    assert len(outs) > 1
    with pytest.raises(ConfigError):
        forward(model, x, train_mode=True)  # rng required


def test_adam_zero_gradient_leaves_params():
    rng = np.random.default_rng(0)
    model = small_model(rng)
    before_w, before_b = model.copy_params()
    adam = _AdamState(model)
    zero_w = [np.zeros_like(w) for w in model.weights]
    zero_b = [np.zeros_like(b) for b in model.biases]
    adam.step(model, zero_w, zero_b, lr=1e-3)
    assert all(np.array_equal(a, b) for a, b in zip(model.weights, before_w))
    assert all(np.array_equal(a, b) for a, b in zip(model.biases, before_b))


def test_zero_learning_rate_epoch_is_identity():
    rng = np.random.default_rng(1)
    model = small_model(rng)
    model.config = dataclasses.replace(model.config, dropout=0.2, batch_size=32)
    before_w, before_b = model.copy_params()
    X = rng.normal(size=(12, 4))
    y = (rng.random(12) < 0.5).astype(float)
    _train_epoch(model, X, y, 1.0, 1.0, lr=0.0, rng=np.random.default_rng(0))
    assert all(np.array_equal(a, b) for a, b in zip(model.weights, before_w))
    assert all(np.array_equal(a, b) for a, b in zip(model.biases, before_b))


def separable_fixture():
    """8 pairs in a 2-d feature space, linearly separable."""
    pos = [PairInstance(f"p{i}", f"q{i}", Label.POSITIVE) for i in range(4)]
    neg = [PairInstance(f"r{i}", f"s{i}", Label.RELIABLE_NEGATIVE) for i in range(4)]
    coords = {}
    for i, p in enumerate(pos):
        coords[p.key] = np.array([1.0 + 0.1 * i, 1.0])
    for i, p in enumerate(neg):
        coords[p.key] = np.array([-1.0 - 0.1 * i, -1.0])
    def feature_fn(pairs):
        return np.stack([coords[p.key] for p in pairs])
    return pos + neg, feature_fn


def test_train_separable_fixture():
    pairs, feature_fn = separable_fixture()
    config = MlpConfig(hidden_layers=1, neurons_per_layer=64, learning_rate=1e-3,
                       dropout=0.1, batch_size=32, optimizer="adam",
                       max_epochs=100, patience=100, seed=3)
    model = init_model(config, 2)
    model, history = train(model, pairs, pairs, feature_fn, weights=(1.0, 1.0))
    losses = history["train_loss"]
    assert all(losses[i + 1] < losses[i] for i in range(4)), losses[:6]
    preds = predict_batch(model, pairs, feature_fn)
    labels = np.array([1.0 if p.label is Label.POSITIVE else 0.0 for p in pairs])
    assert np.mean((preds >= 0.5) == labels) == 1.0


def test_train_is_deterministic():
    pairs, feature_fn = separable_fixture()
    config = MlpConfig(hidden_layers=1, neurons_per_layer=64, max_epochs=10,
                       patience=10, seed=5)
    _, h1 = train(init_model(config, 2), pairs, pairs, feature_fn)
    _, h2 = train(init_model(config, 2), pairs, pairs, feature_fn)
    assert h1 == h2


def test_train_rejects_single_class():
    pairs, feature_fn = separable_fixture()
    only_pos = [p for p in pairs if p.label is Label.POSITIVE]
    config = MlpConfig(max_epochs=2, patience=2)
    with pytest.raises(DataError):
        train(init_model(config, 2), only_pos, only_pos, feature_fn)


def test_early_stopping_respects_patience():
    pairs, feature_fn = separable_fixture()
    config = MlpConfig(hidden_layers=1, neurons_per_layer=64, learning_rate=1e-5,
                       dropout=0.5, batch_size=32, max_epochs=100, patience=3, seed=1)
    _, history = train(init_model(config, 2), pairs, pairs, feature_fn)
    assert len(history["val_auc"]) <= 100
    best_epoch = history["best_epoch"]
    assert len(history["val_auc"]) <= best_epoch + 3


def test_predict_batch_symmetric_and_in_range():
    pairs, feature_fn = separable_fixture()
    config = MlpConfig(hidden_layers=1, neurons_per_layer=64, max_epochs=5, patience=5)
    model, _ = train(init_model(config, 2), pairs, pairs, feature_fn)
    preds = predict_batch(model, pairs + pairs, feature_fn)
    assert np.all((preds > 0) & (preds < 1))
    assert np.array_equal(preds[: len(pairs)], preds[len(pairs):])


def test_checkpoint_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    model = init_model(MlpConfig(hidden_layers=2, neurons_per_layer=64, seed=8), 10)
    path = tmp_path / "model.json"
    save_checkpoint(model, path)
    loaded = load_checkpoint(path)
    assert loaded.config == model.config
    assert loaded.input_dim == 10
    assert all(np.array_equal(a, b) for a, b in zip(loaded.weights, model.weights))
    x = rng.normal(size=10)
    assert forward(loaded, x) == forward(model, x)


def test_checkpoint_rejects_version_mismatch(tmp_path):
    model = init_model(MlpConfig(hidden_layers=1, neurons_per_layer=64), 4)
    path = tmp_path / "model.json"
    save_checkpoint(model, path)
    import json
    payload = json.loads(path.read_text())
    payload["format_version"] = 99
    path.write_text(json.dumps(payload))
    with pytest.raises(DataError, match="format version"):
        load_checkpoint(path)
