"""Training the compact MLP by hand-rolled backpropagation.

Builds a small two-moons-style pair dataset, trains with weighted BCE and
early stopping on validation ROC-AUC, and spot-checks the analytic
gradients against central finite differences.
"""

import numpy as np

from ddipred import MlpConfig, init_model, loss_and_gradients, predict_batch, train
from ddipred.corpus import Label, PairInstance

rng = np.random.default_rng(1)

# synthetic pair features: positives cluster at +mu, negatives at -mu
def make_pairs(n, prefix):
    pairs, coords = [], {}
    for i in range(n):
        positive = i % 2 == 0
        p = PairInstance(f"{prefix}{i}a", f"{prefix}{i}b",
                         Label.POSITIVE if positive else Label.RELIABLE_NEGATIVE)
        center = np.array([1.2, 0.8]) if positive else np.array([-1.2, -0.8])
        coords[p.key] = center + 0.6 * rng.normal(size=2)
        pairs.append(p)
    return pairs, coords

train_pairs, c1 = make_pairs(120, "tr")
val_pairs, c2 = make_pairs(40, "va")
coords = {**c1, **c2}
feature_fn = lambda pairs: np.stack([coords[p.key] for p in pairs])

config = MlpConfig(hidden_layers=2, neurons_per_layer=64, learning_rate=1e-3,
                   dropout=0.1, batch_size=32, optimizer="adam",
                   max_epochs=40, patience=8, seed=0)
model = init_model(config, input_dim=2)
model, history = train(model, train_pairs, val_pairs, feature_fn, weights=(1.0, 1.0))

print("epochs run:", len(history["val_auc"]), " best epoch:", history["best_epoch"])
print("train loss first/last:", round(history["train_loss"][0], 4),
      round(history["train_loss"][-1], 4))
print("best val AUC:", round(max(history["val_auc"]), 4))

probs = predict_batch(model, val_pairs, feature_fn)
print("validation probabilities in (0,1):", bool(np.all((probs > 0) & (probs < 1))))

# gradient spot-check on one batch (no dropout in the differentiated path)
X = feature_fn(train_pairs[:16])
y = np.array([1.0 if p.label is Label.POSITIVE else 0.0 for p in train_pairs[:16]])
loss, gw, gb = loss_and_gradients(model, X, y, 1.0, 1.0)
eps = 1e-5
w = model.weights[0]
orig = w[0, 0]
w[0, 0] = orig + eps
up, _, _ = loss_and_gradients(model, X, y, 1.0, 1.0)
w[0, 0] = orig - eps
down, _, _ = loss_and_gradients(model, X, y, 1.0, 1.0)
w[0, 0] = orig
fd = (up - down) / (2 * eps)
print(f"analytic dL/dW[0,0] = {gw[0][0, 0]:.8f}, finite difference = {fd:.8f}")
