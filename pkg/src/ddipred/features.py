"""Embedding fusion and permutation-invariant pairwise features.

The pair vector for drugs i, j with fused embeddings e_i, e_j of dimension
d is the concatenation of four symmetric blocks plus the clinical score:

    [ |e_i - e_j| || e_i * e_j || (e_i - e_j)^2 || (e_i + e_j)/2 || s ]

where * is elementwise. Every block is invariant under swapping i and j,
so the assembled vector is too. Length is 4d + 1. All arithmetic is
float64.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError

DEFAULT_LAMBDA1 = 0.5


def fuse(e1: np.ndarray, e2: np.ndarray, lambda1: float = DEFAULT_LAMBDA1) -> np.ndarray:
    """Convex combination lambda1 * e1 + (1 - lambda1) * e2."""
    e1 = np.asarray(e1, dtype=np.float64)
    e2 = np.asarray(e2, dtype=np.float64)
    if e1.shape != e2.shape:
        raise ConfigError(f"embedding dimension mismatch: {e1.shape} vs {e2.shape}")
    if not 0.0 <= lambda1 <= 1.0:
        raise ConfigError(f"lambda1 must be in [0, 1], got {lambda1}")
    return lambda1 * e1 + (1.0 - lambda1) * e2


def pair_features(ei: np.ndarray, ej: np.ndarray) -> np.ndarray:
    """The 4d embedding-derived block: [abs-diff, product, squared-diff, mean]."""
    ei = np.asarray(ei, dtype=np.float64)
    ej = np.asarray(ej, dtype=np.float64)
    if ei.shape != ej.shape:
        raise ConfigError(f"embedding dimension mismatch: {ei.shape} vs {ej.shape}")
    diff = ei - ej
    return np.concatenate([np.abs(diff), ei * ej, diff * diff, (ei + ej) / 2.0])


def assemble_input(pair_feat: np.ndarray, s_clinical: float) -> np.ndarray:
    """Append the clinical score as the final feature element."""
    if not 0.0 <= s_clinical <= 1.0:
        raise ConfigError(f"s_clinical must be in [0, 1], got {s_clinical}")
    return np.concatenate([np.asarray(pair_feat, dtype=np.float64), [s_clinical]])


def pair_feature_matrix(emb_a: np.ndarray, emb_b: np.ndarray, s_clinical: np.ndarray) -> np.ndarray:
    """Vectorized assemble for n pairs: rows of [pair_features || s].

    emb_a, emb_b are (n, d) fused-embedding matrices; s_clinical is (n,).
    """
    emb_a = np.asarray(emb_a, dtype=np.float64)
    emb_b = np.asarray(emb_b, dtype=np.float64)
    if emb_a.shape != emb_b.shape:
        raise ConfigError(f"embedding matrix shape mismatch: {emb_a.shape} vs {emb_b.shape}")
    s = np.asarray(s_clinical, dtype=np.float64).reshape(-1, 1)
    if s.shape[0] != emb_a.shape[0]:
        raise ConfigError("s_clinical length does not match the number of pairs")
    if s.size and (s.min() < 0.0 or s.max() > 1.0):
        raise ConfigError("s_clinical values must be in [0, 1]")
    diff = emb_a - emb_b
    return np.hstack([np.abs(diff), emb_a * emb_b, diff * diff, (emb_a + emb_b) / 2.0, s])
