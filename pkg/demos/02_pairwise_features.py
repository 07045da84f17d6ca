"""From two per-drug embeddings to one permutation-invariant pair vector.

Embeddings from two sources are fused by a convex combination, then a
drug pair becomes [ |ei-ej| || ei*ej || (ei-ej)^2 || (ei+ej)/2 ] with the
clinical score appended, so the final length is 4d + 1.
"""

import numpy as np

from ddipred import assemble_input, fuse, pair_features

rng = np.random.default_rng(0)
d = 6

# per-source embeddings for two drugs
drug_i = {"mol2vec": rng.normal(size=d), "smilesbert": rng.normal(size=d)}
drug_j = {"mol2vec": rng.normal(size=d), "smilesbert": rng.normal(size=d)}

# equal-weight fusion (lambda1 = 0.5); lambda1 weighs the first source
ei = fuse(drug_i["mol2vec"], drug_i["smilesbert"], lambda1=0.5)
ej = fuse(drug_j["mol2vec"], drug_j["smilesbert"], lambda1=0.5)
print("fused dim:", ei.shape[0])

blocks = pair_features(ei, ej)
print("pair block length:", blocks.shape[0], "(= 4d)")
print("  abs diff   :", np.round(blocks[:d], 3))
print("  product    :", np.round(blocks[d:2 * d], 3))
print("  sq diff    :", np.round(blocks[2 * d:3 * d], 3))
print("  mean       :", np.round(blocks[3 * d:], 3))

x = assemble_input(blocks, s_clinical=2 / 6)
print("full input length:", x.shape[0], "(= 4d + 1), last element:", x[-1])

# every block is symmetric, so swapping the drugs changes nothing
assert np.array_equal(pair_features(ei, ej), pair_features(ej, ei))

# a drug paired with itself: zero differences, mean equals the embedding
self_blocks = pair_features(ei, ei)
assert np.all(self_blocks[:d] == 0) and np.all(self_blocks[2 * d:3 * d] == 0)
print("\nself-pair zero blocks check passed")
