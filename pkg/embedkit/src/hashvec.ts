/**
 * Deterministic pseudo-random Gaussian vectors keyed by strings. Acts as a
 * frozen embedding table: the same (namespace, key) pair always yields the
 * same vector, across platforms and runs. Namespaces come from the model
 * lock file, so re-pinning a model id re-draws the whole table.
 */

function hash32(text: string, seed: number): number {
  let h = (0x811c9dc5 ^ seed) >>> 0;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  // final avalanche (xmur3 style)
  h = Math.imul(h ^ (h >>> 16), 0x85ebca6b) >>> 0;
  h = Math.imul(h ^ (h >>> 13), 0xc2b2ae35) >>> 0;
  return (h ^ (h >>> 16)) >>> 0;
}

/** mulberry32: small fast PRNG over a 32-bit state. */
function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Unit-variance Gaussian vector for (namespace, key), deterministic. */
export function hashVector(namespace: string, key: string, dim: number): Float64Array {
  const rand = mulberry32(hash32(key, hash32(namespace, 0x9e3779b9)));
  const out = new Float64Array(dim);
  for (let i = 0; i < dim; i += 2) {
    // Box-Muller transform
    const u1 = Math.max(rand(), 1e-12);
    const u2 = rand();
    const radius = Math.sqrt(-2.0 * Math.log(u1));
    out[i] = radius * Math.cos(2.0 * Math.PI * u2);
    if (i + 1 < dim) out[i + 1] = radius * Math.sin(2.0 * Math.PI * u2);
  }
  return out;
}

export function addInto(acc: Float64Array, vec: Float64Array, weight = 1.0): void {
  for (let i = 0; i < acc.length; i++) acc[i] += weight * vec[i];
}

export function scaleInto(acc: Float64Array, factor: number): void {
  for (let i = 0; i < acc.length; i++) acc[i] *= factor;
}
