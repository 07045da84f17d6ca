/**
 * Two complementary molecule featurizers emitting fixed-dimension vectors.
 *
 * Fragment featurizer ("mol2vec" tag): enumerates Morgan-style atom
 * environments of radius 0..2 and averages one frozen vector per fragment
 * id, mirroring the bag-of-fragment-words construction.
 *
 * Token featurizer ("smilesbert" tag): lexes the SMILES string and mean-
 * pools per-token vectors mixed with their left/right context bigrams, a
 * cheap stand-in for a contextual sequence encoder.
 *
 * Both are deterministic functions of (lock-file model id, structure), so
 * identical molecules embed identically in any batch composition.
 */

import { Molecule } from "./smiles.js";
import { addInto, hashVector, scaleInto } from "./hashvec.js";

export interface FeaturizerSpec {
  modelId: string;
  nativeDim: number;
}

export const DEFAULT_FRAGMENT_SPEC: FeaturizerSpec = {
  modelId: "fragment-hash-v1-r2",
  nativeDim: 300,
};

export const DEFAULT_TOKEN_SPEC: FeaturizerSpec = {
  modelId: "token-context-hash-v1-w1",
  nativeDim: 768,
};

/** Morgan-style environment identifiers for radius 0..maxRadius. */
export function morganFragments(mol: Molecule, maxRadius = 2): string[] {
  const n = mol.atoms.length;
  const adj: Array<Array<{ to: number; label: string }>> = Array.from({ length: n }, () => []);
  for (const bond of mol.bonds) {
    const label = bond.aromatic ? "a" : String(bond.order);
    adj[bond.a].push({ to: bond.b, label });
    adj[bond.b].push({ to: bond.a, label });
  }
  let ids = mol.atoms.map(
    (atom, i) =>
      `${atom.element}|${atom.aromatic ? 1 : 0}|${adj[i].length}|${atom.inRing ? 1 : 0}`,
  );
  const fragments: string[] = ids.map((id) => `r0:${id}`);
  for (let radius = 1; radius <= maxRadius; radius++) {
    ids = ids.map((id, i) => {
      const env = adj[i].map(({ to, label }) => `${label}:${ids[to]}`).sort();
      return `(${id})[${env.join(",")}]`;
    });
    for (const id of ids) fragments.push(`r${radius}:${id}`);
  }
  return fragments;
}

/** Fragment bag-of-words embedding at the featurizer's native dimension. */
export function fragmentEmbedding(mol: Molecule, spec: FeaturizerSpec = DEFAULT_FRAGMENT_SPEC): Float64Array {
  const fragments = morganFragments(mol);
  const acc = new Float64Array(spec.nativeDim);
  for (const fragment of fragments) {
    addInto(acc, hashVector(spec.modelId, fragment, spec.nativeDim));
  }
  scaleInto(acc, 1.0 / Math.max(fragments.length, 1));
  return acc;
}

const TOKEN_PATTERN =
  /\[[^\]]*\]|Cl|Br|%\d\d|[BCNOPSFI]|[bcnops]|\d|[=#\-$:/\\().+*@]/g;

/** SMILES lexer used by the token featurizer (stereo tokens included as text). */
export function tokenizeSmiles(smiles: string): string[] {
  const tokens = smiles.match(TOKEN_PATTERN);
  if (!tokens || tokens.join("") !== smiles) {
    const covered = (tokens ?? []).join("");
    throw new Error(`cannot tokenize SMILES near position ${covered.length}`);
  }
  return tokens;
}

/** Context-mixed mean-pooled token embedding at the native dimension. */
export function tokenEmbedding(smiles: string, spec: FeaturizerSpec = DEFAULT_TOKEN_SPEC): Float64Array {
  const tokens = tokenizeSmiles(smiles);
  const acc = new Float64Array(spec.nativeDim);
  for (let i = 0; i < tokens.length; i++) {
    addInto(acc, hashVector(spec.modelId, `t:${tokens[i]}`, spec.nativeDim));
    const prev = i > 0 ? tokens[i - 1] : "^";
    const next = i + 1 < tokens.length ? tokens[i + 1] : "$";
    addInto(acc, hashVector(spec.modelId, `l:${prev}>${tokens[i]}`, spec.nativeDim), 0.5);
    addInto(acc, hashVector(spec.modelId, `r:${tokens[i]}<${next}`, spec.nativeDim), 0.5);
  }
  scaleInto(acc, 1.0 / Math.max(tokens.length, 1));
  return acc;
}
