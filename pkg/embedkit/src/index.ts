export { parseSmiles, markRingAtoms, components, subgraph, SmilesError } from "./smiles.js";
export type { Atom, Bond, Molecule } from "./smiles.js";
export { canonicalRanks, canonicalSmiles, murckoScaffold, murckoScaffoldGraph } from "./scaffold.js";
export {
  DEFAULT_FRAGMENT_SPEC,
  DEFAULT_TOKEN_SPEC,
  fragmentEmbedding,
  morganFragments,
  tokenEmbedding,
  tokenizeSmiles,
} from "./embed.js";
export type { FeaturizerSpec } from "./embed.js";
export { hashVector } from "./hashvec.js";
export { fitPca, jacobiEigen, project, reconstruct } from "./pca.js";
export type { PcaModel } from "./pca.js";
export { readDrugsCsv, validateOutputs } from "./io.js";
