/**
 * Murcko scaffolds: ring systems plus the linkers between them, with all
 * side chains pruned. The scaffold is serialized as a canonical SMILES
 * string that is invariant to the input atom order, so stereo variants and
 * salt forms of one parent molecule map to the same string.
 *
 * Canonicalization: iterative neighborhood/distance-profile rank
 * refinement, then the lexicographically smallest DFS string over every
 * start atom, enumerating rank-tied neighbor orders (scaffold graphs are
 * small, so the enumeration is cheap; a candidate cap guards pathological
 * symmetry). Aromatic flags are taken from the input with no
 * kekulization/aromatization pass, so inputs should use one convention
 * consistently.
 */

import { Molecule, components, parseSmiles, subgraph } from "./smiles.js";

const CANDIDATE_CAP = 5000;

/** FNV-1a over a string, as an unsigned 32-bit int. */
function hash32(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

function rerank(keys: string[]): number[] {
  const sorted = [...new Set(keys)].sort();
  const index = new Map(sorted.map((k, i) => [k, i]));
  return keys.map((k) => index.get(k)!);
}

function sameRanks(a: number[], b: number[]): boolean {
  return a.length === b.length && a.every((v, i) => v === b[i]);
}

function allPairsDistances(mol: Molecule): number[][] {
  const n = mol.atoms.length;
  const adj: number[][] = Array.from({ length: n }, () => []);
  for (const bond of mol.bonds) {
    adj[bond.a].push(bond.b);
    adj[bond.b].push(bond.a);
  }
  return Array.from({ length: n }, (_, s) => {
    const dist = new Array<number>(n).fill(-1);
    dist[s] = 0;
    const queue = [s];
    for (let q = 0; q < queue.length; q++) {
      const v = queue[q];
      for (const w of adj[v]) {
        if (dist[w] === -1) {
          dist[w] = dist[v] + 1;
          queue.push(w);
        }
      }
    }
    return dist;
  });
}

/** Order-invariant atom ranks via neighborhood + distance-profile refinement. */
export function canonicalRanks(mol: Molecule): number[] {
  const n = mol.atoms.length;
  const adj: Array<Array<{ to: number; label: string }>> = Array.from({ length: n }, () => []);
  for (const bond of mol.bonds) {
    const label = bond.aromatic ? "a" : String(bond.order);
    adj[bond.a].push({ to: bond.b, label });
    adj[bond.b].push({ to: bond.a, label });
  }
  let ranks = rerank(
    mol.atoms.map(
      (atom, i) => `${atom.element}|${atom.aromatic ? 1 : 0}|${adj[i].length}|${atom.inRing ? 1 : 0}`,
    ),
  );
  const distances = allPairsDistances(mol);
  for (let round = 0; round < 2 * n + 4; round++) {
    const neighborKeys = ranks.map((rank, i) => {
      const env = adj[i].map(({ to, label }) => `${label}:${ranks[to]}`).sort();
      return `${String(rank).padStart(4, "0")}|${env.join(",")}`;
    });
    let next = rerank(neighborKeys);
    if (sameRanks(next, ranks)) {
      const profileKeys = next.map((rank, i) => {
        const profile = distances[i]
          .map((d, j) => (j === i ? null : `${d}:${next[j]}`))
          .filter((x): x is string => x !== null)
          .sort();
        return `${String(rank).padStart(4, "0")}|${hash32(profile.join(","))}`;
      });
      const refined = rerank(profileKeys);
      if (sameRanks(refined, next)) return refined;
      next = refined;
    }
    ranks = next;
  }
  return ranks;
}

interface Neighbor {
  to: number;
  bondLabel: string; // "a" | "1" | "2" | "3"
}

function bondToken(label: string, fromAromatic: boolean, toAromatic: boolean): string {
  if (label === "a") return "";
  if (label === "1") return fromAromatic && toAromatic ? "-" : "";
  if (label === "2") return "=";
  return "#";
}

const ORGANIC_OUT = new Set(["B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"]);
const AROMATIC_OUT = new Set(["b", "c", "n", "o", "p", "s"]);

function atomToken(element: string, aromatic: boolean): string {
  if (aromatic) {
    const lower = element.toLowerCase();
    return AROMATIC_OUT.has(lower) ? lower : `[${lower}]`;
  }
  return ORGANIC_OUT.has(element) ? element : `[${element}]`;
}

function ringDigit(label: number): string {
  return label < 10 ? String(label) : `%${String(label).padStart(2, "0")}`;
}

interface Traversal {
  childrenOf: Map<number, Neighbor[]>;
  backEdges: Array<{ earlier: number; later: number; label: string }>;
  visitIndex: number[];
  tieGroupSizes: number[];
}

/** Deterministic DFS given a root and per-tie permutation indices. */
function buildTraversal(
  mol: Molecule,
  adj: Neighbor[][],
  ranks: number[],
  root: number,
  choices: number[],
): Traversal {
  const n = mol.atoms.length;
  const visitIndex = new Array<number>(n).fill(-1);
  const childrenOf = new Map<number, Neighbor[]>();
  const backEdges: Traversal["backEdges"] = [];
  const recorded = new Set<string>();
  const tieGroupSizes: number[] = [];
  let clock = 0;
  let cursor = 0;

  const edgeKey = (a: number, b: number) => (a < b ? `${a}-${b}` : `${b}-${a}`);

  const orderNeighbors = (items: Neighbor[]): Neighbor[] => {
    const sorted = [...items].sort((x, y) => ranks[x.to] - ranks[y.to]);
    const out: Neighbor[] = [];
    let i = 0;
    while (i < sorted.length) {
      let j = i;
      while (j + 1 < sorted.length && ranks[sorted[j + 1].to] === ranks[sorted[i].to]) j++;
      const group = sorted.slice(i, j + 1);
      if (group.length > 1) {
        const perms = permutations(group);
        const pick = choices[cursor] ?? 0;
        tieGroupSizes[cursor] = perms.length;
        cursor += 1;
        out.push(...perms[pick % perms.length]);
      } else {
        out.push(group[0]);
      }
      i = j + 1;
    }
    return out;
  };

  const dfs = (v: number, parent: number): void => {
    visitIndex[v] = clock++;
    const kids: Neighbor[] = [];
    for (const nb of orderNeighbors(adj[v])) {
      if (nb.to === parent) continue;
      if (visitIndex[nb.to] !== -1) {
        const key = edgeKey(v, nb.to);
        if (!recorded.has(key)) {
          recorded.add(key);
          const [earlier, later] =
            visitIndex[nb.to] < visitIndex[v] ? [nb.to, v] : [v, nb.to];
          backEdges.push({ earlier, later, label: nb.bondLabel });
        }
      } else {
        kids.push(nb);
        dfs(nb.to, v);
      }
    }
    childrenOf.set(v, kids);
  };
  dfs(root, -1);
  return { childrenOf, backEdges, visitIndex, tieGroupSizes };
}

function permutations<T>(items: T[]): T[][] {
  if (items.length <= 1) return [items];
  if (items.length > 4) return [items]; // beyond 4-way ties, keep rank order
  const out: T[][] = [];
  items.forEach((item, i) => {
    const rest = items.slice(0, i).concat(items.slice(i + 1));
    for (const tail of permutations(rest)) out.push([item, ...tail]);
  });
  return out;
}

/** Serialize one traversal; ring digits appear at both closure endpoints. */
function writeTraversal(mol: Molecule, traversal: Traversal, root: number): string {
  const { childrenOf, backEdges, visitIndex } = traversal;
  const closuresAt = new Map<number, Array<{ other: number; label: string; id: number }>>();
  backEdges.forEach((edge, id) => {
    if (!closuresAt.has(edge.earlier)) closuresAt.set(edge.earlier, []);
    if (!closuresAt.has(edge.later)) closuresAt.set(edge.later, []);
    closuresAt.get(edge.earlier)!.push({ other: edge.later, label: edge.label, id });
    closuresAt.get(edge.later)!.push({ other: edge.earlier, label: edge.label, id });
  });
  const ringNumber = new Map<number, number>(); // back-edge id -> digit
  let nextDigit = 1;
  const pieces: string[] = [];

  const emit = (v: number): void => {
    pieces.push(atomToken(mol.atoms[v].element, mol.atoms[v].aromatic));
    const entries = (closuresAt.get(v) ?? []).sort(
      (x, y) => visitIndex[x.other] - visitIndex[y.other],
    );
    for (const entry of entries) {
      const existing = ringNumber.get(entry.id);
      if (existing !== undefined) {
        pieces.push(ringDigit(existing)); // closing end
      } else {
        const digit = nextDigit++;
        ringNumber.set(entry.id, digit);
        // bond token goes on the opening end
        pieces.push(
          bondToken(entry.label, mol.atoms[v].aromatic, mol.atoms[entry.other].aromatic) +
            ringDigit(digit),
        );
      }
    }
    const kids = childrenOf.get(v) ?? [];
    kids.forEach((kid, i) => {
      const token = bondToken(kid.bondLabel, mol.atoms[v].aromatic, mol.atoms[kid.to].aromatic);
      if (i < kids.length - 1) {
        pieces.push("(" + token);
        emit(kid.to);
        pieces.push(")");
      } else {
        pieces.push(token);
        emit(kid.to);
      }
    });
  };
  emit(root);
  return pieces.join("");
}

/** Canonical SMILES: the smallest string over all roots and tie orders. */
export function canonicalSmiles(mol: Molecule): string {
  const n = mol.atoms.length;
  if (n === 0) return "";
  const ranks = canonicalRanks(mol);
  const adj: Neighbor[][] = Array.from({ length: n }, () => []);
  for (const bond of mol.bonds) {
    const label = bond.aromatic ? "a" : String(bond.order);
    adj[bond.a].push({ to: bond.b, bondLabel: label });
    adj[bond.b].push({ to: bond.a, bondLabel: label });
  }

  let best: string | null = null;
  let budget = CANDIDATE_CAP;
  for (let root = 0; root < n && budget > 0; root++) {
    const probe = buildTraversal(mol, adj, ranks, root, []);
    const sizes = probe.tieGroupSizes;
    const product = sizes.reduce((acc, s) => acc * s, 1);
    const vectors: number[][] = [];
    if (product > 0 && product <= budget) {
      // full cartesian product over tie permutations
      const build = (prefix: number[], depth: number): void => {
        if (depth === sizes.length) {
          vectors.push([...prefix]);
          return;
        }
        for (let pick = 0; pick < sizes[depth]; pick++) {
          prefix.push(pick);
          build(prefix, depth + 1);
          prefix.pop();
        }
      };
      build([], 0);
    } else {
      vectors.push([]);
    }
    for (const choices of vectors) {
      if (budget-- <= 0) break;
      const traversal = choices.length === 0 ? probe : buildTraversal(mol, adj, ranks, root, choices);
      const candidate = writeTraversal(mol, traversal, root);
      if (best === null || candidate < best) best = candidate;
    }
  }
  return best ?? "";
}

/** The Murcko scaffold molecule of the parent component, or null if acyclic. */
export function murckoScaffoldGraph(mol: Molecule): Molecule | null {
  const comps = components(mol);
  const scored = comps.map((comp) => ({
    comp,
    rings: comp.filter((i) => mol.atoms[i].inRing).length,
  }));
  // parent component: most atoms, then most ring atoms
  scored.sort((a, b) => b.comp.length - a.comp.length || b.rings - a.rings);
  const parent = subgraph(mol, scored[0].comp);
  if (!parent.atoms.some((a) => a.inRing)) return null;

  let keep = parent.atoms.map((_, i) => i);
  for (;;) {
    const keepSet = new Set(keep);
    const degree = new Map<number, number>();
    for (const bond of parent.bonds) {
      if (keepSet.has(bond.a) && keepSet.has(bond.b)) {
        degree.set(bond.a, (degree.get(bond.a) ?? 0) + 1);
        degree.set(bond.b, (degree.get(bond.b) ?? 0) + 1);
      }
    }
    const next = keep.filter((i) => parent.atoms[i].inRing || (degree.get(i) ?? 0) > 1);
    if (next.length === keep.length) break;
    keep = next;
  }
  return subgraph(parent, keep);
}

/** Canonical Murcko scaffold string; empty string for acyclic molecules. */
export function murckoScaffold(smiles: string): string {
  const mol = parseSmiles(smiles);
  const scaffold = murckoScaffoldGraph(mol);
  return scaffold === null ? "" : canonicalSmiles(scaffold);
}
