/**
 * Minimal SMILES reader covering the organic subset, bracket atoms, branches,
 * ring closures (including %nn), explicit bonds, and dot-separated components.
 *
 * Stereo annotations (/, \, @, @@), charges, isotopes and explicit H counts
 * are parsed and discarded: downstream consumers (scaffolds, fragment
 * hashing) work on the plain molecular graph, which is exactly what makes
 * stereo variants and salt forms collapse to one scaffold.
 */

export interface Atom {
  element: string;
  aromatic: boolean;
  /** set by ring perception */
  inRing: boolean;
}

export interface Bond {
  a: number;
  b: number;
  /** 1, 2, 3; aromatic bonds are order 1 with the flag set */
  order: number;
  aromatic: boolean;
}

export interface Molecule {
  atoms: Atom[];
  bonds: Bond[];
}

const TWO_LETTER = new Set(["Cl", "Br"]);
const ORGANIC = new Set(["B", "C", "N", "O", "P", "S", "F", "I"]);
const AROMATIC_ORGANIC = new Set(["b", "c", "n", "o", "p", "s"]);
const BRACKET_SYMBOL = /^([A-Z][a-z]?|[bcnops]|se|as|\*)/;

export class SmilesError extends Error {}

interface RingOpening {
  atom: number;
  order: number;
  aromatic: boolean;
  explicit: boolean;
}

/** Parse one SMILES string into a molecular graph (all components). */
export function parseSmiles(smiles: string): Molecule {
  const text = smiles.trim();
  if (text.length === 0) throw new SmilesError("empty SMILES");

  const atoms: Atom[] = [];
  const bonds: Bond[] = [];
  const stack: number[] = [];
  const rings = new Map<number, RingOpening>();
  let prev = -1;
  let pendingOrder = 0; // 0 = default
  let pendingAromatic = false;
  let pendingExplicit = false;
  let i = 0;

  const addAtom = (element: string, aromatic: boolean): void => {
    const index = atoms.length;
    atoms.push({ element, aromatic, inRing: false });
    if (prev >= 0) {
      const order = pendingExplicit ? pendingOrder : 1;
      const aromaticBond =
        (pendingExplicit && pendingAromatic) ||
        (!pendingExplicit && aromatic && atoms[prev].aromatic);
      bonds.push({ a: prev, b: index, order, aromatic: aromaticBond });
    }
    prev = index;
    pendingOrder = 0;
    pendingAromatic = false;
    pendingExplicit = false;
  };

  const closeRing = (label: number): void => {
    if (prev < 0) throw new SmilesError(`ring bond ${label} before any atom`);
    const open = rings.get(label);
    if (open === undefined) {
      rings.set(label, {
        atom: prev,
        order: pendingOrder,
        aromatic: pendingAromatic,
        explicit: pendingExplicit,
      });
    } else {
      rings.delete(label);
      if (open.atom === prev) throw new SmilesError(`ring bond ${label} closes on its own atom`);
      const explicit = open.explicit || pendingExplicit;
      const order = explicit ? Math.max(open.order, pendingOrder, 1) : 1;
      const aromaticBond = explicit
        ? open.aromatic || pendingAromatic
        : atoms[open.atom].aromatic && atoms[prev].aromatic;
      bonds.push({ a: open.atom, b: prev, order, aromatic: aromaticBond });
    }
    pendingOrder = 0;
    pendingAromatic = false;
    pendingExplicit = false;
  };

  while (i < text.length) {
    const ch = text[i];
    if (ch === "(") {
      if (prev < 0) throw new SmilesError("branch before any atom");
      stack.push(prev);
      i += 1;
    } else if (ch === ")") {
      const back = stack.pop();
      if (back === undefined) throw new SmilesError("unbalanced ')'");
      prev = back;
      i += 1;
    } else if (ch === "-" || ch === "/" || ch === "\\") {
      pendingOrder = 1;
      pendingExplicit = true;
      i += 1;
    } else if (ch === "=") {
      pendingOrder = 2;
      pendingExplicit = true;
      i += 1;
    } else if (ch === "#") {
      pendingOrder = 3;
      pendingExplicit = true;
      i += 1;
    } else if (ch === ":") {
      pendingOrder = 1;
      pendingAromatic = true;
      pendingExplicit = true;
      i += 1;
    } else if (ch === ".") {
      prev = -1;
      pendingOrder = 0;
      pendingAromatic = false;
      pendingExplicit = false;
      i += 1;
    } else if (ch === "%") {
      if (i + 2 >= text.length || !/\d\d/.test(text.slice(i + 1, i + 3))) {
        throw new SmilesError(`bad %ring label at ${i}`);
      }
      closeRing(Number(text.slice(i + 1, i + 3)));
      i += 3;
    } else if (/\d/.test(ch)) {
      closeRing(Number(ch));
      i += 1;
    } else if (ch === "[") {
      const end = text.indexOf("]", i);
      if (end < 0) throw new SmilesError("unclosed bracket atom");
      const body = text.slice(i + 1, end).replace(/^\d+/, ""); // drop isotope
      const match = BRACKET_SYMBOL.exec(body);
      if (!match) throw new SmilesError(`cannot read bracket atom [${text.slice(i + 1, end)}]`);
      const symbol = match[1];
      const rest = body.slice(symbol.length);
      if (!/^(@{0,2}(TH\d|AL\d|SP\d)?H?\d*[+-]*\d*(:\d+)?)$/.test(rest)) {
        throw new SmilesError(`cannot read bracket atom [${text.slice(i + 1, end)}]`);
      }
      if (symbol === "*") {
        addAtom("*", false);
      } else if (symbol[0] === symbol[0].toLowerCase()) {
        addAtom(symbol.length === 1 ? symbol.toUpperCase() : symbol[0].toUpperCase() + symbol.slice(1), true);
      } else {
        addAtom(symbol, false);
      }
      i = end + 1;
    } else if (TWO_LETTER.has(text.slice(i, i + 2))) {
      addAtom(text.slice(i, i + 2), false);
      i += 2;
    } else if (ORGANIC.has(ch)) {
      addAtom(ch, false);
      i += 1;
    } else if (AROMATIC_ORGANIC.has(ch)) {
      addAtom(ch.toUpperCase(), true);
      i += 1;
    } else {
      throw new SmilesError(`unexpected character ${JSON.stringify(ch)} at ${i}`);
    }
  }
  if (stack.length > 0) throw new SmilesError("unbalanced '('");
  if (rings.size > 0) {
    throw new SmilesError(`unclosed ring bond(s): ${[...rings.keys()].join(", ")}`);
  }
  if (atoms.length === 0) throw new SmilesError("no atoms");

  markRingAtoms({ atoms, bonds });
  return { atoms, bonds };
}

/** Flag atoms on cycles: an atom is in a ring iff it touches a non-bridge edge. */
export function markRingAtoms(mol: Molecule): void {
  const n = mol.atoms.length;
  const adj: Array<Array<{ to: number; edge: number }>> = Array.from({ length: n }, () => []);
  mol.bonds.forEach((bond, e) => {
    adj[bond.a].push({ to: bond.b, edge: e });
    adj[bond.b].push({ to: bond.a, edge: e });
  });
  const disc = new Array<number>(n).fill(-1);
  const low = new Array<number>(n).fill(0);
  const isBridge = new Array<boolean>(mol.bonds.length).fill(false);
  let timer = 0;

  // iterative Tarjan bridge finding
  for (let root = 0; root < n; root++) {
    if (disc[root] !== -1) continue;
    const stack: Array<{ v: number; parentEdge: number; idx: number }> = [
      { v: root, parentEdge: -1, idx: 0 },
    ];
    disc[root] = low[root] = timer++;
    while (stack.length > 0) {
      const frame = stack[stack.length - 1];
      if (frame.idx < adj[frame.v].length) {
        const { to, edge } = adj[frame.v][frame.idx++];
        if (edge === frame.parentEdge) continue;
        if (disc[to] === -1) {
          disc[to] = low[to] = timer++;
          stack.push({ v: to, parentEdge: edge, idx: 0 });
        } else {
          low[frame.v] = Math.min(low[frame.v], disc[to]);
        }
      } else {
        stack.pop();
        if (stack.length > 0) {
          const parent = stack[stack.length - 1];
          low[parent.v] = Math.min(low[parent.v], low[frame.v]);
          if (low[frame.v] > disc[parent.v]) isBridge[frame.parentEdge] = true;
        }
      }
    }
  }
  mol.atoms.forEach((atom) => (atom.inRing = false));
  mol.bonds.forEach((bond, e) => {
    if (!isBridge[e]) {
      mol.atoms[bond.a].inRing = true;
      mol.atoms[bond.b].inRing = true;
    }
  });
}

/** Connected components as lists of atom indices. */
export function components(mol: Molecule): number[][] {
  const n = mol.atoms.length;
  const adj: number[][] = Array.from({ length: n }, () => []);
  for (const bond of mol.bonds) {
    adj[bond.a].push(bond.b);
    adj[bond.b].push(bond.a);
  }
  const seen = new Array<boolean>(n).fill(false);
  const out: number[][] = [];
  for (let s = 0; s < n; s++) {
    if (seen[s]) continue;
    const queue = [s];
    seen[s] = true;
    const comp: number[] = [];
    while (queue.length > 0) {
      const v = queue.pop()!;
      comp.push(v);
      for (const w of adj[v]) {
        if (!seen[w]) {
          seen[w] = true;
          queue.push(w);
        }
      }
    }
    out.push(comp.sort((a, b) => a - b));
  }
  return out;
}

/** Induced subgraph on the kept atom indices (re-indexed, ring flags refreshed). */
export function subgraph(mol: Molecule, keep: number[]): Molecule {
  const index = new Map<number, number>();
  keep.forEach((atom, i) => index.set(atom, i));
  const atoms = keep.map((i) => ({ ...mol.atoms[i] }));
  const bonds: Bond[] = [];
  for (const bond of mol.bonds) {
    const a = index.get(bond.a);
    const b = index.get(bond.b);
    if (a !== undefined && b !== undefined) bonds.push({ ...bond, a, b });
  }
  const out = { atoms, bonds };
  markRingAtoms(out);
  return out;
}
