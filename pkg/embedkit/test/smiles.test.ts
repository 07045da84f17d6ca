import { describe, expect, it } from "vitest";

import { components, parseSmiles, SmilesError } from "../src/smiles.js";

describe("parseSmiles", () => {
  it("reads benzene with aromatic flags and ring perception", () => {
    const mol = parseSmiles("c1ccccc1");
    expect(mol.atoms).toHaveLength(6);
    expect(mol.bonds).toHaveLength(6);
    expect(mol.atoms.every((a) => a.aromatic && a.inRing && a.element === "C")).toBe(true);
  });

  it("reads two-letter organic atoms and bond orders", () => {
    const mol = parseSmiles("ClC(=O)Br");
    expect(mol.atoms.map((a) => a.element)).toEqual(["Cl", "C", "O", "Br"]);
    expect(mol.bonds.find((b) => b.order === 2)).toBeTruthy();
  });

  it("reads bracket atoms, dropping charge/isotope/stereo detail", () => {
    const mol = parseSmiles("[13CH3][N+](C)(C)C");
    expect(mol.atoms[0].element).toBe("C");
    expect(mol.atoms[1].element).toBe("N");
  });

  it("treats stereo bond marks as plain single bonds", () => {
    const withStereo = parseSmiles("F/C=C/F");
    const plain = parseSmiles("FC=CF");
    expect(withStereo.bonds.map((b) => b.order).sort()).toEqual(
      plain.bonds.map((b) => b.order).sort(),
    );
  });

  it("splits dot-separated components", () => {
    const mol = parseSmiles("CCO.Cl");
    expect(components(mol)).toHaveLength(2);
  });

  it("marks only cycle atoms as ring members", () => {
    const mol = parseSmiles("Cc1ccccc1");
    const ringFlags = mol.atoms.map((a) => a.inRing);
    expect(ringFlags[0]).toBe(false);
    expect(ringFlags.slice(1).every(Boolean)).toBe(true);
  });

  it("rejects malformed strings", () => {
    expect(() => parseSmiles("C((")).toThrow(SmilesError);
    expect(() => parseSmiles("C1CC")).toThrow(/unclosed ring/);
    expect(() => parseSmiles("C)C")).toThrow(SmilesError);
    expect(() => parseSmiles("[Qq")).toThrow(SmilesError);
    expect(() => parseSmiles("")).toThrow(/empty/);
    expect(() => parseSmiles("C$C")).toThrow(SmilesError);
  });

  it("supports %nn ring labels", () => {
    const mol = parseSmiles("C%10CCCCC%10");
    expect(mol.atoms.filter((a) => a.inRing)).toHaveLength(6);
  });
});
