/**
 * File formats shared with the prediction pipeline: drugs CSV in;
 * embedding JSON Lines, profile JSON Lines, scaffold CSV and rejects CSV
 * out. The validators re-read written files and check exactly what the
 * downstream loader will check (parseability, referential integrity, one
 * dimension per source, both sources covering the same drugs).
 */

import * as fs from "node:fs";

export interface DrugRow {
  drugId: string;
  smiles: string;
}

function splitCsvLine(line: string): string[] {
  const out: string[] = [];
  let field = "";
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"' && line[i + 1] === '"') {
        field += '"';
        i += 1;
      } else if (ch === '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch === '"') {
      quoted = true;
    } else if (ch === ",") {
      out.push(field);
      field = "";
    } else {
      field += ch;
    }
  }
  out.push(field);
  return out;
}

export function readDrugsCsv(path: string): DrugRow[] {
  const text = fs.readFileSync(path, "utf-8");
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) throw new Error(`${path}: empty file`);
  const header = splitCsvLine(lines[0]).map((h) => h.trim());
  const idCol = header.indexOf("drug_id");
  const smilesCol = header.indexOf("smiles");
  if (idCol < 0 || smilesCol < 0) {
    throw new Error(`${path}: expected header with drug_id and smiles columns`);
  }
  const seen = new Set<string>();
  const rows: DrugRow[] = [];
  lines.slice(1).forEach((line, index) => {
    const fields = splitCsvLine(line);
    const drugId = (fields[idCol] ?? "").trim();
    if (!drugId) throw new Error(`${path}:${index + 2}: empty drug_id`);
    if (seen.has(drugId)) throw new Error(`${path}:${index + 2}: duplicate drug_id ${drugId}`);
    seen.add(drugId);
    rows.push({ drugId, smiles: (fields[smilesCol] ?? "").trim() });
  });
  return rows;
}

export function writeEmbeddingsJsonl(
  path: string,
  source: string,
  vectors: Map<string, number[]>,
): void {
  const lines: string[] = [];
  for (const [drugId, vector] of vectors) {
    lines.push(JSON.stringify({ drug_id: drugId, source, vector }));
  }
  fs.writeFileSync(path, lines.join("\n") + (lines.length ? "\n" : ""));
}

export interface ProfileStub {
  drug_id: string;
  enzymes: string[];
  targets: string[];
  atc: string[];
  groups: string[];
  side_effects: string[];
  strong_pk_modulator: boolean;
  scaffold?: string;
}

export function writeProfilesJsonl(path: string, profiles: ProfileStub[]): void {
  const lines = profiles.map((profile) => JSON.stringify(profile));
  fs.writeFileSync(path, lines.join("\n") + (lines.length ? "\n" : ""));
}

export function writeScaffoldsCsv(
  path: string,
  rows: Array<{ drugId: string; scaffold: string; note: string }>,
): void {
  const lines = ["drug_id,scaffold,note"];
  for (const { drugId, scaffold, note } of rows) {
    lines.push(`${drugId},${scaffold},${note}`);
  }
  fs.writeFileSync(path, lines.join("\n") + "\n");
}

export function writeRejectsCsv(
  path: string,
  rows: Array<{ drugId: string; reason: string }>,
): void {
  const lines = ["drug_id,reason"];
  for (const { drugId, reason } of rows) {
    lines.push(`${drugId},${JSON.stringify(reason)}`);
  }
  fs.writeFileSync(path, lines.join("\n") + "\n");
}

export interface ValidationReport {
  ok: boolean;
  problems: string[];
  counts: Record<string, number>;
}

/** Re-read outputs and check the contract the downstream loader enforces. */
export function validateOutputs(
  outDir: string,
  expectedIds: string[],
  targetDim: number,
): ValidationReport {
  const problems: string[] = [];
  const counts: Record<string, number> = {};
  const expected = new Set(expectedIds);
  const perSource = new Map<string, Set<string>>();

  for (const source of ["mol2vec", "smilesbert"]) {
    const path = `${outDir}/${source}.jsonl`;
    const ids = new Set<string>();
    perSource.set(source, ids);
    let text: string;
    try {
      text = fs.readFileSync(path, "utf-8");
    } catch {
      problems.push(`${source}: missing file ${path}`);
      continue;
    }
    text.split(/\r?\n/).forEach((line, index) => {
      if (!line.trim()) return;
      let row: { drug_id?: string; source?: string; vector?: unknown };
      try {
        row = JSON.parse(line);
      } catch {
        problems.push(`${source}:${index + 1}: not JSON`);
        return;
      }
      if (!row.drug_id || row.source !== source) {
        problems.push(`${source}:${index + 1}: bad drug_id/source`);
        return;
      }
      if (!expected.has(row.drug_id)) {
        problems.push(`${source}:${index + 1}: unknown drug_id ${row.drug_id}`);
      }
      const vector = row.vector;
      if (!Array.isArray(vector) || vector.length !== targetDim ||
          !vector.every((x) => typeof x === "number" && Number.isFinite(x))) {
        problems.push(`${source}:${index + 1}: vector is not ${targetDim} finite numbers`);
      }
      if (ids.has(row.drug_id)) problems.push(`${source}:${index + 1}: duplicate ${row.drug_id}`);
      ids.add(row.drug_id);
    });
    counts[source] = ids.size;
  }
  const [m2v, bert] = [perSource.get("mol2vec")!, perSource.get("smilesbert")!];
  if (m2v.size !== bert.size || [...m2v].some((id) => !bert.has(id))) {
    problems.push("sources emit different drug_id sets");
  }

  try {
    const text = fs.readFileSync(`${outDir}/profiles.jsonl`, "utf-8");
    let n = 0;
    text.split(/\r?\n/).forEach((line, index) => {
      if (!line.trim()) return;
      n += 1;
      try {
        const row = JSON.parse(line);
        if (!row.drug_id || !expected.has(row.drug_id)) {
          problems.push(`profiles:${index + 1}: bad drug_id`);
        }
        if ("scaffold" in row && typeof row.scaffold === "string" && row.scaffold.length === 0) {
          problems.push(`profiles:${index + 1}: empty scaffold string (omit instead)`);
        }
      } catch {
        problems.push(`profiles:${index + 1}: not JSON`);
      }
    });
    counts.profiles = n;
  } catch {
    problems.push("profiles.jsonl missing");
  }

  try {
    const text = fs.readFileSync(`${outDir}/scaffolds.csv`, "utf-8");
    const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
    if (lines[0] !== "drug_id,scaffold,note") problems.push("scaffolds.csv: bad header");
    counts.scaffolds = lines.length - 1;
  } catch {
    problems.push("scaffolds.csv missing");
  }

  return { ok: problems.length === 0, problems, counts };
}
