#!/usr/bin/env node
/**
 * embedkit command line.
 *
 *   embedkit run --input drugs.csv --out-dir DIR [--dim 256] [--seed 7]
 *                [--profiles existing.jsonl] [--validate]
 *   embedkit scaffolds --input drugs.csv --output scaffolds.csv
 *   embedkit validate --dir DIR --input drugs.csv --dim N
 *
 * `run` parses every SMILES once (parse failures land in rejects.csv, so
 * both embedding sources cover exactly the same drugs), embeds with the
 * two featurizers pinned in model.lock.json, reduces both sources to the
 * shared target dimension with a persisted PCA fit, extracts Murcko
 * scaffolds, and writes profile rows (stubs, or the given profiles
 * augmented with scaffolds).
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { parseSmiles, Molecule } from "./smiles.js";
import { murckoScaffold } from "./scaffold.js";
import {
  DEFAULT_FRAGMENT_SPEC,
  DEFAULT_TOKEN_SPEC,
  FeaturizerSpec,
  fragmentEmbedding,
  tokenEmbedding,
} from "./embed.js";
import { fitPca, project } from "./pca.js";
import {
  ProfileStub,
  readDrugsCsv,
  validateOutputs,
  writeEmbeddingsJsonl,
  writeProfilesJsonl,
  writeRejectsCsv,
  writeScaffoldsCsv,
} from "./io.js";

interface Flags {
  [key: string]: string | boolean;
}

function parseArgs(argv: string[]): { command: string; flags: Flags } {
  const [command, ...rest] = argv;
  const flags: Flags = {};
  for (let i = 0; i < rest.length; i++) {
    const arg = rest[i];
    if (!arg.startsWith("--")) throw new Error(`unexpected argument ${arg}`);
    const name = arg.slice(2);
    if (i + 1 < rest.length && !rest[i + 1].startsWith("--")) {
      flags[name] = rest[++i];
    } else {
      flags[name] = true;
    }
  }
  return { command: command ?? "help", flags };
}

function requireString(flags: Flags, name: string): string {
  const value = flags[name];
  if (typeof value !== "string" || !value) throw new Error(`--${name} is required`);
  return value;
}

interface LockFile {
  mol2vec: FeaturizerSpec;
  smilesbert: FeaturizerSpec;
}

function loadLockFile(): LockFile {
  const here = path.dirname(fileURLToPath(import.meta.url));
  const lockPath = path.resolve(here, "..", "model.lock.json");
  try {
    const raw = JSON.parse(fs.readFileSync(lockPath, "utf-8"));
    return {
      mol2vec: { modelId: raw.mol2vec.model_id, nativeDim: raw.mol2vec.native_dim },
      smilesbert: { modelId: raw.smilesbert.model_id, nativeDim: raw.smilesbert.native_dim },
    };
  } catch {
    return { mol2vec: DEFAULT_FRAGMENT_SPEC, smilesbert: DEFAULT_TOKEN_SPEC };
  }
}

interface ParsedDrug {
  drugId: string;
  smiles: string;
  mol: Molecule;
}

function parseCorpus(inputPath: string): { accepted: ParsedDrug[]; rejects: Array<{ drugId: string; reason: string }> } {
  const accepted: ParsedDrug[] = [];
  const rejects: Array<{ drugId: string; reason: string }> = [];
  for (const { drugId, smiles } of readDrugsCsv(inputPath)) {
    if (!smiles) {
      rejects.push({ drugId, reason: "empty SMILES" });
      continue;
    }
    try {
      accepted.push({ drugId, smiles, mol: parseSmiles(smiles) });
    } catch (error) {
      rejects.push({ drugId, reason: (error as Error).message });
    }
  }
  return { accepted, rejects };
}

function runCommand(flags: Flags): number {
  const inputPath = requireString(flags, "input");
  const outDir = requireString(flags, "out-dir");
  const targetDim = Number(flags.dim ?? 256);
  if (!Number.isInteger(targetDim) || targetDim < 1) throw new Error("--dim must be a positive integer");
  fs.mkdirSync(outDir, { recursive: true });
  const lock = loadLockFile();

  const { accepted, rejects } = parseCorpus(inputPath);
  if (accepted.length === 0) throw new Error("every SMILES failed to parse; nothing to embed");
  if (accepted.length < targetDim) {
    throw new Error(
      `too few samples: ${accepted.length} parseable molecules for --dim ${targetDim}`,
    );
  }

  const sources: Array<{ tag: "mol2vec" | "smilesbert"; spec: FeaturizerSpec; embed: (d: ParsedDrug) => Float64Array }> = [
    { tag: "mol2vec", spec: lock.mol2vec, embed: (d) => fragmentEmbedding(d.mol, lock.mol2vec) },
    { tag: "smilesbert", spec: lock.smilesbert, embed: (d) => tokenEmbedding(d.smiles, lock.smilesbert) },
  ];
  for (const { tag, embed } of sources) {
    const native = accepted.map((drug) => Array.from(embed(drug)));
    const model = fitPca(native, targetDim);
    fs.writeFileSync(path.join(outDir, `pca_${tag}.json`), JSON.stringify(model));
    const reduced = new Map<string, number[]>();
    accepted.forEach((drug, i) => reduced.set(drug.drugId, project(model, native[i])));
    writeEmbeddingsJsonl(path.join(outDir, `${tag}.jsonl`), tag, reduced);
    console.error(`embedkit: ${tag}: ${reduced.size} drugs -> dim ${targetDim}`);
  }

  const scaffoldRows = accepted.map(({ drugId, smiles }) => {
    const scaffold = murckoScaffold(smiles);
    return { drugId, scaffold, note: scaffold ? "" : "acyclic" };
  });
  writeScaffoldsCsv(path.join(outDir, "scaffolds.csv"), scaffoldRows);
  const scaffoldOf = new Map(scaffoldRows.map((row) => [row.drugId, row.scaffold]));

  let profiles: ProfileStub[];
  if (typeof flags.profiles === "string") {
    profiles = fs
      .readFileSync(flags.profiles, "utf-8")
      .split(/\r?\n/)
      .filter((line) => line.trim())
      .map((line) => JSON.parse(line) as ProfileStub);
  } else {
    profiles = accepted.map(({ drugId }) => ({
      drug_id: drugId,
      enzymes: [],
      targets: [],
      atc: [],
      groups: [],
      side_effects: [],
      strong_pk_modulator: false,
    }));
  }
  for (const profile of profiles) {
    const scaffold = scaffoldOf.get(profile.drug_id);
    if (scaffold) {
      profile.scaffold = scaffold;
    } else {
      delete profile.scaffold;
    }
  }
  writeProfilesJsonl(path.join(outDir, "profiles.jsonl"), profiles);
  writeRejectsCsv(path.join(outDir, "rejects.csv"), rejects);
  console.error(
    `embedkit: wrote ${accepted.length} drugs (${rejects.length} rejected) to ${outDir}`,
  );

  if (flags.validate) {
    const report = validateOutputs(outDir, accepted.map((d) => d.drugId), targetDim);
    console.log(JSON.stringify(report, null, 2));
    if (!report.ok) return 1;
  }
  return 0;
}

function scaffoldsCommand(flags: Flags): number {
  const inputPath = requireString(flags, "input");
  const outputPath = requireString(flags, "output");
  const { accepted, rejects } = parseCorpus(inputPath);
  const rows = accepted.map(({ drugId, smiles }) => {
    const scaffold = murckoScaffold(smiles);
    return { drugId, scaffold, note: scaffold ? "" : "acyclic" };
  });
  for (const { drugId } of rejects) rows.push({ drugId, scaffold: "", note: "invalid SMILES" });
  writeScaffoldsCsv(outputPath, rows);
  console.error(`embedkit: ${rows.length} scaffold rows -> ${outputPath}`);
  return 0;
}

function validateCommand(flags: Flags): number {
  const dir = requireString(flags, "dir");
  const inputPath = requireString(flags, "input");
  const targetDim = Number(flags.dim ?? 256);
  const { accepted } = parseCorpus(inputPath);
  const report = validateOutputs(dir, accepted.map((d) => d.drugId), targetDim);
  console.log(JSON.stringify(report, null, 2));
  return report.ok ? 0 : 1;
}

export function main(argv: string[]): number {
  try {
    const { command, flags } = parseArgs(argv);
    switch (command) {
      case "run":
        return runCommand(flags);
      case "scaffolds":
        return scaffoldsCommand(flags);
      case "validate":
        return validateCommand(flags);
      default:
        console.error(
          "usage: embedkit run --input drugs.csv --out-dir DIR [--dim N] [--profiles file.jsonl] [--validate]\n" +
            "       embedkit scaffolds --input drugs.csv --output scaffolds.csv\n" +
            "       embedkit validate --dir DIR --input drugs.csv --dim N",
        );
        return command === "help" ? 0 : 2;
    }
  } catch (error) {
    console.error(`embedkit: ${(error as Error).message}`);
    return 2;
  }
}

process.exit(main(process.argv.slice(2)));
