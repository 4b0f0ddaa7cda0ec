#!/usr/bin/env node
/** focal-annotate: raw multiple-choice JSON -> parsed interchange JSON,
 * optionally dumping frozen token vectors in the binary embedding format.
 *
 *   focal-annotate --in raw.json --out parsed.json
 *                  [--embed hashlm --embed-out vecs.bin] [--embed-dim N]
 *
 * A metadata sidecar (<out>.meta.json) records the tool version and any
 * flat-parse warnings.
 */

import { readFileSync, writeFileSync, renameSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import process from "node:process";

import { annotateCorpus } from "./annotate.js";
import { exportEmbeddings } from "./embed.js";
import { DEFAULT_DIM, MODELS } from "./hashlm.js";

interface Args {
  in?: string;
  out?: string;
  embed?: string;
  embedOut?: string;
  embedDim: number;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { embedDim: DEFAULT_DIM };
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case "--in":
        args.in = argv[++i];
        break;
      case "--out":
        args.out = argv[++i];
        break;
      case "--embed":
        args.embed = argv[++i];
        break;
      case "--embed-out":
        args.embedOut = argv[++i];
        break;
      case "--embed-dim":
        args.embedDim = Number(argv[++i]);
        break;
      case "--help":
      case "-h":
        console.log(
          "usage: focal-annotate --in raw.json --out parsed.json " +
            "[--embed hashlm --embed-out vecs.bin] [--embed-dim N]",
        );
        process.exit(0);
        break;
      default:
        throw new Error(`unknown argument ${argv[i]}`);
    }
  }
  return args;
}

function writeAtomically(path: string, data: string | Buffer) {
  const tmp = join(tmpdir(), `focal-annotate-${process.pid}-${Date.now()}`);
  writeFileSync(tmp, data);
  renameSync(tmp, path);
}

export function main(argv: string[]): number {
  const args = parseArgs(argv);
  if (!args.in || !args.out) {
    console.error("error: --in and --out are required");
    return 2;
  }
  if (args.embed && !(args.embed in MODELS)) {
    console.error(`error: unknown embedding model ${args.embed}; available: ${Object.keys(MODELS).join(", ")}`);
    return 2;
  }
  if (args.embed && !args.embedOut) {
    console.error("error: --embed requires --embed-out");
    return 2;
  }
  const raw = JSON.parse(readFileSync(args.in, "utf-8"));
  if (!Array.isArray(raw)) {
    console.error("error: input must be a JSON array of raw examples");
    return 2;
  }
  const result = annotateCorpus(raw);
  writeAtomically(args.out, JSON.stringify(result.examples, null, 1));
  writeAtomically(
    `${args.out}.meta.json`,
    JSON.stringify({ ...result.meta, warnings: result.warnings }, null, 1),
  );
  console.log(
    `annotated ${result.examples.length} examples -> ${args.out} ` +
      `(${result.warnings.length} warnings)`,
  );
  if (args.embed && args.embedOut) {
    const blob = exportEmbeddings(result.examples, args.embed, args.embedDim);
    writeAtomically(args.embedOut, blob);
    console.log(`wrote ${args.embedDim}-dim vectors -> ${args.embedOut}`);
  }
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  try {
    process.exit(main(process.argv.slice(2)));
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    process.exit(2);
  }
}
