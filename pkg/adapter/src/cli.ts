/**
 * Command line entry point.
 *
 * Reads an utterance manifest and a pronunciation lexicon, runs M
 * stochastic transcription passes per utterance, and writes an ensemble
 * JSONL file the phdscore toolkit loads unchanged.
 *
 * Exit codes: 0 success, 1 validation error, 2 I/O error. Diagnostics go
 * to standard error; the output file is the only data written.
 */

import { writeFileSync } from "node:fs";
import process from "node:process";
import { parseArgs } from "node:util";

import { configWarnings, DEFAULT_PLACEMENT, transcribeMcd, type AdapterConfig } from "./backend.js";
import { InputError, readLexicon, readManifest, renderEnsembles } from "./formats.js";

const USAGE = `usage: mcd-adapter --manifest FILE --lexicon FILE --out FILE
                   [--model-id ID] [--m N] [--p-drop P] [--seed N]
                   [--adaptation-state pretrained|finetuned|simulated]
                   [--placement DESC]

Transcribe every manifest utterance M times with dropout active and write
the hypotheses as ensemble JSONL to --out.

  --manifest FILE          utterance manifest (JSONL)
  --lexicon FILE           word<TAB>phonemes pronunciation lexicon (TSV)
  --out FILE               ensemble output path
  --model-id ID            backend identifier recorded in the output (default demo-bigram)
  --m N                    stochastic passes per utterance, minimum 10 (default 20)
  --p-drop P               dropout probability in [0, 1] (default 0.01)
  --seed N                 run seed (default 0)
  --adaptation-state STATE backend state recorded in the output (default pretrained)
  --placement DESC         dropout placement, name:count joined by + (default ${DEFAULT_PLACEMENT})
`;

function parseNumberFlag(raw: string, flag: string, integer: boolean): number {
  const value = Number(raw);
  if (!Number.isFinite(value) || (integer && !Number.isInteger(value))) {
    throw new InputError(`--${flag} expects ${integer ? "an integer" : "a number"}, got '${raw}'`);
  }
  return value;
}

export function main(argv: string[]): number {
  let values: Record<string, string | boolean | undefined>;
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        manifest: { type: "string" },
        lexicon: { type: "string" },
        out: { type: "string" },
        "model-id": { type: "string", default: "demo-bigram" },
        m: { type: "string", default: "20" },
        "p-drop": { type: "string", default: "0.01" },
        seed: { type: "string", default: "0" },
        "adaptation-state": { type: "string", default: "pretrained" },
        placement: { type: "string", default: DEFAULT_PLACEMENT },
        help: { type: "boolean", short: "h", default: false },
      },
      allowPositionals: false,
    }));
  } catch (err) {
    process.stderr.write(`${USAGE}\nerror: ${(err as Error).message}\n`);
    return 1;
  }

  if (values["help"]) {
    process.stdout.write(USAGE);
    return 0;
  }

  try {
    for (const required of ["manifest", "lexicon", "out"]) {
      if (values[required] === undefined) {
        throw new InputError(`--${required} is required`);
      }
    }
    const cfg: AdapterConfig = {
      modelId: values["model-id"] as string,
      m: parseNumberFlag(values["m"] as string, "m", true),
      pDrop: parseNumberFlag(values["p-drop"] as string, "p-drop", false),
      placement: values["placement"] as string,
      seed: parseNumberFlag(values["seed"] as string, "seed", true),
      adaptationState: values["adaptation-state"] as string,
    };

    const utterances = readManifest(values["manifest"] as string);
    const lexicon = readLexicon(values["lexicon"] as string);
    for (const warning of configWarnings(cfg)) {
      process.stderr.write(`warning: ${warning}\n`);
    }

    const { records, skipped } = transcribeMcd(cfg, utterances, lexicon);
    if (skipped.size > 0) {
      const listing = [...skipped.entries()]
        .sort(([a], [b]) => (a < b ? -1 : 1))
        .map(([word, count]) => `${word} (${count}x)`)
        .join(", ");
      process.stderr.write(`skipped ${skipped.size} out-of-vocabulary word(s): ${listing}\n`);
    }

    writeFileSync(values["out"] as string, renderEnsembles(records), "utf8");
    process.stderr.write(
      `wrote ${records.length} ensemble(s), M=${cfg.m}, p_drop=${cfg.pDrop}, to ${values["out"]}\n`,
    );
    return 0;
  } catch (err) {
    if (err instanceof InputError) {
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    if (err instanceof Error && typeof (err as NodeJS.ErrnoException).code === "string") {
      process.stderr.write(`io error: ${err.message}\n`);
      return 2;
    }
    throw err;
  }
}

process.exitCode = main(process.argv.slice(2));
