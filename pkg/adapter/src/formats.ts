/**
 * File formats shared with the phdscore toolkit.
 *
 * The adapter reads the toolkit's utterance manifest (JSONL) and
 * pronunciation lexicon (TSV) and writes ensemble files (JSONL) that the
 * toolkit's loader accepts unchanged. Field names and strictness mirror
 * the toolkit side so a file rejected there is rejected here too.
 */

import { readFileSync } from "node:fs";

/** Raised on malformed or inconsistent input; maps to exit code 1. */
export class InputError extends Error {}

export interface Utterance {
  id: string;
  text: string;
  split: string;
}

export interface BackendMeta {
  modelId: string;
  m: number;
  pDrop: number;
  adaptationState: string;
}

export interface EnsembleRecord {
  utteranceId: string;
  /** One phoneme sequence per stochastic pass. */
  hypotheses: string[][];
  backend: BackendMeta;
}

/** Case-folded word to its phoneme sequence. */
export type Lexicon = Map<string, string[]>;

export const ADAPTATION_STATES = ["pretrained", "finetuned", "simulated"] as const;

const MANIFEST_KEYS = new Set(["id", "text", "ref_phonemes", "audio_path", "split"]);

function parseJsonLine(line: string, lineNo: number): Record<string, unknown> {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch {
    throw new InputError(`line ${lineNo}: not valid JSON`);
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new InputError(`line ${lineNo}: expected a JSON object`);
  }
  return obj as Record<string, unknown>;
}

/** Read utterances from a JSONL manifest; the adapter uses id, text and split. */
export function readManifest(path: string): Utterance[] {
  const utterances: Utterance[] = [];
  const seen = new Set<string>();
  const lines = readFileSync(path, "utf8").split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line === "") {
      continue;
    }
    const lineNo = i + 1;
    const obj = parseJsonLine(line, lineNo);
    const unknown = Object.keys(obj).filter((key) => !MANIFEST_KEYS.has(key));
    if (unknown.length > 0) {
      throw new InputError(`line ${lineNo}: unknown manifest fields ${JSON.stringify(unknown.sort())}`);
    }
    for (const required of ["id", "text", "ref_phonemes", "split"]) {
      if (!(required in obj)) {
        throw new InputError(`line ${lineNo}: missing required field '${required}'`);
      }
    }
    const id = obj["id"];
    const text = obj["text"];
    const split = obj["split"];
    if (typeof id !== "string" || id === "") {
      throw new InputError(`line ${lineNo}: id must be a non-empty string`);
    }
    if (typeof text !== "string") {
      throw new InputError(`line ${lineNo}: text must be a string`);
    }
    if (typeof obj["ref_phonemes"] !== "string") {
      throw new InputError(`line ${lineNo}: ref_phonemes must be a space-separated symbol string`);
    }
    if (typeof split !== "string") {
      throw new InputError(`line ${lineNo}: split must be a string`);
    }
    if (seen.has(id)) {
      throw new InputError(`line ${lineNo}: duplicate utterance id '${id}'`);
    }
    seen.add(id);
    utterances.push({ id, text, split });
  }
  return utterances;
}

/** Read a word<TAB>phonemes lexicon; words are case-folded, duplicates rejected. */
export function readLexicon(path: string): Lexicon {
  const lexicon: Lexicon = new Map();
  const lines = readFileSync(path, "utf8").split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line === "" || line.startsWith("#")) {
      continue;
    }
    const lineNo = i + 1;
    const parts = line.split("\t");
    if (parts.length !== 2) {
      throw new InputError(`line ${lineNo}: expected word<TAB>symbol symbol ...`);
    }
    const word = parts[0].toLowerCase();
    if (word === "") {
      throw new InputError(`line ${lineNo}: empty word`);
    }
    if (lexicon.has(word)) {
      throw new InputError(`line ${lineNo}: duplicate lexicon entry for '${word}'`);
    }
    const phonemes = parts[1].split(/\s+/).filter((sym) => sym !== "");
    if (phonemes.length === 0) {
      throw new InputError(`line ${lineNo}: empty pronunciation for '${word}'`);
    }
    lexicon.set(word, phonemes);
  }
  return lexicon;
}

/**
 * Render ensemble records as JSONL, sorted by utterance id.
 *
 * Key order matches the toolkit's serializer (alphabetical) so files from
 * either side diff cleanly.
 */
export function renderEnsembles(records: EnsembleRecord[]): string {
  const lines = [...records]
    .sort((a, b) => (a.utteranceId < b.utteranceId ? -1 : a.utteranceId > b.utteranceId ? 1 : 0))
    .map((rec) => {
      if (rec.hypotheses.length !== rec.backend.m) {
        throw new InputError(
          `utterance '${rec.utteranceId}' has ${rec.hypotheses.length} hypotheses but backend.M=${rec.backend.m}`,
        );
      }
      return JSON.stringify({
        backend: {
          M: rec.backend.m,
          adaptation_state: rec.backend.adaptationState,
          model_id: rec.backend.modelId,
          p_drop: rec.backend.pDrop,
        },
        hypotheses: rec.hypotheses.map((hyp) => hyp.join(" ")),
        utterance_id: rec.utteranceId,
      });
    });
  return lines.length > 0 ? lines.join("\n") + "\n" : "";
}
