/**
 * Simulated dropout-enabled recognizer.
 *
 * Stands in for a heavyweight speech backend so the ensemble file
 * contract can be exercised end to end on any machine. Each word of an
 * utterance is recognized against the lexicon vocabulary by character
 * bigram overlap; every stochastic pass drops hidden units at each
 * configured placement, and each dropped unit removes its (deterministic,
 * unit-specific) contribution from every candidate's score. Passes
 * therefore disagree more as p_drop grows, and p_drop = 0 recovers one
 * deterministic transcription repeated M times.
 *
 * Swapping in a real backend means replacing transcribeMcd while keeping
 * AdapterConfig and the output format.
 */

import {
  ADAPTATION_STATES,
  InputError,
  type EnsembleRecord,
  type Lexicon,
  type Utterance,
} from "./formats.js";
import { unitDraw } from "./rng.js";

export interface AdapterConfig {
  modelId: string;
  m: number;
  pDrop: number;
  /** Where dropout is applied, e.g. "encoder:4+decoder:4". */
  placement: string;
  seed: number;
  adaptationState: string;
}

export const DEFAULT_PLACEMENT = "encoder:4+decoder:4";

/** Below this many passes the ensemble statistics are too noisy to use. */
export const MIN_PASSES = 10;

/** p_drop values outside this band degrade transcriptions or mute the signal. */
export const P_DROP_BAND: readonly [number, number] = [0.005, 0.02];

// hidden layer simulated at every placement application
const UNITS_PER_APPLICATION = 16;
// score scale separating the best lexicon match from its runners-up
const SCORE_SHARPNESS = 6.0;
// largest score shift a single dropped unit can cause
const UNIT_NOISE = 3.0;

/** Total dropout applications described by a placement string. */
export function parsePlacement(descriptor: string): number {
  const segments = descriptor.split("+");
  let total = 0;
  for (const segment of segments) {
    const parts = segment.split(":");
    if (parts.length !== 2 || parts[0] === "" || !/^\d+$/.test(parts[1])) {
      throw new InputError(`bad placement segment '${segment}', expected name:count`);
    }
    total += Number(parts[1]);
  }
  if (total < 1) {
    throw new InputError(`placement '${descriptor}' applies dropout nowhere`);
  }
  return total;
}

/** Raise InputError on any out-of-contract config value. */
export function validateConfig(cfg: AdapterConfig): void {
  if (cfg.modelId === "") {
    throw new InputError("model id must be non-empty");
  }
  if (!Number.isInteger(cfg.m) || cfg.m < MIN_PASSES) {
    throw new InputError(`M must be an integer >= ${MIN_PASSES}, got ${cfg.m}`);
  }
  if (!Number.isFinite(cfg.pDrop) || cfg.pDrop < 0 || cfg.pDrop > 1) {
    throw new InputError(`p_drop must be in [0, 1], got ${cfg.pDrop}`);
  }
  if (!Number.isInteger(cfg.seed) || cfg.seed < 0) {
    throw new InputError(`seed must be a non-negative integer, got ${cfg.seed}`);
  }
  if (!(ADAPTATION_STATES as readonly string[]).includes(cfg.adaptationState)) {
    throw new InputError(
      `adaptation state must be one of ${ADAPTATION_STATES.join(", ")}, got '${cfg.adaptationState}'`,
    );
  }
  parsePlacement(cfg.placement);
}

/** Non-fatal observations about a valid config. */
export function configWarnings(cfg: AdapterConfig): string[] {
  const warnings: string[] = [];
  if (cfg.pDrop === 0) {
    warnings.push("dropout disabled (p_drop=0): all passes will be identical");
  } else if (cfg.pDrop < P_DROP_BAND[0] || cfg.pDrop > P_DROP_BAND[1]) {
    warnings.push(
      `p_drop=${cfg.pDrop} is outside the stable band [${P_DROP_BAND[0]}, ${P_DROP_BAND[1]}]`,
    );
  }
  return warnings;
}

/** Boundary-marked character bigrams, the recognizer's word features. */
export function bigramFeatures(word: string): Set<string> {
  const marked = `^${word}$`;
  const features = new Set<string>();
  for (let i = 0; i + 1 < marked.length; i++) {
    features.add(marked.slice(i, i + 2));
  }
  return features;
}

function jaccard(a: Set<string>, b: Set<string>): number {
  let shared = 0;
  for (const feature of a) {
    if (b.has(feature)) {
      shared += 1;
    }
  }
  const union = a.size + b.size - shared;
  return union === 0 ? 0 : shared / union;
}

interface Candidate {
  word: string;
  base: number;
}

export interface TranscriptionResult {
  records: EnsembleRecord[];
  /** Out-of-vocabulary word to number of occurrences skipped. */
  skipped: Map<string, number>;
}

/**
 * Run M stochastic transcription passes over every utterance.
 *
 * Words missing from the lexicon cannot be represented and are skipped;
 * the caller is expected to surface the returned skip counts.
 */
export function transcribeMcd(
  cfg: AdapterConfig,
  utterances: Utterance[],
  lexicon: Lexicon,
): TranscriptionResult {
  validateConfig(cfg);
  const applications = parsePlacement(cfg.placement);
  const vocabulary = [...lexicon.keys()].sort();
  const vocabularyFeatures = new Map(vocabulary.map((word) => [word, bigramFeatures(word)]));
  const skipped = new Map<string, number>();
  const records: EnsembleRecord[] = [];

  for (const utterance of utterances) {
    const words: string[] = [];
    for (const raw of utterance.text.toLowerCase().split(/\s+/)) {
      if (raw === "") {
        continue;
      }
      if (lexicon.has(raw)) {
        words.push(raw);
      } else {
        skipped.set(raw, (skipped.get(raw) ?? 0) + 1);
      }
    }

    // base score of every candidate for every word, shared by all passes
    const baseScores = words.map((word) => {
      const features = bigramFeatures(word);
      return vocabulary.map(
        (cand): Candidate => ({
          word: cand,
          base: SCORE_SHARPNESS * jaccard(features, vocabularyFeatures.get(cand)!),
        }),
      );
    });

    const hypotheses: string[][] = [];
    for (let pass = 0; pass < cfg.m; pass++) {
      const phonemes: string[] = [];
      for (let wordIdx = 0; wordIdx < words.length; wordIdx++) {
        const emitted = recognizeWord(
          cfg,
          applications,
          utterance.id,
          pass,
          wordIdx,
          words[wordIdx],
          baseScores[wordIdx],
          lexicon,
        );
        phonemes.push(...emitted);
      }
      hypotheses.push(phonemes);
    }

    records.push({
      utteranceId: utterance.id,
      hypotheses,
      backend: {
        modelId: cfg.modelId,
        m: cfg.m,
        pDrop: cfg.pDrop,
        adaptationState: cfg.adaptationState,
      },
    });
  }

  return { records, skipped };
}

function recognizeWord(
  cfg: AdapterConfig,
  applications: number,
  utteranceId: string,
  pass: number,
  wordIdx: number,
  word: string,
  candidates: Candidate[],
  lexicon: Lexicon,
): string[] {
  const scores = candidates.map((cand) => cand.base);
  if (cfg.pDrop > 0) {
    for (let app = 0; app < applications; app++) {
      for (let unit = 0; unit < UNITS_PER_APPLICATION; unit++) {
        const dropKey = `drop/${utteranceId}/${pass}/${wordIdx}/${app}/${unit}`;
        if (unitDraw(cfg.seed, dropKey) >= cfg.pDrop) {
          continue;
        }
        // dropped unit: remove its contribution from every candidate
        for (let c = 0; c < candidates.length; c++) {
          const weightKey = `unit-weight/${word}/${candidates[c].word}/${app}/${unit}`;
          scores[c] -= UNIT_NOISE * (2 * unitDraw(cfg.seed, weightKey) - 1);
        }
      }
    }
  }

  // argmax with a zero floor; ties go to the lexicographically first word
  let bestWord: string | null = null;
  let bestScore = 0;
  for (let c = 0; c < candidates.length; c++) {
    if (scores[c] > bestScore || (scores[c] === bestScore && bestWord !== null && candidates[c].word < bestWord)) {
      bestWord = candidates[c].word;
      bestScore = scores[c];
    }
  }
  if (bestWord === null) {
    // nothing scored above the floor; the word is lost in this pass
    return [];
  }
  return lexicon.get(bestWord)!;
}
