/**
 * Deterministic keyed random draws.
 *
 * Every draw is a pure function of (seed, key): the key string is hashed
 * with FNV-1a and pushed through a splitmix64-style finalizer. Nothing is
 * stateful, so results never depend on evaluation order and repeated runs
 * with the same seed are byte-identical.
 */

const MASK = (1n << 64n) - 1n;
const GOLDEN = 0x9e3779b97f4a7c15n;

function mix64(z: bigint): bigint {
  z &= MASK;
  z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK;
  z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK;
  return (z ^ (z >> 31n)) & MASK;
}

function fnv1a64(text: string): bigint {
  let hash = 0xcbf29ce484222325n;
  for (const byte of Buffer.from(text, "utf8")) {
    hash ^= BigInt(byte);
    hash = (hash * 0x100000001b3n) & MASK;
  }
  return hash;
}

/** Uniform double in [0, 1) for the given seed and stream key. */
export function unitDraw(seed: number, key: string): number {
  const mixed = mix64(((BigInt(seed) & MASK) ^ fnv1a64(key)) + GOLDEN);
  // top 53 bits give an exactly representable double
  return Number(mixed >> 11n) / 2 ** 53;
}
