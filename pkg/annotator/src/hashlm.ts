/** Deterministic frozen token vectors ("hashlm").
 *
 * Stands in for a real frozen language model at desk scale: every subword
 * maps to a pseudo-random unit-scale vector seeded by its hash, and a
 * token's vector is the mean over its subwords.  Tokens longer than six
 * characters split into two halves, mirroring subword segmentation; the
 * mean rule is what a real subword-to-word alignment would use.
 */

export const DEFAULT_DIM = 1024;

function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function subwordsOf(token: string): string[] {
  const lower = token.toLowerCase();
  if (lower.length <= 6) return [lower];
  const mid = Math.ceil(lower.length / 2);
  return [lower.slice(0, mid), "##" + lower.slice(mid)];
}

export function subwordVector(subword: string, d: number): Float32Array {
  const rand = mulberry32(fnv1a(subword));
  const scale = 1.0 / Math.sqrt(d);
  const out = new Float32Array(d);
  for (let i = 0; i < d; i++) {
    out[i] = Math.fround((rand() * 2 - 1) * scale);
  }
  return out;
}

export function tokenVector(token: string, d: number): Float32Array {
  const parts = subwordsOf(token);
  const out = new Float32Array(d);
  for (const part of parts) {
    const vec = subwordVector(part, d);
    for (let i = 0; i < d; i++) out[i] += vec[i];
  }
  for (let i = 0; i < d; i++) out[i] = Math.fround(out[i] / parts.length);
  return out;
}

export const MODELS: Record<string, (token: string, d: number) => Float32Array> = {
  hashlm: tokenVector,
};
