/** Sentence splitting and word tokenization.
 *
 * Deliberately simple and fully deterministic: sentences end at ./!/? when
 * followed by whitespace and an uppercase letter, a quote, or end of text;
 * a short abbreviation list suppresses false splits.  Word tokenization
 * separates punctuation and splits the n't / 's / 're family of clitics.
 */

const ABBREVIATIONS = new Set([
  "mr", "mrs", "ms", "dr", "prof", "st", "etc", "e.g", "i.e", "vs", "inc",
  "ltd", "co", "no", "fig", "u.s", "u.k",
]);

export function splitSentences(text: string): string[] {
  const cleaned = text.replace(/\s+/g, " ").trim();
  if (!cleaned) return [];
  const out: string[] = [];
  let start = 0;
  for (let i = 0; i < cleaned.length; i++) {
    const ch = cleaned[i];
    if (ch !== "." && ch !== "!" && ch !== "?") continue;
    const prev = cleaned.slice(start, i).trimEnd();
    const lastWord = prev.split(" ").pop()?.toLowerCase() ?? "";
    if (ch === "." && ABBREVIATIONS.has(lastWord.replace(/\.$/, ""))) continue;
    const rest = cleaned.slice(i + 1);
    const follows = rest.trimStart();
    const boundary =
      follows.length === 0 ||
      (rest.startsWith(" ") && /^["'A-Z(]/.test(follows));
    if (boundary) {
      out.push(cleaned.slice(start, i + 1).trim());
      start = i + 1;
    }
  }
  const tail = cleaned.slice(start).trim();
  if (tail) out.push(tail);
  return out;
}

const CLITICS = /^(.+?)(n't|'s|'re|'ve|'ll|'d|'m)$/i;

export function tokenizeWords(sentence: string): string[] {
  const rough = sentence
    .replace(/([.,!?;:()"“”‘’[\]])/g, " $1 ")
    .replace(/\s+/g, " ")
    .trim();
  if (!rough) return [];
  const tokens: string[] = [];
  for (const piece of rough.split(" ")) {
    const m = piece.match(CLITICS);
    if (m && m[1].length > 0) {
      tokens.push(m[1], m[2]);
    } else {
      tokens.push(piece);
    }
  }
  return tokens;
}
