/** Heuristic dependency parsing for simple declarative/interrogative
 * sentences.
 *
 * Strategy: group tokens into noun blocks (DET? ADJ* (NOUN|PROPN)+ or a
 * single pronoun), pick the main predicate, attach the nearest preceding
 * block head as subject and the following material as objects and
 * prepositional phrases.  A be-auxiliary immediately before a participle
 * makes the clause passive (nsubjpass/auxpass, with a by-agent when
 * present).  Anything that cannot be attached confidently hangs off the
 * root as "dep".  If the result violates the single-root/dense/no-self
 * invariants, the caller falls back to a flat parse.
 */

import { ROOT_HEAD, TokenJson } from "./types.js";

interface NounBlock {
  start: number;
  end: number; // exclusive
  head: number;
}

const BE_FORMS = new Set(["is", "are", "was", "were", "be", "been", "being", "am"]);
const IRREGULAR_PARTICIPLES = new Set([
  "done", "made", "taken", "given", "seen", "known", "written", "sold",
  "told", "found", "built", "sent", "kept", "left", "lost", "won", "paid",
  "bought", "caught", "taught", "brought", "chosen", "broken", "spoken",
  "driven", "eaten", "fallen", "drawn", "grown", "thrown", "shown", "worn",
  "born", "torn", "held", "led", "met",
]);

function isNominal(tag: string): boolean {
  return tag === "NOUN" || tag === "PROPN";
}

function nounBlocks(tags: string[]): NounBlock[] {
  const blocks: NounBlock[] = [];
  let i = 0;
  while (i < tags.length) {
    if (tags[i] === "PRON") {
      blocks.push({ start: i, end: i + 1, head: i });
      i += 1;
      continue;
    }
    let j = i;
    if (tags[j] === "DET") j += 1;
    while (j < tags.length && tags[j] === "ADJ") j += 1;
    let k = j;
    while (k < tags.length && isNominal(tags[k])) k += 1;
    if (k > j) {
      blocks.push({ start: i, end: k, head: k - 1 });
      i = k;
    } else {
      i += 1;
    }
  }
  return blocks;
}

function looksLikeParticiple(word: string): boolean {
  const lower = word.toLowerCase();
  return lower.endsWith("ed") || IRREGULAR_PARTICIPLES.has(lower);
}

export class ParseFailure extends Error {}

/** Parse one tagged sentence into head/deprel arrays. */
export function parseSentence(tokens: string[], tags: string[]): TokenJson[] {
  const n = tokens.length;
  const head = new Array<number>(n).fill(-2);
  const rel = new Array<string>(n).fill("");
  const blocks = nounBlocks(tags);

  const attach = (child: number, parent: number, deprel: string) => {
    if (child === parent) throw new ParseFailure(`token ${child} would head itself`);
    if (head[child] === -2) {
      head[child] = parent;
      rel[child] = deprel;
    }
  };

  // Internal structure of each noun block.
  for (const b of blocks) {
    for (let i = b.start; i < b.end; i++) {
      if (i === b.head) continue;
      if (tags[i] === "DET") attach(i, b.head, "det");
      else if (tags[i] === "ADJ") attach(i, b.head, "amod");
      else attach(i, b.head, "compound");
    }
  }

  // Conjoined blocks: block CCONJ block -> cc/conj onto the first head.
  const blockAt = (pos: number) => blocks.find((b) => b.start === pos);
  for (let bi = 0; bi + 1 < blocks.length; bi++) {
    const left = blocks[bi];
    if (left.end < n && tags[left.end] === "CCONJ") {
      const right = blockAt(left.end + 1);
      if (right) {
        attach(left.end, right.head, "cc");
        attach(right.head, left.head, "conj");
      }
    }
  }

  // Main predicate: first VERB; else a copular AUX; else nominal root.
  let root = tokens.findIndex((_, i) => tags[i] === "VERB");
  let copular = false;
  if (root < 0) {
    root = tags.findIndex((t) => t === "AUX");
    copular = root >= 0;
  }
  if (root < 0) {
    const firstBlock = blocks[0];
    root = firstBlock ? firstBlock.head : 0;
  }
  head[root] = ROOT_HEAD;
  rel[root] = "root";

  // Passive: be-form immediately before a participle root.
  const passive =
    !copular &&
    root > 0 &&
    tags[root - 1] === "AUX" &&
    BE_FORMS.has(tokens[root - 1].toLowerCase()) &&
    looksLikeParticiple(tokens[root]);

  // Subject: the closest unconjoined block head before the predicate.
  const subjectBlocks = blocks.filter((b) => b.head < root && head[b.head] === -2);
  if (subjectBlocks.length > 0) {
    const subj = subjectBlocks[subjectBlocks.length - 1];
    attach(subj.head, root, passive ? "nsubjpass" : "nsubj");
  }

  // Post-predicate material: objects and prepositional phrases.
  let pendingPrep = -1;
  for (let i = root + 1; i < n; i++) {
    if (head[i] !== -2) continue;
    const tag = tags[i];
    if (tag === "ADP") {
      const isAgent = passive && tokens[i].toLowerCase() === "by";
      attach(i, root, isAgent ? "agent" : "prep");
      pendingPrep = i;
    } else if (isNominal(tag) || tag === "PRON") {
      const b = blocks.find((blk) => blk.head === i);
      const target = b ? b.head : i;
      if (pendingPrep >= 0) {
        attach(target, pendingPrep, "pobj");
        pendingPrep = -1;
      } else if (copular) {
        attach(target, root, "attr");
      } else {
        attach(target, root, "obj");
      }
    } else if (tag === "NUM" || tag === "ADJ") {
      // Bare predicative complement ("is three", "is false").
      if (pendingPrep >= 0) {
        attach(i, pendingPrep, "pobj");
        pendingPrep = -1;
      } else if (copular) attach(i, root, "attr");
    }
  }

  // Remaining function words.
  for (let i = 0; i < n; i++) {
    if (head[i] !== -2) continue;
    const tag = tags[i];
    if (tag === "PUNCT") attach(i, root, "punct");
    else if (tag === "AUX") attach(i, root, passive && i === root - 1 ? "auxpass" : "aux");
    else if (tag === "ADV") attach(i, root, "advmod");
    else if (tag === "PART") attach(i, root, tokens[i].toLowerCase() === "to" ? "mark" : "neg");
    else if (tag === "SCONJ") attach(i, root, "mark");
    else if (tag === "VERB") attach(i, root, "dep");
    else attach(i, root, "dep");
  }

  const roots = head.filter((h) => h === ROOT_HEAD).length;
  if (roots !== 1) throw new ParseFailure(`expected one root, got ${roots}`);
  for (let i = 0; i < n; i++) {
    if (head[i] === i || head[i] < ROOT_HEAD || head[i] >= n) {
      throw new ParseFailure(`bad head ${head[i]} at token ${i}`);
    }
  }
  return tokens.map((text, i) => ({
    i,
    text,
    pos: tags[i],
    head: head[i],
    deprel: rel[i],
  }));
}

/** Everything hangs off the first token; used when parsing fails. */
export function flatParse(tokens: string[], tags: string[]): TokenJson[] {
  return tokens.map((text, i) => ({
    i,
    text,
    pos: tags[i],
    head: i === 0 ? ROOT_HEAD : 0,
    deprel: i === 0 ? "root" : "dep",
  }));
}
