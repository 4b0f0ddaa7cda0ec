/** Rule-based pronoun coreference, document-scoped.
 *
 * Third-person pronouns link to the most recent compatible candidate:
 * he/she family to the nearest proper noun, it/its to the nearest singular
 * common noun, they/them/their to the nearest plural noun.  A pronoun also
 * becomes a candidate itself, so chains resolve to one cluster.  Clusters
 * are emitted as (cluster, span) records on their sentences; ids are
 * shared across the sentences of one example.
 */

import { SentenceJson } from "./types.js";

const PERSON_PRONOUNS = new Set(["he", "she", "him", "her", "his", "hers"]);
const THING_PRONOUNS = new Set(["it", "its"]);
const PLURAL_PRONOUNS = new Set(["they", "them", "their", "theirs"]);

type Kind = "person" | "thing" | "plural";

interface Candidate {
  sentIndex: number;
  start: number;
  end: number;
  kind: Kind;
  cluster: number; // -1 until a pronoun links to it
}

function pronounKind(lower: string): Kind | null {
  if (PERSON_PRONOUNS.has(lower)) return "person";
  if (THING_PRONOUNS.has(lower)) return "thing";
  if (PLURAL_PRONOUNS.has(lower)) return "plural";
  return null;
}

function isPluralNoun(text: string): boolean {
  return text.length > 2 && text.toLowerCase().endsWith("s");
}

/** Mutates the sentences in place, filling their `coref` arrays; returns
 * the number of clusters created. */
export function resolveCoref(sentences: SentenceJson[]): number {
  const candidates: Candidate[] = [];
  const linked: Candidate[] = [];
  let nextCluster = 0;

  sentences.forEach((sent, sentIndex) => {
    for (const tok of sent.tokens) {
      const lower = tok.text.toLowerCase();
      const kind = tok.pos === "PRON" ? pronounKind(lower) : null;
      if (kind) {
        for (let i = candidates.length - 1; i >= 0; i--) {
          const ante = candidates[i];
          if (ante.kind !== kind) continue;
          if (ante.cluster < 0) {
            ante.cluster = nextCluster++;
            linked.push(ante);
          }
          const mention: Candidate = {
            sentIndex,
            start: tok.i,
            end: tok.i + 1,
            kind,
            cluster: ante.cluster,
          };
          linked.push(mention);
          candidates.push(mention);
          break;
        }
      } else if (tok.pos === "PROPN") {
        candidates.push({ sentIndex, start: tok.i, end: tok.i + 1, kind: "person", cluster: -1 });
      } else if (tok.pos === "NOUN") {
        candidates.push({
          sentIndex,
          start: tok.i,
          end: tok.i + 1,
          kind: isPluralNoun(tok.text) ? "plural" : "thing",
          cluster: -1,
        });
      }
    }
  });

  const seen = new Set<string>();
  for (const m of linked) {
    const key = `${m.sentIndex}:${m.start}:${m.cluster}`;
    if (seen.has(key)) continue;
    seen.add(key);
    const sent = sentences[m.sentIndex];
    sent.coref = sent.coref ?? [];
    sent.coref.push({ cluster: m.cluster, span: [m.start, m.end] });
  }
  for (const sent of sentences) {
    sent.coref?.sort((a, b) => a.span[0] - b.span[0] || a.cluster - b.cluster);
  }
  return nextCluster;
}
