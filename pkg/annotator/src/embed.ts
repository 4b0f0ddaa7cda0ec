/** Frozen-vector export: every token of every example gets one vector in
 * the binary embedding format, addressed by (sent_id, token index). */

import { writeEmbeddings, PerExampleVectors } from "./femb.js";
import { MODELS } from "./hashlm.js";
import { ExampleJson, SentenceJson } from "./types.js";

function* allSentences(example: ExampleJson): Generator<SentenceJson> {
  yield* example.context;
  yield example.question;
  for (const option of example.options) yield* option;
}

export function exportEmbeddings(
  examples: ExampleJson[],
  model: string,
  d: number,
): Buffer {
  const vectorize = MODELS[model];
  if (!vectorize) throw new Error(`unknown embedding model ${model}`);
  if (!Number.isInteger(d) || d <= 0) throw new Error(`bad embedding dimension ${d}`);
  const perExample: PerExampleVectors = new Map();
  for (const example of examples) {
    const records = [];
    for (const sent of allSentences(example)) {
      for (const tok of sent.tokens) {
        records.push({
          sentId: sent.sent_id,
          tokenIndex: tok.i,
          values: vectorize(tok.text, d),
        });
      }
    }
    perExample.set(example.id, records);
  }
  return writeEmbeddings(d, perExample);
}
