/** Raw-example annotation: tokenize, tag, parse, resolve coreference, and
 * assemble interchange-schema examples.  A sentence whose parse violates
 * the schema invariants is emitted with a flat parse and a warning record.
 */

import { ParseFailure, flatParse, parseSentence } from "./depparse.js";
import { resolveCoref } from "./coref.js";
import { tagSentence } from "./postag.js";
import { splitSentences, tokenizeWords } from "./tokenize.js";
import {
  ExampleJson,
  RawExample,
  SentenceJson,
  Warning,
  normalizeRawExample,
} from "./types.js";

export const TOOL_VERSION = "focal-annotate 0.1.0 (rule tagger/parser/coref v1)";

function annotateSentence(
  text: string,
  sentId: number,
  exampleId: string,
  warnings: Warning[],
): SentenceJson {
  const tokens = tokenizeWords(text);
  const tags = tagSentence(tokens);
  if (tokens.length === 0) {
    return { sent_id: sentId, tokens: [] };
  }
  try {
    return { sent_id: sentId, tokens: parseSentence(tokens, tags) };
  } catch (err) {
    if (!(err instanceof ParseFailure)) throw err;
    warnings.push({
      example_id: exampleId,
      sent_id: sentId,
      message: `flat parse fallback: ${err.message}`,
    });
    return { sent_id: sentId, tokens: flatParse(tokens, tags) };
  }
}

export function annotateExample(raw: RawExample, warnings: Warning[]): ExampleJson {
  let sentId = 0;
  const take = (text: string): SentenceJson[] => {
    const pieces = splitSentences(text);
    const sents = pieces.map((p) => annotateSentence(p, sentId++, raw.id, warnings));
    return sents.filter((s) => s.tokens.length > 0);
  };
  const context = take(raw.context);
  // The schema carries the question as a single parsed sentence.
  const questionTokens = tokenizeWords(raw.question);
  const question = annotateSentence(raw.question, sentId++, raw.id, warnings);
  if (questionTokens.length === 0) {
    throw new Error(`example ${raw.id}: empty question`);
  }
  const options = raw.options.map((text) => {
    const sents = take(text);
    if (sents.length === 0) {
      // Options must be non-empty sentence lists; synthesize a stub token.
      const stub: SentenceJson = {
        sent_id: sentId++,
        tokens: [{ i: 0, text: "-", pos: "PUNCT", head: -1, deprel: "root" }],
      };
      warnings.push({
        example_id: raw.id,
        sent_id: stub.sent_id,
        message: "empty option text; emitted a placeholder token",
      });
      return [stub];
    }
    return sents;
  });

  const allSentences = [...context, question, ...options.flat()];
  resolveCoref(allSentences);
  return {
    id: raw.id,
    context,
    question,
    options,
    label: raw.label ?? null,
  };
}

export interface AnnotateResult {
  examples: ExampleJson[];
  warnings: Warning[];
  meta: { tool: string; examples: number; warnings: number };
}

export function annotateCorpus(rawRecords: unknown[]): AnnotateResult {
  const warnings: Warning[] = [];
  const examples = rawRecords.map((obj, idx) =>
    annotateExample(normalizeRawExample(obj as Record<string, unknown>, idx), warnings),
  );
  return {
    examples,
    warnings,
    meta: { tool: TOOL_VERSION, examples: examples.length, warnings: warnings.length },
  };
}
