/** Shared shapes: raw input records and the parsed interchange schema. */

export interface RawExample {
  id: string;
  context: string;
  question: string;
  options: [string, string, string, string];
  label: number | string | null;
}

export interface TokenJson {
  i: number;
  text: string;
  pos: string;
  head: number; // -1 marks the root
  deprel: string;
}

export interface MentionJson {
  cluster: number;
  span: [number, number]; // end exclusive
}

export interface SentenceJson {
  sent_id: number;
  tokens: TokenJson[];
  coref?: MentionJson[];
}

export interface ExampleJson {
  id: string;
  context: SentenceJson[];
  question: SentenceJson;
  options: SentenceJson[][];
  label: number | string | null;
}

export interface Warning {
  example_id: string;
  sent_id: number;
  message: string;
}

export const ROOT_HEAD = -1;

/** Accepts ReClor-style keys (id_string/answers) as well as ours. */
export function normalizeRawExample(obj: Record<string, unknown>, index: number): RawExample {
  const id = String(obj.id ?? obj.id_string ?? `raw-${index}`);
  const options = (obj.options ?? obj.answers) as unknown;
  if (!Array.isArray(options) || options.length !== 4) {
    throw new Error(`example ${id}: expected exactly 4 options/answers`);
  }
  const context = obj.context;
  const question = obj.question;
  if (typeof context !== "string" || typeof question !== "string") {
    throw new Error(`example ${id}: context and question must be strings`);
  }
  const label = obj.label === undefined ? null : (obj.label as number | string | null);
  return {
    id,
    context,
    question,
    options: options.map(String) as RawExample["options"],
    label,
  };
}
