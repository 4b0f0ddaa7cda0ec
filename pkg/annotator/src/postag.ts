/** Coarse POS tagging via closed-class lexicon, suffix heuristics, and a
 * couple of contextual repairs.  Tags follow the UPOS-style set the parser
 * and the downstream consumer expect: NOUN PROPN PRON VERB AUX DET ADP ADJ
 * ADV PART NUM CCONJ SCONJ PUNCT.
 */

const DET = new Set(["the", "a", "an", "this", "that", "these", "those", "which", "what", "whose", "each", "every", "some", "any", "no", "all", "both", "either", "neither", "few", "little", "many", "much", "several", "most"]);
const ADP = new Set(["of", "in", "on", "at", "by", "with", "from", "for", "about", "over", "under", "into", "onto", "through", "during", "against", "between", "among", "without", "within", "after", "before", "above", "below", "near", "across", "behind", "beyond", "despite", "except", "toward", "towards", "upon", "via", "per", "to"]);
const PRON = new Set(["i", "you", "he", "she", "it", "we", "they", "him", "her", "them", "me", "us", "his", "hers", "its", "their", "theirs", "our", "ours", "your", "yours", "mine", "none", "everyone", "someone", "anyone", "nobody", "nothing", "something", "anything", "everything", "who", "whom", "one", "others"]);
const AUX = new Set(["is", "are", "was", "were", "be", "been", "being", "am", "do", "does", "did", "have", "has", "had", "will", "would", "can", "could", "shall", "should", "may", "might", "must"]);
const CCONJ = new Set(["and", "or", "but", "nor", "yet", "so"]);
const SCONJ = new Set(["because", "if", "while", "although", "though", "since", "unless", "whereas", "whether", "when", "where", "why", "how", "as"]);
const PART = new Set(["not", "n't", "'s"]);
const ADV = new Set(["very", "also", "only", "just", "most", "more", "least", "less", "too", "quite", "rather", "always", "never", "often", "sometimes", "usually", "here", "there", "now", "then", "however", "therefore", "thus", "instead", "moreover", "furthermore", "indeed", "perhaps", "maybe", "possibly", "certainly", "probably", "likely", "directly", "strongly", "well"]);

const VERBS = new Set([
  "like", "likes", "liked", "make", "makes", "made", "take", "takes", "took",
  "taken", "get", "gets", "got", "go", "goes", "went", "gone", "see", "sees",
  "saw", "seen", "say", "says", "said", "know", "knows", "knew", "known",
  "think", "thinks", "thought", "want", "wants", "wanted", "use", "uses",
  "used", "find", "finds", "found", "give", "gives", "gave", "given", "tell",
  "tells", "told", "work", "works", "worked", "play", "plays", "played",
  "help", "helps", "helped", "show", "shows", "showed", "shown", "believe",
  "believes", "believed", "argue", "argues", "argued", "claim", "claims",
  "claimed", "suggest", "suggests", "suggested", "conclude", "concludes",
  "concluded", "support", "supports", "supported", "weaken", "weakens",
  "weakened", "strengthen", "strengthens", "strengthened", "meet", "meets",
  "met", "smile", "smiles", "smiled", "buy", "buys", "bought", "sell",
  "sells", "sold", "eat", "eats", "ate", "eaten", "read", "reads", "treat",
  "treats", "treated", "kick", "kicks", "kicked", "travel", "travels",
  "traveled", "publish", "publishes", "published", "reject", "rejects",
  "rejected", "win", "wins", "won", "improve", "improves", "improved",
  "increase", "increases", "increased", "reduce", "reduces", "reduced",
  "cause", "causes", "caused", "lead", "leads", "led", "follow", "follows",
  "followed", "state", "states", "stated", "assume", "assumes", "assumed",
  "imply", "implies", "implied", "require", "requires", "required", "mean",
  "means", "meant", "prove", "proves", "proved", "proven", "fail", "fails",
  "failed", "run", "runs", "ran", "move", "moves", "moved", "live", "lives",
  "lived", "build", "builds", "built", "write", "writes", "wrote", "written",
  "teach", "teaches", "taught", "study", "studies", "studied", "visit",
  "visits", "visited", "own", "owns", "owned", "keep", "keeps", "kept",
  "hold", "holds", "held", "pay", "pays", "paid", "grow", "grows", "grew",
  "grown", "rank", "ranks", "ranked", "repair", "repairs", "repaired",
  "paint", "paints", "painted",
]);

const PUNCT = /^[.,!?;:()"“”‘’[\]%-]+$/;
const NUMBER = /^\d+([.,]\d+)*$/;

function suffixTag(lower: string): string | null {
  if (lower.endsWith("ly")) return "ADV";
  if (/(tion|sion|ment|ness|ity|ance|ence|ship|hood)$/.test(lower)) return "NOUN";
  if (/(ous|ful|ive|able|ible|ical|less)$/.test(lower)) return "ADJ";
  return null;
}

export function tagSentence(tokens: string[]): string[] {
  const tags: string[] = [];
  let sawVerb = false;
  for (let i = 0; i < tokens.length; i++) {
    const text = tokens[i];
    const lower = text.toLowerCase();
    let tag: string;
    if (PUNCT.test(text)) tag = "PUNCT";
    else if (NUMBER.test(text)) tag = "NUM";
    else if (PART.has(lower)) tag = "PART";
    else if (AUX.has(lower)) tag = "AUX";
    else if (DET.has(lower)) tag = "DET";
    else if (PRON.has(lower)) tag = "PRON";
    else if (ADP.has(lower)) tag = "ADP";
    else if (CCONJ.has(lower)) tag = "CCONJ";
    else if (SCONJ.has(lower)) tag = "SCONJ";
    else if (ADV.has(lower)) tag = "ADV";
    else if (VERBS.has(lower)) tag = "VERB";
    else if (/^[A-Z]/.test(text)) tag = "PROPN";
    else {
      const bySuffix = suffixTag(lower);
      if (bySuffix) tag = bySuffix;
      else if (/(ing|ed)$/.test(lower)) tag = "VERB";
      else if (
        lower.endsWith("s") &&
        !sawVerb &&
        i > 0 &&
        ["PROPN", "PRON", "NOUN"].includes(tags[i - 1])
      ) {
        tag = "VERB";
      } else tag = "NOUN";
    }
    if (tag === "VERB") sawVerb = true;
    tags.push(tag);
  }
  // "to" before a verb is the infinitive particle, not a preposition.
  for (let i = 0; i + 1 < tokens.length; i++) {
    if (tokens[i].toLowerCase() === "to" && tags[i + 1] === "VERB") tags[i] = "PART";
  }
  return tags;
}
