"""Entity-Predicate-Entity fact extraction and question polarity.

Triplets are read off dependency parses with a small set of arc rules:
subjects via nsubj arcs, objects via obj/dobj/attr arcs or prep->pobj
chains, passives flipped so the by-agent becomes the subject, copulas used
as predicates, and conjoined arguments expanded one triplet per conjunct.

Question polarity combines a bundled word-polarity lexicon with a negative
cue-word check against POS-derived noun/verb chunks.  Negative questions are
marked by prefixing a ``<neg>`` token (``<pos>`` otherwise).
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import ROOT_HEAD, ParsedSentence

POSITIVE_MARKER = "<pos>"
NEGATIVE_MARKER = "<neg>"

SUBJECT_RELS = {"nsubj"}
PASSIVE_SUBJECT_RELS = {"nsubjpass", "nsubj:pass"}
OBJECT_RELS = {"obj", "dobj", "attr"}
PREP_RELS = {"prep"}
PREP_OBJECT_RELS = {"pobj"}
AGENT_RELS = {"agent"}
CONJ_RELS = {"conj"}
PARTICLE_RELS = {"prt", "compound:prt"}
COPULA_RELS = {"cop"}
SPAN_MODIFIER_RELS = {"compound", "nummod"}

NOUNISH_POS = {"NOUN", "PROPN", "PRON"}

# Single-token negation cues plus the one two-token cue ("none of").
NEGATION_CUES = {"not", "n't", "unable", "no", "few", "little", "neither"}
NEGATION_CUE_BIGRAM = ("none", "of")

# word -> polarity in {-1, +1}; words absent from the table score 0.  Lookup
# is by lowercased token text, so common inflections are listed explicitly.
POLARITY_LEXICON = {w: -1 for w in (
    "weaken weakens weakened weakening undermine undermines undermined "
    "flaw flaws flawed fail fails failed contradict contradicts contradicted "
    "refute refutes refuted reject rejects rejected deny denies denied "
    "doubt doubts doubted criticize criticizes criticized attack attacks "
    "damage damages damaged harm harms harmed hurt hurts destroy destroys "
    "destroyed disprove disproves disproved disagree disagrees disagreed "
    "wrong false invalid unsupported impossible incorrect mistaken error "
    "errors bad worse worst least"
).split()}
POLARITY_LEXICON.update({w: 1 for w in (
    "strengthen strengthens strengthened strengthening support supports "
    "supported supporting confirm confirms confirmed prove proves proved "
    "proven justify justifies justified bolster bolsters bolstered affirm "
    "affirms affirmed agree agrees agreed help helps helped improve improves "
    "improved valid correct true good better best strongest consistent"
).split()})


class ExtractionError(ValueError):
    """The sentence parse is malformed (e.g. no unique root)."""


@dataclass(frozen=True)
class Span:
    sent_id: int
    start: int
    end: int  # exclusive

    def overlaps(self, other):
        return (
            self.sent_id == other.sent_id
            and self.start < other.end
            and other.start < self.end
        )


@dataclass(frozen=True)
class Triplet:
    subject: Span
    predicate: Span
    object: Span
    source: str  # "context", "question", or "option:N"

    def spans(self):
        return (self.subject, self.predicate, self.object)


@dataclass(frozen=True)
class QuestionPolarity:
    is_negative: bool
    trigger: str | None = None  # first matched cue or negative lexicon word

    def marker(self):
        return NEGATIVE_MARKER if self.is_negative else POSITIVE_MARKER


def _children(sentence, head_index):
    return [t for t in sentence.tokens if t.head == head_index]


def _with_conjuncts(sentence, token):
    """The token plus its conj chain, in index order."""
    out = [token]
    frontier = [token]
    while frontier:
        head = frontier.pop()
        for child in _children(sentence, head.index):
            if child.deprel in CONJ_RELS:
                out.append(child)
                frontier.append(child)
    return sorted(out, key=lambda t: t.index)


def _entity_span(sentence, token):
    """Head token plus its contiguous left-adjacent compound/nummod children."""
    start = token.index
    while start > 0:
        prev = sentence.tokens[start - 1]
        if prev.head == token.index and prev.deprel in SPAN_MODIFIER_RELS:
            start -= 1
        else:
            break
    return Span(sentence.sent_id, start, token.index + 1)


def _predicate_span(sentence, verb):
    end = verb.index + 1
    if end < len(sentence.tokens):
        nxt = sentence.tokens[end]
        if nxt.head == verb.index and nxt.deprel in PARTICLE_RELS:
            end += 1
    return Span(sentence.sent_id, verb.index, end)


def _prep_objects(sentence, head):
    """Nouns reached through prep -> pobj chains under ``head``."""
    out = []
    for child in _children(sentence, head.index):
        if child.deprel in PREP_RELS:
            for grand in _children(sentence, child.index):
                if grand.deprel in PREP_OBJECT_RELS:
                    out.append(grand)
    return out


def _agent_of(sentence, verb):
    """The noun of a passive by-phrase, if present."""
    for child in _children(sentence, verb.index):
        if child.deprel in AGENT_RELS or (
            child.deprel in PREP_RELS and child.text.lower() == "by"
        ):
            for grand in _children(sentence, child.index):
                if grand.deprel in PREP_OBJECT_RELS:
                    return grand
    return None


def extract_triplets(sentence, source="context"):
    """Extract subject-predicate-object triplets from one parsed sentence.

    Verbs lacking a subject or an object yield nothing; a parse without a
    unique root raises :class:`ExtractionError`.
    """
    if len(sentence.tokens) == 0:
        return []
    roots = [t for t in sentence.tokens if t.head == ROOT_HEAD]
    if len(roots) != 1:
        raise ExtractionError(
            f"sentence {sentence.sent_id}: expected one root, found {len(roots)}"
        )

    triplets = []
    for token in sentence.tokens:
        children = _children(sentence, token.index)
        rels = {c.deprel for c in children}
        is_verb = token.pos == "VERB"
        is_copular_head = token.pos == "AUX" and rels & OBJECT_RELS

        if is_verb or is_copular_head:
            subjects, objects = [], []
            passive_patients = [c for c in children if c.deprel in PASSIVE_SUBJECT_RELS]
            if passive_patients:
                agent = _agent_of(sentence, token)
                if agent is not None:
                    subjects = _with_conjuncts(sentence, agent)
                    for patient in passive_patients:
                        objects.extend(_with_conjuncts(sentence, patient))
            else:
                for child in children:
                    if child.deprel in SUBJECT_RELS:
                        subjects.extend(_with_conjuncts(sentence, child))
                    elif child.deprel in OBJECT_RELS:
                        objects.extend(_with_conjuncts(sentence, child))
                for pobj in _prep_objects(sentence, token):
                    objects.extend(_with_conjuncts(sentence, pobj))
            pred = _predicate_span(sentence, token)
            _emit(sentence, subjects, pred, objects, source, triplets)
        elif token.pos in NOUNISH_POS | {"ADJ", "NUM"}:
            # Copula attached below a non-verb head: "A is B" with B as root.
            copulas = [c for c in children if c.deprel in COPULA_RELS]
            subjects = []
            for child in children:
                if child.deprel in SUBJECT_RELS:
                    subjects.extend(_with_conjuncts(sentence, child))
            if copulas and subjects:
                pred = Span(sentence.sent_id, copulas[0].index, copulas[0].index + 1)
                _emit(sentence, subjects, pred, _with_conjuncts(sentence, token), source, triplets)
    return triplets


def _emit(sentence, subjects, predicate_span, objects, source, out):
    for subj in sorted(subjects, key=lambda t: t.index):
        for obj in sorted(objects, key=lambda t: t.index):
            trip = Triplet(
                subject=_entity_span(sentence, subj),
                predicate=predicate_span,
                object=_entity_span(sentence, obj),
                source=source,
            )
            spans = trip.spans()
            if any(a.overlaps(b) for i, a in enumerate(spans) for b in spans[i + 1 :]):
                continue
            out.append(trip)


# ---------------------------------------------------------------------------
# question polarity


def _chunks(sentence):
    """Noun chunks (DET? ADJ* NOUN+) and verb chunks (AUX* VERB+) as spans."""
    spans = []
    tags = [t.pos for t in sentence.tokens]
    n = len(tags)
    i = 0
    while i < n:
        start = i
        j = i
        if tags[j] == "DET":
            j += 1
        while j < n and tags[j] == "ADJ":
            j += 1
        k = j
        while k < n and tags[k] in ("NOUN", "PROPN"):
            k += 1
        if k > j:  # at least one noun
            spans.append((start, k))
            i = k
            continue
        j = i
        while j < n and tags[j] == "AUX":
            j += 1
        k = j
        while k < n and tags[k] == "VERB":
            k += 1
        if k > j:
            spans.append((i, k))
            i = k
            continue
        i += 1
    return spans


def _cue_positions(sentence):
    """(cue string, start, end) occurrences, in token order."""
    words = [t.text.lower() for t in sentence.tokens]
    found = []
    for i, w in enumerate(words):
        if (
            w == NEGATION_CUE_BIGRAM[0]
            and i + 1 < len(words)
            and words[i + 1] == NEGATION_CUE_BIGRAM[1]
        ):
            found.append((" ".join(NEGATION_CUE_BIGRAM), i, i + 2))
        elif w in NEGATION_CUES:
            found.append((w, i, i + 1))
    return found


def detect_negation(question: ParsedSentence) -> QuestionPolarity:
    """Lexicon score first, then cue words near noun/verb chunks."""
    words = [t.text.lower() for t in question.tokens]
    score = sum(POLARITY_LEXICON.get(w, 0) for w in words)
    if score < 0:
        trigger = next(w for w in words if POLARITY_LEXICON.get(w, 0) < 0)
        return QuestionPolarity(is_negative=True, trigger=trigger)
    chunks = _chunks(question)
    for cue, cs, ce in _cue_positions(question):
        for s, e in chunks:
            inside = cs < e and s < ce
            immediately_before = ce == s
            if inside or immediately_before:
                return QuestionPolarity(is_negative=True, trigger=cue)
    return QuestionPolarity(is_negative=False, trigger=None)


def reformulate_question(question: ParsedSentence, polarity: QuestionPolarity):
    """Question token texts prefixed with the polarity marker token."""
    return (polarity.marker(),) + tuple(t.text for t in question.tokens)
