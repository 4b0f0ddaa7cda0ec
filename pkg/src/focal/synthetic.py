"""Programmatic construction of parsed examples.

Used by the test suite and by the overfit smoke benchmark: sentences are
built directly in the interchange schema with hand-assigned POS tags and
dependency arcs, so no external parser is involved.
"""

from __future__ import annotations

import numpy as np

from .corpus import CorefMention, Example, ParsedSentence, Token, ROOT_HEAD

_NAMES = (
    "Ann", "Bill", "Carol", "David", "Erin", "Frank", "Grace", "Henry",
    "Iris", "Jack", "Karen", "Liam", "Mona", "Nate", "Olga", "Paul",
)
_VERBS = ("likes", "sells", "paints", "visits", "teaches", "builds", "grows", "repairs")
_OBJECTS = (
    "apples", "boats", "chairs", "drums", "engines", "fences",
    "gardens", "houses", "kites", "lamps", "maps", "ovens",
)


def make_sentence(sent_id, rows, coref=()):
    """Build a :class:`ParsedSentence` from ``(text, pos, head, deprel)`` rows."""
    tokens = tuple(
        Token(index=i, text=text, pos=pos, head=head, deprel=deprel)
        for i, (text, pos, head, deprel) in enumerate(rows)
    )
    mentions = tuple(CorefMention(cluster_id=c, span=(s, e)) for c, s, e in coref)
    return ParsedSentence(sent_id=sent_id, tokens=tokens, coref_mentions=mentions)


def svo_sentence(sent_id, subject, verb, obj, coref=()):
    """``subject verb obj .`` with a canonical SVO parse."""
    return make_sentence(
        sent_id,
        [
            (subject, "PROPN", 1, "nsubj"),
            (verb, "VERB", ROOT_HEAD, "root"),
            (obj, "NOUN", 1, "obj"),
            (".", "PUNCT", 1, "punct"),
        ],
        coref=coref,
    )


def question_sentence(sent_id, verb="repeats"):
    """``Which option <verb> the passage ?``"""
    return make_sentence(
        sent_id,
        [
            ("Which", "DET", 1, "det"),
            ("option", "NOUN", 2, "nsubj"),
            (verb, "VERB", ROOT_HEAD, "root"),
            ("the", "DET", 4, "det"),
            ("passage", "NOUN", 2, "obj"),
            ("?", "PUNCT", 2, "punct"),
        ],
    )


def make_overfit_dataset(n=32, seed=0):
    """Synthetic 4-way multiple choice where the correct option restates a
    context fact verbatim and the distractors recombine context words into
    facts the context never stated."""
    rng = np.random.default_rng(seed)
    examples = []
    for k in range(n):
        s1, s2 = rng.choice(len(_NAMES), size=2, replace=False)
        v1, v2 = rng.choice(len(_VERBS), size=2, replace=False)
        o1, o2 = rng.choice(len(_OBJECTS), size=2, replace=False)
        facts = [
            (_NAMES[s1], _VERBS[v1], _OBJECTS[o1]),
            (_NAMES[s2], _VERBS[v2], _OBJECTS[o2]),
        ]
        sid = 0
        context = []
        for subj, verb, obj in facts:
            context.append(svo_sentence(sid, subj, verb, obj))
            sid += 1
        if k % 2 == 0:
            # Pronoun chain restating the first fact.
            context.append(
                svo_sentence(sid, "He", facts[0][1], facts[0][2], coref=[(0, 0, 1)])
            )
            context[0] = svo_sentence(0, facts[0][0], facts[0][1], facts[0][2], coref=[(0, 0, 1)])
            sid += 1
        question = question_sentence(sid)
        sid += 1

        correct = facts[0]
        # Each distractor recombines two in-context elements with one element
        # this context never mentions, so no distractor states a context fact.
        s_out = _NAMES[rng.choice([i for i in range(len(_NAMES)) if i not in (s1, s2)])]
        v_out = _VERBS[rng.choice([i for i in range(len(_VERBS)) if i not in (v1, v2)])]
        o_out = _OBJECTS[rng.choice([i for i in range(len(_OBJECTS)) if i not in (o1, o2)])]
        distractors = [
            (_NAMES[s1], v_out, _OBJECTS[o1]),
            (s_out, _VERBS[v1], _OBJECTS[o2]),
            (_NAMES[s2], _VERBS[v2], o_out),
        ]
        label = int(rng.integers(0, 4))
        option_facts = distractors[:label] + [correct] + distractors[label:]
        options = []
        for subj, verb, obj in option_facts[:4]:
            options.append((svo_sentence(sid, subj, verb, obj),))
            sid += 1
        examples.append(
            Example(
                example_id=f"syn-{k:03d}",
                context_sentences=tuple(context),
                question=question,
                options=tuple(options),
                label=label,
            )
        )
    return examples


def make_tiny_example(negative_question=False):
    """A deterministic 2-fact, 1-coref example for numeric fixtures."""
    context = (
        svo_sentence(0, "Ann", "likes", "apples", coref=[(0, 0, 1)]),
        svo_sentence(1, "She", "sells", "boats", coref=[(0, 0, 1)]),
    )
    question = question_sentence(2, verb="weakens" if negative_question else "repeats")
    options = tuple(
        (svo_sentence(3 + i, subj, verb, obj),)
        for i, (subj, verb, obj) in enumerate(
            [
                ("Ann", "likes", "apples"),
                ("Ann", "sells", "apples"),
                ("Bill", "likes", "boats"),
                ("Bill", "sells", "apples"),
            ]
        )
    )
    return Example(
        example_id="tiny-0",
        context_sentences=context,
        question=question,
        options=options,
        label=0,
    )
