"""Dataset model and loaders.

The interchange format is a single JSON file carrying text plus linguistic
annotations: every sentence arrives tokenized with coarse POS tags, a
dependency arc per token, and optional coreference mentions.  An example is
one context (a list of sentences), one question, exactly four candidate
options, and an optional gold label.

Loaded values are immutable (frozen dataclasses over tuples) and safe to
share across threads.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

ROOT_HEAD = -1

_LETTER_LABELS = {"A": 0, "B": 1, "C": 2, "D": 3}


class DatasetParseError(ValueError):
    """The file is not valid interchange JSON."""


class DatasetValidationError(ValueError):
    """Structurally valid JSON that violates a dataset invariant."""

    def __init__(self, example_id, rule, message):
        super().__init__(f"example {example_id!r}: {rule}: {message}")
        self.example_id = example_id
        self.rule = rule


@dataclass(frozen=True)
class Token:
    index: int
    text: str
    pos: str
    head: int  # index of the dependency head, ROOT_HEAD for the root
    deprel: str


@dataclass(frozen=True)
class CorefMention:
    cluster_id: int
    span: tuple[int, int]  # token span, end exclusive


@dataclass(frozen=True)
class ParsedSentence:
    sent_id: int
    tokens: tuple[Token, ...]
    coref_mentions: tuple[CorefMention, ...] = ()

    def __len__(self):
        return len(self.tokens)

    @property
    def words(self):
        return tuple(t.text for t in self.tokens)

    def surface(self, span):
        start, end = span
        return " ".join(t.text for t in self.tokens[start:end])


@dataclass(frozen=True)
class Example:
    example_id: str
    context_sentences: tuple[ParsedSentence, ...]
    question: ParsedSentence
    options: tuple[tuple[ParsedSentence, ...], ...]  # exactly 4
    label: int | None = None
    qtype: str | None = None

    def all_sentences(self):
        """Every sentence of the document: context, question, then options."""
        out = list(self.context_sentences) + [self.question]
        for option in self.options:
            out.extend(option)
        return out


def _parse_token(obj, sid, example_id):
    try:
        return Token(
            index=int(obj["i"]),
            text=str(obj["text"]),
            pos=str(obj["pos"]),
            head=int(obj["head"]),
            deprel=str(obj["deprel"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetValidationError(
            example_id, "token-fields", f"sentence {sid}: bad token record ({exc})"
        ) from exc


def _parse_sentence(obj, example_id, where):
    if not isinstance(obj, dict) or "sent_id" not in obj or "tokens" not in obj:
        raise DatasetValidationError(
            example_id, "sentence-shape", f"{where}: sentence must carry sent_id and tokens"
        )
    sid = int(obj["sent_id"])
    tokens = tuple(_parse_token(t, sid, example_id) for t in obj["tokens"])
    n = len(tokens)
    for pos_i, tok in enumerate(tokens):
        if tok.index != pos_i:
            raise DatasetValidationError(
                example_id, "dense-indices",
                f"{where}: sentence {sid} token at slot {pos_i} has index {tok.index}",
            )
        if tok.head == tok.index:
            raise DatasetValidationError(
                example_id, "self-head", f"{where}: sentence {sid} token {tok.index} heads itself"
            )
        if not (tok.head == ROOT_HEAD or 0 <= tok.head < n):
            raise DatasetValidationError(
                example_id, "head-range",
                f"{where}: sentence {sid} token {tok.index} head {tok.head} out of range",
            )
    roots = [t.index for t in tokens if t.head == ROOT_HEAD]
    if n > 0 and len(roots) != 1:
        raise DatasetValidationError(
            example_id, "single-root", f"{where}: sentence {sid} has {len(roots)} roots"
        )
    mentions = []
    for m in obj.get("coref", []):
        span = tuple(int(x) for x in m["span"])
        if len(span) != 2 or not (0 <= span[0] < span[1] <= n):
            raise DatasetValidationError(
                example_id, "mention-span",
                f"{where}: sentence {sid} mention span {list(span)} out of bounds",
            )
        mentions.append(CorefMention(cluster_id=int(m["cluster"]), span=span))
    return ParsedSentence(sent_id=sid, tokens=tokens, coref_mentions=tuple(mentions))


def _parse_label(raw, example_id):
    if raw is None:
        return None
    if isinstance(raw, str):
        letter = raw.strip().upper()
        if letter not in _LETTER_LABELS:
            raise DatasetValidationError(example_id, "label-range", f"label {raw!r} not in A..D")
        return _LETTER_LABELS[letter]
    label = int(raw)
    if not 0 <= label <= 3:
        raise DatasetValidationError(example_id, "label-range", f"label {label} not in 0..3")
    return label


def parse_example(obj):
    example_id = str(obj.get("id", "<missing id>"))
    if "context" not in obj or "question" not in obj or "options" not in obj:
        raise DatasetValidationError(
            example_id, "example-shape", "example must carry context, question, options"
        )
    context = tuple(
        _parse_sentence(s, example_id, f"context[{i}]") for i, s in enumerate(obj["context"])
    )
    question = _parse_sentence(obj["question"], example_id, "question")
    options_raw = obj["options"]
    if not isinstance(options_raw, list) or len(options_raw) != 4:
        raise DatasetValidationError(
            example_id, "options != 4",
            f"expected exactly 4 options, got {len(options_raw) if isinstance(options_raw, list) else type(options_raw).__name__}",
        )
    options = []
    for oi, sentences in enumerate(options_raw):
        if not isinstance(sentences, list) or not sentences:
            raise DatasetValidationError(
                example_id, "option-shape", f"option {oi} must be a non-empty sentence list"
            )
        options.append(
            tuple(_parse_sentence(s, example_id, f"options[{oi}][{j}]") for j, s in enumerate(sentences))
        )
    example = Example(
        example_id=example_id,
        context_sentences=context,
        question=question,
        options=tuple(options),
        label=_parse_label(obj.get("label"), example_id),
        qtype=obj.get("qtype"),
    )
    seen = {}
    for sent in example.all_sentences():
        if sent.sent_id in seen:
            raise DatasetValidationError(
                example_id, "unique-sent-ids", f"sent_id {sent.sent_id} appears twice"
            )
        seen[sent.sent_id] = sent
    return example


def load_dataset(path):
    """Load and validate an interchange JSON file, preserving file order."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetParseError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(raw, list):
        raise DatasetParseError(f"{path}: top level must be an array of examples")
    return [parse_example(obj) for obj in raw]


def _sentence_to_json(sent):
    out = {
        "sent_id": sent.sent_id,
        "tokens": [
            {"i": t.index, "text": t.text, "pos": t.pos, "head": t.head, "deprel": t.deprel}
            for t in sent.tokens
        ],
    }
    if sent.coref_mentions:
        out["coref"] = [
            {"cluster": m.cluster_id, "span": list(m.span)} for m in sent.coref_mentions
        ]
    return out


def example_to_json(example):
    out = {
        "id": example.example_id,
        "context": [_sentence_to_json(s) for s in example.context_sentences],
        "question": _sentence_to_json(example.question),
        "options": [[_sentence_to_json(s) for s in opt] for opt in example.options],
        "label": example.label,
    }
    if example.qtype is not None:
        out["qtype"] = example.qtype
    return out


def save_dataset(examples, path):
    Path(path).write_text(
        json.dumps([example_to_json(e) for e in examples], indent=1), encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# Precomputed token-vector files
#
# Little-endian binary:
#   magic "FEMB" | u32 d | u64 total vector count
#   u32 n_examples | n x (u32 id_len, id bytes utf-8, u64 absolute offset)
#   per example, at its offset: contiguous (u32 sent_id, u32 token_index,
#   d x f32) records; an example's block ends at the next offset (or EOF).

EMB_MAGIC = b"FEMB"


class EmbeddingFormatError(ValueError):
    """File does not follow the binary vector-file layout."""


class EmbeddingDimensionError(ValueError):
    """Header dimension disagrees with the configured dimension."""


class EmbeddingCoverageError(ValueError):
    """A token address is missing, duplicated, or unknown."""


@dataclass
class EmbeddingFile:
    d: int
    vectors: dict  # example_id -> {(sent_id, token_index): np.ndarray(d,)}

    def vector(self, example_id, sent_id, token_index):
        return self.vectors[example_id][(sent_id, token_index)]


def write_embeddings(path, d, per_example):
    """Write ``{example_id: {(sent_id, token_index): vector}}`` to ``path``."""
    ids = list(per_example.keys())
    record_size = 8 + 4 * d
    header_size = 4 + 4 + 8
    table_size = 4 + sum(4 + len(eid.encode("utf-8")) + 8 for eid in ids)
    offset = header_size + table_size
    total = sum(len(v) for v in per_example.values())
    with open(path, "wb") as fh:
        fh.write(EMB_MAGIC)
        fh.write(struct.pack("<IQ", d, total))
        fh.write(struct.pack("<I", len(ids)))
        for eid in ids:
            raw = eid.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<Q", offset))
            offset += record_size * len(per_example[eid])
        for eid in ids:
            for (sent_id, tok_idx), vec in per_example[eid].items():
                arr = np.asarray(vec, dtype=np.float32)
                if arr.shape != (d,):
                    raise EmbeddingDimensionError(
                        f"vector for {eid}:{sent_id}:{tok_idx} has shape {arr.shape}, want ({d},)"
                    )
                fh.write(struct.pack("<II", sent_id, tok_idx))
                fh.write(arr.tobytes())


def _read_embedding_blob(blob, path):
    if len(blob) < 16 or blob[:4] != EMB_MAGIC:
        raise EmbeddingFormatError(f"{path}: missing FEMB magic")
    d, total = struct.unpack_from("<IQ", blob, 4)
    (n_examples,) = struct.unpack_from("<I", blob, 16)
    pos = 20
    entries = []
    for _ in range(n_examples):
        (id_len,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        eid = blob[pos : pos + id_len].decode("utf-8")
        pos += id_len
        (offset,) = struct.unpack_from("<Q", blob, pos)
        pos += 8
        entries.append((eid, offset))
    record_size = 8 + 4 * d
    per_example = {}
    n_records = 0
    for i, (eid, offset) in enumerate(entries):
        end = entries[i + 1][1] if i + 1 < len(entries) else len(blob)
        if (end - offset) % record_size != 0:
            raise EmbeddingFormatError(f"{path}: ragged record block for example {eid!r}")
        vectors = {}
        for rec_off in range(offset, end, record_size):
            sent_id, tok_idx = struct.unpack_from("<II", blob, rec_off)
            vec = np.frombuffer(blob, dtype="<f4", count=d, offset=rec_off + 8).astype(np.float64)
            if not np.all(np.isfinite(vec)):
                raise EmbeddingFormatError(
                    f"{path}: non-finite vector at {eid}:{sent_id}:{tok_idx}"
                )
            if (sent_id, tok_idx) in vectors:
                raise EmbeddingCoverageError(
                    f"{path}: duplicate vector for address {eid}:{sent_id}:{tok_idx}"
                )
            vectors[(sent_id, tok_idx)] = vec
            n_records += 1
        per_example[eid] = vectors
    if n_records != total:
        raise EmbeddingFormatError(
            f"{path}: header promises {total} vectors, file holds {n_records}"
        )
    return EmbeddingFile(d=int(d), vectors=per_example)


def load_embeddings(path, examples, expected_d=None):
    """Load a vector file and verify it covers every token of ``examples``."""
    blob = Path(path).read_bytes()
    emb = _read_embedding_blob(blob, path)
    if expected_d is not None and emb.d != expected_d:
        raise EmbeddingDimensionError(
            f"{path}: header d={emb.d} but configuration wants d={expected_d}"
        )
    for example in examples:
        have = emb.vectors.get(example.example_id)
        if have is None:
            raise EmbeddingCoverageError(f"{path}: no vectors for example {example.example_id!r}")
        wanted = set()
        for sent in example.all_sentences():
            for tok in sent.tokens:
                addr = (sent.sent_id, tok.index)
                wanted.add(addr)
                if addr not in have:
                    raise EmbeddingCoverageError(
                        f"{path}: missing vector for address "
                        f"{example.example_id}:{sent.sent_id}:{tok.index}"
                    )
        extra = set(have) - wanted
        if extra:
            sent_id, tok_idx = sorted(extra)[0]
            raise EmbeddingCoverageError(
                f"{path}: vector for unknown address {example.example_id}:{sent_id}:{tok_idx}"
            )
    return emb
