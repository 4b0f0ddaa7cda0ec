"""Sequence and supergraph encoders.

One encoded sequence per option: ``<s> context </s> <pos|neg> question
option </s>``, either through a trainable embedding backbone (embedding +
position tables and one ReLU mixing layer) or through frozen precomputed
token vectors with a small learned table for the marker tokens.

Graph atoms are initialized by averaging the hidden states of their token
spans; the global atom averages the question and option token states.  Node
features are then refined by a gated relational graph network in two
stages: first over the intra-fact Levi edges, then over coreference/global
edges, each stage with its own per-relation weights.  Finally the pooled
per-option vectors attend over node features and a sigmoid gate decides how
much graph signal to add.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .interaction import pairwise_attention
from .supergraph import (
    INTRA_FACT_RELS,
    CROSS_FACT_RELS,
    RELATION_TYPES,
)

BOS, EOS = "<s>", "</s>"
UNK = "<unk>"
MARKERS = ("<pos>", "<neg>")
SPECIAL_TOKENS = (UNK, BOS, EOS) + MARKERS


class GraphInitError(ValueError):
    """A node span has no resolvable positions in the encoded sequence."""


class Vocab:
    """Deterministic token-to-id mapping; id 0 is the unknown token."""

    def __init__(self, tokens):
        self.tokens = tuple(SPECIAL_TOKENS) + tuple(
            t for t in tokens if t not in SPECIAL_TOKENS
        )
        self.index = {t: i for i, t in enumerate(self.tokens)}

    def __len__(self):
        return len(self.tokens)

    def id(self, token):
        return self.index.get(token, 0)

    @classmethod
    def from_examples(cls, examples):
        seen = set()
        for ex in examples:
            for sent in ex.all_sentences():
                for tok in sent.tokens:
                    seen.add(tok.text)
        return cls(sorted(seen))


@dataclass
class SequenceLayout:
    """Token texts of one (context, question, option) concatenation plus the
    maps back to sentence-level addresses."""

    texts: tuple
    position_of: dict  # (sent_id, token_index) -> position
    context_positions: list
    question_positions: list
    option_positions: list
    marker_position: int
    truncated: bool = False

    def __len__(self):
        return len(self.texts)

    def span_positions(self, span):
        out = []
        for tok_idx in range(span.start, span.end):
            pos = self.position_of.get((span.sent_id, tok_idx))
            if pos is None:
                return None
            out.append(pos)
        return out

    def covers_triplet(self, triplet):
        return all(self.span_positions(s) is not None for s in triplet.spans())


def build_layout(example, option_index, marker, max_seq_len):
    """Lay out ``<s> context </s> marker question option </s>``.

    Context tokens beyond the length budget are dropped from the right and
    the layout is flagged as truncated.
    """
    question_tokens = [
        (example.question.sent_id, t.index, t.text) for t in example.question.tokens
    ]
    option_tokens = [
        (s.sent_id, t.index, t.text)
        for s in example.options[option_index]
        for t in s.tokens
    ]
    context_tokens = [
        (s.sent_id, t.index, t.text)
        for s in example.context_sentences
        for t in s.tokens
    ]
    budget = max_seq_len - len(question_tokens) - len(option_tokens) - 4
    if budget < 0:
        raise ValueError(
            f"example {example.example_id}: question and option alone exceed "
            f"max_seq_len={max_seq_len}"
        )
    truncated = len(context_tokens) > budget
    if truncated:
        context_tokens = context_tokens[:budget]

    texts = [BOS]
    position_of = {}
    context_positions = []
    for sid, tidx, text in context_tokens:
        position_of[(sid, tidx)] = len(texts)
        context_positions.append(len(texts))
        texts.append(text)
    texts.append(EOS)
    marker_position = len(texts)
    texts.append(marker)
    question_positions = []
    for sid, tidx, text in question_tokens:
        position_of[(sid, tidx)] = len(texts)
        question_positions.append(len(texts))
        texts.append(text)
    option_positions = []
    for sid, tidx, text in option_tokens:
        position_of[(sid, tidx)] = len(texts)
        option_positions.append(len(texts))
        texts.append(text)
    texts.append(EOS)
    return SequenceLayout(
        texts=tuple(texts),
        position_of=position_of,
        context_positions=context_positions,
        question_positions=question_positions,
        option_positions=option_positions,
        marker_position=marker_position,
        truncated=truncated,
    )


@dataclass
class OptionEncoding:
    layout: SequenceLayout
    hidden: Tensor  # (L x d)
    pooled: Tensor  # (d,)


def _uniform(rng, shape, d):
    bound = 1.0 / np.sqrt(d)
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)


class Dropout:
    """Inverted dropout; a no-op when the rate is zero or no rng is given."""

    def __init__(self, p=0.0, rng=None):
        self.p = float(p)
        self.rng = rng
        self.enabled = self.p > 0.0 and rng is not None

    def __call__(self, t):
        if not self.enabled:
            return t
        mask = (self.rng.random(t.shape) >= self.p) / (1.0 - self.p)
        return ad.mul(t, Tensor(mask))


class TrainableBackbone:
    """Embedding + position tables and one ReLU mixing layer."""

    def __init__(self, vocab, d, max_seq_len, rng):
        self.vocab = vocab
        self.d = d
        self.embedding = _uniform(rng, (len(vocab), d), d)
        self.positions = _uniform(rng, (max_seq_len, d), d)
        self.w_mix = _uniform(rng, (d, d), d)
        self.b_mix = Tensor(np.zeros(d), requires_grad=True)

    def named(self, prefix="backbone"):
        return {
            f"{prefix}.embedding": self.embedding,
            f"{prefix}.positions": self.positions,
            f"{prefix}.w_mix": self.w_mix,
            f"{prefix}.b_mix": self.b_mix,
        }

    def encode(self, layout, example=None, drop=None):
        ids = [self.vocab.id(t) for t in layout.texts]
        e = ad.add(
            ad.take(self.embedding, ids),
            ad.take(self.positions, np.arange(len(ids))),
        )
        h = ad.relu(ad.add(ad.matmul(e, self.w_mix), self.b_mix))
        if drop is not None:
            h = drop(h)
        return h


class PrecomputedBackbone:
    """Frozen token vectors plus a learned table for the special tokens."""

    def __init__(self, embedding_file, d, rng):
        if embedding_file.d != d:
            raise ValueError(
                f"embedding file carries d={embedding_file.d}, config wants d={d}"
            )
        self.file = embedding_file
        self.d = d
        self.special = _uniform(rng, (len(SPECIAL_TOKENS), d), d)
        self._special_id = {t: i for i, t in enumerate(SPECIAL_TOKENS)}

    def named(self, prefix="backbone"):
        return {f"{prefix}.special": self.special}

    def encode(self, layout, example, drop=None):
        vectors = self.file.vectors[example.example_id]
        address_of = {pos: addr for addr, pos in layout.position_of.items()}
        base = np.zeros((len(layout), self.d))
        special_rows, special_positions = [], []
        for pos, text in enumerate(layout.texts):
            addr = address_of.get(pos)
            if addr is not None:
                vec = vectors.get(addr)
                if vec is None:
                    raise GraphInitError(
                        f"no precomputed vector for token address {addr}"
                    )
                base[pos] = vec
            else:
                special_rows.append(self._special_id[text])
                special_positions.append(pos)
        h = Tensor(base)
        if special_rows:
            scattered = ad.segment_sum(
                ad.take(self.special, special_rows), special_positions, len(layout)
            )
            h = ad.add(h, scattered)
        return h


def encode_sequence(example, option_index, backbone, marker, max_seq_len, drop=None):
    """Encode one (context, question, option) concatenation."""
    layout = build_layout(example, option_index, marker, max_seq_len)
    hidden = backbone.encode(layout, example, drop=drop)
    pooled = ad.mean(hidden, axis=0)
    return OptionEncoding(layout=layout, hidden=hidden, pooled=pooled)


# ---------------------------------------------------------------------------
# graph initialization


def init_graph_features(sg, encoding, question_only_global=False):
    """Node features: mean hidden state over each atom's span; the global
    atom averages the question + option token states."""
    layout = encoding.layout
    positions, owners = [], []
    for node in sg.nodes:
        if node.kind == "global":
            pos = list(layout.question_positions)
            if not question_only_global:
                pos = pos + list(layout.option_positions)
            if not pos:
                pos = [layout.marker_position]
        else:
            pos = layout.span_positions(node.span)
            if pos is None:
                raise GraphInitError(
                    f"node {node.node_id} span {node.span} not present in the sequence"
                )
        positions.extend(pos)
        owners.extend([node.node_id] * len(pos))
    gathered = ad.take(encoding.hidden, positions)
    summed = ad.segment_sum(gathered, owners, sg.n_nodes)
    counts = np.bincount(owners, minlength=sg.n_nodes).astype(np.float64)
    inv = Tensor((1.0 / counts).reshape(-1, 1))
    return ad.mul(summed, inv)


# ---------------------------------------------------------------------------
# gated relational graph network


def group_edges(sg, rels, single_edge_type=False):
    """Bucket edges by relation: rel -> (src, dst, 1/indegree per edge)."""
    buckets = {}
    for edge in sg.edges:
        if edge.rel not in rels:
            continue
        key = "edge" if single_edge_type else edge.rel
        buckets.setdefault(key, []).append((edge.src, edge.dst))
    groups = {}
    for key, pairs in buckets.items():
        src = np.array([p[0] for p in pairs], dtype=np.intp)
        dst = np.array([p[1] for p in pairs], dtype=np.intp)
        indeg = np.bincount(dst, minlength=sg.n_nodes)
        inv_c = 1.0 / indeg[dst]
        groups[key] = (src, dst, inv_c)
    return groups


def isolated_nodes(groups, n_nodes):
    """Nodes receiving no message under any relation of this stage."""
    has_in = np.zeros(n_nodes, dtype=bool)
    for _, dst, _ in groups.values():
        has_in[dst] = True
    return [int(i) for i in np.flatnonzero(~has_in)]


class GatedRGCNLayer:
    """One message-passing step: per-relation weights, indegree
    normalization, and a sigmoid gate on each sender under each relation."""

    def __init__(self, d, relation_keys, rng):
        self.d = d
        self.relation_keys = tuple(relation_keys)
        self.weights = {}
        self.gate_weights = {}
        for key in self.relation_keys:
            self.weights[key] = _uniform(rng, (d, d), d)
            self.gate_weights[key] = _uniform(rng, (d, 1), d)

    def named(self, prefix):
        out = {}
        for key in self.relation_keys:
            out[f"{prefix}.w.{key}"] = self.weights[key]
            out[f"{prefix}.gate.{key}"] = self.gate_weights[key]
        return out

    def forward(self, features, groups, n_nodes, drop=None, trace=None):
        total = None
        for key in sorted(groups):
            if key not in self.weights:
                raise KeyError(f"layer has no parameters for relation {key!r}")
            src, dst, inv_c = groups[key]
            sender = ad.take(features, src)
            messages = ad.matmul(sender, self.weights[key])
            gate = ad.sigmoid(ad.matmul(sender, self.gate_weights[key]))
            if trace is not None:
                trace.setdefault("graph_gates", []).append(gate.data)
            scaled = ad.mul(ad.mul(messages, gate), Tensor(inv_c.reshape(-1, 1)))
            contrib = ad.segment_sum(scaled, dst, n_nodes)
            total = contrib if total is None else ad.add(total, contrib)
        if total is None:
            total = Tensor(np.zeros((n_nodes, self.d)))
        out = ad.relu(total)
        if drop is not None:
            out = drop(out)
        return out


class GraphEncoder:
    """Two-stage gated relational encoding.

    Stage 1 runs ceil(L/2) layers over the intra-fact Levi edges; stage 2
    runs floor(L/2) layers over self + coreference + global edges.  Stages
    do not share parameters.
    """

    def __init__(self, d, num_layers, rng, single_edge_type=False):
        if num_layers < 1:
            raise ValueError("graph encoder needs at least one layer")
        self.d = d
        self.num_layers = num_layers
        self.single_edge_type = single_edge_type
        n1 = (num_layers + 1) // 2
        n2 = num_layers // 2
        if single_edge_type:
            keys1 = keys2 = ("edge",)
        else:
            keys1 = tuple(r for r in RELATION_TYPES if r in INTRA_FACT_RELS)
            keys2 = tuple(r for r in RELATION_TYPES if r in CROSS_FACT_RELS)
        self.stage1 = [GatedRGCNLayer(d, keys1, rng) for _ in range(n1)]
        self.stage2 = [GatedRGCNLayer(d, keys2, rng) for _ in range(n2)]

    def named(self, prefix="graph"):
        out = {}
        for i, layer in enumerate(self.stage1):
            out.update(layer.named(f"{prefix}.intra{i}"))
        for i, layer in enumerate(self.stage2):
            out.update(layer.named(f"{prefix}.cross{i}"))
        return out

    def forward(self, sg, features, drop=None, trace=None):
        n = sg.n_nodes
        gid = sg.global_id
        groups1 = group_edges(sg, INTRA_FACT_RELS, self.single_edge_type)
        groups2 = group_edges(sg, CROSS_FACT_RELS, self.single_edge_type)
        if trace is not None:
            isolated = [i for i in isolated_nodes(groups1, n) if i != gid]
            trace.setdefault("isolated", []).extend(isolated)
        h = features
        if gid is not None:
            # Stage 1 encodes fact atoms only; the global atom joins in
            # stage 2 with its initial features intact.
            keep = np.zeros((n, 1))
            keep[gid, 0] = 1.0
            keep_t = Tensor(keep)
            pass_t = Tensor(1.0 - keep)
        for layer in self.stage1:
            updated = layer.forward(h, groups1, n, drop=drop, trace=trace)
            if gid is not None:
                h = ad.add(ad.mul(updated, pass_t), ad.mul(h, keep_t))
            else:
                h = updated
        for layer in self.stage2:
            h = layer.forward(h, groups2, n, drop=drop, trace=trace)
        return h


# ---------------------------------------------------------------------------
# graph-context fusion


class FusionParams:
    """Key/value projections, a scorer for node attention, and the gate
    weights that mix graph signal into the pooled option vectors."""

    def __init__(self, d, rng):
        self.d = d
        self.w_key = _uniform(rng, (d, d), d)
        self.w_value = _uniform(rng, (d, d), d)
        self.scorer = _uniform(rng, (3 * d,), d)
        self.w_lambda = _uniform(rng, (d, d), d)
        self.u_lambda = _uniform(rng, (d, d), d)

    def named(self, prefix="fusion"):
        return {
            f"{prefix}.w_key": self.w_key,
            f"{prefix}.w_value": self.w_value,
            f"{prefix}.scorer": self.scorer,
            f"{prefix}.w_lambda": self.w_lambda,
            f"{prefix}.u_lambda": self.u_lambda,
        }


def fuse_graph_context(
    pooled, node_features, params, drop=None, trace=None, lambda_override=None
):
    """Blend graph signal into pooled option vectors.

    ``pooled`` is (4 x d); ``node_features`` a list of 4 per-option node
    matrices (or None where a graph is empty).  Per option the pooled vector
    attends over projected node features; a sigmoid gate weighs how much of
    the attended summary is added.  ``lambda_override`` substitutes the gate
    (testing hook).
    """
    d = params.d
    rows = []
    for i, nodes in enumerate(node_features):
        if nodes is None or nodes.shape[0] == 0:
            rows.append(Tensor(np.zeros((1, d))))
            continue
        query = ad.transpose(ad.take(pooled, [i]))  # (d x 1)
        keys = ad.transpose(ad.matmul(nodes, params.w_key))  # (d x N)
        weights = pairwise_attention(keys, query, params.scorer, drop=drop, trace=trace)
        values = ad.matmul(nodes, params.w_value)  # (N x d)
        rows.append(ad.matmul(ad.transpose(weights), values))  # (1 x d)
    graph_summary = ad.concat(rows, axis=0)  # (4 x d)
    if lambda_override is not None:
        lam = lambda_override
    else:
        lam = ad.sigmoid(
            ad.add(ad.matmul(graph_summary, params.w_lambda), ad.matmul(pooled, params.u_lambda))
        )
    if trace is not None:
        trace.setdefault("lambda", []).append(lam.data)
    return ad.add(pooled, ad.mul(lam, graph_summary))
