"""End-to-end model: one forward pass per example.

Per option the context, marked question, and option are encoded as one
sequence; facts extracted from context + option form a supergraph whose
atoms start from span-averaged hidden states and are refined by the gated
relational encoder; the pooled option vectors are fused with attended graph
features, the options interact pairwise, and the hierarchical decoder emits
four logits.  The loss adds the fact-consistency penalty over every
extracted triplet to the answer cross entropy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .config import ModelConfig
from .decoder import (
    DecoderParams,
    LossWeights,
    answer_loss,
    fact_regularization,
    hierarchical_decode,
    total_loss,
)
from .encoders import (
    Dropout,
    FusionParams,
    GraphEncoder,
    PrecomputedBackbone,
    TrainableBackbone,
    Vocab,
    encode_sequence,
    fuse_graph_context,
    init_graph_features,
)
from .extraction import detect_negation, extract_triplets, QuestionPolarity
from .interaction import InteractionParams, interact_options
from .supergraph import (
    assemble_entity_graph,
    assemble_supergraph,
    build_fact_levi,
    example_mentions,
)


@dataclass
class ForwardResult:
    logits: np.ndarray  # (4,)
    logits_tensor: Tensor
    loss: Tensor | None
    l_ans: Tensor | None
    l_lfr: Tensor
    prediction: int
    trace: dict = field(default_factory=dict)


class FocalReasoner:
    """Parameter container plus the forward pass."""

    def __init__(self, config: ModelConfig, vocab=None, embedding_file=None):
        self.config = config
        rng = np.random.default_rng(config.seed)
        d = config.d
        if config.backbone == "trainable":
            if vocab is None:
                raise ValueError("the trainable backbone needs a vocabulary")
            self.vocab = vocab
            self.backbone = TrainableBackbone(vocab, d, config.max_seq_len, rng)
        else:
            if embedding_file is None:
                raise ValueError("the precomputed backbone needs an embedding file")
            self.vocab = vocab
            self.backbone = PrecomputedBackbone(embedding_file, d, rng)
        self.graph_encoder = GraphEncoder(
            d,
            config.graph_layers,
            rng,
            single_edge_type=config.ablations.single_edge_type,
        )
        self.fusion = FusionParams(d, rng)
        self.interaction = InteractionParams(d, rng)
        self.decoder = DecoderParams(d, rng)

    def parameters(self):
        out = {}
        out.update(self.backbone.named())
        out.update(self.graph_encoder.named())
        out.update(self.fusion.named())
        out.update(self.interaction.named())
        out.update(self.decoder.named())
        return out

    def zero_grad(self):
        for p in self.parameters().values():
            p.zero_grad()

    # -- forward ----------------------------------------------------------

    def _marker(self, example):
        if self.config.ablations.no_question_marker:
            return QuestionPolarity(False, None).marker()
        return detect_negation(example.question).marker()

    def _graphs(self, example, layouts):
        """Per-option supergraphs plus the triplets surviving truncation."""
        flags = self.config.ablations
        sentences = {s.sent_id: s for s in example.all_sentences()}
        context_triplets = []
        for sent in example.context_sentences:
            context_triplets.extend(extract_triplets(sent, source="context"))
        mentions = () if flags.no_coref else example_mentions(example)
        graphs, option_triplets = [], []
        for i in range(4):
            opt_trips = []
            for sent in example.options[i]:
                opt_trips.extend(extract_triplets(sent, source=f"option:{i}"))
            layout = layouts[i]
            kept = [
                t for t in context_triplets + opt_trips if layout.covers_triplet(t)
            ]
            if flags.entity_only:
                sg = assemble_entity_graph(
                    kept, sentences, mentions, include_global=not flags.no_global_atom
                )
            else:
                facts = [build_fact_levi(t, sentences) for t in kept]
                sg = assemble_supergraph(
                    facts, mentions, include_global=not flags.no_global_atom
                )
            graphs.append(sg)
            option_triplets.append([t for t in opt_trips if layout.covers_triplet(t)])
        kept_context = [
            t for t in context_triplets if layouts[0].covers_triplet(t)
        ]
        return graphs, kept_context, option_triplets

    def _span_feature(self, encoding, span):
        positions = encoding.layout.span_positions(span)
        return ad.mean(ad.take(encoding.hidden, positions), axis=0)

    def forward(self, example, compute_loss=True, drop=None, trace=None):
        cfg = self.config
        drop = drop or Dropout(0.0)
        marker = self._marker(example)

        encodings = [
            encode_sequence(example, i, self.backbone, marker, cfg.max_seq_len, drop=drop)
            for i in range(4)
        ]
        layouts = [enc.layout for enc in encodings]
        pooled = ad.concat(
            [ad.reshape(enc.pooled, (1, cfg.d)) for enc in encodings], axis=0
        )

        graphs, context_triplets, option_triplets = self._graphs(example, layouts)
        node_features = []
        for i in range(4):
            sg = graphs[i]
            if sg.n_nodes == 0:
                node_features.append(None)
                continue
            init = init_graph_features(
                sg, encodings[i], question_only_global=cfg.ablations.question_only_global
            )
            node_features.append(
                self.graph_encoder.forward(sg, init, drop=drop, trace=trace)
            )
        fused = fuse_graph_context(pooled, node_features, self.fusion, drop=drop, trace=trace)

        option_mats, q_vecs, context_mats = [], [], []
        max_cols = 0
        for enc in encodings:
            cols = enc.layout.question_positions + enc.layout.option_positions
            max_cols = max(max_cols, len(cols))
        for enc in encodings:
            cols = enc.layout.question_positions + enc.layout.option_positions
            mat = ad.transpose(ad.take(enc.hidden, cols))  # (d x N_i)
            if len(cols) < max_cols:
                pad = Tensor(np.zeros((cfg.d, max_cols - len(cols))))
                mat = ad.concat([mat, pad], axis=1)
            option_mats.append(mat)
            q_vecs.append(
                ad.mean(ad.take(enc.hidden, enc.layout.question_positions), axis=0)
            )
            ctx_cols = enc.layout.context_positions
            context_mats.append(
                ad.transpose(ad.take(enc.hidden, ctx_cols)) if ctx_cols else None
            )

        if cfg.ablations.no_interaction:
            rows = []
            for i, enc in enumerate(encodings):
                cols = enc.layout.question_positions + enc.layout.option_positions
                rows.append(
                    ad.reshape(ad.mean(ad.take(enc.hidden, cols), axis=0), (1, cfg.d))
                )
            interacted = ad.concat(rows, axis=0)
        else:
            interacted = interact_options(
                option_mats, q_vecs, context_mats, self.interaction, drop=drop, trace=trace
            )

        logits = hierarchical_decode(
            pooled,
            fused,
            interacted,
            self.decoder,
            e2_literal=cfg.decoder_e2_literal,
            trace=trace,
        )

        span_features = []
        for t in context_triplets:
            enc = encodings[0]
            span_features.append(
                tuple(self._span_feature(enc, s) for s in (t.subject, t.predicate, t.object))
            )
        for i, trips in enumerate(option_triplets):
            for t in trips:
                enc = encodings[i]
                span_features.append(
                    tuple(self._span_feature(enc, s) for s in (t.subject, t.predicate, t.object))
                )
        l_lfr = fact_regularization(span_features)

        l_ans = None
        loss = None
        if compute_loss and example.label is not None:
            l_ans = answer_loss(logits, example.label)
            weights = LossWeights(cfg.alpha, cfg.effective_beta)
            loss = total_loss(l_ans, l_lfr, weights)

        logits_np = logits.data.copy()
        return ForwardResult(
            logits=logits_np,
            logits_tensor=logits,
            loss=loss,
            l_ans=l_ans,
            l_lfr=l_lfr,
            prediction=int(np.argmax(logits_np)),
            trace=trace if trace is not None else {},
        )


def build_model(config: ModelConfig, train_examples, embedding_file=None):
    """Construct a model for a dataset: vocabulary from the examples in
    trainable mode, the provided vector file otherwise."""
    vocab = Vocab.from_examples(train_examples)
    return FocalReasoner(config, vocab=vocab, embedding_file=embedding_file)
