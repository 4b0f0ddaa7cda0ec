"""Hierarchical answer decoder and the training losses.

Two comparison branches (pooled-vs-graph-fused and pooled-vs-interaction)
feed a sigmoid gate P that convexly combines the graph-fused and
interaction features before a shared linear layer scores each option.  The
answer loss is cross entropy over the four logits; the fact loss pushes
subject + predicate span features toward the object span feature of every
extracted triplet; the total is their weighted sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 1.0
    beta: float = 0.5

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")


class DecoderParams:
    """Two 4d->d comparison maps, a 2d->d gate map, and the d->1 scorer."""

    def __init__(self, d, rng):
        bound = 1.0 / np.sqrt(d)

        def uniform(*shape):
            return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)

        self.d = d
        self.w1 = uniform(4 * d, d)
        self.b1 = Tensor(np.zeros(d), requires_grad=True)
        self.w2 = uniform(4 * d, d)
        self.b2 = Tensor(np.zeros(d), requires_grad=True)
        self.w_gate = uniform(2 * d, d)
        self.b_gate = Tensor(np.zeros(d), requires_grad=True)
        self.w_score = uniform(d, 1)
        self.b_score = Tensor(np.zeros(1), requires_grad=True)

    def named(self, prefix="decoder"):
        return {
            f"{prefix}.w1": self.w1,
            f"{prefix}.b1": self.b1,
            f"{prefix}.w2": self.w2,
            f"{prefix}.b2": self.b2,
            f"{prefix}.w_gate": self.w_gate,
            f"{prefix}.b_gate": self.b_gate,
            f"{prefix}.w_score": self.w_score,
            f"{prefix}.b_score": self.b_score,
        }


def hierarchical_decode(
    pooled, graph_fused, interacted, params, e2_literal=False,
    trace=None, gate_override=None,
):
    """Score the four options: logits (4,).

    ``pooled``, ``graph_fused`` and ``interacted`` are (4 x d).  The first
    branch compares pooled with the graph-fused features; the second with
    the interaction features.  With ``e2_literal`` the second branch keeps
    the graph-fused matrix in its first comparison slot (a printed variant
    of the layer kept behind a flag); the default is the symmetric form.
    """
    for m in (graph_fused, interacted):
        if m.shape != pooled.shape:
            raise ValueError(f"shape mismatch: {m.shape} vs {pooled.shape}")
    e1_in = ad.concat(
        [pooled, graph_fused, ad.sub(pooled, graph_fused), ad.mul(pooled, graph_fused)],
        axis=1,
    )
    e1 = ad.relu(ad.add(ad.matmul(e1_in, params.w1), params.b1))
    second = graph_fused if e2_literal else interacted
    e2_in = ad.concat(
        [pooled, second, ad.sub(pooled, interacted), ad.mul(pooled, interacted)],
        axis=1,
    )
    e2 = ad.relu(ad.add(ad.matmul(e2_in, params.w2), params.b2))
    if gate_override is not None:
        gate = gate_override
    else:
        gate = ad.sigmoid(
            ad.add(ad.matmul(ad.concat([e1, e2], axis=1), params.w_gate), params.b_gate)
        )
    if trace is not None:
        trace.setdefault("decoder_gate", []).append(gate.data)
    one_minus = ad.sub(Tensor(np.ones_like(gate.data)), gate)
    combined = ad.add(ad.mul(gate, graph_fused), ad.mul(one_minus, interacted))
    logits = ad.add(ad.matmul(combined, params.w_score), params.b_score)
    return ad.reshape(logits, (4,))


def answer_loss(logits, label):
    """Cross entropy of the gold option."""
    if logits.shape != (4,):
        raise ValueError(f"expected 4 logits, got shape {logits.shape}")
    if not 0 <= label <= 3:
        raise ValueError(f"label {label} out of range 0..3")
    log_probs = ad.log_softmax(logits, axis=0)
    return ad.reshape(ad.neg(ad.take(log_probs, [label])), ())


def fact_regularization(span_features):
    """Sum of (1 - cos(subject + predicate, object)) over extracted facts.

    ``span_features`` is a sequence of (subject, predicate, object) feature
    vectors; an empty sequence contributes zero.
    """
    if not span_features:
        return Tensor(0.0)
    terms = []
    for h_sub, h_rel, h_obj in span_features:
        cos = ad.cosine_similarity(ad.add(h_sub, h_rel), h_obj)
        terms.append(ad.sub(Tensor(1.0), cos))
    total = terms[0]
    for t in terms[1:]:
        total = ad.add(total, t)
    return total


def total_loss(l_ans, l_lfr, weights: LossWeights):
    """alpha * answer loss + beta * fact loss."""
    return ad.add(ad.scale(l_ans, weights.alpha), ad.scale(l_lfr, weights.beta))
