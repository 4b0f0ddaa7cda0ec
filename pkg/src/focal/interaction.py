"""Question-option interaction.

Works in the column convention: an option representation is a (d x N)
matrix whose columns are token features for the question + option
concatenation.  The attention operator scores every column pair with a
learned 3d vector over [u; v; u*v] and normalizes over the first argument's
columns.  Each option is compared against the other three, the comparisons
are fused through a tanh layer and a per-column gate, and the result is
summarized against the context through the same attention operator.

``trace`` is an optional dict of lists that collects gate and attention
values for inspection; ``drop`` an optional dropout callable applied to
attention weights during training.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor


class InteractionParams:
    """Scorer v (3d), fusion W_c (d x 7d) + b_c, gate W_g (d x 3d) + b_g.

    The same scorer is reused for the final option-context attention.
    """

    def __init__(self, d, rng):
        bound = 1.0 / np.sqrt(d)

        def uniform(*shape):
            return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)

        self.d = d
        self.v = uniform(3 * d)
        self.w_c = uniform(d, 7 * d)
        self.b_c = Tensor(np.zeros(d), requires_grad=True)
        self.w_g = uniform(d, 3 * d)
        self.b_g = Tensor(np.zeros(d), requires_grad=True)

    def named(self, prefix="interaction"):
        return {
            f"{prefix}.v": self.v,
            f"{prefix}.w_c": self.w_c,
            f"{prefix}.b_c": self.b_c,
            f"{prefix}.w_g": self.w_g,
            f"{prefix}.b_g": self.b_g,
        }


def _traced(trace, key, value):
    if trace is not None:
        trace.setdefault(key, []).append(value)


def pairwise_attention(u, v_mat, scorer, drop=None, trace=None):
    """Attention matrix A (N x M) with columns normalized over u's columns.

    ``u`` is (d x N), ``v_mat`` is (d x M); entry scores are
    scorer @ [u_col; v_col; u_col * v_col].
    """
    d_u = u.shape[0]
    d_v = v_mat.shape[0]
    if d_u != d_v or scorer.shape[0] != 3 * d_u:
        raise ValueError(
            f"scorer of size {scorer.shape[0]} cannot pair (d={d_u}) with (d={d_v})"
        )
    d = d_u
    v1 = ad.reshape(ad.take(scorer, np.arange(d)), (d, 1))
    v2 = ad.reshape(ad.take(scorer, np.arange(d, 2 * d)), (d, 1))
    v3 = ad.reshape(ad.take(scorer, np.arange(2 * d, 3 * d)), (d, 1))
    su = ad.matmul(ad.transpose(u), v1)  # (N, 1)
    sv = ad.transpose(ad.matmul(ad.transpose(v_mat), v2))  # (1, M)
    cross = ad.matmul(ad.transpose(ad.mul(u, v3)), v_mat)  # (N, M)
    scores = ad.add(ad.add(cross, su), sv)
    attn = ad.softmax(scores, axis=0)
    _traced(trace, "attention", attn.data)
    if drop is not None:
        attn = drop(attn)
    return attn


def option_pair_interaction(options, i, j, scorer, drop=None, trace=None):
    """Comparison features of option ``i`` against option ``j``: the
    difference and Hadamard blocks stacked to (2d x N).

    All option matrices must share a common column count (the model pads
    them); comparing an option with itself is a caller error.
    """
    if i == j:
        raise ValueError("an option cannot interact with itself")
    o_i, o_j = options[i], options[j]
    if o_i.shape != o_j.shape:
        raise ValueError(f"option shapes differ: {o_i.shape} vs {o_j.shape}")
    attn = pairwise_attention(o_i, o_j, scorer, drop=drop, trace=trace)
    aligned = ad.matmul(o_i, attn)  # (d x N): own columns re-mixed by attention
    return ad.concat([ad.sub(o_i, aligned), ad.mul(o_i, aligned)], axis=0)


def fuse_option_correlations(o_i, partners, q_vec, params, trace=None):
    """Fuse an option with its three pairwise comparisons.

    ``partners`` must hold exactly 3 blocks of shape (2d x N), ordered by
    ascending partner option index.  ``q_vec`` is the pooled question
    vector (d,).  Per column: a tanh projection of the 7d stack, then a
    sigmoid gate over [option; fused; question] picks between the original
    and fused features.
    """
    if len(partners) != 3:
        raise ValueError(f"expected 3 partner interactions, got {len(partners)}")
    d, n = o_i.shape
    stacked = ad.concat([o_i] + list(partners), axis=0)  # (7d x N)
    assert stacked.shape[0] == 7 * d
    fused = ad.tanh(ad.add(ad.matmul(params.w_c, stacked), ad.reshape(params.b_c, (d, 1))))
    q_col = ad.reshape(q_vec, (d, 1))
    q_tiled = ad.take(q_col, [0] * n, axis=1)
    gate_in = ad.concat([o_i, fused, q_tiled], axis=0)  # (3d x N)
    gate = ad.sigmoid(ad.add(ad.matmul(params.w_g, gate_in), ad.reshape(params.b_g, (d, 1))))
    _traced(trace, "interaction_gates", gate.data)
    one_minus = ad.sub(Tensor(np.ones_like(gate.data)), gate)
    return ad.add(ad.mul(gate, o_i), ad.mul(one_minus, fused))


def coattend_with_context(option_mat, context_mat, scorer, drop=None, trace=None):
    """Summarize the context for one option as a d-vector.

    Each option column attends over context columns; the per-column context
    summaries are mean-pooled.  With no context columns the pooled option
    itself is returned.
    """
    if context_mat is None or context_mat.shape[1] == 0:
        return ad.mean(option_mat, axis=1)
    attn = pairwise_attention(context_mat, option_mat, scorer, drop=drop, trace=trace)
    summaries = ad.matmul(context_mat, attn)  # (d x N)
    return ad.mean(summaries, axis=1)


def interact_options(option_mats, q_vecs, context_mats, params, drop=None, trace=None):
    """Full interaction pass -> (4 x d) option-context summaries."""
    if len(option_mats) != 4:
        raise ValueError("exactly 4 options required")
    rows = []
    for i in range(4):
        partners = [
            option_pair_interaction(option_mats, i, j, params.v, drop=drop, trace=trace)
            for j in range(4)
            if j != i
        ]
        advanced = fuse_option_correlations(
            option_mats[i], partners, q_vecs[i], params, trace=trace
        )
        summary = coattend_with_context(
            advanced, context_mats[i], params.v, drop=drop, trace=trace
        )
        rows.append(ad.reshape(summary, (1, params.d)))
    return ad.concat(rows, axis=0)
