import math

import numpy as np
import pytest

from focal.autodiff import Tensor
from focal.interaction import (
    InteractionParams,
    coattend_with_context,
    fuse_option_correlations,
    interact_options,
    option_pair_interaction,
    pairwise_attention,
)


def _params(d, seed=0):
    return InteractionParams(d, np.random.default_rng(seed))


class TestPairwiseAttention:
    def test_zero_scorer_uniform(self):
        d, n, m = 3, 4, 5
        rng = np.random.default_rng(0)
        u = Tensor(rng.normal(size=(d, n)))
        v = Tensor(rng.normal(size=(d, m)))
        attn = pairwise_attention(u, v, Tensor(np.zeros(3 * d)))
        np.testing.assert_allclose(attn.data, np.full((n, m), 1.0 / n))

    def test_single_column_u_is_all_ones_row(self):
        d = 3
        rng = np.random.default_rng(1)
        u = Tensor(rng.normal(size=(d, 1)))
        v = Tensor(rng.normal(size=(d, 4)))
        attn = pairwise_attention(u, v, Tensor(rng.normal(size=3 * d)))
        np.testing.assert_allclose(attn.data, np.ones((1, 4)))

    def test_hand_computed_two_by_one(self):
        d = 2
        u = np.array([[1.0, 0.0], [0.0, 2.0]])  # columns u1=(1,0), u2=(0,2)
        w = np.array([[0.5], [1.0]])
        scorer = np.array([1.0, -1.0, 0.5, 0.25, 2.0, -0.5])
        v1, v2, v3 = scorer[:2], scorer[2:4], scorer[4:]
        scores = []
        for i in range(2):
            ui = u[:, i]
            scores.append(v1 @ ui + v2 @ w[:, 0] + v3 @ (ui * w[:, 0]))
        e = np.exp(np.array(scores) - max(scores))
        want = (e / e.sum()).reshape(2, 1)
        got = pairwise_attention(Tensor(u), Tensor(w), Tensor(scorer))
        np.testing.assert_allclose(got.data, want, atol=1e-12)

    def test_columns_sum_to_one(self):
        d = 4
        rng = np.random.default_rng(2)
        for n, m in [(1, 1), (3, 2), (7, 5)]:
            attn = pairwise_attention(
                Tensor(rng.normal(size=(d, n))),
                Tensor(rng.normal(size=(d, m))),
                Tensor(rng.normal(size=3 * d)),
            )
            np.testing.assert_allclose(attn.data.sum(axis=0), np.ones(m), atol=1e-12)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            pairwise_attention(
                Tensor(np.zeros((3, 2))), Tensor(np.zeros((4, 2))), Tensor(np.zeros(9))
            )

    def test_trace_collects_matrix(self):
        d = 2
        trace = {}
        pairwise_attention(
            Tensor(np.zeros((d, 2))), Tensor(np.zeros((d, 2))), Tensor(np.zeros(3 * d)),
            trace=trace,
        )
        assert len(trace["attention"]) == 1


class TestOptionPairInteraction:
    def test_same_values_uniform_attention_mean_shift(self):
        d, n = 3, 2
        rng = np.random.default_rng(3)
        o = rng.normal(size=(d, n))
        options = [Tensor(o), Tensor(o.copy())]
        out = option_pair_interaction(options, 0, 1, Tensor(np.zeros(3 * d)))
        col_mean = o.mean(axis=1, keepdims=True)
        np.testing.assert_allclose(out.data[:d], o - col_mean, atol=1e-12)
        np.testing.assert_allclose(out.data[d:], o * col_mean, atol=1e-12)

    def test_row_count_is_twice_d(self):
        for d in (2, 5):
            rng = np.random.default_rng(d)
            options = [Tensor(rng.normal(size=(d, 3))) for _ in range(2)]
            out = option_pair_interaction(options, 0, 1, Tensor(rng.normal(size=3 * d)))
            assert out.shape == (2 * d, 3)

    def test_zero_option_gives_zero_output(self):
        d, n = 3, 4
        rng = np.random.default_rng(4)
        options = [Tensor(np.zeros((d, n))), Tensor(rng.normal(size=(d, n)))]
        out = option_pair_interaction(options, 0, 1, Tensor(rng.normal(size=3 * d)))
        np.testing.assert_allclose(out.data, 0.0)

    def test_self_interaction_rejected(self):
        options = [Tensor(np.zeros((2, 2)))] * 2
        with pytest.raises(ValueError, match="itself"):
            option_pair_interaction(options, 1, 1, Tensor(np.zeros(6)))


class TestFuseOptionCorrelations:
    def _inputs(self, d, n, seed=0):
        rng = np.random.default_rng(seed)
        o = Tensor(rng.normal(size=(d, n)))
        partners = [Tensor(rng.normal(size=(2 * d, n))) for _ in range(3)]
        q = Tensor(rng.normal(size=d))
        return o, partners, q

    def test_gate_saturated_high_returns_option(self):
        d, n = 4, 3
        o, partners, q = self._inputs(d, n)
        params = _params(d)
        params.w_g.data[:] = 0.0
        params.b_g.data[:] = 1e4
        out = fuse_option_correlations(o, partners, q, params)
        np.testing.assert_allclose(out.data, o.data)

    def test_gate_saturated_low_returns_fused(self):
        d, n = 4, 3
        o, partners, q = self._inputs(d, n, seed=1)
        params = _params(d, seed=1)
        params.w_g.data[:] = 0.0
        params.b_g.data[:] = -1e4
        out = fuse_option_correlations(o, partners, q, params)
        stacked = np.concatenate([o.data] + [p.data for p in partners], axis=0)
        fused = np.tanh(params.w_c.data @ stacked + params.b_c.data.reshape(-1, 1))
        np.testing.assert_allclose(out.data, fused, atol=1e-12)

    @pytest.mark.parametrize("d", [4, 8, 64])
    def test_concat_height_seven_d(self, d):
        o, partners, q = self._inputs(d, 2, seed=d)
        params = _params(d, seed=d)
        stacked_height = o.shape[0] + sum(p.shape[0] for p in partners)
        assert stacked_height == 7 * d
        out = fuse_option_correlations(o, partners, q, params)
        assert out.shape == (d, 2)

    def test_wrong_partner_count_rejected(self):
        d = 4
        o, partners, q = self._inputs(d, 2)
        with pytest.raises(ValueError, match="3 partner"):
            fuse_option_correlations(o, partners[:2], q, _params(d))

    def test_gate_strictly_inside_unit_interval(self):
        d, n = 5, 3
        o, partners, q = self._inputs(d, n, seed=2)
        trace = {}
        fuse_option_correlations(o, partners, q, _params(d, seed=2), trace=trace)
        g = trace["interaction_gates"][0]
        assert np.all((g > 0) & (g < 1))


class TestCoattendWithContext:
    def test_single_context_column(self):
        d = 3
        rng = np.random.default_rng(5)
        ctx = rng.normal(size=(d, 1))
        opt = Tensor(rng.normal(size=(d, 4)))
        out = coattend_with_context(opt, Tensor(ctx), Tensor(rng.normal(size=3 * d)))
        np.testing.assert_allclose(out.data, ctx[:, 0], atol=1e-12)

    def test_zero_option_zero_scorer_gives_context_mean(self):
        d = 3
        rng = np.random.default_rng(6)
        ctx = rng.normal(size=(d, 5))
        out = coattend_with_context(
            Tensor(np.zeros((d, 2))), Tensor(ctx), Tensor(np.zeros(3 * d))
        )
        np.testing.assert_allclose(out.data, ctx.mean(axis=1), atol=1e-12)

    def test_empty_context_falls_back_to_pooled_option(self):
        d = 3
        rng = np.random.default_rng(7)
        opt = rng.normal(size=(d, 4))
        out = coattend_with_context(Tensor(opt), None, Tensor(rng.normal(size=3 * d)))
        np.testing.assert_allclose(out.data, opt.mean(axis=1))

    def test_two_by_two_hand_oracle(self):
        d = 2
        ctx = np.array([[1.0, -1.0], [0.5, 2.0]])
        opt = np.array([[0.3, 1.2], [-0.7, 0.4]])
        scorer = np.array([0.2, -0.4, 1.0, 0.3, -0.9, 0.6])
        v1, v2, v3 = scorer[:2], scorer[2:4], scorer[4:]
        summaries = np.zeros((d, 2))
        for j in range(2):
            scores = [
                v1 @ ctx[:, i] + v2 @ opt[:, j] + v3 @ (ctx[:, i] * opt[:, j])
                for i in range(2)
            ]
            e = np.exp(np.array(scores) - max(scores))
            w = e / e.sum()
            summaries[:, j] = ctx @ w
        want = summaries.mean(axis=1)
        got = coattend_with_context(Tensor(opt), Tensor(ctx), Tensor(scorer))
        np.testing.assert_allclose(got.data, want, atol=1e-12)


class TestInteractOptions:
    def test_full_pass_shape_and_determinism(self):
        d, n = 4, 5
        rng = np.random.default_rng(8)
        params = _params(d, seed=8)
        mats = [Tensor(rng.normal(size=(d, n))) for _ in range(4)]
        qs = [Tensor(rng.normal(size=d)) for _ in range(4)]
        ctxs = [Tensor(rng.normal(size=(d, 6))) for _ in range(4)]
        a = interact_options(mats, qs, ctxs, params)
        b = interact_options(mats, qs, ctxs, params)
        assert a.shape == (4, d)
        assert np.array_equal(a.data, b.data)

    def test_requires_four_options(self):
        d = 3
        with pytest.raises(ValueError, match="4 options"):
            interact_options([Tensor(np.zeros((d, 2)))] * 3, [], [], _params(d))
