import numpy as np
import pytest

from focal import autodiff as ad
from focal.autodiff import Tape
from focal.config import ABLATION_FLAGS, ModelConfig
from focal.corpus import write_embeddings, load_embeddings
from focal.encoders import Dropout
from focal.model import FocalReasoner, build_model
from focal.synthetic import make_overfit_dataset, make_tiny_example


@pytest.fixture(scope="module")
def tiny():
    return make_tiny_example(negative_question=True)


@pytest.fixture(scope="module")
def tiny_model(tiny):
    cfg = ModelConfig(d=8, graph_layers=2, seed=1, dropout=0.0)
    return build_model(cfg, [tiny])


class TestForward:
    def test_deterministic_bitwise(self, tiny, tiny_model):
        a = tiny_model.forward(tiny)
        b = tiny_model.forward(tiny)
        assert np.array_equal(a.logits, b.logits)
        assert float(a.loss.data) == float(b.loss.data)

    def test_four_logits_and_prediction(self, tiny, tiny_model):
        res = tiny_model.forward(tiny)
        assert res.logits.shape == (4,)
        assert res.prediction == int(np.argmax(res.logits))

    def test_loss_composition(self, tiny):
        base = ModelConfig(d=8, graph_layers=2, seed=3, dropout=0.0)
        m_half = build_model(base, [tiny])
        m_zero = build_model(
            ModelConfig.from_dict({**base.to_dict(), "beta": 0.0}), [tiny]
        )
        r_half = m_half.forward(tiny)
        r_zero = m_zero.forward(tiny)
        diff = float(r_half.loss.data) - float(r_zero.loss.data)
        assert abs(diff - 0.5 * float(r_half.l_lfr.data)) <= 1e-9

    def test_no_label_skips_loss(self, tiny, tiny_model):
        from dataclasses import replace

        unlabeled = replace(tiny, label=None)
        res = tiny_model.forward(unlabeled)
        assert res.loss is None and res.l_ans is None
        assert res.l_lfr is not None

    def test_trace_gates_strictly_inside_unit_interval(self, tiny, tiny_model):
        trace = {}
        tiny_model.forward(tiny, trace=trace)
        for key in ("graph_gates", "interaction_gates", "lambda", "decoder_gate"):
            assert trace[key], key
            for g in trace[key]:
                assert np.all((g > 0) & (g < 1)), key

    def test_trace_attention_columns_sum_to_one(self, tiny, tiny_model):
        trace = {}
        tiny_model.forward(tiny, trace=trace)
        assert trace["attention"]
        for attn in trace["attention"]:
            np.testing.assert_allclose(
                attn.sum(axis=0), np.ones(attn.shape[1]), atol=1e-12
            )

    def test_dropout_changes_outputs_but_not_eval(self, tiny, tiny_model):
        rng = np.random.default_rng(0)
        drop = Dropout(0.5, rng)
        noisy = tiny_model.forward(tiny, drop=drop)
        clean = tiny_model.forward(tiny)
        assert not np.array_equal(noisy.logits, clean.logits)
        again = tiny_model.forward(tiny)
        assert np.array_equal(clean.logits, again.logits)


class TestAblations:
    def test_every_flag_runs_and_perturbs(self, tiny):
        base_cfg = ModelConfig(d=8, graph_layers=2, seed=1, dropout=0.0)
        base_model = build_model(base_cfg, [tiny])
        base_res = base_model.forward(tiny)
        for flag in ABLATION_FLAGS:
            cfg = base_cfg.with_ablations([flag])
            res = build_model(cfg, [tiny]).forward(tiny)
            assert res.logits.shape == (4,)
            if flag == "beta_zero":
                changed = float(res.loss.data) != float(base_res.loss.data)
            else:
                changed = not np.array_equal(res.logits, base_res.logits)
            assert changed, f"ablation {flag} left the forward pass unchanged"

    def test_manifest_reflects_flags(self):
        cfg = ModelConfig(d=8).with_ablations(["no_coref", "beta_zero"])
        manifest = cfg.run_manifest()
        assert manifest["ablations"] == ["no_coref", "beta_zero"]
        assert manifest["beta"] == 0.0
        assert ModelConfig(d=8, graph_layers=2).run_manifest()["layers"] == 2

    def test_unknown_flag_rejected(self):
        with pytest.raises(ValueError, match="unknown ablation"):
            ModelConfig().with_ablations(["definitely_not_a_flag"])


class TestPrecomputedBackbone:
    def _embedding_file(self, example, d, tmp_path):
        rng = np.random.default_rng(9)
        per_example = {
            example.example_id: {
                (s.sent_id, t.index): rng.normal(size=d).astype(np.float32)
                for s in example.all_sentences()
                for t in s.tokens
            }
        }
        path = tmp_path / "vecs.bin"
        write_embeddings(path, d, per_example)
        return load_embeddings(path, [example], expected_d=d)

    def test_forward_with_frozen_vectors(self, tiny, tmp_path):
        emb = self._embedding_file(tiny, 8, tmp_path)
        cfg = ModelConfig(d=8, backbone="precomputed", seed=1, dropout=0.0)
        model = FocalReasoner(cfg, embedding_file=emb)
        res = model.forward(tiny)
        assert res.logits.shape == (4,)
        # Only the special-token table is trainable in the backbone.
        names = [n for n in model.parameters() if n.startswith("backbone")]
        assert names == ["backbone.special"]

    def test_gradients_reach_special_table(self, tiny, tmp_path):
        emb = self._embedding_file(tiny, 8, tmp_path)
        cfg = ModelConfig(d=8, backbone="precomputed", seed=1, dropout=0.0)
        model = FocalReasoner(cfg, embedding_file=emb)
        with Tape() as tape:
            res = model.forward(tiny)
            tape.backward(res.loss)
        special = model.parameters()["backbone.special"]
        assert special.grad is not None and np.any(special.grad != 0)


class TestGradientIntegritySmall:
    def test_sampled_full_model_gradcheck(self, tiny):
        cfg = ModelConfig(d=8, graph_layers=2, seed=1, dropout=0.0)
        model = build_model(cfg, [tiny])
        params = model.parameters()

        report = ad.gradient_check(
            lambda: model.forward(tiny).loss,
            params,
            eps=1e-5,
            tol=1e-4,
            max_coords_per_param=3,
            seed=0,
        )
        assert report.ok, str(report)
