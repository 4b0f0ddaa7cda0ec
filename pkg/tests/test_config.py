import json

import pytest

from focal.config import ABLATION_FLAGS, Ablations, ModelConfig


class TestDefaults:
    def test_trainable_mode(self):
        cfg = ModelConfig()
        assert cfg.d == 64
        assert cfg.learning_rate == 1e-3
        assert cfg.graph_layers == 2
        assert cfg.epochs == 10
        assert cfg.batch_size == 16
        assert cfg.weight_decay == 0.01
        assert cfg.warmup_proportion == 0.1
        assert cfg.dropout == 0.1
        assert cfg.alpha == 1.0
        assert cfg.beta == 0.5
        assert cfg.max_seq_len == 384

    def test_precomputed_mode(self):
        cfg = ModelConfig(backbone="precomputed", embeddings_path="vecs.bin")
        assert cfg.d == 1024
        assert cfg.learning_rate == 8e-6

    def test_explicit_values_win(self):
        cfg = ModelConfig(d=16, learning_rate=0.5, backbone="precomputed")
        assert (cfg.d, cfg.learning_rate) == (16, 0.5)


class TestValidation:
    @pytest.mark.parametrize("field,value", [
        ("d", 0), ("graph_layers", -1), ("epochs", 0), ("batch_size", 0),
    ])
    def test_positive_sizes(self, field, value):
        with pytest.raises(ValueError):
            ModelConfig(**{field: value})

    def test_dropout_range(self):
        with pytest.raises(ValueError):
            ModelConfig(dropout=1.0)
        ModelConfig(dropout=0.0)

    def test_alpha_positive(self):
        with pytest.raises(ValueError, match="alpha"):
            ModelConfig(alpha=0.0)

    def test_unknown_backbone(self):
        with pytest.raises(ValueError, match="backbone"):
            ModelConfig(backbone="transformer")

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            ModelConfig.from_dict({"d": 8, "learningrate": 1.0})


class TestSerialization:
    def test_dict_round_trip(self):
        cfg = ModelConfig(d=8, seed=3).with_ablations(["no_coref"])
        again = ModelConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
        assert again == cfg

    def test_hash_stable_and_sensitive(self):
        a = ModelConfig(d=8)
        b = ModelConfig(d=8)
        c = ModelConfig(d=16)
        assert a.hash() == b.hash()
        assert a.hash() != c.hash()

    def test_with_ablations_copies(self):
        base = ModelConfig(d=8)
        flagged = base.with_ablations(["no_global_atom"])
        assert not base.ablations.no_global_atom
        assert flagged.ablations.no_global_atom

    def test_flag_registry_complete(self):
        assert set(ABLATION_FLAGS) == {
            f for f in Ablations.__dataclass_fields__
        }
