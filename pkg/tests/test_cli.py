import json

import pytest

from focal.cli import main
from focal.corpus import save_dataset
from focal.synthetic import make_overfit_dataset


@pytest.fixture(scope="module")
def synth_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "synth.json"
    save_dataset(make_overfit_dataset(6, seed=0), path)
    return path


class TestExtract:
    def test_writes_triplet_lines(self, fixtures_dir, tmp_path):
        out = tmp_path / "trips.jsonl"
        code = main([
            "extract", "--data", str(fixtures_dir / "ten_sentences.json"), "--out", str(out)
        ])
        assert code == 0
        lines = [json.loads(l) for l in out.read_text().splitlines()]
        assert len(lines) == 14  # 10 context facts + 1 per option
        first = lines[0]
        assert first["source"] == "context"
        assert first["subject"]["text"] == "Ann"
        assert first["predicate"]["span"] == [1, 2]

    def test_validate_only(self, fixtures_dir, capsys):
        code = main([
            "extract", "--data", str(fixtures_dir / "ten_sentences.json"), "--validate-only"
        ])
        assert code == 0
        assert "ok: 1 examples" in capsys.readouterr().out

    def test_invalid_dataset_exits_2(self, fixtures_dir):
        code = main([
            "extract", "--data", str(fixtures_dir / "bad_three_options.json"), "--validate-only"
        ])
        assert code == 2

    def test_missing_file_exits_2(self, tmp_path):
        assert main(["extract", "--data", str(tmp_path / "nope.json")]) == 2


class TestGraph:
    def test_dot_output(self, fixtures_dir, tmp_path):
        out = tmp_path / "g.dot"
        code = main([
            "graph", "--data", str(fixtures_dir / "ten_sentences.json"),
            "--dot", "--out", str(out),
        ])
        assert code == 0
        text = out.read_text()
        assert "digraph S {" in text
        assert '[label="default-in"]' in text

    def test_stats_lines(self, fixtures_dir, tmp_path):
        out = tmp_path / "stats.jsonl"
        code = main([
            "graph", "--data", str(fixtures_dir / "ten_sentences.json"),
            "--stats", "--out", str(out),
        ])
        assert code == 0
        recs = [json.loads(l) for l in out.read_text().splitlines()]
        assert len(recs) == 4  # one per option
        assert recs[0]["context_facts"] == 10
        assert recs[0]["nodes"] == 3 * recs[0]["facts"] + 1

    def test_ablated_graph_stats(self, fixtures_dir, tmp_path):
        out = tmp_path / "stats.jsonl"
        code = main([
            "graph", "--data", str(fixtures_dir / "ten_sentences.json"),
            "--stats", "--ablate", "no_global_atom,no_coref", "--out", str(out),
        ])
        assert code == 0
        rec = json.loads(out.read_text().splitlines()[0])
        assert rec["global_edges"] == 0
        assert rec["coref_edges"] == 0

    def test_unknown_ablation_exits_2(self, fixtures_dir):
        code = main([
            "graph", "--data", str(fixtures_dir / "ten_sentences.json"),
            "--stats", "--ablate", "bogus",
        ])
        assert code == 2


class TestTrainEvalPredict:
    def test_round_trip(self, synth_file, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({
            "d": 8, "graph_layers": 2, "epochs": 2, "batch_size": 3,
            "learning_rate": 0.01, "dropout": 0.0, "seed": 0,
        }))
        ckpt = tmp_path / "model.npz"
        log = tmp_path / "log.jsonl"
        code = main([
            "train", "--data", str(synth_file), "--config", str(cfg_path),
            "--out", str(ckpt), "--log", str(log),
        ])
        assert code == 0
        summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert 0.0 <= summary["best_dev_acc"] <= 1.0
        assert ckpt.exists()
        assert any(
            json.loads(l).get("dev_acc") is not None
            for l in log.read_text().splitlines()[1:]
        )

        code = main(["eval", "--data", str(synth_file), "--checkpoint", str(ckpt)])
        assert code == 0
        result = json.loads(capsys.readouterr().out.strip())
        assert result["n"] == 6

        preds = tmp_path / "preds.jsonl"
        code = main([
            "predict", "--data", str(synth_file), "--checkpoint", str(ckpt),
            "--out", str(preds),
        ])
        assert code == 0
        lines = [json.loads(l) for l in preds.read_text().splitlines()]
        assert len(lines) == 6
        assert all(len(l["logits"]) == 4 for l in lines)
        assert all(l["prediction"] == l["logits"].index(max(l["logits"])) for l in lines)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_numeric_abort_exits_3(self, synth_file, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({
            "d": 8, "epochs": 3, "batch_size": 6, "dropout": 0.0, "seed": 0,
            "learning_rate": 1e140, "grad_clip_norm": None,
        }))
        code = main(["train", "--data", str(synth_file), "--config", str(cfg_path)])
        assert code == 3

    def test_seed_override_changes_hash(self, synth_file, tmp_path, capsys):
        ckpt = tmp_path / "m.npz"
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({
            "d": 8, "epochs": 1, "batch_size": 6, "dropout": 0.0, "seed": 0,
        }))
        code = main([
            "train", "--data", str(synth_file), "--config", str(cfg_path),
            "--seed", "42", "--out", str(ckpt),
        ])
        assert code == 0
        from focal.training import load_checkpoint

        assert load_checkpoint(ckpt).config.seed == 42
