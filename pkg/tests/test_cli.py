import csv
import json
import os

import pytest

from ben_rl.Cli import main
from ben_rl.Cli.Presets import PRESETS, ablation_variants, get_preset
from ben_rl.Cli.RunConfig import deep_merge, resolve_run_config
from ben_rl.Errors import ConfigError

HEADER = ["seed", "episode", "t", "action", "reward", "cum_return", "victims_saved", "hazards_hit", "msbbe", "elbo"]

SMALL_TIGER = {
    "experiment": {"name": "smoke"},
    "environment": {"name": "tiger"},
    "model": {"qnet": {"hidden_dim": 4, "encoding_dim": 2}, "aleatoric": {"n_layers": 1, "context_width": 2}},
    "train": {"n_pretrain": 2, "max_steps": 3, "n_update": 1},
    "seeds": [0, 1],
}


def _write_config(tmp_path, document):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(document))
    return str(path)


def _read_csv(path):
    with open(path, newline="") as metrics_file:
        return list(csv.reader(metrics_file))


class TestRunConfig:
    def test_layers_flags_over_file_over_preset(self):
        config = resolve_run_config({"train": {"n_pretrain": 7}}, preset="tiger", seed=3, out="elsewhere")
        assert config.train.n_pretrain == 7
        assert config.train.lr_omega == 0.005 and config.train.msbbe_batch == 4
        assert config.qnet["q_scale"] == 100.0
        assert config.seeds == (3,)
        assert config.output_dir == "elsewhere"
        assert config.name == "tiger"

    def test_output_dir_from_environment(self):
        config = resolve_run_config({"environment": {"name": "tiger"}}, environ={"BEN_OUT_DIR": "/tmp/ben"})
        assert config.output_dir == "/tmp/ben"
        assert resolve_run_config({"environment": {"name": "tiger"}}, environ={}).output_dir == "runs"

    @pytest.mark.parametrize(
        "document",
        [
            {"environment": {"name": "tiger"}, "trian": {}},
            {"environment": {"name": "tiger"}, "train": {"lr": 0.1}},
            {"environment": {"name": "tiger"}, "model": {"qnet": {"layers": 2}}},
            {"environment": {"name": "tiger"}, "seeds": 3},
            {"environment": {"args": {}}},
            {"environment": {"name": "tiger"}, "train": {"mode": "forever"}},
        ],
        ids=["section", "train key", "qnet key", "seeds", "env name", "mode"],
    )
    def test_rejects_bad_documents(self, document):
        with pytest.raises(ConfigError):
            resolve_run_config(document)

    def test_resolved_document_has_every_default(self):
        document = resolve_run_config(SMALL_TIGER).to_document()
        assert document["environment"]["args"]["r_tiger"] == -500.0
        assert document["train"]["truncation"] == 64
        assert document["model"]["qnet"]["hidden_dim"] == 4
        assert document["model"]["aleatoric"]["output_scale"] == 10.0

    def test_deep_merge_keeps_siblings(self):
        merged = deep_merge({"train": {"a": 1, "b": 2}}, {"train": {"b": 3}})
        assert merged == {"train": {"a": 1, "b": 3}}


class TestPresets:
    def test_known_presets(self):
        assert {"tiger", "tiger_fig8", "sar_episodic", "sar_weak_prior", "sar_zero_shot"} <= set(PRESETS)
        labels = [label for label, _ in get_preset("tiger_fig8")["variants"]]
        assert labels == ["msbbe_steps_1", "msbbe_steps_5", "msbbe_steps_20"]

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            get_preset("atari")

    def test_ablation_axes(self):
        assert [o["model"]["aleatoric"]["n_layers"] for _, o in ablation_variants("aleatoric_layers")] == [1, 2, 3, 4]
        assert [label for label, _ in ablation_variants("pretrain_steps", (0, 10))] == ["pretrain_steps_0", "pretrain_steps_10"]
        assert [label for label, _ in ablation_variants("contextual")] == ["ben", "contextual"]
        with pytest.raises(ConfigError):
            ablation_variants("width")


class TestRun:
    def test_writes_metrics_and_provenance(self, tmp_path):
        out = tmp_path / "out"
        assert main(["run", _write_config(tmp_path, SMALL_TIGER), "--out", str(out)]) == 0
        run_dir = out / "smoke"
        rows = _read_csv(run_dir / "metrics_default.csv")
        assert rows[0] == HEADER
        assert len(rows) == 1 + 2 * 3
        assert [row[0] for row in rows[1:]] == ["0"] * 3 + ["1"] * 3
        resolved = json.loads((run_dir / "resolved_config.json").read_text())
        assert resolved["seeds"] == [0, 1]
        assert "default" in resolved["variants"]
        received = json.loads((run_dir / "config_as_received.json").read_text())
        assert received["file"] == SMALL_TIGER

    def test_reruns_are_byte_identical(self, tmp_path):
        config = _write_config(tmp_path, SMALL_TIGER)
        main(["run", config, "--out", str(tmp_path / "a")])
        main(["run", config, "--out", str(tmp_path / "b")])
        first = (tmp_path / "a" / "smoke" / "metrics_default.csv").read_bytes()
        second = (tmp_path / "b" / "smoke" / "metrics_default.csv").read_bytes()
        assert first == second

    def test_preset_variants_get_their_own_files(self, tmp_path):
        document = {
            "experiment": {"name": "fig8"},
            "model": {"qnet": {"hidden_dim": 4}},
            "train": {"n_pretrain": 1, "max_steps": 2},
        }
        code = main(["run", _write_config(tmp_path, document), "--preset", "tiger_fig8", "--seed", "0", "--out", str(tmp_path)])
        assert code == 0
        names = sorted(os.listdir(tmp_path / "fig8"))
        assert [n for n in names if n.startswith("metrics_")] == [
            "metrics_msbbe_steps_1.csv", "metrics_msbbe_steps_20.csv", "metrics_msbbe_steps_5.csv",
        ]

    def test_unknown_preset_fails_without_files(self, tmp_path):
        assert main(["run", "--preset", "atari", "--out", str(tmp_path)]) == 1
        assert os.listdir(tmp_path) == []

    def test_bad_config_key_fails_without_files(self, tmp_path):
        out = tmp_path / "out"
        config = _write_config(tmp_path, {**SMALL_TIGER, "train": {"n_pretran": 2}})
        assert main(["run", config, "--out", str(out)]) == 1
        assert not out.exists()

    def test_unreadable_config(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["run", str(bad), "--out", str(tmp_path / "out")]) == 1
        assert main(["run", str(tmp_path / "missing.json")]) == 1

    def test_ablation_writes_one_file_per_setting(self, tmp_path):
        document = {**SMALL_TIGER, "seeds": [0], "train": {"n_pretrain": 1, "max_steps": 2}}
        config = _write_config(tmp_path, document)
        assert main(["ablate", config, "--axis", "contextual", "--out", str(tmp_path)]) == 0
        run_dir = tmp_path / "smoke_ablate_contextual"
        assert (run_dir / "metrics_ben.csv").exists()
        assert (run_dir / "metrics_contextual.csv").exists()
        resolved = json.loads((run_dir / "resolved_config.json").read_text())
        assert resolved["variants"]["contextual"]["model"]["qnet"]["history_mode"] == "contextual"


class TestOracle:
    def test_prints_and_writes_the_table(self, tmp_path, capsys):
        assert main(["oracle", "--out", str(tmp_path), "--resolution", "501"]) == 0
        printed = capsys.readouterr().out
        assert "q_correct" in printed and "V(0.5)" in printed
        rows = {row[0]: row for row in _read_csv(tmp_path / "oracle" / "oracle.csv")[1:]}
        assert float(rows["q_correct"][1]) == pytest.approx(100.0)
        assert float(rows["q_wrong"][1]) == pytest.approx(-410.0)
        assert float(rows["J_QBRL"][1]) == pytest.approx(-155.0)
        assert float(rows["J_listen"][1]) == pytest.approx(-10.0)
        assert float(rows["V(0.5)"][1]) > -10.0
        assert rows["q_wrong"][4] == "-155.000000"
        assert (tmp_path / "oracle" / "resolved_config.json").exists()

    def test_custom_parameters_drop_reported_values(self, tmp_path):
        config = _write_config(tmp_path, {"environment": {"name": "tiger", "args": {"r_gold": 20.0}}})
        assert main(["oracle", config, "--out", str(tmp_path), "--resolution", "501"]) == 0
        rows = {row[0]: row for row in _read_csv(tmp_path / "oracle" / "oracle.csv")[1:]}
        assert float(rows["q_correct"][1]) == pytest.approx(200.0)
        assert rows["q_wrong"][4] == ""

    def test_rollout_rows(self, tmp_path):
        assert main(["oracle", "--out", str(tmp_path), "--resolution", "501", "--rollouts", "200"]) == 0
        methods = [row[3] for row in _read_csv(tmp_path / "oracle" / "oracle.csv")[1:]]
        assert methods.count("rollouts (n=200)") == 3

    def test_only_tiger_has_oracles(self, tmp_path):
        config = _write_config(tmp_path, {"environment": {"name": "search_rescue"}})
        assert main(["oracle", config, "--out", str(tmp_path / "out")]) == 1


def test_usage_errors_exit_with_one():
    assert main([]) == 1
    assert main(["run", "--workers", "many"]) == 1
