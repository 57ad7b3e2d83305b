import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from vegascore.bundle import load_bundle, write_bundle
from vegascore.cli import main
from vegascore.synth import SynthConfig, generate_zoo

from conftest import random_bundle

SYNTH_CONFIG = {
    "n_models": 6,
    "alpha_range": [0.2, 0.9],
    "n_classes": 4,
    "dim": 16,
    "n_images": 60,
    "seed": 0,
}


@pytest.fixture
def zoo_dir(tmp_path):
    cfg = tmp_path / "synth.json"
    cfg.write_text(json.dumps(SYNTH_CONFIG))
    out = tmp_path / "zoo"
    assert main(["synth", "--config", str(cfg), "--out", str(out)]) == 0
    return out


def read_rows(report_path):
    return json.loads(report_path.read_text())["rows"]


class TestValidate:
    def test_valid_bundle(self, rng, tmp_path, capsys):
        write_bundle(random_bundle(rng), tmp_path / "b")
        assert main(["validate", str(tmp_path / "b")]) == 0
        assert "ok" in capsys.readouterr().out

    def test_shape_mismatch(self, rng, tmp_path, capsys):
        write_bundle(random_bundle(rng), tmp_path / "b")
        (tmp_path / "b/tensors/visual.bin").write_bytes(b"\x00" * 12)
        assert main(["validate", str(tmp_path / "b")]) == 1
        assert "bytes" in capsys.readouterr().out

    def test_missing_manifest(self, tmp_path, capsys):
        assert main(["validate", str(tmp_path / "nope")]) == 1
        assert "manifest" in capsys.readouterr().out


class TestSynth:
    def test_writes_bundles_and_manifest(self, zoo_dir):
        manifest = json.loads((zoo_dir / "zoo.json").read_text())
        assert len(manifest["entries"]) == 6
        for entry in manifest["entries"]:
            bundle = load_bundle(zoo_dir / entry["bundle_path"], normalize=False)
            assert bundle.n_classes == 4
            assert bundle.labels is not None

    def test_repeat_seed_identical(self, tmp_path):
        cfg = tmp_path / "synth.json"
        cfg.write_text(json.dumps(SYNTH_CONFIG))
        outs = []
        for name in ("z1", "z2"):
            out = tmp_path / name
            assert main(["synth", "--config", str(cfg), "--out", str(out)]) == 0
            outs.append(out)
        assert (outs[0] / "zoo.json").read_text() == (outs[1] / "zoo.json").read_text()
        entry = json.loads((outs[0] / "zoo.json").read_text())["entries"][0]
        rel = entry["bundle_path"] + "/tensors/visual.bin"
        assert (outs[0] / rel).read_bytes() == (outs[1] / rel).read_bytes()

    def test_invalid_alpha_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "synth.json"
        cfg.write_text(json.dumps({**SYNTH_CONFIG, "alpha_range": [0.5, 2.0]}))
        assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "z")]) == 1
        assert "error" in capsys.readouterr().err

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "synth.json"
        cfg.write_text(json.dumps({**SYNTH_CONFIG, "bogus": 1}))
        assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "z")]) == 1


class TestScore:
    def test_scores_all_models(self, zoo_dir, tmp_path):
        out = tmp_path / "report.json"
        assert (
            main(["score", "--zoo", str(zoo_dir / "zoo.json"), "--out", str(out)]) == 0
        )
        rows = read_rows(out)
        assert len(rows) == 6
        for row in rows:
            for col in ("s_n", "s_e", "vega", "ent_raw", "ent_score", "conf", "snd", "ds"):
                assert np.isfinite(row[col]), (row["model_id"], col)
            assert "accuracy" in row
            assert "rot" not in row
        csv_path = out.with_suffix(".csv")
        with csv_path.open() as fh:
            header = next(csv.reader(fh))
        assert header[0] == "model_id"

    def test_no_labels_no_accuracy_column(self, rng, tmp_path):
        bundles = tmp_path / "z"
        entries = []
        for i in range(3):
            b = random_bundle(rng, with_labels=False)
            b.model_id = f"m{i}"
            write_bundle(b, bundles / f"m{i}")
            entries.append({"model_id": f"m{i}", "bundle_path": f"m{i}"})
        (bundles / "zoo.json").write_text(
            json.dumps({"dataset_id": "d", "entries": entries})
        )
        out = tmp_path / "report.json"
        assert main(["score", "--zoo", str(bundles / "zoo.json"), "--out", str(out)]) == 0
        for row in read_rows(out):
            assert "accuracy" not in row
            assert np.isfinite(row["vega"])

    def test_rot_column_present(self, rng, tmp_path):
        bundles = tmp_path / "z"
        b = random_bundle(rng, with_rot=True)
        write_bundle(b, bundles / "m0")
        b2 = random_bundle(rng, with_rot=True)
        b2.model_id = "m1"
        write_bundle(b2, bundles / "m1")
        (bundles / "zoo.json").write_text(
            json.dumps(
                {
                    "dataset_id": "d",
                    "entries": [
                        {"model_id": "m0", "bundle_path": "m0"},
                        {"model_id": "m1", "bundle_path": "m1"},
                    ],
                }
            )
        )
        out = tmp_path / "report.json"
        main(["score", "--zoo", str(bundles / "zoo.json"), "--out", str(out)])
        assert all(0.0 <= row["rot"] <= 1.0 for row in read_rows(out))

    def test_corrupt_bundle_isolated(self, zoo_dir, tmp_path):
        manifest = json.loads((zoo_dir / "zoo.json").read_text())
        victim = manifest["entries"][2]["bundle_path"]
        (zoo_dir / victim / "tensors/visual.bin").write_bytes(b"\x00" * 8)
        out = tmp_path / "report.json"
        assert (
            main(["score", "--zoo", str(zoo_dir / "zoo.json"), "--out", str(out)]) == 1
        )
        rows = read_rows(out)
        assert len(rows) == 6
        assert "error" in rows[2]
        assert sum("error" in r for r in rows) == 1
        assert all(np.isfinite(r["vega"]) for r in rows if "error" not in r)

    def test_deterministic_and_worker_invariant(self, zoo_dir, tmp_path):
        reports = []
        for name, workers in (("a", "1"), ("b", "1"), ("c", "3")):
            out = tmp_path / f"{name}.json"
            main(
                [
                    "score",
                    "--zoo",
                    str(zoo_dir / "zoo.json"),
                    "--out",
                    str(out),
                    "--workers",
                    workers,
                ]
            )
            reports.append(read_rows(out))
        for rows in reports[1:]:
            for row, base in zip(rows, reports[0]):
                for key, value in base.items():
                    if key != "wall_time":
                        assert row[key] == value

    def test_config_echo_and_overrides(self, zoo_dir, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"t": 0.1, "cov_mode": "full", "snd_tau": 0.2}))
        out = tmp_path / "report.json"
        main(
            [
                "score",
                "--zoo",
                str(zoo_dir / "zoo.json"),
                "--config",
                str(cfg),
                "--out",
                str(out),
                "--no-normalize",
                "--exclude-diagonal",
            ]
        )
        echo = json.loads(out.read_text())["config"]
        assert echo["t"] == 0.1
        assert echo["cov_mode"] == "full"
        assert echo["snd_tau"] == 0.2
        assert echo["normalize"] is False
        assert echo["exclude_diagonal"] is True

    def test_unknown_config_key(self, zoo_dir, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"temperature": 0.1}))
        code = main(
            [
                "score",
                "--zoo",
                str(zoo_dir / "zoo.json"),
                "--config",
                str(cfg),
                "--out",
                str(tmp_path / "r.json"),
            ]
        )
        assert code == 1
        assert "unknown config key" in capsys.readouterr().err


class TestRank:
    @pytest.fixture
    def report(self, zoo_dir, tmp_path):
        out = tmp_path / "report.json"
        main(["score", "--zoo", str(zoo_dir / "zoo.json"), "--out", str(out)])
        return out

    def test_metrics_and_scatter(self, report, tmp_path):
        out = tmp_path / "metrics.json"
        assert (
            main(["rank", "--report", str(report), "--method", "vega", "--out", str(out)])
            == 0
        )
        metrics = json.loads(out.read_text())
        for key in ("r5", "tau5", "tau", "top1_acc", "oracle"):
            assert np.isfinite(metrics[key])
        assert metrics["method"] == "vega"
        scatter = tmp_path / "metrics_scatter.csv"
        with scatter.open() as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["accuracy", "score"]
        assert len(rows) == 1 + 6
        with (tmp_path / "metrics.csv").open() as fh:
            mirror = list(csv.reader(fh))
        assert mirror[0][0] == "method"
        assert mirror[1][0] == "vega"

    def test_accuracy_column_ranks_perfectly(self, report, tmp_path):
        out = tmp_path / "metrics.json"
        main(["rank", "--report", str(report), "--method", "accuracy", "--out", str(out)])
        metrics = json.loads(out.read_text())
        assert metrics["tau"] == 1.0
        assert metrics["r5"] == 1.0
        assert metrics["top1_acc"] == metrics["oracle"]

    def test_unknown_method(self, report, tmp_path, capsys):
        code = main(
            ["rank", "--report", str(report), "--method", "zmagic", "--out", str(tmp_path / "m.json")]
        )
        assert code == 1
        assert "unknown method" in capsys.readouterr().err

    def test_missing_accuracy(self, rng, tmp_path, capsys):
        bundles = tmp_path / "z"
        entries = []
        for i in range(5):
            b = random_bundle(rng, with_labels=False)
            b.model_id = f"m{i}"
            write_bundle(b, bundles / f"m{i}")
            entries.append({"model_id": f"m{i}", "bundle_path": f"m{i}"})
        (bundles / "zoo.json").write_text(
            json.dumps({"dataset_id": "d", "entries": entries})
        )
        report = tmp_path / "report.json"
        main(["score", "--zoo", str(bundles / "zoo.json"), "--out", str(report)])
        code = main(
            ["rank", "--report", str(report), "--method", "vega", "--out", str(tmp_path / "m.json")]
        )
        assert code == 1
        assert "no accuracy" in capsys.readouterr().err


class TestAblate:
    def test_components_and_sweep(self, zoo_dir, tmp_path):
        out = tmp_path / "ablation.json"
        assert (
            main(["ablate", "--zoo", str(zoo_dir / "zoo.json"), "--out", str(out)]) == 0
        )
        payload = json.loads(out.read_text())
        assert [c["method"] for c in payload["components"]] == ["s_n", "s_e", "vega"]
        temps = [s["t"] for s in payload["temperature_sweep"]]
        assert temps == sorted(temps) == [0.005, 0.01, 0.05, 0.1, 0.5]
        for row in payload["components"] + payload["temperature_sweep"]:
            for key in ("r5", "tau5", "tau", "top1_acc", "oracle"):
                assert np.isfinite(row[key])
        assert out.with_suffix(".csv").exists()

    def test_missing_labels_rejected(self, rng, tmp_path, capsys):
        bundles = tmp_path / "z"
        entries = []
        for i in range(5):
            b = random_bundle(rng, with_labels=False)
            b.model_id = f"m{i}"
            write_bundle(b, bundles / f"m{i}")
            entries.append({"model_id": f"m{i}", "bundle_path": f"m{i}"})
        (bundles / "zoo.json").write_text(
            json.dumps({"dataset_id": "d", "entries": entries})
        )
        code = main(
            ["ablate", "--zoo", str(bundles / "zoo.json"), "--out", str(tmp_path / "a.json")]
        )
        assert code == 1
        assert "labels" in capsys.readouterr().err


class TestManifestValidation:
    def test_duplicate_model_ids(self, rng, tmp_path, capsys):
        b = random_bundle(rng)
        write_bundle(b, tmp_path / "m0")
        (tmp_path / "zoo.json").write_text(
            json.dumps(
                {
                    "dataset_id": "d",
                    "entries": [
                        {"model_id": "m0", "bundle_path": "m0"},
                        {"model_id": "m0", "bundle_path": "m0"},
                    ],
                }
            )
        )
        code = main(
            ["score", "--zoo", str(tmp_path / "zoo.json"), "--out", str(tmp_path / "r.json")]
        )
        assert code == 1
        assert "duplicate" in capsys.readouterr().err


class TestEntryPoint:
    def test_installed_console_script(self, tmp_path):
        out = subprocess.run(
            [sys.executable, "-m", "vegascore.cli", "--version"],
            capture_output=True,
            text=True,
        )
        assert out.returncode == 0
        assert out.stdout.strip()
