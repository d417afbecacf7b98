import csv
import json

import pytest

from otapriv.config import paper_default_config, save_config, config_to_json
from otapriv.cli import main, EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME


@pytest.fixture
def cfg_path(tmp_path):
    path = tmp_path / "cfg.json"
    save_config(paper_default_config(), path)
    return str(path)


class TestValidate:
    def test_valid_config(self, cfg_path, capsys):
        assert main(["validate", "--config", cfg_path]) == EXIT_OK
        assert "config ok" in capsys.readouterr().out

    def test_invalid_config(self, tmp_path, capsys):
        obj = config_to_json(paper_default_config())
        obj["gamma"] = -2.0
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(obj))
        assert main(["validate", "--config", str(path)]) == EXIT_VALIDATION
        assert "gamma" in capsys.readouterr().err

    def test_unreadable_config(self, capsys):
        assert main(["validate", "--config", "/nonexistent.json"]) == EXIT_VALIDATION

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["validate", "--config", str(path)]) == EXIT_VALIDATION


class TestRun:
    def test_writes_report(self, cfg_path, tmp_path):
        out = tmp_path / "report.json"
        code = main(["run", "--config", cfg_path, "--trials", "100",
                     "--out", str(out)])
        assert code == EXIT_OK
        report = json.loads(out.read_text())
        assert report["trials"] == 100
        assert len(report["budgets"]) == 12

    def test_stdout_report(self, capsys):
        assert main(["run", "--trials", "50"]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["trials"] == 50

    def test_seed_override_changes_hash(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["run", "--trials", "50", "--seed", "1", "--out", str(a)])
        main(["run", "--trials", "50", "--seed", "2", "--out", str(b)])
        assert (json.loads(a.read_text())["config_hash"]
                != json.loads(b.read_text())["config_hash"])


class TestSweep:
    def test_uniform_sweep_csv(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(["sweep", "--trials", "200", "--mode", "uniform",
                     "--out", str(out)])
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0].startswith("#")
        with open(out) as fh:
            fh.readline()
            rows = list(csv.DictReader(fh))
        assert len(rows) == 8
        assert "eps_target" in rows[0] and "mode" not in rows[0]

    def test_all_modes_adds_mode_column(self, tmp_path):
        out = tmp_path / "modes.csv"
        code = main(["sweep", "--trials", "200", "--mode", "all",
                     "--out", str(out)])
        assert code == EXIT_OK
        with open(out) as fh:
            fh.readline()
            rows = list(csv.DictReader(fh))
        assert len(rows) == 24
        assert {r["mode"] for r in rows} == {"uniform", "weight", "clip"}

    def test_unwritable_output_is_runtime_error(self):
        code = main(["sweep", "--trials", "200", "--mode", "uniform",
                     "--out", "/nonexistent-dir/sweep.csv"])
        assert code == EXIT_RUNTIME


class TestAccept:
    def test_list_flag(self, capsys):
        assert main(["accept", "--list"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.count("\n") == 10
        assert "1:" in out and "10:" in out
