import csv
import json
import math

import numpy as np
import pytest

from otapriv.config import paper_default_config
from otapriv.accountant import AccountantInput, epsilon_for_device
from otapriv.analysis import SWEEP_CSV_COLUMNS
from otapriv.harness import (
    DEFAULT_EPS_GRID,
    MODES,
    SweepSpec,
    apply_mode,
    run_mode_comparison,
    run_single,
    run_sweep,
    report_to_json,
    sensitive_indices,
    write_csv,
)

FAST = SweepSpec(eps_grid=(10.0, 100.0), trials_per_point=200,
                 targets_per_point=10, mse_trials=200)


class TestModes:
    def test_uniform_unchanged(self):
        cfg = paper_default_config()
        assert apply_mode(cfg, "uniform", 0.5, 0.5) == cfg

    def test_weight_mode_downweights_sensitive_half(self):
        cfg = paper_default_config()
        out = apply_mode(cfg, "weight", 0.5, 0.5)
        sens = sensitive_indices(12, 0.5)
        assert sens == list(range(6))
        w = out.w()
        # sensitive devices get half the weight of the others...
        assert np.allclose(w[:6] * 2, w[6:])
        # ...and the total weight is preserved
        assert w.sum() == pytest.approx(cfg.w().sum())

    def test_clip_mode_scales_sensitive_bounds(self):
        cfg = paper_default_config()
        out = apply_mode(cfg, "clip", 0.5, 0.5)
        np.testing.assert_allclose(out.clips()[:6], 50.0)
        np.testing.assert_allclose(out.clips()[6:], 100.0)

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            apply_mode(paper_default_config(), "mystery", 0.5, 0.5)


class TestSweep:
    def test_row_schema_matches_contract(self):
        rows = run_sweep(paper_default_config(), FAST)
        assert len(rows) == 2
        for row in rows:
            assert list(row.keys()) == SWEEP_CSV_COLUMNS

    def test_sensitive_device_hits_target(self):
        cfg = paper_default_config()
        rows = run_sweep(cfg, FAST)
        for row in rows:
            scaled = cfg.scale_sigma(row["sigma_sq"] / cfg.devices[0].sigma_sq)
            eps0 = epsilon_for_device(
                0, AccountantInput.from_config(scaled)).eps
            assert eps0 == pytest.approx(row["eps_target"], rel=1e-4)

    def test_eps_actual_is_max_over_devices(self):
        cfg = paper_default_config()
        spec = SweepSpec(eps_grid=(10.0,), trials_per_point=200,
                         targets_per_point=5, mse_trials=200, mode="weight")
        row = run_sweep(cfg, spec)[0]
        # non-sensitive devices keep larger weights, hence larger budgets
        assert row["eps_actual"] >= row["eps_target"]

    def test_single_eps_grid_single_row(self):
        spec = SweepSpec(eps_grid=(50.0,), trials_per_point=200,
                         targets_per_point=5, mse_trials=200)
        rows = run_sweep(paper_default_config(), spec)
        assert len(rows) == 1

    def test_invalid_spec_rejected(self):
        with pytest.raises(ValueError):
            run_sweep(paper_default_config(),
                      SweepSpec(eps_grid=(5.0, 2.0)))
        with pytest.raises(ValueError):
            run_sweep(paper_default_config(), SweepSpec(mode="nope"))

    def test_mode_comparison_adds_mode_column(self):
        rows = run_mode_comparison(paper_default_config(), FAST)
        assert len(rows) == 6
        assert {r["mode"] for r in rows} == set(MODES)
        for row in rows:
            assert list(row.keys()) == ["mode"] + SWEEP_CSV_COLUMNS


class TestCsv:
    def test_written_file_round_trips(self, tmp_path):
        rows = run_sweep(paper_default_config(), FAST)
        path = tmp_path / "sweep.csv"
        write_csv(path, rows, SWEEP_CSV_COLUMNS, header_comment="meta")
        lines = path.read_text().splitlines()
        assert lines[0] == "# meta"
        with open(path) as fh:
            fh.readline()  # comment
            parsed = list(csv.DictReader(fh))
        assert len(parsed) == len(rows)
        assert float(parsed[0]["eps_target"]) == rows[0]["eps_target"]

    def test_columns_are_frozen_contract(self):
        assert SWEEP_CSV_COLUMNS == [
            "eps_target", "eps_actual", "sigma_sq",
            "mse_bound_total", "mse_bound_noise", "mse_bound_weighting",
            "mse_bound_cross", "mse_empirical", "mse_stderr",
            "p0", "acc_lower_bound", "acc_empirical", "acc_stderr",
            "trials", "seed",
        ]


class TestRunSingle:
    def test_default_report_shape(self):
        report = run_single(paper_default_config(), trials=200)
        assert len(report["budgets"]) == 12
        assert set(report["mse_bound"]) == {
            "noise_term", "weighting_term", "cross_term", "total"}
        assert 0.0 <= report["accuracy"]["estimate"] <= 1.0
        assert len(report["power_audit"]) == 12
        # default parameters sit in the infinite-budget regime
        assert all(row["eps_k"] == "inf" for row in report["budgets"])

    def test_report_is_json_serializable(self):
        blob = report_to_json(run_single(paper_default_config(), trials=100))
        parsed = json.loads(blob)
        assert parsed["trials"] == 100

    def test_same_seed_byte_identical(self):
        a = report_to_json(run_single(paper_default_config(), 300))
        b = report_to_json(run_single(paper_default_config(), 300))
        assert a == b

    def test_noiseless_report(self):
        from otapriv.analysis import noiseless_config
        from otapriv.acceptance import single_device_config
        cfg = noiseless_config(single_device_config(master_seed=3))
        report = run_single(cfg, trials=100)
        assert report["mse_empirical"]["estimate"] == pytest.approx(0.0, abs=1e-18)
        assert report["accuracy"]["estimate"] == 1.0
