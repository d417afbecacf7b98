"""Experiment driver: single runs, epsilon sweeps over privacy-customization
modes, and CSV/JSON report emission."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .config import SystemConfig, config_hash, validated
from .accountant import (AccountantInput, all_budgets, budget_table_rows,
                         calibrate_sigma, BUDGET_CSV_COLUMNS)
from .channel import audit_power, power_report_rows, POWER_CSV_COLUMNS
from .analysis import (SWEEP_CSV_COLUMNS, accuracy_lower_bound, build_scenario,
                       empirical_accuracy, empirical_mse, estimate_p0,
                       mse_bound_sigma_form, prepare_targets, simulate_batch)

DEFAULT_EPS_GRID = (2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0)
MODES = ("uniform", "weight", "clip")


@dataclass(frozen=True)
class SweepSpec:
    """One epsilon sweep: grid, heterogeneity mode, and sampling effort."""

    eps_grid: tuple[float, ...] = DEFAULT_EPS_GRID
    mode: str = "uniform"
    sensitive_fraction: float = 0.5
    trials_per_point: int = 2000
    targets_per_point: int = 50
    rho: float = 0.5            # down-scaling applied to sensitive devices
    mse_trials: int = 2000

    def violations(self):
        out = []
        if list(self.eps_grid) != sorted(set(self.eps_grid)) or \
                any(e <= 0 for e in self.eps_grid):
            out.append("eps_grid must be strictly increasing and positive")
        if self.mode not in MODES:
            out.append(f"mode {self.mode!r} not one of {MODES}")
        if not (0.0 <= self.sensitive_fraction <= 1.0):
            out.append("sensitive_fraction outside [0,1]")
        if self.trials_per_point < 100:
            out.append("trials_per_point must be >= 100")
        if not (0.0 < self.rho <= 1.0):
            out.append("rho outside (0,1]")
        return out


def sensitive_indices(k_devices: int, fraction: float) -> list[int]:
    return list(range(math.ceil(fraction * k_devices)))


def apply_mode(cfg: SystemConfig, mode: str, fraction: float,
               rho: float) -> SystemConfig:
    """Heterogeneity rules:

    uniform -> devices unchanged
    weight  -> sensitive devices' w scaled by rho, then all weights
               renormalized to preserve the original total
    clip    -> sensitive devices' C scaled by rho
    """
    if mode == "uniform":
        return cfg
    sens = set(sensitive_indices(cfg.k_devices, fraction))
    devs = list(cfg.devices)
    if mode == "weight":
        total = sum(d.w for d in devs)
        raw = [d.w * rho if d.index in sens else d.w for d in devs]
        scale = total / sum(raw) if sum(raw) > 0 else 1.0
        devs = [replace(d, w=rw * scale) for d, rw in zip(devs, raw)]
    elif mode == "clip":
        devs = [replace(d, clip=d.clip * rho) if d.index in sens else d
                for d in devs]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return cfg.with_devices(devs)


def _nan_row(eps_target: float, seed: int, trials: int) -> dict:
    row = {c: float("nan") for c in SWEEP_CSV_COLUMNS}
    row.update(eps_target=eps_target, trials=trials, seed=seed)
    return row


def run_sweep_point(cfg_mode: SystemConfig, eps_target: float,
                    spec: SweepSpec) -> dict:
    """Calibrate the sensitive-device epsilon to the target, then measure
    accuracy, empirical MSE, and the analytic bound at that operating point.

    Calibration anchors on device 0 (always in the sensitive group); the
    eps_actual column reports the maximum per-device epsilon, which can
    exceed the target for non-sensitive devices under customization.
    """
    seed = cfg_mode.master_seed
    inp = AccountantInput.from_config(cfg_mode)
    try:
        scale = calibrate_sigma(inp, 0, eps_target)
    except ValueError:
        return _nan_row(eps_target, seed, spec.trials_per_point)
    cfg_pt = cfg_mode.scale_sigma(scale)

    budgets = all_budgets(AccountantInput.from_config(cfg_pt))
    eps_actual = max(b.eps for b in budgets)

    scn = build_scenario(cfg_pt)
    mse_prep = prepare_targets(scn, 1)
    mse_res = simulate_batch(scn, mse_prep, spec.mse_trials)
    mse_emp, mse_se = mse_res.mse
    bound = mse_bound_sigma_form(
        cfg_pt.p(), cfg_pt.w(), cfg_pt.sigma_sq(), cfg_pt.sigma_sq_m,
        cfg_pt.gamma, scn.encoders, scn.decoder, mse_prep.features[0])

    acc, acc_se, _ = empirical_accuracy(
        cfg_pt, spec.targets_per_point, spec.trials_per_point)
    p0 = estimate_p0(cfg_pt, spec.targets_per_point)
    lb = accuracy_lower_bound(p0, bound.total, scn.classifier.margin_delta)

    return {
        "eps_target": eps_target,
        "eps_actual": eps_actual,
        "sigma_sq": float(cfg_pt.devices[0].sigma_sq),
        "mse_bound_total": bound.total,
        "mse_bound_noise": bound.noise_term,
        "mse_bound_weighting": bound.weighting_term,
        "mse_bound_cross": bound.cross_term,
        "mse_empirical": mse_emp,
        "mse_stderr": mse_se,
        "p0": p0,
        "acc_lower_bound": lb.bound,
        "acc_empirical": acc,
        "acc_stderr": acc_se,
        "trials": spec.trials_per_point,
        "seed": seed,
    }


def run_sweep(cfg: SystemConfig, spec: SweepSpec) -> list[dict]:
    """One mode's sweep: one row per grid epsilon."""
    bad = spec.violations()
    if bad:
        raise ValueError("; ".join(bad))
    validated(cfg)
    cfg_mode = apply_mode(cfg, spec.mode, spec.sensitive_fraction, spec.rho)
    return [run_sweep_point(cfg_mode, eps, spec) for eps in spec.eps_grid]


def run_mode_comparison(cfg: SystemConfig, spec: SweepSpec,
                        modes=MODES) -> list[dict]:
    """All modes on a common grid with common random numbers; rows carry a
    leading ``mode`` column for plotting."""
    rows = []
    for mode in modes:
        for row in run_sweep(cfg, replace(spec, mode=mode)):
            rows.append({"mode": mode, **row})
    return rows


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def write_csv(path, rows: list[dict], columns: list[str],
              header_comment: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({c: row[c] for c in columns})


def sweep_header(cfg: SystemConfig, spec: SweepSpec) -> str:
    return (f"config_hash={config_hash(cfg)} seed={cfg.master_seed} "
            f"mode={spec.mode} sensitive_fraction={spec.sensitive_fraction} "
            f"rho={spec.rho} eps_axis=max_per_device_eps")


def run_single(cfg: SystemConfig, trials: int) -> dict:
    """Full single-configuration report: budgets, analytic MSE breakdown,
    empirical MSE and accuracy, power audit. Bit-reproducible given the
    config (including its master seed)."""
    validated(cfg)
    budgets = budget_table_rows(AccountantInput.from_config(cfg))

    scn = build_scenario(cfg)
    prep = prepare_targets(scn, 1)
    res = simulate_batch(scn, prep, trials)
    mse_emp, mse_se = res.mse
    bound = mse_bound_sigma_form(
        cfg.p(), cfg.w(), cfg.sigma_sq(), cfg.sigma_sq_m, cfg.gamma,
        scn.encoders, scn.decoder, prep.features[0])

    n_targets = min(40, max(1, trials))
    acc, acc_se, _ = empirical_accuracy(cfg, n_targets, trials)
    p0 = estimate_p0(cfg, n_targets)

    power = audit_power(res.power_sq_sums, res.n_trials, cfg.powers())
    return {
        "config_hash": config_hash(cfg),
        "seed": cfg.master_seed,
        "trials": trials,
        "budgets": _json_safe(budgets),
        "mse_bound": {
            "noise_term": bound.noise_term,
            "weighting_term": bound.weighting_term,
            "cross_term": bound.cross_term,
            "total": bound.total,
        },
        "mse_empirical": {"estimate": mse_emp, "stderr": mse_se},
        "accuracy": {"estimate": acc, "stderr": acc_se},
        "p0": p0,
        "margin_delta": scn.classifier.margin_delta,
        "power_audit": power_report_rows(power),
    }


def _json_safe(rows: list[dict]) -> list[dict]:
    out = []
    for row in rows:
        safe = {}
        for key, val in row.items():
            if isinstance(val, float) and math.isinf(val):
                safe[key] = "inf"
            elif isinstance(val, (np.floating, np.integer, np.bool_)):
                safe[key] = val.item()
            else:
                safe[key] = val
        out.append(safe)
    return out


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_budget_csv(path, cfg: SystemConfig) -> None:
    rows = budget_table_rows(AccountantInput.from_config(cfg))
    write_csv(path, rows, BUDGET_CSV_COLUMNS,
              header_comment=f"config_hash={config_hash(cfg)} seed={cfg.master_seed}")


def write_power_csv(path, cfg: SystemConfig, reports) -> None:
    write_csv(path, power_report_rows(reports), POWER_CSV_COLUMNS,
              header_comment=f"config_hash={config_hash(cfg)} seed={cfg.master_seed}")
