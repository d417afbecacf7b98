"""Acceptance suite: every release criterion as an executable check with a
pinned tolerance, one pass/fail line per criterion."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace, field

import numpy as np

from .config import (SystemConfig, DeviceProfile, ClassifierSpec, FadingModel,
                     paper_default_config)
from .accountant import (AccountantInput, all_budgets, choose_t,
                         concentration_exact, epsilon_for_device, mu_bar,
                         sensitivity_constant)
from .analysis import (build_scenario, empirical_accuracy, empirical_mse,
                       prepare_targets, simulate_batch, SWEEP_CSV_COLUMNS)
from .harness import (DEFAULT_EPS_GRID, SweepSpec, run_mode_comparison,
                      run_single, report_to_json, sweep_header, write_csv)


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    details: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.cid}: {self.name} ({self.seconds:.1f}s) - {self.details}"


def _rel_close(a: float, b: float, tol: float = 1e-9) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol * max(abs(a), abs(b), 1e-300)


# ---------------------------------------------------------------------------
# 1. budget-formula transcription oracle
# ---------------------------------------------------------------------------

def _independent_budget_transcription(p_list, w_list, clip_list, var_list,
                                      gamma, delta, delta_prime):
    # Deliberately separate re-derivation: plain floats, no shared helpers.
    n = len(p_list)
    mu_expected = 0.0
    for i in range(n):
        mu_expected += p_list[i] * var_list[i]
    biggest = max(var_list)
    fourth = 0.0
    for i in range(n):
        fourth += p_list[i] * (1.0 - p_list[i]) * var_list[i] * var_list[i]
    log_term = math.log(2.0 / delta_prime)
    offset = (biggest / (2.0 / log_term)
              + math.sqrt(biggest / 9.0 + 4.0 * fourth / log_term)
              / (2.0 / log_term))
    gauss = math.sqrt(2.0 * math.log(1.25 / delta))
    sens, epses, dtils = [], [], []
    for k in range(n):
        ck = gamma * w_list[k] * clip_list[k] * gauss
        sens.append(ck)
        gap = mu_expected - offset
        if ck == 0.0 or p_list[k] == 0.0:
            epses.append(0.0)
        elif gap > 0.0:
            epses.append(math.log(
                1.0 + (p_list[k] / (1.0 - delta_prime))
                * (math.exp(ck / math.sqrt(gap)) - 1.0)))
        else:
            epses.append(float("inf"))
        dtils.append(delta_prime + p_list[k] * delta / (1.0 - delta_prime))
    return sens, mu_expected, offset, epses, dtils


def criterion_1(cfg: SystemConfig) -> CriterionResult:
    inp = AccountantInput.from_config(cfg)
    t = choose_t(inp)
    mb = mu_bar(inp)
    budgets = all_budgets(inp)
    sens2, mu2, t2, eps2, dtil2 = _independent_budget_transcription(
        list(inp.p), list(inp.w), list(inp.clip), list(inp.sigma_sq),
        inp.gamma, inp.delta, inp.delta_prime)
    ok = _rel_close(mb, mu2) and _rel_close(t, t2)
    for k, b in enumerate(budgets):
        ok = ok and _rel_close(b.c, sens2[k]) and _rel_close(b.eps, eps2[k]) \
            and _rel_close(b.delta_tilde, dtil2[k])
    detail = (f"mu_bar={mb:.6g} t={t:.6g} eps_0={budgets[0].eps:.6g} "
              f"(budget invalid at defaults: mu_bar-t={mb - t:.4g})")
    return CriterionResult(1, "budget transcription oracle", ok, detail)


# ---------------------------------------------------------------------------
# 2. concentration certificate
# ---------------------------------------------------------------------------

def criterion_2(seed: int = 1234, n_configs: int = 50) -> CriterionResult:
    rng = np.random.default_rng(seed)
    delta_prime = 1e-5
    worst = 0.0
    violations = []
    for i in range(n_configs):
        k = int(rng.integers(2, 13))
        inp = AccountantInput(
            p=rng.uniform(0.1, 1.0, k),
            w=np.full(k, 1.0 / k),
            clip=np.full(k, 100.0),
            sigma_sq=rng.uniform(0.01, 1.0, k),
            gamma=1.0, delta=1e-5, delta_prime=delta_prime,
        )
        prob = concentration_exact(inp, choose_t(inp))
        worst = max(worst, prob)
        if prob > delta_prime:
            violations.append((i, prob))
    ok = not violations
    detail = f"{n_configs} configs, worst exact tail prob {worst:.3g} vs delta'={delta_prime:g}"
    if violations:
        detail += f"; violations at {violations[:5]}"
    return CriterionResult(2, "concentration certificate (exact enumeration)", ok, detail)


# ---------------------------------------------------------------------------
# 3. privacy amplification monotonicity
# ---------------------------------------------------------------------------

def _amplification_input(p0: float, sigma_scale: float = 1.0) -> AccountantInput:
    # Sampling-dominated regime: small sensitivity, other devices always on.
    k = 12
    p = np.ones(k)
    p[0] = p0
    return AccountantInput(
        p=p, w=np.full(k, 1.0 / k), clip=np.ones(k),
        sigma_sq=np.full(k, sigma_scale),
        gamma=1.0, delta=1e-5, delta_prime=1e-5,
    )


def criterion_3() -> CriterionResult:
    grid = np.linspace(0.05, 1.0, 20)
    eps_by_p = [epsilon_for_device(0, _amplification_input(p)).eps for p in grid]
    p_ok = all(math.isfinite(e) for e in eps_by_p) and \
        all(b > a for a, b in zip(eps_by_p, eps_by_p[1:]))
    scales = np.linspace(1.0, 4.0, 20)
    eps_by_s = [epsilon_for_device(0, _amplification_input(0.5, s)).eps
                for s in scales]
    s_ok = all(math.isfinite(e) for e in eps_by_s) and \
        all(b < a for a, b in zip(eps_by_s, eps_by_s[1:]))
    detail = (f"eps(p): {eps_by_p[0]:.4g} -> {eps_by_p[-1]:.4g} increasing={p_ok}; "
              f"eps(sigma-scale): {eps_by_s[0]:.4g} -> {eps_by_s[-1]:.4g} decreasing={s_ok}")
    return CriterionResult(3, "privacy amplification monotonicity", p_ok and s_ok, detail)


# ---------------------------------------------------------------------------
# 4. unbiased over-the-air aggregation
# ---------------------------------------------------------------------------

def criterion_4(cfg: SystemConfig, trials: int = 100_000) -> CriterionResult:
    quiet = replace(cfg, sigma_sq_m=0.0)
    scn = build_scenario(quiet)
    prep = prepare_targets(scn, 1)
    res = simulate_batch(scn, prep, trials)
    expected = np.einsum("k,kr->r", quiet.w(), prep.z_clipped[0])
    mean, se = res.z_hat_mean_se()
    dev = np.abs(mean - expected) / np.where(se > 0, se, 1.0)
    worst = float(np.max(dev))
    ok = worst <= 5.0
    return CriterionResult(
        4, "unbiased OTA aggregation",
        ok, f"max |mean - sum w z| = {worst:.2f} standard errors over {cfg.r} coords, N={trials}")


# ---------------------------------------------------------------------------
# 5. closed-form MSE oracle
# ---------------------------------------------------------------------------

def single_device_config(master_seed: int) -> SystemConfig:
    return SystemConfig(
        k_devices=1, d=10, r=10, gamma=1.0, sigma_sq_m=0.0,
        delta=1e-5, delta_prime=1e-5,
        devices=(DeviceProfile(index=0, p=1.0, w=1.0, clip=1e6,
                               sigma_sq=0.1, power=1.0),),
        encoder="identity", decoder="transpose",
        classifier=ClassifierSpec(num_classes=2, target_margin=1.0,
                                  view_noise_std=0.0, in_rowspace=False),
        channel=FadingModel(kind="constant", mean_power=1.0),
        master_seed=master_seed,
    )


def criterion_5(master_seed: int, trials: int = 10_000) -> CriterionResult:
    cfg = single_device_config(master_seed)
    est, se = empirical_mse(cfg, trials)
    expected = cfg.d * 0.1
    dev = abs(est - expected) / se
    return CriterionResult(
        5, "closed-form MSE oracle (d*sigma^2)",
        dev <= 4.0, f"empirical {est:.4f} vs {expected:.1f}, {dev:.2f} standard errors")


# ---------------------------------------------------------------------------
# 6-8. sweep-based criteria
# ---------------------------------------------------------------------------

def criterion_6(uniform_rows: list[dict]) -> CriterionResult:
    worst = -math.inf
    ok = True
    for row in uniform_rows:
        slack = row["mse_bound_total"] + 4.0 * row["mse_stderr"] - row["mse_empirical"]
        margin = slack / max(row["mse_bound_total"], 1e-300)
        worst = max(worst, row["mse_empirical"] / row["mse_bound_total"])
        if slack < 0.0:
            ok = False
    return CriterionResult(
        6, "MSE bound dominance over sweep",
        ok, f"max empirical/bound ratio {worst:.3g} across {len(uniform_rows)} points")


def criterion_7(rows: list[dict]) -> CriterionResult:
    ok = True
    worst = math.inf
    for row in rows:
        slack = row["acc_empirical"] + 4.0 * row["acc_stderr"] - row["acc_lower_bound"]
        worst = min(worst, slack)
        if slack < 0.0:
            ok = False
    return CriterionResult(
        7, "margin-based accuracy lower bound consistency",
        ok, f"min (acc + 4se - bound) = {worst:.4f} across {len(rows)} sweep points")


def criterion_8(mode_rows: list[dict], eps_grid) -> CriterionResult:
    by_mode = {m: {r["eps_target"]: r for r in mode_rows if r["mode"] == m}
               for m in ("uniform", "weight", "clip")}
    small = sorted(eps_grid)[:4]
    largest = max(eps_grid)
    msgs = []
    ok = True
    for mode in ("weight", "clip"):
        for eps in small:
            u, c = by_mode["uniform"][eps], by_mode[mode][eps]
            se = math.hypot(u["acc_stderr"], c["acc_stderr"])
            if c["acc_empirical"] < u["acc_empirical"] - 2.0 * se:
                ok = False
                msgs.append(f"{mode}@eps={eps}: {c['acc_empirical']:.3f} < "
                            f"uniform {u['acc_empirical']:.3f} - 2se")
    top = [by_mode[m][largest] for m in ("uniform", "weight", "clip")]
    for i in range(3):
        for j in range(i + 1, 3):
            se = math.hypot(top[i]["acc_stderr"], top[j]["acc_stderr"])
            if abs(top[i]["acc_empirical"] - top[j]["acc_empirical"]) > 2.0 * se:
                ok = False
                msgs.append(f"no convergence at eps={largest}")
    accs = {m: by_mode[m][largest]["acc_empirical"] for m in by_mode}
    detail = f"top-eps accuracies {accs}"
    if msgs:
        detail += "; " + "; ".join(msgs[:4])
    return CriterionResult(8, "customized-privacy accuracy trend", ok, detail)


# ---------------------------------------------------------------------------
# 9. chance-level sanity
# ---------------------------------------------------------------------------

def criterion_9(cfg: SystemConfig, trials: int = 10_000) -> CriterionResult:
    noisy = cfg.scale_sigma(1e4)
    # Balanced target labels: with an exactly uniform class histogram, a
    # truth-independent predictor is correct with probability exactly 1/L.
    n_classes = cfg.classifier.num_classes
    scn = build_scenario(noisy)
    prep = prepare_targets(scn, 5 * n_classes,
                           class_labels=[i % n_classes for i in range(5 * n_classes)])
    res = simulate_batch(scn, prep, trials)
    acc, se = res.accuracy
    chance = 1.0 / n_classes
    se = max(se, math.sqrt(chance * (1 - chance) / trials))
    dev = abs(acc - chance) / se
    return CriterionResult(
        9, "chance-level accuracy under overwhelming noise",
        dev <= 4.0, f"accuracy {acc:.4f} vs chance {chance:.4f}, {dev:.2f} standard errors")


# ---------------------------------------------------------------------------
# 10. determinism
# ---------------------------------------------------------------------------

def criterion_10(cfg: SystemConfig, spec: SweepSpec,
                 first_rows: list[dict]) -> CriterionResult:
    rows_again = run_mode_comparison(cfg, spec)
    csv_same = _rows_bytes(first_rows) == _rows_bytes(rows_again)
    rep_a = report_to_json(run_single(cfg, trials=2000))
    rep_b = report_to_json(run_single(cfg, trials=2000))
    json_same = rep_a == rep_b
    return CriterionResult(
        10, "byte-identical reruns",
        csv_same and json_same,
        f"sweep CSV identical={csv_same}, run report identical={json_same}")


def _rows_bytes(rows: list[dict]) -> bytes:
    import io, csv as _csv
    buf = io.StringIO()
    cols = ["mode"] + SWEEP_CSV_COLUMNS
    w = _csv.DictWriter(buf, fieldnames=cols)
    w.writeheader()
    for row in rows:
        w.writerow({c: row[c] for c in cols})
    return buf.getvalue().encode()


# ---------------------------------------------------------------------------
# Suite driver
# ---------------------------------------------------------------------------

CRITERIA_NAMES = {
    1: "budget transcription oracle",
    2: "concentration certificate (exact enumeration)",
    3: "privacy amplification monotonicity",
    4: "unbiased OTA aggregation",
    5: "closed-form MSE oracle (d*sigma^2)",
    6: "MSE bound dominance over sweep",
    7: "margin-based accuracy lower bound consistency",
    8: "customized-privacy accuracy trend",
    9: "chance-level accuracy under overwhelming noise",
    10: "byte-identical reruns",
}


@dataclass
class AcceptanceRun:
    results: list[CriterionResult] = field(default_factory=list)
    mode_rows: list[dict] = field(default_factory=list)
    uniform_rows: list[dict] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)


def run_acceptance(cfg: SystemConfig | None = None, out_dir=None,
                   log=print) -> AcceptanceRun:
    """Execute every criterion; optionally write sweep/report artifacts."""
    if cfg is None:
        cfg = paper_default_config()
    spec = SweepSpec()
    run = AcceptanceRun()

    def add(fn, *args, **kwargs):
        start = time.monotonic()
        result = fn(*args, **kwargs)
        result.seconds = time.monotonic() - start
        run.results.append(result)
        if log:
            log(result.line())
        return result

    add(criterion_1, cfg)
    add(criterion_2)
    add(criterion_3)
    add(criterion_4, cfg)
    add(criterion_5, cfg.master_seed)

    start = time.monotonic()
    run.mode_rows = run_mode_comparison(cfg, spec)
    sweep_secs = time.monotonic() - start
    run.uniform_rows = [
        {k: v for k, v in r.items() if k != "mode"}
        for r in run.mode_rows if r["mode"] == "uniform"
    ]
    if log:
        log(f"[....] sweep over {len(run.mode_rows)} points done ({sweep_secs:.1f}s)")

    add(criterion_6, run.uniform_rows)
    add(criterion_7, run.uniform_rows)
    add(criterion_8, run.mode_rows, spec.eps_grid)
    add(criterion_9, cfg)
    add(criterion_10, cfg, spec, run.mode_rows)

    if out_dir is not None:
        from pathlib import Path
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "sweep_uniform.csv", run.uniform_rows,
                  SWEEP_CSV_COLUMNS, header_comment=sweep_header(cfg, spec))
        write_csv(out / "sweep_modes.csv", run.mode_rows,
                  ["mode"] + SWEEP_CSV_COLUMNS,
                  header_comment=sweep_header(cfg, spec))
        (out / "report.json").write_text(report_to_json(run_single(cfg, 2000)))
    return run
