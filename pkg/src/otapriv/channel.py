"""Fading multiple-access channel: participation sampling, power alignment,
superposition with receiver noise, and transmit-power auditing.

The channel is simulated in-process; one channel draw per communication
block (= one trial), consistent with block flat fading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import FadingModel

MAX_REDRAWS = 100


def draw_channel(model: FadingModel, k_devices: int,
                 rng: np.random.Generator) -> np.ndarray:
    """Draw K nonnegative fading coefficients.

    Rician draws below the deep-fade floor are redrawn (bounded retries) so
    the alignment scaling stays finite; the constant kind returns
    sqrt(mean_power) for every device.
    """
    if model.kind == "constant":
        return np.full(k_devices, math.sqrt(model.mean_power))
    if model.kind != "rician":
        raise ValueError(f"unknown fading kind {model.kind!r}")
    h = _rician(model, k_devices, rng)
    for _ in range(MAX_REDRAWS):
        low = h < model.h_floor
        if not np.any(low):
            return h
        h[low] = _rician(model, int(np.count_nonzero(low)), rng)
    bad = int(np.argmax(h < model.h_floor))
    raise RuntimeError(
        f"deep-fade redraw budget exhausted for device {bad} "
        f"(h_floor={model.h_floor})"
    )


def _rician(model: FadingModel, n: int, rng: np.random.Generator) -> np.ndarray:
    # E[h^2] = nu^2 + 2 s^2 = mean_power, K-factor = nu^2 / (2 s^2)
    kf = model.k_factor
    nu = math.sqrt(model.mean_power * kf / (kf + 1.0))
    s = math.sqrt(model.mean_power / (2.0 * (kf + 1.0)))
    g = rng.standard_normal((n, 2)) * s
    return np.hypot(nu + g[:, 0], g[:, 1])


def align(h: np.ndarray, p: np.ndarray, gamma: float) -> np.ndarray:
    """Alignment scaling alpha_k = gamma * p_k / h_k, so h_k alpha_k / p_k = gamma.

    Devices with p_k = 0 never transmit and get alpha_k = 0.
    """
    alpha = np.zeros_like(h, dtype=float)
    active = p > 0.0
    alpha[active] = gamma * p[active] / h[active]
    return alpha


def align_batch(h: np.ndarray, p: np.ndarray, gamma: float) -> np.ndarray:
    """Vectorized ``align`` over trial rows: h is (n, K), p is (K,)."""
    alpha = np.zeros_like(h, dtype=float)
    active = p > 0.0
    alpha[:, active] = gamma * p[active] / h[:, active]
    return alpha


def sample_participation(p: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Independent Bernoulli(p_k) participation indicators."""
    return (rng.random(p.shape) < p).astype(np.int8)


def transmit_signal(z_tilde: np.ndarray, alpha_k: float, p_k: float,
                    tau_k: int) -> np.ndarray:
    """Transmitted signal: (alpha_k / p_k) * z_tilde when participating,
    the zero vector otherwise."""
    if not tau_k:
        return np.zeros_like(z_tilde)
    if p_k <= 0.0:
        raise ValueError("participating device must have p_k > 0")
    return (alpha_k / p_k) * z_tilde


def superpose(signals: list[np.ndarray], h: np.ndarray, sigma_sq_m: float,
              rng: np.random.Generator) -> np.ndarray:
    """Received signal y = sum_k h_k x_k + m, with m ~ N(0, sigma_m^2 I)."""
    if not signals:
        raise ValueError("no signals to superpose")
    r = signals[0].shape[0]
    y = np.zeros(r)
    for hk, x in zip(h, signals):
        if x.shape[0] != r:
            raise ValueError("signal length mismatch")
        y += hk * x
    y += rng.standard_normal(r) * math.sqrt(sigma_sq_m)
    return y


@dataclass(frozen=True)
class PowerReport:
    device_index: int
    empirical_power_watts: float
    budget_watts: float
    exceeded: bool


def audit_power(sq_norm_sums: np.ndarray, n_trials: int,
                budgets: np.ndarray) -> list[PowerReport]:
    """Report empirical E[||x_k||^2] per device against the power budget.

    Report-only: budgets are never enforced on the signals (silent
    truncation would bias the aggregation).
    """
    if n_trials < 1:
        raise ValueError("need at least one trial")
    out = []
    for k, (s, b) in enumerate(zip(sq_norm_sums, budgets)):
        emp = float(s) / n_trials
        out.append(PowerReport(
            device_index=k,
            empirical_power_watts=emp,
            budget_watts=float(b),
            exceeded=bool(emp > b),
        ))
    return out


POWER_CSV_COLUMNS = ["device_index", "empirical_power_watts", "budget_watts", "exceeded"]


def power_report_rows(reports: list[PowerReport]) -> list[dict]:
    return [
        {
            "device_index": rep.device_index,
            "empirical_power_watts": rep.empirical_power_watts,
            "budget_watts": rep.budget_watts,
            "exceeded": rep.exceeded,
        }
        for rep in reports
    ]
