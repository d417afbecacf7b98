"""Per-device feature-DP accounting.

Computes the per-device budget (eps_k, delta_tilde_k) from the sensitivity
constant c_k, the expected aggregate perturbation variance mu_bar, and the
concentration offset t, together with exact (subset enumeration) and
Monte-Carlo oracles for the concentration event Pr(|mu - mu_bar| >= t).

Budgets with mu_bar - t <= 0 are reported with an infinite-epsilon sentinel
rather than raised, so parameter sweeps can proceed through degenerate
regions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig, StreamTag, stream_rng

EXACT_ENUM_MAX_K = 20
_ENUM_CHUNK = 1 << 16


@dataclass(frozen=True)
class AccountantInput:
    """Parameters Theorem-style budgets depend on."""

    p: np.ndarray          # participation probabilities
    w: np.ndarray          # importance weights
    clip: np.ndarray       # clipping bounds C_k
    sigma_sq: np.ndarray   # local perturbation variances
    gamma: float
    delta: float
    delta_prime: float

    @classmethod
    def from_config(cls, cfg: SystemConfig) -> "AccountantInput":
        return cls(
            p=cfg.p(), w=cfg.w(), clip=cfg.clips(), sigma_sq=cfg.sigma_sq(),
            gamma=cfg.gamma, delta=cfg.delta, delta_prime=cfg.delta_prime,
        )

    def scale_sigma(self, factor: float) -> "AccountantInput":
        return AccountantInput(
            p=self.p, w=self.w, clip=self.clip,
            sigma_sq=self.sigma_sq * factor,
            gamma=self.gamma, delta=self.delta, delta_prime=self.delta_prime,
        )

    @property
    def k(self) -> int:
        return len(self.p)


@dataclass(frozen=True)
class PrivacyBudget:
    """Output of the accountant for one device."""

    eps: float
    delta_tilde: float
    c: float
    mu_bar: float
    t: float

    @property
    def valid(self) -> bool:
        return math.isfinite(self.eps)


def sensitivity_constant(k: int, inp: AccountantInput) -> float:
    """c_k = gamma * w_k * C_k * sqrt(2 ln(1.25/delta))."""
    return inp.gamma * inp.w[k] * inp.clip[k] * math.sqrt(2.0 * math.log(1.25 / inp.delta))


def mu_bar(inp: AccountantInput) -> float:
    """Expected aggregate perturbation variance sum_i p_i sigma_i^2."""
    return float(np.dot(inp.p, inp.sigma_sq))


def choose_t(inp: AccountantInput) -> float:
    """Concentration offset, literal transcription of the printed formula:

    t = (L/2) * [max_k sigma_k^2 + sqrt(max_k sigma_k^2 / 9
                                        + 4 * sum_k p_k (1-p_k) sigma_k^4 / L)]
    with L = ln(2/delta').
    """
    L = math.log(2.0 / inp.delta_prime)
    m = float(np.max(inp.sigma_sq)) if inp.k else 0.0
    v = float(np.sum(inp.p * (1.0 - inp.p) * inp.sigma_sq ** 2))
    return (L / 2.0) * (m + math.sqrt(m / 9.0 + 4.0 * v / L))


def _stable_log_budget(q: float, x: float) -> float:
    # log(1 + q * (e^x - 1)) without overflow for large x.
    if x < 30.0:
        return math.log1p(q * math.expm1(x))
    # 1 + q(e^x - 1) = q e^x (1 + (1 - q) e^{-x} / q)
    return x + math.log(q) + math.log1p((1.0 - q) * math.exp(-x) / q)


def epsilon_for_device(k: int, inp: AccountantInput, t: float | None = None) -> PrivacyBudget:
    """Per-device budget:

    eps_k = log[1 + p_k/(1-delta') * (e^{c_k / sqrt(mu_bar - t)} - 1)]
    delta_tilde_k = delta' + p_k * delta / (1 - delta')

    Returns an infinite-eps sentinel when mu_bar - t <= 0 (or p_k noise-free
    divergences); delta_tilde is always the literal formula value.
    """
    if t is None:
        t = choose_t(inp)
    c = sensitivity_constant(k, inp)
    mb = mu_bar(inp)
    denom = mb - t
    delta_tilde = inp.delta_prime + inp.p[k] * inp.delta / (1.0 - inp.delta_prime)
    if c == 0.0 or inp.p[k] == 0.0:
        eps = 0.0
    elif denom <= 0.0:
        eps = math.inf
    else:
        q = inp.p[k] / (1.0 - inp.delta_prime)
        eps = _stable_log_budget(q, c / math.sqrt(denom))
    return PrivacyBudget(eps=eps, delta_tilde=float(delta_tilde), c=c,
                         mu_bar=mb, t=t)


def all_budgets(inp: AccountantInput) -> list[PrivacyBudget]:
    t = choose_t(inp)
    return [epsilon_for_device(k, inp, t=t) for k in range(inp.k)]


def concentration_exact(inp: AccountantInput, t: float) -> float:
    """Exact Pr(|mu - mu_bar| >= t) with mu = sum_i tau_i sigma_i^2 by
    enumerating all 2^K participation subsets (K <= 20)."""
    K = inp.k
    if K > EXACT_ENUM_MAX_K:
        raise ValueError(
            f"K={K} exceeds exact-enumeration limit {EXACT_ENUM_MAX_K}; "
            "use concentration_mc"
        )
    mb = mu_bar(inp)
    log_p = np.log(np.clip(inp.p, 1e-300, None))
    log_q = np.log(np.clip(1.0 - inp.p, 1e-300, None))
    total = 0.0
    n = 1 << K
    bit_cols = np.arange(K, dtype=np.uint32)
    for start in range(0, n, _ENUM_CHUNK):
        idx = np.arange(start, min(start + _ENUM_CHUNK, n), dtype=np.uint32)
        bits = (idx[:, None] >> bit_cols[None, :]) & 1
        mu = bits @ inp.sigma_sq
        logw = bits @ log_p + (1 - bits) @ log_q
        # exact-zero probabilities (p in {0,1}) survive via the clipped logs:
        # impossible subsets get weight exp(-690) ~ 1e-300, numerically zero.
        mask = np.abs(mu - mb) >= t
        total += float(np.sum(np.exp(logw[mask])))
    return min(total, 1.0)


def concentration_mc(inp: AccountantInput, t: float, trials: int,
                     rng: np.random.Generator) -> tuple[float, float]:
    """Monte-Carlo estimate of Pr(|mu - mu_bar| >= t) with a 95% binomial
    confidence half-width."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if math.isinf(t):
        return 0.0, 0.0
    mb = mu_bar(inp)
    hits = 0
    chunk = 1 << 16
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        tau = rng.random((n, inp.k)) < inp.p
        mu = tau @ inp.sigma_sq
        hits += int(np.count_nonzero(np.abs(mu - mb) >= t))
        done += n
    est = hits / trials
    half_width = 1.96 * math.sqrt(max(est * (1.0 - est), 0.0) / trials)
    return est, half_width


def calibrate_sigma(inp: AccountantInput, k: int, target_eps: float,
                    rel_tol: float = 1e-6, max_iter: int = 500) -> float:
    """Find a uniform scale on all devices' sigma^2 such that device k's
    epsilon equals target_eps, by monotone bisection.

    Returns the scale factor; apply via ``inp.scale_sigma(scale)``.
    Raises ValueError when the target is unreachable within the bracket.
    """
    if target_eps <= 0.0:
        raise ValueError("target_eps must be positive")
    if epsilon_for_device(k, inp).c == 0.0 or inp.p[k] == 0.0:
        raise ValueError("device has zero sensitivity; epsilon is 0 for any sigma")
    if not np.any(inp.p * inp.sigma_sq > 0.0):
        raise ValueError("no participating device adds noise; cannot calibrate")

    def eps_at(scale: float) -> float:
        return epsilon_for_device(k, inp.scale_sigma(scale)).eps

    lo, hi = 1e-12, 1.0
    for _ in range(200):
        if eps_at(hi) < target_eps:
            break
        hi *= 4.0
    else:
        raise ValueError("target_eps unreachable: epsilon stays above target")
    if eps_at(lo) < target_eps:
        raise ValueError("target_eps unreachable: epsilon below target at tiny sigma")

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        e = eps_at(mid)
        if math.isfinite(e) and abs(e - target_eps) <= rel_tol * target_eps:
            return mid
        if e > target_eps:
            lo = mid
        else:
            hi = mid
    raise ValueError("calibration failed to converge")


BUDGET_CSV_COLUMNS = [
    "device_index", "p", "w", "C", "sigma_sq", "c_k", "mu_bar", "t",
    "eps_k", "delta_tilde_k", "valid",
]


def budget_table_rows(inp: AccountantInput) -> list[dict]:
    rows = []
    for k, b in enumerate(all_budgets(inp)):
        rows.append({
            "device_index": k,
            "p": float(inp.p[k]),
            "w": float(inp.w[k]),
            "C": float(inp.clip[k]),
            "sigma_sq": float(inp.sigma_sq[k]),
            "c_k": b.c,
            "mu_bar": b.mu_bar,
            "t": b.t,
            "eps_k": b.eps,
            "delta_tilde_k": b.delta_tilde,
            "valid": b.valid,
        })
    return rows


def mc_rng(cfg: SystemConfig, trial_index: int = 0) -> np.random.Generator:
    return stream_rng(cfg.master_seed, trial_index, StreamTag.CONCENTRATION)
