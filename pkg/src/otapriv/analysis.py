"""Analytic MSE bound, empirical Monte-Carlo estimators, and the
margin-based accuracy lower bound.

The Monte-Carlo engine runs the full device -> channel -> server pipeline in
fixed-size chunks with stream-separated, trial-indexed seeds, so results are
bit-reproducible for a given master seed and independent of how callers
split the work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import SystemConfig, StreamTag, stream_rng
from . import channel as chan
from .device import TargetObject, EncodedFeature, build_encoders, clip, make_target
from .server import MarginClassifier, build_classifier, build_decoder, classify_batch

CHUNK = 4096


# ---------------------------------------------------------------------------
# Analytic MSE bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MseBreakdown:
    """Three-term decomposition of the analytic MSE upper bound."""

    noise_term: float       # effective channel + perturbation noise
    weighting_term: float   # per-device approximation error
    cross_term: float       # pairwise feature-correlation term (signed)

    @property
    def total(self) -> float:
        return self.noise_term + self.weighting_term + self.cross_term


def mse_bound_sigma_form(p: np.ndarray, w: np.ndarray, sigma_sq: np.ndarray,
                         sigma_sq_m: float, gamma: float,
                         encoders: np.ndarray, decoder: np.ndarray,
                         features: np.ndarray) -> MseBreakdown:
    """MSE bound parameterized by the local noise variances sigma_k^2:

    noise     = ||D||_F^2 [ sum_k p_k sigma_k^2 + sigma_m^2 / gamma^2 ]
    weighting = sum_k (w_k^2 p_k - 2 w_k p_k + 1) ||D||_F^2 ||W_k||_F^2 ||f_k||^2
    cross     = sum_{k<j} (p_k p_j w_k w_j - p_k w_k - p_j w_j + 1)
                          f_k^T W_k^T D^T D W_j f_j

    The noise term uses ||D||_F^2 as the aggregate-noise propagation factor:
    for n ~ N(0, s^2 I_r), E||D n||^2 = s^2 ||D||_F^2, which makes the
    single-device identity case come out to exactly d * sigma^2.
    """
    K, d = features.shape
    if encoders.shape != (K, decoder.shape[1], d):
        raise ValueError("encoder/decoder/feature dimension mismatch")
    df2 = float(np.sum(decoder ** 2))
    noise = df2 * (float(np.dot(p, sigma_sq)) + sigma_sq_m / gamma ** 2)

    wf2 = np.sum(encoders ** 2, axis=(1, 2))
    f2 = np.sum(features ** 2, axis=1)
    weighting = float(np.sum((w ** 2 * p - 2.0 * w * p + 1.0) * df2 * wf2 * f2))

    # u_k = D W_k f_k, so the quadratic form is u_k . u_j
    u = np.einsum("krd,kd->kr", encoders, features) @ decoder.T
    gram = u @ u.T
    coef = (np.outer(p * w, p * w) - (p * w)[:, None] - (p * w)[None, :] + 1.0)
    iu = np.triu_indices(K, k=1)
    cross = float(np.sum(coef[iu] * gram[iu]))
    return MseBreakdown(noise_term=noise, weighting_term=weighting, cross_term=cross)


def sigma_from_eps(w: np.ndarray, clips: np.ndarray, eps: np.ndarray,
                   delta: np.ndarray) -> np.ndarray:
    """Gaussian-mechanism substitution sigma_k^2 = 2 w_k^2 C_k^2 ln(1.25/delta_k) / eps_k^2."""
    eps = np.asarray(eps, dtype=float)
    if np.any(eps <= 0.0):
        raise ValueError("eps must be positive")
    return 2.0 * w ** 2 * clips ** 2 * np.log(1.25 / np.asarray(delta)) / eps ** 2


def mse_bound_eps_form(p: np.ndarray, w: np.ndarray, clips: np.ndarray,
                       eps: np.ndarray, delta: np.ndarray,
                       sigma_sq_m: float, gamma: float,
                       encoders: np.ndarray, decoder: np.ndarray,
                       features: np.ndarray) -> MseBreakdown:
    """MSE bound parameterized by per-device budgets (eps_k, delta_k);
    identical to the sigma form under the Gaussian-mechanism substitution."""
    sig = sigma_from_eps(w, clips, eps, delta)
    return mse_bound_sigma_form(p, w, sig, sigma_sq_m, gamma, encoders,
                                decoder, features)


# ---------------------------------------------------------------------------
# Theorem-2 style accuracy lower bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AccuracyBound:
    p0: float
    mse: float
    margin_delta: float

    @property
    def bound(self) -> float:
        return max(0.0, self.p0 * (1.0 - (self.mse / self.margin_delta) ** 2))


def accuracy_lower_bound(p0: float, mse: float, margin_delta: float) -> AccuracyBound:
    """max[0, P0 * (1 - (MSE/Delta)^2)], never exceeding p0."""
    if margin_delta <= 0.0:
        raise ValueError("margin_delta must be positive")
    if not (0.0 <= p0 <= 1.0) or mse < 0.0:
        raise ValueError("p0 must be in [0,1] and mse nonnegative")
    return AccuracyBound(p0=p0, mse=mse, margin_delta=margin_delta)


# ---------------------------------------------------------------------------
# Monte-Carlo engine
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    """Seed-reproducible per-config artifacts shared by all trials."""

    cfg: SystemConfig
    encoders: np.ndarray      # (K, r, d)
    decoder: np.ndarray       # (d, r)
    classifier: MarginClassifier


def build_scenario(cfg: SystemConfig) -> Scenario:
    encoders = build_encoders(cfg)
    decoder = build_decoder(cfg, encoders)
    clf = build_classifier(cfg, encoders)
    return Scenario(cfg=cfg, encoders=encoders, decoder=decoder, classifier=clf)


@dataclass(frozen=True)
class PreparedTargets:
    targets: tuple[TargetObject, ...]
    labels: np.ndarray        # (T,)
    features: np.ndarray      # (T, K, d)
    z_clipped: np.ndarray     # (T, K, r) encoded + clipped, before weighting
    f_star: np.ndarray        # (T, d) reference pooled features


def prepare_targets(scn: Scenario, n_targets: int,
                    class_labels=None) -> PreparedTargets:
    cfg = scn.cfg
    targets = tuple(
        make_target(cfg, scn.classifier.centroids, i,
                    None if class_labels is None else class_labels[i])
        for i in range(n_targets)
    )
    feats = np.stack([
        t.canonical_feature[None, :] + t.view_perturbations for t in targets
    ])
    clips = cfg.clips()
    z = np.einsum("krd,tkd->tkr", scn.encoders, feats)
    norms = np.linalg.norm(z, axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(norms > clips[None, :],
                         np.where(norms > 0, clips[None, :] / norms, 1.0), 1.0)
    z_clipped = z * scale[:, :, None]
    return PreparedTargets(
        targets=targets,
        labels=np.array([t.class_label for t in targets]),
        features=feats,
        z_clipped=z_clipped,
        f_star=feats.mean(axis=1),
    )


@dataclass
class BatchResult:
    """Accumulated outputs of a Monte-Carlo run."""

    n_trials: int
    sq_err: np.ndarray            # (N,)
    predicted: np.ndarray         # (N,)
    true_labels: np.ndarray       # (N,)
    z_hat_sum: np.ndarray         # (r,)
    z_hat_sq_sum: np.ndarray      # (r,)
    power_sq_sums: np.ndarray     # (K,) sum over trials of ||x_k||^2

    @property
    def accuracy(self) -> tuple[float, float]:
        acc = float(np.mean(self.predicted == self.true_labels))
        se = math.sqrt(max(acc * (1.0 - acc), 0.0) / self.n_trials)
        return acc, se

    @property
    def mse(self) -> tuple[float, float]:
        est = float(np.mean(self.sq_err))
        se = float(np.std(self.sq_err, ddof=1) / math.sqrt(self.n_trials)) \
            if self.n_trials > 1 else 0.0
        return est, se

    def z_hat_mean_se(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.n_trials
        mean = self.z_hat_sum / n
        var = (self.z_hat_sq_sum - n * mean ** 2) / max(n - 1, 1)
        return mean, np.sqrt(np.maximum(var, 0.0) / n)


def _draw_block(scn: Scenario, chunk_key: int, n: int):
    cfg = scn.cfg
    K, r = cfg.k_devices, cfg.r
    seed = cfg.master_seed
    tau = chan.sample_participation(
        np.broadcast_to(cfg.p(), (n, K)),
        stream_rng(seed, chunk_key, StreamTag.PARTICIPATION))
    h = chan.draw_channel(
        cfg.channel, n * K,
        stream_rng(seed, chunk_key, StreamTag.CHANNEL)).reshape(n, K)
    dev_noise = stream_rng(seed, chunk_key, StreamTag.DEVICE_NOISE) \
        .standard_normal((n, K, r))
    m = stream_rng(seed, chunk_key, StreamTag.RECEIVER_NOISE) \
        .standard_normal((n, r)) * math.sqrt(cfg.sigma_sq_m)
    return tau, h, dev_noise, m


def simulate_batch(scn: Scenario, prep: PreparedTargets, n_trials: int,
                   base_trial: int = 0) -> BatchResult:
    """Run n_trials through the full pipeline, cycling over the prepared
    targets. Trial t uses target t mod T."""
    cfg = scn.cfg
    K, r = cfg.k_devices, cfg.r
    p, w = cfg.p(), cfg.w()
    sig = np.sqrt(cfg.sigma_sq())
    n_targets = len(prep.targets)
    # 1/p unbiasedness pre-multiplier; p = 0 devices never transmit.
    inv_p = np.where(p > 0.0, 1.0 / np.where(p > 0.0, p, 1.0), 0.0)

    sq_err = np.empty(n_trials)
    predicted = np.empty(n_trials, dtype=int)
    true_labels = np.empty(n_trials, dtype=int)
    z_hat_sum = np.zeros(r)
    z_hat_sq_sum = np.zeros(r)
    power_sq = np.zeros(K)

    for start in range(0, n_trials, CHUNK):
        n = min(CHUNK, n_trials - start)
        tau, h, dev_noise, m = _draw_block(scn, base_trial + start, n)
        tgt = (np.arange(start, start + n) % n_targets)

        z = prep.z_clipped[tgt]                                   # (n,K,r)
        z_tilde = w[None, :, None] * z + sig[None, :, None] * dev_noise
        alpha = chan.align_batch(h, p, cfg.gamma)                 # (n,K)
        # transmit: x_k = (alpha_k / p_k) * (z_tilde_k / p_k) when tau_k = 1
        coef = tau * alpha * inv_p[None, :] ** 2                  # (n,K)
        x = coef[:, :, None] * z_tilde
        y = np.einsum("nk,nkr->nr", h, x) + m
        z_hat = y / cfg.gamma
        f_hat = z_hat @ scn.decoder.T

        diff = f_hat - prep.f_star[tgt]
        sq_err[start:start + n] = np.sum(diff ** 2, axis=1)
        predicted[start:start + n] = classify_batch(f_hat, scn.classifier)
        true_labels[start:start + n] = prep.labels[tgt]
        z_hat_sum += z_hat.sum(axis=0)
        z_hat_sq_sum += np.sum(z_hat ** 2, axis=0)
        power_sq += np.sum(np.sum(x ** 2, axis=2), axis=0)

    return BatchResult(
        n_trials=n_trials, sq_err=sq_err, predicted=predicted,
        true_labels=true_labels, z_hat_sum=z_hat_sum,
        z_hat_sq_sum=z_hat_sq_sum, power_sq_sums=power_sq,
    )


# ---------------------------------------------------------------------------
# Single-trial record (op-by-op composition, for reports and cross-checks)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    tau: np.ndarray
    h: np.ndarray
    z_hat: np.ndarray
    f_hat: np.ndarray
    f_star: np.ndarray
    sq_err: float
    predicted_label: int
    true_label: int


def simulate_trial(scn: Scenario, prep: PreparedTargets,
                   trial_index: int, base_trial: int = 0) -> TrialRecord:
    """One realization, composed from the individual pipeline operations.

    Uses the same stream draws as a length-1 chunk of ``simulate_batch``
    anchored at the same trial index.
    """
    cfg = scn.cfg
    tau, h, dev_noise, m_arr = _draw_block(scn, base_trial + trial_index, 1)
    tau, h, dev_noise, m = tau[0], h[0], dev_noise[0], m_arr[0]
    tgt = trial_index % len(prep.targets)

    alpha = chan.align(h, cfg.p(), cfg.gamma)
    signals = []
    for k, dev in enumerate(cfg.devices):
        z = EncodedFeature(values=prep.z_clipped[tgt, k], clipped=False)
        z_tilde = dev.w * z.values + math.sqrt(dev.sigma_sq) * dev_noise[k]
        payload = z_tilde / dev.p if dev.p > 0.0 else np.zeros_like(z_tilde)
        signals.append(chan.transmit_signal(payload, alpha[k], dev.p, tau[k])
                       if dev.p > 0.0 else np.zeros_like(z_tilde))
    y = np.zeros(cfg.r)
    for hk, x in zip(h, signals):
        y += hk * x
    y += m
    z_hat = y / cfg.gamma
    f_hat = scn.decoder @ z_hat
    pred = classify_batch(f_hat[None, :], scn.classifier)[0]
    f_star = prep.f_star[tgt]
    return TrialRecord(
        tau=tau, h=h, z_hat=z_hat, f_hat=f_hat, f_star=f_star,
        sq_err=float(np.sum((f_hat - f_star) ** 2)),
        predicted_label=int(pred), true_label=int(prep.labels[tgt]),
    )


# ---------------------------------------------------------------------------
# Empirical estimators
# ---------------------------------------------------------------------------

def empirical_mse(cfg: SystemConfig, trials: int, n_targets: int = 1,
                  base_trial: int = 0) -> tuple[float, float]:
    """Sample mean and standard error of ||f_hat - f_star||^2 over trials."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    scn = build_scenario(cfg)
    prep = prepare_targets(scn, n_targets)
    res = simulate_batch(scn, prep, trials, base_trial=base_trial)
    return res.mse


def empirical_accuracy(cfg: SystemConfig, n_targets: int, trials: int,
                       base_trial: int = 0) -> tuple[float, float, BatchResult]:
    """Fraction of trials whose predicted label matches the true class."""
    scn = build_scenario(cfg)
    prep = prepare_targets(scn, n_targets)
    res = simulate_batch(scn, prep, trials, base_trial=base_trial)
    acc, se = res.accuracy
    return acc, se, res


def noiseless_config(cfg: SystemConfig) -> SystemConfig:
    """All privacy noise, channel noise, and sampling disabled."""
    devs = [replace(d, sigma_sq=0.0, p=1.0) for d in cfg.devices]
    return replace(cfg, sigma_sq_m=0.0, devices=tuple(devs))


def estimate_p0(cfg: SystemConfig, n_targets: int) -> float:
    """Noiseless-pipeline baseline accuracy P0 (deterministic given seed)."""
    quiet = noiseless_config(cfg)
    acc, _, _ = empirical_accuracy(quiet, n_targets, n_targets)
    return acc


SWEEP_CSV_COLUMNS = [
    "eps_target", "eps_actual", "sigma_sq",
    "mse_bound_total", "mse_bound_noise", "mse_bound_weighting",
    "mse_bound_cross", "mse_empirical", "mse_stderr",
    "p0", "acc_lower_bound", "acc_empirical", "acc_stderr",
    "trials", "seed",
]
