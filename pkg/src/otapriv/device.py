"""Device-side pipeline: synthetic feature extraction, dimensionality
reduction, norm clipping, and Gaussian perturbation, in that order."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig, DeviceProfile, StreamTag, stream_rng, NORM_TOL


@dataclass(frozen=True)
class TargetObject:
    """A shared observed target: class centroid plus per-device view offsets."""

    class_label: int
    canonical_feature: np.ndarray       # (d,)
    view_perturbations: np.ndarray      # (K, d)


@dataclass(frozen=True)
class EncodedFeature:
    values: np.ndarray   # (r,)
    clipped: bool


def build_encoders(cfg: SystemConfig) -> np.ndarray:
    """Encoder matrices, shape (K, r, d), reproducible from the master seed.

    identity               -> W_k = I (requires r == d)
    shared_orthonormal     -> one matrix with orthonormal rows, shared
    per_device_orthonormal -> an independent orthonormal-row matrix per device
    """
    K, r, d = cfg.k_devices, cfg.r, cfg.d
    if cfg.encoder == "identity":
        if r != d:
            raise ValueError("identity encoder requires r == d")
        return np.broadcast_to(np.eye(d), (K, d, d)).copy()
    rng = stream_rng(cfg.master_seed, 0, StreamTag.ENCODER)
    if cfg.encoder == "shared_orthonormal":
        w = _orthonormal_rows(r, d, rng)
        return np.broadcast_to(w, (K, r, d)).copy()
    if cfg.encoder == "per_device_orthonormal":
        return np.stack([_orthonormal_rows(r, d, rng) for _ in range(K)])
    raise ValueError(f"unknown encoder spec {cfg.encoder!r}")


def _orthonormal_rows(r: int, d: int, rng: np.random.Generator) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((d, r)))
    return q.T


def extract_feature(target: TargetObject, device_index: int) -> np.ndarray:
    """Synthetic stand-in for on-device feature extraction: the target's
    canonical feature plus this device's view perturbation."""
    if not 0 <= device_index < len(target.view_perturbations):
        raise IndexError(f"device index {device_index} out of range")
    return target.canonical_feature + target.view_perturbations[device_index]


def encode(f: np.ndarray, w_matrix: np.ndarray) -> EncodedFeature:
    """Dimensionality reduction z = W f."""
    if w_matrix.shape[1] != f.shape[0]:
        raise ValueError(
            f"encoder is {w_matrix.shape}, feature has length {f.shape[0]}"
        )
    return EncodedFeature(values=w_matrix @ f, clipped=False)


def clip(z: EncodedFeature, clip_c: float) -> EncodedFeature:
    """Rescale z to norm <= C when it exceeds C: z * min(1, C/||z||).

    C = 0 maps everything to the zero vector (the formula's limit); a zero
    vector is never rescaled (min(1, C/0) is taken as 1).
    """
    if clip_c < 0.0:
        raise ValueError("clip bound must be nonnegative")
    norm = float(np.linalg.norm(z.values))
    if norm == 0.0 or norm <= clip_c:
        return z
    return EncodedFeature(values=z.values * (clip_c / norm), clipped=True)


def perturb(z: EncodedFeature, w: float, sigma_sq: float,
            rng: np.random.Generator) -> np.ndarray:
    """Gaussian mechanism on the weighted feature: w * z + n, with n having
    i.i.d. N(0, sigma_sq) entries. The noise draw depends only on the rng
    state, never on z."""
    noise = rng.standard_normal(z.values.shape) * np.sqrt(sigma_sq)
    return w * z.values + noise


def run_device(target: TargetObject, profile: DeviceProfile,
               w_matrix: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Full device pipeline: extract -> encode -> clip -> perturb."""
    f = extract_feature(target, profile.index)
    z = encode(f, w_matrix)
    z = clip(z, profile.clip)
    return perturb(z, profile.w, profile.sigma_sq, rng)


def make_target(cfg: SystemConfig, centroids: np.ndarray, target_index: int,
                class_label: int | None = None) -> TargetObject:
    """Seeded synthetic target: uniform class unless pinned, plus per-device
    Gaussian view perturbations."""
    rng = stream_rng(cfg.master_seed, target_index, StreamTag.TARGETS)
    n_classes = centroids.shape[0]
    label = int(rng.integers(n_classes)) if class_label is None else int(class_label)
    views = rng.standard_normal((cfg.k_devices, cfg.d)) * cfg.classifier.view_noise_std
    return TargetObject(
        class_label=label,
        canonical_feature=centroids[label],
        view_perturbations=views,
    )


def encoded_norm_ok(z: EncodedFeature, clip_c: float) -> bool:
    return float(np.linalg.norm(z.values)) <= clip_c + NORM_TOL
