"""Server-side pipeline: post-processing, decoding, reference average pool,
and the synthetic nearest-centroid margin classifier."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig, StreamTag, stream_rng


@dataclass(frozen=True)
class MarginClassifier:
    centroids: np.ndarray     # (L, d)
    margin_delta: float       # half the minimum pairwise centroid distance


def build_decoder(cfg: SystemConfig, encoders: np.ndarray) -> np.ndarray:
    """Decoder matrix D (d x r).

    transpose      -> D = W^T (shared orthonormal encoders; exact round trip
                      on the encoder row space)
    pseudoinverse  -> Moore-Penrose pseudoinverse of the (mean) encoder
    """
    if cfg.decoder == "transpose":
        if cfg.encoder == "per_device_orthonormal":
            raise ValueError("transpose decoder requires a shared encoder")
        return encoders[0].T.copy()
    if cfg.decoder == "pseudoinverse":
        return np.linalg.pinv(encoders.mean(axis=0))
    raise ValueError(f"unknown decoder spec {cfg.decoder!r}")


def post_process(y: np.ndarray, gamma: float) -> np.ndarray:
    """z_hat = y / gamma."""
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    return y / gamma


def decode(z_hat: np.ndarray, decoder: np.ndarray) -> np.ndarray:
    """f_hat = D z_hat."""
    if decoder.shape[1] != z_hat.shape[-1]:
        raise ValueError(
            f"decoder is {decoder.shape}, z_hat has length {z_hat.shape[-1]}"
        )
    return z_hat @ decoder.T


def average_pool(features: list[np.ndarray] | np.ndarray) -> np.ndarray:
    """Reference pooled feature: coordinate-wise mean of the device features."""
    arr = np.asarray(features, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ValueError("need at least one feature vector of equal length")
    return arr.mean(axis=0)


def classify(f: np.ndarray, clf: MarginClassifier) -> int:
    """Nearest centroid by Euclidean distance; ties break to the lowest index."""
    d2 = np.sum((clf.centroids - f) ** 2, axis=1)
    return int(np.argmin(d2))


def classify_batch(f: np.ndarray, clf: MarginClassifier) -> np.ndarray:
    """Vectorized nearest-centroid labels for rows of f (n x d)."""
    c = clf.centroids
    # ||f - c||^2 = ||f||^2 - 2 f.c + ||c||^2; the ||f||^2 term is constant per row
    scores = -2.0 * (f @ c.T) + np.sum(c ** 2, axis=1)[None, :]
    return np.argmin(scores, axis=1)


def compute_margin(centroids: np.ndarray) -> float:
    """Half the minimum pairwise centroid distance."""
    n = centroids.shape[0]
    if n < 2:
        raise ValueError("need at least two centroids")
    g = centroids @ centroids.T
    sq = np.sum(centroids ** 2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * g
    iu = np.triu_indices(n, k=1)
    min_d2 = float(np.min(d2[iu]))
    if min_d2 <= 0.0:
        raise ValueError("duplicate centroids: margin is zero")
    return 0.5 * float(np.sqrt(min_d2))


def build_classifier(cfg: SystemConfig, encoders: np.ndarray) -> MarginClassifier:
    """Seeded synthetic centroids, rescaled so the margin equals the
    configured target exactly.

    With in_rowspace=True the centroids live in the shared encoder's row
    space, so the transpose decoder reconstructs them without projection
    loss.
    """
    spec = cfg.classifier
    rng = stream_rng(cfg.master_seed, 0, StreamTag.CENTROIDS)
    if spec.in_rowspace:
        coords = rng.standard_normal((spec.num_classes, cfg.r))
        raw = coords @ encoders[0]           # W^T coords, rows of shape (d,)
    else:
        raw = rng.standard_normal((spec.num_classes, cfg.d))
    current = compute_margin(raw)
    centroids = raw * (spec.target_margin / current)
    return MarginClassifier(centroids=centroids, margin_delta=spec.target_margin)


def run_server(y: np.ndarray, gamma: float, decoder: np.ndarray,
               clf: MarginClassifier) -> tuple[np.ndarray, int]:
    """Server pipeline: post_process -> decode -> classify."""
    f_hat = decode(post_process(y, gamma), decoder)
    return f_hat, classify(f_hat, clf)
