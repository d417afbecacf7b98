"""Domain types, configuration parsing/validation, and deterministic seeding."""

from __future__ import annotations

import json
import hashlib
from dataclasses import dataclass, field, replace
from enum import IntEnum

import numpy as np

NORM_TOL = 1e-9


class ConfigError(ValueError):
    """Raised when a configuration fails validation; carries all violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class StreamTag(IntEnum):
    """Independent randomness streams, mixed into per-trial seeds."""

    PARTICIPATION = 1
    CHANNEL = 2
    DEVICE_NOISE = 3
    RECEIVER_NOISE = 4
    ENCODER = 5
    CENTROIDS = 6
    TARGETS = 7
    CONCENTRATION = 8
    ACCEPTANCE = 9


def derive_trial_seed(master_seed: int, trial_index: int, stream_tag: StreamTag) -> int:
    """Deterministically mix (master_seed, trial_index, stream_tag) into a 64-bit seed.

    Distinct (trial_index, stream_tag) pairs map to distinct seeds with
    overwhelming probability; identical inputs always map to the same seed.
    """
    ss = np.random.SeedSequence(
        entropy=int(master_seed) & 0xFFFFFFFFFFFFFFFF,
        spawn_key=(int(trial_index), int(stream_tag)),
    )
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def stream_rng(master_seed: int, trial_index: int, stream_tag: StreamTag) -> np.random.Generator:
    return np.random.default_rng(derive_trial_seed(master_seed, trial_index, stream_tag))


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class DeviceProfile:
    """Per-device parameters: participation, weight, clipping, noise, power."""

    index: int
    p: float          # participation probability p_k
    w: float          # importance weight w_k
    clip: float       # L2 clipping bound C_k
    sigma_sq: float   # local Gaussian perturbation variance sigma_k^2
    power: float      # transmit power budget P_k, linear watts

    def violations(self):
        out = []
        tag = f"device {self.index}"
        if not (0.0 <= self.p <= 1.0):
            out.append(f"{tag}: p_k={self.p} outside [0,1]")
        if self.w < 0.0:
            out.append(f"{tag}: w_k={self.w} negative")
        if self.clip < 0.0:
            out.append(f"{tag}: C_k={self.clip} negative")
        if self.sigma_sq < 0.0:
            out.append(f"{tag}: sigma_sq_k={self.sigma_sq} negative")
        if self.power < 0.0:
            out.append(f"{tag}: P_k={self.power} negative")
        return out


@dataclass(frozen=True)
class FadingModel:
    """Fading-channel description; CONSTANT pins h_k = sqrt(mean_power)."""

    kind: str = "rician"          # "rician" | "constant"
    k_factor: float = 3.0         # Rician K-factor (LOS/scatter power ratio)
    mean_power: float = 1.0       # E[h^2]
    h_floor: float = 1e-3         # deep-fade exclusion threshold

    def violations(self):
        out = []
        if self.kind not in ("rician", "constant"):
            out.append(f"channel: unknown kind {self.kind!r}")
        if self.mean_power <= 0.0:
            out.append("channel: mean_power must be positive")
        if self.h_floor <= 0.0:
            out.append("channel: h_floor must be positive")
        if self.k_factor < 0.0:
            out.append("channel: k_factor negative")
        return out


@dataclass(frozen=True)
class ClassifierSpec:
    """Synthetic nearest-centroid classifier with a controlled margin."""

    num_classes: int = 40
    target_margin: float = 2.0    # half the minimum pairwise centroid distance
    view_noise_std: float = 0.3   # per-device view perturbation scale
    in_rowspace: bool = True      # draw centroids inside the encoder row space

    def violations(self):
        out = []
        if self.num_classes < 2:
            out.append("classifier: num_classes must be >= 2")
        if self.target_margin <= 0.0:
            out.append("classifier: target_margin must be positive")
        if self.view_noise_std < 0.0:
            out.append("classifier: view_noise_std negative")
        return out


ENCODER_SPECS = ("identity", "shared_orthonormal", "per_device_orthonormal")
DECODER_SPECS = ("transpose", "pseudoinverse")


@dataclass(frozen=True)
class SystemConfig:
    """Global simulator configuration; immutable after construction."""

    k_devices: int
    d: int
    r: int
    gamma: float
    sigma_sq_m: float
    delta: float
    delta_prime: float
    devices: tuple[DeviceProfile, ...]
    encoder: str = "shared_orthonormal"
    decoder: str = "transpose"
    classifier: ClassifierSpec = field(default_factory=ClassifierSpec)
    channel: FadingModel = field(default_factory=FadingModel)
    master_seed: int = 0

    # -- derived accessors -------------------------------------------------
    def p(self) -> np.ndarray:
        return np.array([dev.p for dev in self.devices])

    def w(self) -> np.ndarray:
        return np.array([dev.w for dev in self.devices])

    def clips(self) -> np.ndarray:
        return np.array([dev.clip for dev in self.devices])

    def sigma_sq(self) -> np.ndarray:
        return np.array([dev.sigma_sq for dev in self.devices])

    def powers(self) -> np.ndarray:
        return np.array([dev.power for dev in self.devices])

    def with_devices(self, devices) -> "SystemConfig":
        return replace(self, devices=tuple(devices), k_devices=len(devices))

    def scale_sigma(self, factor: float) -> "SystemConfig":
        devs = [replace(d, sigma_sq=d.sigma_sq * factor) for d in self.devices]
        return self.with_devices(devs)


def validate_config(cfg: SystemConfig) -> list[str]:
    """Return the complete list of invariant violations (empty when valid)."""
    out = []
    if cfg.k_devices < 1:
        out.append(f"k_devices={cfg.k_devices} must be >= 1")
    if len(cfg.devices) != cfg.k_devices:
        out.append(f"devices has {len(cfg.devices)} entries, expected {cfg.k_devices}")
    if cfg.d < 1:
        out.append(f"feature_dim_d={cfg.d} must be >= 1")
    if not (1 <= cfg.r <= cfg.d):
        out.append(f"reduced_dim_r={cfg.r}: r exceeds d or is < 1 (d={cfg.d})")
    if cfg.gamma <= 0.0:
        out.append(f"gamma={cfg.gamma} must be positive")
    if cfg.sigma_sq_m < 0.0:
        out.append(f"sigma_sq_m={cfg.sigma_sq_m} negative")
    for name, val in (("delta", cfg.delta), ("delta_prime", cfg.delta_prime)):
        if not (0.0 < val <= 1.0):
            out.append(f"{name}={val} outside (0,1]")
    if cfg.encoder not in ENCODER_SPECS:
        out.append(f"encoder={cfg.encoder!r} not one of {ENCODER_SPECS}")
    if cfg.decoder not in DECODER_SPECS:
        out.append(f"decoder={cfg.decoder!r} not one of {DECODER_SPECS}")
    if cfg.encoder == "identity" and cfg.r != cfg.d:
        out.append("identity encoder requires r == d")
    if cfg.decoder == "transpose" and cfg.encoder == "per_device_orthonormal":
        out.append("transpose decoder requires a shared encoder")
    for dev in cfg.devices:
        out.extend(dev.violations())
    out.extend(cfg.channel.violations())
    out.extend(cfg.classifier.violations())
    return out


def validated(cfg: SystemConfig) -> SystemConfig:
    violations = validate_config(cfg)
    if violations:
        raise ConfigError(violations)
    return cfg


# ---------------------------------------------------------------------------
# Flat-file schema (exact field names per the external interface)
# ---------------------------------------------------------------------------

def _device_to_json(dev: DeviceProfile) -> dict:
    return {
        "index": dev.index,
        "p_k": dev.p,
        "w_k": dev.w,
        "C_k": dev.clip,
        "sigma_sq_k": dev.sigma_sq,
        "P_k": dev.power,
    }


def _device_from_json(obj: dict, index: int) -> DeviceProfile:
    if "P_k_dbm" in obj:
        power = dbm_to_watts(float(obj["P_k_dbm"]))
    else:
        power = float(obj.get("P_k", 1.0))
    return DeviceProfile(
        index=int(obj.get("index", index)),
        p=float(obj["p_k"]),
        w=float(obj["w_k"]),
        clip=float(obj["C_k"]),
        sigma_sq=float(obj["sigma_sq_k"]),
        power=power,
    )


def config_to_json(cfg: SystemConfig) -> dict:
    return {
        "k_devices": cfg.k_devices,
        "feature_dim_d": cfg.d,
        "reduced_dim_r": cfg.r,
        "gamma": cfg.gamma,
        "sigma_sq_m": cfg.sigma_sq_m,
        "delta": cfg.delta,
        "delta_prime": cfg.delta_prime,
        "devices": [_device_to_json(dev) for dev in cfg.devices],
        "encoder": cfg.encoder,
        "decoder": cfg.decoder,
        "classifier": {
            "num_classes": cfg.classifier.num_classes,
            "target_margin": cfg.classifier.target_margin,
            "view_noise_std": cfg.classifier.view_noise_std,
            "in_rowspace": cfg.classifier.in_rowspace,
        },
        "channel": {
            "kind": cfg.channel.kind,
            "k_factor": cfg.channel.k_factor,
            "mean_power": cfg.channel.mean_power,
            "h_floor": cfg.channel.h_floor,
        },
        "master_seed": cfg.master_seed,
    }


def config_from_json(obj: dict) -> SystemConfig:
    clf = obj.get("classifier", {})
    chan = obj.get("channel", {})
    cfg = SystemConfig(
        k_devices=int(obj["k_devices"]),
        d=int(obj["feature_dim_d"]),
        r=int(obj["reduced_dim_r"]),
        gamma=float(obj["gamma"]),
        sigma_sq_m=float(obj["sigma_sq_m"]),
        delta=float(obj["delta"]),
        delta_prime=float(obj["delta_prime"]),
        devices=tuple(
            _device_from_json(d, i) for i, d in enumerate(obj["devices"])
        ),
        encoder=obj.get("encoder", "shared_orthonormal"),
        decoder=obj.get("decoder", "transpose"),
        classifier=ClassifierSpec(
            num_classes=int(clf.get("num_classes", 40)),
            target_margin=float(clf.get("target_margin", 2.0)),
            view_noise_std=float(clf.get("view_noise_std", 0.3)),
            in_rowspace=bool(clf.get("in_rowspace", True)),
        ),
        channel=FadingModel(
            kind=chan.get("kind", "rician"),
            k_factor=float(chan.get("k_factor", 3.0)),
            mean_power=float(chan.get("mean_power", 1.0)),
            h_floor=float(chan.get("h_floor", 1e-3)),
        ),
        master_seed=int(obj["master_seed"]),
    )
    return cfg


def save_config(cfg: SystemConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(config_to_json(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_config(path) -> SystemConfig:
    with open(path) as fh:
        return config_from_json(json.load(fh))


def config_hash(cfg: SystemConfig) -> str:
    blob = json.dumps(config_to_json(cfg), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def paper_default_config(d: int = 64, r: int = 16, master_seed: int = 20260823,
                         **overrides) -> SystemConfig:
    """Default configuration: 12 devices, p=0.9, w=1/12, C=100, sigma^2=0.1,
    gamma=1, sigma_m^2=0.1, delta=delta'=1e-5, 30 dBm power, 40 classes.

    Feature dimensions default to a desk-scale (d, r); the device-side and
    privacy parameters follow the reference experiment setup.
    """
    K = 12
    devices = tuple(
        DeviceProfile(index=k, p=0.9, w=1.0 / K, clip=100.0, sigma_sq=0.1,
                      power=dbm_to_watts(30.0))
        for k in range(K)
    )
    cfg = SystemConfig(
        k_devices=K,
        d=d,
        r=r,
        gamma=1.0,
        sigma_sq_m=0.1,
        delta=1e-5,
        delta_prime=1e-5,
        devices=devices,
        master_seed=master_seed,
    )
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg
