"""Simulator and analysis library for privacy-preserving collaborative
inference over a fading multiple-access channel.

Device-side encoding/clipping/perturbation, over-the-air aggregation,
server-side decoding and classification, per-device privacy accounting,
analytic error bounds, Monte-Carlo estimators, and an experiment harness
with CSV/JSON reporting.
"""

from .config import (
    ConfigError,
    DeviceProfile,
    FadingModel,
    ClassifierSpec,
    StreamTag,
    SystemConfig,
    config_from_json,
    config_hash,
    config_to_json,
    dbm_to_watts,
    derive_trial_seed,
    load_config,
    paper_default_config,
    save_config,
    stream_rng,
    validate_config,
    validated,
)
from .device import (
    EncodedFeature,
    TargetObject,
    build_encoders,
    clip,
    encode,
    extract_feature,
    make_target,
    perturb,
    run_device,
)
from .channel import (
    PowerReport,
    align,
    audit_power,
    draw_channel,
    sample_participation,
    superpose,
    transmit_signal,
)
from .server import (
    MarginClassifier,
    average_pool,
    build_classifier,
    build_decoder,
    classify,
    compute_margin,
    decode,
    post_process,
    run_server,
)
from .accountant import (
    AccountantInput,
    PrivacyBudget,
    all_budgets,
    calibrate_sigma,
    choose_t,
    concentration_exact,
    concentration_mc,
    epsilon_for_device,
    mu_bar,
    sensitivity_constant,
)
from .analysis import (
    AccuracyBound,
    BatchResult,
    MseBreakdown,
    Scenario,
    accuracy_lower_bound,
    build_scenario,
    empirical_accuracy,
    empirical_mse,
    estimate_p0,
    mse_bound_eps_form,
    mse_bound_sigma_form,
    noiseless_config,
    prepare_targets,
    sigma_from_eps,
    simulate_batch,
    simulate_trial,
)
from .harness import (
    DEFAULT_EPS_GRID,
    MODES,
    SweepSpec,
    apply_mode,
    run_mode_comparison,
    run_single,
    run_sweep,
    write_csv,
)
from .acceptance import run_acceptance

__version__ = "1.0.0"
