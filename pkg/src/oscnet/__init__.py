"""Closed-form dissipative dynamics of two coupled, driven harmonic oscillators."""
from .errors import (
    ConfigError,
    DegenerateCoupling,
    DegenerateDrive,
    NoDissipation,
    OscnetError,
    StepSizeError,
    TruncationError,
)
from .params import (
    DampingRates,
    DerivedCoefficients,
    Lorentzian,
    MarkovianWhite,
    SystemConfig,
    WideLorentzian,
    derive_coefficients,
    evaluate_rates,
    frame_coefficients,
    load_config,
    normal_mode_frequencies,
)
from .dynamics import (
    InitialSuperposition,
    JointStateSnapshot,
    ReducedStateSnapshot,
    characteristic_trajectories,
    coherent_overlap,
    evolve_joint_state,
    label_map,
    propagator,
    reduce_to_mode,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DegenerateCoupling", "DegenerateDrive", "NoDissipation", "OscnetError", "StepSizeError",
    "TruncationError",
    "DampingRates", "DerivedCoefficients", "Lorentzian", "MarkovianWhite", "SystemConfig", "WideLorentzian",
    "derive_coefficients", "evaluate_rates", "frame_coefficients", "load_config", "normal_mode_frequencies",
    "InitialSuperposition", "JointStateSnapshot", "ReducedStateSnapshot", "characteristic_trajectories",
    "coherent_overlap", "evolve_joint_state", "label_map", "propagator", "reduce_to_mode",
]
