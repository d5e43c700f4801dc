"""Directed-information rate analysis for linear feedback loops.

A discrete-time plant is stabilized over a noisy feedback channel; the
information rate that channel carries about the loop splits into a Bode
sensitivity term set by the plant's unstable poles plus a nonnegative
disturbance-transmission term. This package computes the rate and its
decomposition analytically, checks the identities, and validates the values
against time-domain Monte Carlo simulation.
"""

from .errors import (
    ConfigError,
    ConsistencyError,
    DegenerateLoopError,
    DivergenceError,
    DivisionDomainError,
    InvalidInputError,
    LogDomainError,
    LoopInfoError,
    SingularityError,
    UnstableLoopError,
)
from .lti import (
    ClosedLoop,
    LoopModel,
    Polynomial,
    StabilityReport,
    TransferFunction,
    close_loop,
    freq_response,
    freq_response_array,
    is_stabilizing,
    pole_placement_controller,
    poly_roots,
    tf,
    TF_ONE,
    TF_ZERO,
)
from .spectral import (
    FrequencyGrid,
    NoiseSpec,
    SpectrumSamples,
    colored,
    log_integral,
    log_integral_convergence,
    noise_psd,
    output_psd,
    sensitivity_ratio,
    spectrum_csv_string,
    spectrum_to_csv,
    white,
)
from .decomposition import (
    DecompositionReport,
    IndependenceReport,
    RateInputs,
    SuiteCase,
    bode_term_analytic,
    controller_independence_check,
    decompose,
    directed_info_rate,
    export_integrands,
    integrands_csv_string,
    gaussian_entropy_rate,
    random_stabilized_loop,
    run_identity_suite,
    white_noise_disturbance_term,
)
from .montecarlo import (
    ComparisonRecord,
    SimulationConfig,
    TrajectorySet,
    WelchParams,
    compare_report,
    empirical_directed_info,
    simulate_loop,
    welch_psd,
)
from .config import (
    LoopConfig,
    RunOptions,
    dump_config,
    load_config,
    parse_config,
    write_config,
)

__version__ = "0.1.0"

__all__ = [
    "ClosedLoop",
    "ComparisonRecord",
    "ConfigError",
    "ConsistencyError",
    "DecompositionReport",
    "DegenerateLoopError",
    "DivergenceError",
    "DivisionDomainError",
    "FrequencyGrid",
    "IndependenceReport",
    "InvalidInputError",
    "LogDomainError",
    "LoopConfig",
    "LoopInfoError",
    "LoopModel",
    "NoiseSpec",
    "Polynomial",
    "RateInputs",
    "RunOptions",
    "SimulationConfig",
    "SingularityError",
    "SpectrumSamples",
    "StabilityReport",
    "SuiteCase",
    "TF_ONE",
    "TF_ZERO",
    "TrajectorySet",
    "TransferFunction",
    "UnstableLoopError",
    "WelchParams",
    "bode_term_analytic",
    "close_loop",
    "colored",
    "compare_report",
    "controller_independence_check",
    "decompose",
    "directed_info_rate",
    "dump_config",
    "empirical_directed_info",
    "export_integrands",
    "integrands_csv_string",
    "freq_response",
    "freq_response_array",
    "gaussian_entropy_rate",
    "is_stabilizing",
    "load_config",
    "log_integral",
    "log_integral_convergence",
    "noise_psd",
    "output_psd",
    "parse_config",
    "pole_placement_controller",
    "poly_roots",
    "random_stabilized_loop",
    "run_identity_suite",
    "sensitivity_ratio",
    "simulate_loop",
    "spectrum_csv_string",
    "spectrum_to_csv",
    "tf",
    "welch_psd",
    "white",
    "white_noise_disturbance_term",
    "write_config",
]
