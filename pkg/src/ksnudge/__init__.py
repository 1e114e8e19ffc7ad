"""Linear and nonlinear continuous data assimilation for the 1D Kuramoto-Sivashinsky equation."""

from .assimilation import (
    FeedbackLaw,
    LawKind,
    Observer,
    StabilityResult,
    apply_law,
    coupled_step,
    feedback_term,
    observe,
    stability_check,
)
from .harness import (
    MACHINE_PRECISION,
    ErrorSeries,
    RunArtifacts,
    ScenarioConfig,
    chaotic_restart_state,
    convergence_time,
    decay_rate_windows,
    mode_error_snapshot,
    paper_methods,
    run_scenario,
    time_averaged_spectrum,
    write_artifacts,
)
from .kse import (
    DEFAULT_DT,
    BlowUpError,
    EtdCoefficients,
    KseParams,
    ScalingResult,
    etd1_step,
    initial_condition,
    linear_symbol,
    nondimensionalize,
    nonlinear_term,
    phi1,
    precompute_etd,
)
from .spectral import (
    SpectralGrid,
    dealias,
    h1_norm,
    l2_norm,
    make_grid,
    project_mean_free,
    spectral_derivative,
    to_physical,
    to_spectral,
)

__version__ = "0.1.0"
