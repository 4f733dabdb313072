"""Conservative Camassa-Holm solver in characteristic coordinates."""

from .chart import (
    ChartState,
    InitialProfile,
    InvalidStateError,
    Marker,
    TruncationWarning,
    beta_of_x,
    chart_consistency_residual,
    lipschitz_excess,
    transform_initial,
    validate_chart,
)
from .evolution import (
    Diagnostics,
    EvolutionError,
    RunConfig,
    SolutionHistory,
    Tolerances,
    diagnostics,
    energy,
    evolve,
    rhs,
    rk4_step,
    suggest_dt,
)
from .nonlocal_ops import (
    NonlocalFields,
    compute_fields,
    compute_G,
    compute_P,
    compute_Px,
    convolution_oracle,
    pxx_residual,
)
from .characteristics import (
    CharPath,
    ConvergenceError,
    SeparationReport,
    measure_G_lipschitz,
    picard_trace,
    separation_bound,
    verify_ucar,
)
from .eulerian import (
    EnergyMeasure,
    EulerianSnapshot,
    energy_measure,
    invert_chart,
    sample_u,
    sample_ux,
    wrap_angle,
)
from .reference import GRADIENT_GUARD, ReferenceAbort, reference_solver
from .harness import (
    AcceptanceFlags,
    RunReport,
    convergence_study,
    evaluate_flags,
    run,
)
from .presets import PRESET_NAMES, Preset, make_preset, make_profile

__version__ = "0.1.0"
