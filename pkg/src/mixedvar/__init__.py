"""Mixed causal-noncausal VAR models.

Simulation of strictly stationary mixed paths, semi-parametric estimation
through autocovariances of transformed residuals, starting-value
strategies, simulated-annealing global search, and a replicated
experiment harness.
"""

__version__ = "0.1.0"

from .anneal import (
    AnnealResult,
    AnnealSchedule,
    AnnealStageRecord,
    anneal,
    metropolis_accept,
    paper_scale_schedule,
    propose,
    sa_then_polish,
)
from .estimation import estimate_pipeline, start_invariant
from .exceptions import (
    ComplexSpectrum,
    InvalidDof,
    LagTooLarge,
    LengthMismatch,
    MixedVarError,
    NonFiniteObjective,
    NotCausal,
    ParseError,
    SingularBasis,
    SingularDesign,
    SingularEstimate,
    SingularWeight,
    TooShort,
    UnitRootAmbiguity,
)
from .io import SeriesFile, demean, is_demeaned, load_series, require_length
from .model import (
    ModelOrder,
    SpectralDecomposition,
    VarParams,
    assemble_from_jordan,
    classify_roots,
    classify_strict,
    companion,
    companion_eigenvalues,
    counterpart,
    spectral_decomposition,
)
from .montecarlo import (
    ExperimentConfig,
    McReport,
    classify_estimate,
    experiment_from_json,
    experiment_to_json,
    export_report,
    has_two_nonadjacent_modes,
    histogram_modes,
    run_experiment,
    run_replication,
)
from .objective import (
    ObjectiveConfig,
    ObjectiveEvaluator,
    TransformFn,
    TransformSet,
    apply_transforms,
    autocov,
    make_transform_set,
    objective,
    objective_slice,
    residuals,
)
from .optimize import (
    LocalOptConfig,
    LocalOptResult,
    StartStrategy,
    central_gradient,
    make_start,
    minimize_local,
    ols_var,
    random_mixed_params,
    reverse_ols,
)
from .results import EstimationResult
from .simulate import ErrorSpec, SimConfig, draw_errors, simulate_causal, simulate_mixed
