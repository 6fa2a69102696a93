"""Stationary spatial dynamic panel data (SDPD) models.

Simulation, per-location generalized Yule-Walker estimation, latent
weight-matrix estimation and comparison with the VAR(1) Yule-Walker
estimator.
"""

from .bench import McConfig, McSummary, ae, ase, ase_row1, run_monte_carlo
from .errors import DataError, NumericalError, SdpdError
from .estimator import (
    EstimationResult,
    correlation_profile,
    estimate,
    estimate_from_covariances,
    lambda1_given_lambda0,
    location_moments,
    quadratic_coefficients,
    select_root,
    solve_quadratic,
)
from .moments import LagCovariancePair, population_covariances, sample_covariances
from .process_sim import (
    CrossMode,
    ErrorSpec,
    PanelSeries,
    SdpdModel,
    gen_coefficients,
    gen_errors,
    population_error_cov,
    random_model,
    simulate,
)
from .reduced_form import (
    TransitionMatrix,
    build_reduced,
    check_representable,
    estimate_latent_w,
    sdpd_transition_estimator,
    var_yule_walker,
)
from .spatial_weights import Normalization, SpatialWeightMatrix, gen_spatial_matrix, renormalize

__version__ = "0.1.0"
