"""Penalized regression for interval-valued data under the D_K distance."""

__version__ = "0.1.0"

from ._accel import NUMBA_ENABLED
from .ivcore import (
    CONSTANT_INTERVAL,
    UNIT_INTERVAL,
    ExtendedInterval,
    Kernel,
    dk_distance_sq,
    hukuhara_diff,
    inner_product_k,
    interval_add,
    linear_combination,
    scalar_mul,
    support_value,
)
from .data import IntervalSample, Standardizer, from_intervals
from .estimators import (
    CVResult,
    FitResult,
    GramSystem,
    LarsPath,
    SingularGramError,
    adaptive_weights,
    assemble_gram,
    coordinate_descent_fit,
    cross_validate_lambda,
    ilars_path,
    kkt_violation,
    min_dk_estimate,
    nonnegative_garrote,
    ridge_estimate,
    solve_at_lambda,
)
from .benchmarks import BoundsFit, acix_fit, blu_fit, ccrm_fit, crm_fit
from .models import EstimatorConfig, FittedModel, fit_model
from .simulate import DgpSpec, InnovationSpec, McReport, compare_estimators, dgp, gen_dataset, monte_carlo
from .evaluate import (
    CriteriaReport,
    ForecastPairSeries,
    dm_test,
    evaluate,
    interval_criteria,
    point_criteria,
    tracking_errors,
)
from .forecast import RollingSpec, TrackingSpec, index_track, rolling_forecast
from .ingest import ingest_csv, read_ohlc, write_bounds_wide
