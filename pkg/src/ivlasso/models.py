"""One fit/predict interface over every estimator in the package."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from . import benchmarks
from .data import IntervalSample, Standardizer
from .estimators import (
    CVResult,
    FitResult,
    GramSystem,
    adaptive_weights,
    assemble_gram,
    cross_validate_lambda,
    default_lambda_grid,
    ilars_path,
    make_folds,
    min_dk_estimate,
    nonnegative_garrote,
    penalized_mask_for,
    ridge_estimate,
    solve_at_lambda,
)
from .ivcore import Kernel

DK_METHODS = ("plr", "acix", "garrote", "ridge")
BOUND_METHODS = ("crm", "ccrm", "blu")
METHODS = DK_METHODS + BOUND_METHODS

DEFAULT_KERNEL = Kernel(5.0, 1.0, 1.0)


@dataclass(frozen=True)
class EstimatorConfig:
    """What to fit. ``lam=None`` selects the penalty by cross-validation."""

    method: str = "plr"
    kernel: Kernel = DEFAULT_KERNEL
    gamma: float = 0.5
    lam: Optional[float] = None
    lambda_grid: Optional[tuple] = None
    n_folds: int = 5
    fold_scheme: str = "contiguous"
    penalize_intercept: bool = False
    standardize: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.lambda_grid is not None:
            object.__setattr__(self, "lambda_grid", tuple(float(v) for v in self.lambda_grid))

    def with_(self, **changes) -> "EstimatorConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kernel"] = list(self.kernel.as_tuple())
        return d


@dataclass(frozen=True)
class FittedModel:
    config: EstimatorConfig
    column_names: tuple
    standardizer: Optional[Standardizer]
    coefficients: Optional[np.ndarray] = None  # raw-scale D_K coefficients
    fit: Optional[FitResult] = None
    bounds_fit: Optional[benchmarks.BoundsFit] = None
    cv: Optional[CVResult] = None
    extra: dict = field(default_factory=dict)

    @property
    def lam(self) -> Optional[float]:
        return None if self.fit is None else self.fit.lam

    def predict(self, regressors) -> np.ndarray:
        z = np.asarray(regressors, dtype=float)
        single = z.ndim == 2
        if single:
            z = z[None]
        if self.coefficients is not None:
            out = np.einsum("tjb,j->tb", z, self.coefficients)
        else:
            zz = z if self.standardizer is None else self.standardizer.transform_regressors(z)
            out = self.bounds_fit.predict(zz)
            if self.standardizer is not None:
                out = self.standardizer.inverse_responses(out)
        return out[0] if single else out


def _prepare(sample: IntervalSample, config: EstimatorConfig):
    if not config.standardize:
        return sample, None
    std = Standardizer.fit(sample, config.kernel, center=not config.penalize_intercept)
    return std.transform(sample), std


def fit_model(sample: IntervalSample, config: EstimatorConfig) -> FittedModel:
    work, std = _prepare(sample, config)
    if config.method in BOUND_METHODS:
        bf = {"crm": benchmarks.crm_fit, "ccrm": benchmarks.ccrm_fit, "blu": benchmarks.blu_fit}[
            config.method
        ](work)
        return FittedModel(config, sample.column_names, std, bounds_fit=bf)

    fit, cv = fit_dk(work, config)
    coef = fit.coefficients if std is None else std.unscale_coefficients(fit.coefficients)
    return FittedModel(config, sample.column_names, std, coefficients=coef, fit=fit, cv=cv)


def fit_dk(sample: IntervalSample, config: EstimatorConfig):
    """Fit a D_K estimator on ``sample`` as given (no standardization here)."""
    kernel = config.kernel
    gs = assemble_gram(sample, kernel)
    pen = penalized_mask_for(sample, config.penalize_intercept)
    if config.method == "acix":
        theta = min_dk_estimate(gs)
        zeros = np.zeros(sample.p)
        return FitResult(theta, tuple(range(sample.p)), 0.0, zeros, kernel, None, gs.loss(theta)), None

    cv = None
    lam = config.lam
    if config.method == "plr":
        theta_tilde = min_dk_estimate(gs)
        w = adaptive_weights(theta_tilde, config.gamma)
        path = ilars_path(gs, w, pen)
        if lam is None:
            grid = config.lambda_grid or default_lambda_grid(path.lambda_max)
            cv = cross_validate_lambda(
                sample, kernel, config.gamma, grid, config.n_folds, config.fold_scheme, pen
            )
            lam = cv.best_lambda
        return solve_at_lambda(path, lam, config.gamma), cv

    if config.method == "garrote":
        if lam is None:
            cv = _cv_generic(sample, config, _garrote_theta)
            lam = cv.best_lambda
        return nonnegative_garrote(gs, min_dk_estimate(gs), lam), cv

    # ridge
    if lam is None:
        cv = _cv_generic(sample, config, _ridge_theta)
        lam = cv.best_lambda
    theta = ridge_estimate(gs, lam)
    ones = np.ones(sample.p)
    obj = gs.loss(theta) + lam * float(theta @ theta)
    return FitResult(theta, tuple(np.flatnonzero(theta != 0)), lam, ones, kernel, None, obj), cv


def _garrote_theta(gs: GramSystem, lam: float) -> np.ndarray:
    return nonnegative_garrote(gs, min_dk_estimate(gs), lam).coefficients


def _ridge_theta(gs: GramSystem, lam: float) -> np.ndarray:
    return ridge_estimate(gs, lam)


def _cv_generic(sample: IntervalSample, config: EstimatorConfig, solve) -> CVResult:
    gs = assemble_gram(sample, config.kernel)
    if config.lambda_grid:
        grid = np.asarray(config.lambda_grid)
    elif config.method == "garrote":
        theta = min_dk_estimate(gs)
        grid = default_lambda_grid(2.0 * float(np.max(theta * gs.cross, initial=0.0)))
    else:
        grid = default_lambda_grid(float(np.trace(gs.gram)), ratio=1e-6)
    folds = make_folds(sample.T, config.n_folds, config.fold_scheme)
    losses = np.empty((len(folds), grid.size))
    for i, val_rows in enumerate(folds):
        train_rows = np.setdiff1d(np.arange(sample.T), val_rows)
        train = assemble_gram(sample, config.kernel, rows=train_rows)
        val = assemble_gram(sample, config.kernel, rows=val_rows)
        thetas = np.array([solve(train, lam) for lam in grid])
        losses[i] = val.losses(thetas)
    curve = losses.mean(axis=0)
    ok = curve <= curve.min() + 1e-12 * max(abs(curve.min()), 1.0)
    return CVResult(float(grid[ok].max()), grid, curve, losses, config.fold_scheme)
