"""Rolling one-step-ahead forecasts and two-step interval index tracking."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .benchmarks import ols
from .data import IntervalSample
from .estimators import (
    PathError,
    adaptive_weights,
    assemble_gram,
    ilars_path,
    min_dk_estimate,
    point_gram,
)
from .evaluate import ForecastPairSeries, cumulative_tracking_errors, tracking_errors
from .ivcore import Kernel
from .models import EstimatorConfig, FittedModel, fit_model

__all__ = [
    "RollingSpec",
    "RollingResult",
    "RollingFitError",
    "rolling_forecast",
    "TrackingSpec",
    "TrackingResult",
    "TrackingError",
    "select_by_cardinality",
    "index_track",
]


class RollingFitError(RuntimeError):
    def __init__(self, origin: int, cause: Exception):
        super().__init__(f"fit failed for the window ending before row {origin}: {cause}")
        self.origin = origin
        self.cause = cause


@dataclass(frozen=True)
class RollingSpec:
    """Fit on ``window`` rows, forecast the next one, advance by ``step``.

    ``fix_lambda`` selects the penalty once on the first window and reuses
    it; otherwise every window runs its own cross-validation (when the
    estimator has ``lam=None``).
    """

    window: int
    estimator: EstimatorConfig = EstimatorConfig()
    step: int = 1
    fix_lambda: bool = False

    def __post_init__(self):
        if self.window < 1 or self.step < 1:
            raise ValueError("window and step must be positive")


@dataclass(frozen=True)
class RollingResult:
    pairs: ForecastPairSeries
    origins: np.ndarray  # row index of each forecast target
    coefficients: tuple  # per-window raw-scale coefficients (None for bound benchmarks)
    lambdas: np.ndarray
    models: tuple = field(repr=False, default=())


def rolling_forecast(sample: IntervalSample, spec: RollingSpec, threads: int = 1) -> RollingResult:
    """One-step-ahead forecasts for targets ``window, window+step, ..., T-1``.

    Each fit sees only the ``window`` rows before its target, so
    standardization statistics never include the forecast row.
    """
    T, w = sample.T, spec.window
    if T < w + 1:
        raise ValueError(f"need T >= window + 1 (T={T}, window={w})")
    if w <= sample.p:
        raise ValueError(f"window {w} does not exceed p = {sample.p}")
    origins = np.arange(w, T, spec.step)
    config = spec.estimator

    def fit_at(t0: int, cfg: EstimatorConfig) -> FittedModel:
        try:
            return fit_model(sample.subset(np.arange(t0 - w, t0)), cfg)
        except Exception as err:
            raise RollingFitError(int(t0), err) from err

    first = None
    if spec.fix_lambda and config.lam is None and config.method not in ("acix", "crm", "ccrm", "blu"):
        first = fit_at(int(origins[0]), config)
        config = config.with_(lam=first.lam)

    todo = [int(t) for t in origins]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            models = list(pool.map(lambda t: fit_at(t, config), todo))
    else:
        models = [fit_at(t, config) for t in todo]
    if first is not None:
        models[0] = first

    preds = np.array([m.predict(sample.regressors[t]) for m, t in zip(models, todo)])
    pairs = ForecastPairSeries(preds, sample.responses[origins])
    lams = np.array([np.nan if m.lam is None else m.lam for m in models])
    return RollingResult(pairs, origins, tuple(m.coefficients for m in models), lams, tuple(models))


# -- index tracking ---------------------------------------------------------------


class TrackingError(RuntimeError):
    def __init__(self, message: str, achievable: int):
        super().__init__(message)
        self.achievable = achievable


@dataclass(frozen=True)
class TrackingSpec:
    train_len: int = 250
    test_len: int = 21
    n_select: int = 10
    selection_method: str = "interval-plr"
    gamma: float = 0.5
    kernel: Kernel = Kernel(5.0, 1.0, 1.0)

    def __post_init__(self):
        if self.selection_method not in ("interval-plr", "point-lasso"):
            raise ValueError(f"unknown selection method {self.selection_method!r}")
        if self.n_select < 1 or self.train_len < 2 or self.test_len < 0:
            raise ValueError("invalid tracking lengths")


@dataclass(frozen=True)
class TrackingResult:
    selected: tuple
    weights: np.ndarray
    lam: float
    train_portfolio: np.ndarray
    train_index: np.ndarray
    test_portfolio: np.ndarray
    test_index: np.ndarray

    def errors(self, part: str = "train"):
        port, idx = (self.train_portfolio, self.train_index) if part == "train" else (
            self.test_portfolio, self.test_index)
        return tracking_errors(port, idx)

    def curves(self, part: str = "train"):
        port, idx = (self.train_portfolio, self.train_index) if part == "train" else (
            self.test_portfolio, self.test_index)
        return cumulative_tracking_errors(port, idx)


def select_by_cardinality(path, n_select: int):
    """Largest penalty whose active set has exactly ``n_select`` members.

    Walks every segment from the top, so drop events are handled without
    assuming the active set grows monotonically. Returns (lambda, active).
    """
    best = 0
    for k, active in enumerate(path.active_sets):
        best = max(best, len(active))
        if len(active) == n_select:
            return float(path.breakpoints[k]), tuple(sorted(active))
    raise TrackingError(
        f"the path never has exactly {n_select} active variables (largest active set: {best})", best
    )


def index_track(
    panel,
    index,
    closes,
    spec: TrackingSpec,
) -> TrackingResult:
    """Select ``n_select`` constituents along the penalized path, then weight them.

    ``panel`` is the (T, p, 2) constituent interval returns (or an
    IntervalSample whose regressors are those), ``index`` the (T, 2) index
    interval returns, and ``closes`` a (T, p + 1) array of close-to-close
    returns with the index in column 0 and constituents after it.
    """
    z = panel.regressors if isinstance(panel, IntervalSample) else np.asarray(panel, dtype=float)
    y = np.asarray(index, dtype=float)
    closes = np.asarray(closes, dtype=float)
    T, p = z.shape[0], z.shape[1]
    if y.shape != (T, 2) or closes.shape != (T, p + 1):
        raise ValueError("panel, index and closes are not aligned")
    if T < spec.train_len:
        raise ValueError(f"need {spec.train_len} training rows, have {T}")
    if spec.n_select > p:
        raise ValueError(f"n_select={spec.n_select} exceeds p={p}")
    train = np.arange(spec.train_len)
    test = np.arange(spec.train_len, min(T, spec.train_len + spec.test_len))
    r_index, r_stocks = closes[:, 0], closes[:, 1:]

    if spec.selection_method == "interval-plr":
        gs = assemble_gram(IntervalSample(y[train], z[train]), spec.kernel)
    else:
        gs = point_gram(r_stocks[train], r_index[train])
    weights = adaptive_weights(min_dk_estimate(gs), spec.gamma)
    try:
        path = ilars_path(gs, weights)
    except PathError as err:
        raise TrackingError(str(err), 0) from err
    lam, selected = select_by_cardinality(path, spec.n_select)

    cols = list(selected)
    w = ols(r_stocks[train][:, cols], r_index[train])
    port = r_stocks[:, cols] @ w
    return TrackingResult(selected, w, lam, port[train], r_index[train], port[test], r_index[test])
