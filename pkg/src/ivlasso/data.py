"""Interval samples and their standardization."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .ivcore import ExtendedInterval, Kernel, as_bounds, inner_product_arrays, midpoints

CONST_NAME = "const"
UNIT_NAME = "I0"

_CONST = np.array([1.0, 1.0])
_UNIT = np.array([-0.5, 0.5])


@dataclass(frozen=True)
class IntervalSample:
    """Response series with a regressor panel of extended intervals.

    ``responses`` is (T, 2) and ``regressors`` is (T, p, 2), bounds on the
    last axis. Arrays are made read-only on construction.
    """

    responses: np.ndarray
    regressors: np.ndarray
    column_names: tuple = ()
    response_name: str = "Y"
    dates: Optional[tuple] = None

    def __post_init__(self):
        y = as_bounds(self.responses).astype(float).copy()
        z = as_bounds(self.regressors).astype(float).copy()
        if y.ndim != 2:
            raise ValueError(f"responses must be (T, 2), got {y.shape}")
        if z.ndim != 3 or z.shape[0] != y.shape[0]:
            raise ValueError(
                f"regressors must be (T, p, 2) with T={y.shape[0]}, got {z.shape}"
            )
        if y.shape[0] < 1 or z.shape[1] < 1:
            raise ValueError("sample needs T >= 1 rows and p >= 1 columns")
        if not (np.isfinite(y).all() and np.isfinite(z).all()):
            raise ValueError("sample contains non-finite bounds")
        names = tuple(self.column_names) or tuple(f"X{j + 1}" for j in range(z.shape[1]))
        if len(names) != z.shape[1]:
            raise ValueError(f"{len(names)} column names for {z.shape[1]} columns")
        y.flags.writeable = False
        z.flags.writeable = False
        object.__setattr__(self, "responses", y)
        object.__setattr__(self, "regressors", z)
        object.__setattr__(self, "column_names", names)
        if self.dates is not None:
            dates = tuple(self.dates)
            if len(dates) != y.shape[0]:
                raise ValueError("dates length does not match T")
            object.__setattr__(self, "dates", dates)

    @property
    def T(self) -> int:
        return self.responses.shape[0]

    @property
    def p(self) -> int:
        return self.regressors.shape[1]

    def response(self, t: int) -> ExtendedInterval:
        return ExtendedInterval(*self.responses[t])

    def row(self, t: int) -> list:
        return [ExtendedInterval(*iv) for iv in self.regressors[t]]

    def subset(self, rows) -> "IntervalSample":
        rows = np.asarray(rows)
        dates = None if self.dates is None else tuple(np.asarray(self.dates, dtype=object)[rows])
        return IntervalSample(
            self.responses[rows], self.regressors[rows], self.column_names,
            self.response_name, dates,
        )

    def select_columns(self, cols) -> "IntervalSample":
        cols = list(cols)
        return IntervalSample(
            self.responses, self.regressors[:, cols], [self.column_names[j] for j in cols],
            self.response_name, self.dates,
        )

    def constant_columns(self) -> list:
        """Indices of columns equal to [1, 1] in every row."""
        return [j for j in range(self.p) if np.all(self.regressors[:, j] == _CONST)]

    def unit_columns(self) -> list:
        """Indices of columns equal to I0 = [-1/2, 1/2] in every row."""
        return [j for j in range(self.p) if np.all(self.regressors[:, j] == _UNIT)]

    def intercept_columns(self) -> list:
        return sorted(set(self.constant_columns()) | set(self.unit_columns()))

    def with_intercepts(self) -> "IntervalSample":
        """Prepend the [1, 1] and I0 columns."""
        T = self.T
        extra = np.empty((T, 2, 2))
        extra[:, 0] = _CONST
        extra[:, 1] = _UNIT
        return IntervalSample(
            self.responses,
            np.concatenate([extra, self.regressors], axis=1),
            (CONST_NAME, UNIT_NAME) + self.column_names,
            self.response_name,
            self.dates,
        )

    def with_response_lags(self, q: int) -> "IntervalSample":
        """Append ``Y_{t-1}..Y_{t-q}`` as regressors, dropping the first ``q`` rows."""
        if q < 1:
            return self
        if q >= self.T:
            raise ValueError(f"cannot take {q} lags of a length-{self.T} series")
        lags = np.stack([self.responses[q - k: self.T - k] for k in range(1, q + 1)], axis=1)
        dates = None if self.dates is None else self.dates[q:]
        return IntervalSample(
            self.responses[q:],
            np.concatenate([self.regressors[q:], lags], axis=1),
            self.column_names + tuple(f"{self.response_name}_lag{k}" for k in range(1, q + 1)),
            self.response_name,
            dates,
        )


def from_intervals(responses: Sequence, regressors: Sequence, **kw) -> IntervalSample:
    return IntervalSample(as_bounds(responses), as_bounds(regressors), **kw)


@dataclass(frozen=True)
class Standardizer:
    """Centering/scaling fitted on one sample and applied to others.

    Non-intercept columns are centered by their midpoint mean (only when a
    [1, 1] column exists to absorb the shift) and scaled so that their
    per-row D_K self-moment is 1. The response is centered by its midpoint
    mean under the same condition, never scaled.
    """

    column_means: np.ndarray
    column_scales: np.ndarray
    response_mean: float
    centered: bool
    const_index: Optional[int]
    degenerate: tuple = field(default=())

    @classmethod
    def fit(cls, sample: IntervalSample, kernel: Kernel, center: bool = True) -> "Standardizer":
        p = sample.p
        skip = set(sample.intercept_columns())
        consts = sample.constant_columns()
        const_index = consts[0] if consts else None
        centered = bool(center and const_index is not None)
        means = np.zeros(p)
        scales = np.ones(p)
        degenerate = []
        z = sample.regressors
        for j in range(p):
            if j in skip:
                continue
            col = z[:, j]
            if centered:
                means[j] = midpoints(col).mean()
            d = col - means[j]
            moment = inner_product_arrays(d, d, kernel).mean()
            if moment > 0:
                scales[j] = np.sqrt(moment)
            else:
                degenerate.append(j)
        if degenerate:
            names = [sample.column_names[j] for j in degenerate]
            warnings.warn(f"columns with zero D_K moment left unscaled and inactive: {names}")
        ymean = float(midpoints(sample.responses).mean()) if centered else 0.0
        return cls(means, scales, ymean, centered, const_index, tuple(degenerate))

    def transform_regressors(self, z: np.ndarray) -> np.ndarray:
        z = np.array(z, dtype=float)
        z -= self.column_means[:, None]
        z /= self.column_scales[:, None]
        return z

    def transform_responses(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y, dtype=float) - self.response_mean

    def transform(self, sample: IntervalSample) -> IntervalSample:
        return IntervalSample(
            self.transform_responses(sample.responses),
            self.transform_regressors(sample.regressors),
            sample.column_names,
            sample.response_name,
            sample.dates,
        )

    def inverse_responses(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y, dtype=float) + self.response_mean

    def unscale_coefficients(self, theta: np.ndarray) -> np.ndarray:
        """Map coefficients fitted on the standardized scale back to raw columns."""
        theta = np.asarray(theta, dtype=float) / self.column_scales
        if self.centered:
            theta = theta.copy()
            shift = self.response_mean - float(theta @ self.column_means)
            theta[self.const_index] += shift
        return theta
