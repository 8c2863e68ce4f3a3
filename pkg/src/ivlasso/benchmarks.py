"""Point-valued reference regressions for interval data.

CRM fits midpoints and ranges by two separate least-squares regressions,
CCRM constrains the range equation to nonnegative coefficients, BLU fits
lower and upper bounds separately. Each equation gets its own intercept;
[1, 1] and I0 columns of the sample are dropped from the designs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .data import IntervalSample
from .estimators import SingularGramError, assemble_gram, min_dk_estimate
from .ivcore import Kernel, midpoints, ranges

__all__ = ["BoundsFit", "crm_fit", "ccrm_fit", "blu_fit", "acix_fit", "ols"]


@dataclass(frozen=True)
class BoundsFit:
    """Two intercept-plus-slope equations and how to combine them.

    ``kind`` is ``"center-range"`` (first = midpoint, second = range) or
    ``"bounds"`` (first = lower, second = upper).
    """

    kind: str
    first_intercept: float
    first_coefficients: np.ndarray
    second_intercept: float
    second_coefficients: np.ndarray
    columns: tuple
    column_names: tuple = ()

    # readable aliases
    @property
    def center_coefficients(self):
        return self.first_coefficients

    @property
    def range_coefficients(self):
        return self.second_coefficients

    @property
    def lower_coefficients(self):
        return self.first_coefficients

    @property
    def upper_coefficients(self):
        return self.second_coefficients

    def predict(self, regressors: np.ndarray) -> np.ndarray:
        z = np.asarray(regressors, dtype=float)[:, list(self.columns)]
        if self.kind == "center-range":
            m = self.first_intercept + midpoints(z) @ self.first_coefficients
            r = self.second_intercept + ranges(z) @ self.second_coefficients
            return np.stack([m - 0.5 * r, m + 0.5 * r], axis=-1)
        lo = self.first_intercept + z[..., 0] @ self.first_coefficients
        hi = self.second_intercept + z[..., 1] @ self.second_coefficients
        return np.stack([lo, hi], axis=-1)

    def to_dict(self) -> dict:
        names = [self.column_names[j] for j in self.columns] if self.column_names else list(self.columns)
        first, second = ("center", "range") if self.kind == "center-range" else ("lower", "upper")
        return {
            "kind": self.kind,
            f"{first}_intercept": self.first_intercept,
            f"{first}_coefficients": dict(zip(names, map(float, self.first_coefficients))),
            f"{second}_intercept": self.second_intercept,
            f"{second}_coefficients": dict(zip(names, map(float, self.second_coefficients))),
        }


def ols(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Least squares with an explicit rank check."""
    coef, _, rank, sv = np.linalg.lstsq(x, y, rcond=None)
    if rank < x.shape[1] or (sv.size and sv[-1] <= 1e-10 * sv[0]):
        raise SingularGramError(f"design matrix has rank {rank} < {x.shape[1]} columns")
    return coef


def _design(sample: IntervalSample):
    cols = tuple(j for j in range(sample.p) if j not in set(sample.intercept_columns()))
    if sample.T <= len(cols) + 1:
        raise ValueError(f"need T > p for the benchmark fits (T={sample.T}, p={len(cols) + 1})")
    return cols, sample.regressors[:, list(cols)]


def _with_intercept(x: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones(x.shape[0]), x])


def crm_fit(sample: IntervalSample) -> BoundsFit:
    cols, z = _design(sample)
    cm = ols(_with_intercept(midpoints(z)), midpoints(sample.responses))
    cr = ols(_with_intercept(ranges(z)), ranges(sample.responses))
    return BoundsFit("center-range", float(cm[0]), cm[1:], float(cr[0]), cr[1:], cols, sample.column_names)


def ccrm_fit(sample: IntervalSample) -> BoundsFit:
    """CRM with every range coefficient, intercept included, constrained >= 0."""
    cols, z = _design(sample)
    cm = ols(_with_intercept(midpoints(z)), midpoints(sample.responses))
    xr = _with_intercept(ranges(z))
    cr, _ = nnls(xr, ranges(sample.responses), maxiter=50 * xr.shape[1])
    free = cr > 0
    if free.any() and np.linalg.matrix_rank(xr[:, free]) < free.sum():
        raise SingularGramError("range design is singular on the free set")
    return BoundsFit("center-range", float(cm[0]), cm[1:], float(cr[0]), cr[1:], cols, sample.column_names)


def blu_fit(sample: IntervalSample) -> BoundsFit:
    cols, z = _design(sample)
    cl = ols(_with_intercept(z[..., 0]), sample.responses[:, 0])
    cu = ols(_with_intercept(z[..., 1]), sample.responses[:, 1])
    return BoundsFit("bounds", float(cl[0]), cl[1:], float(cu[0]), cu[1:], cols, sample.column_names)


def acix_fit(sample: IntervalSample, kernel: Kernel) -> np.ndarray:
    """Unpenalized minimum D_K-distance coefficients."""
    return min_dk_estimate(assemble_gram(sample, kernel))
