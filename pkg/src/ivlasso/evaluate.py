"""Forecast accuracy criteria, the Diebold-Mariano test, and tracking errors."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Dict, Tuple

import numpy as np

from .ivcore import Kernel, as_bounds, dk_distance_sq_arrays

__all__ = [
    "ForecastPairSeries",
    "CriteriaReport",
    "INTERVAL_CRITERIA",
    "POINT_CRITERIA",
    "interval_criteria",
    "point_criteria",
    "evaluate",
    "dm_test",
    "tracking_errors",
    "cumulative_tracking_errors",
    "criteria_csv",
]

INTERVAL_CRITERIA = ("omega_1", "omega_dk", "omega_nsd1", "omega_nsd2", "omega_mde", "omega_rate")
POINT_CRITERIA = ("omega_l", "omega_h", "omega_m", "omega_r")


@dataclass(frozen=True)
class ForecastPairSeries:
    """Predicted and actual intervals, (n, 2) each, raw bounds."""

    predicted: np.ndarray
    actual: np.ndarray

    def __post_init__(self):
        pred = np.array(as_bounds(self.predicted), dtype=float).reshape(-1, 2)
        act = np.array(as_bounds(self.actual), dtype=float).reshape(-1, 2)
        if pred.shape != act.shape:
            raise ValueError(f"{len(pred)} predicted vs {len(act)} actual intervals")
        pred.flags.writeable = False
        act.flags.writeable = False
        object.__setattr__(self, "predicted", pred)
        object.__setattr__(self, "actual", act)

    def __len__(self) -> int:
        return self.predicted.shape[0]

    def canonical(self) -> Tuple[np.ndarray, np.ndarray]:
        """Both series re-ordered to (min, max) bounds."""
        return np.sort(self.predicted, axis=1), np.sort(self.actual, axis=1)


@dataclass(frozen=True)
class CriteriaReport:
    omega_1: float = float("nan")
    omega_dk: float = float("nan")
    omega_nsd1: float = float("nan")
    omega_nsd2: float = float("nan")
    omega_mde: float = float("nan")
    omega_rate: float = float("nan")
    omega_l: float = float("nan")
    omega_h: float = float("nan")
    omega_m: float = float("nan")
    omega_r: float = float("nan")

    def to_dict(self) -> dict:
        return asdict(self)

    def merge(self, other: "CriteriaReport") -> "CriteriaReport":
        mine, theirs = self.to_dict(), other.to_dict()
        return CriteriaReport(**{k: mine[k] if not math.isnan(mine[k]) else theirs[k] for k in mine})


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """``num/den`` with 0/0 (and x/0) mapped to 1: a degenerate pair counts as perfect."""
    out = np.ones_like(num)
    ok = den > 0
    out[ok] = num[ok] / den[ok]
    return out


def _nonempty(fp: ForecastPairSeries):
    if len(fp) == 0:
        raise ValueError("criteria need a nonempty forecast series")


def interval_criteria(fp: ForecastPairSeries, kernel: Kernel, overlap_floor: bool = True) -> CriteriaReport:
    """Interval-based criteria.

    Overlap-type criteria work on canonicalized intervals; ``overlap_floor``
    clips the signed overlap at zero in the first and last criterion. The
    D_K and mean-distance criteria use raw bounds.
    """
    _nonempty(fp)
    n = len(fp)
    (pl, ph), (al, ah) = fp.canonical()[0].T, fp.canonical()[1].T
    overlap = np.minimum(ph, ah) - np.maximum(pl, al)
    hull = np.maximum(ph, ah) - np.minimum(pl, al)
    clipped = np.maximum(overlap, 0.0)
    signed = clipped if overlap_floor else overlap
    w_pred = ph - pl
    w_act = ah - al

    omega_1 = float(np.mean(1.0 - _ratio(signed, hull)))
    omega_nsd1 = float(np.mean(1.0 - _ratio(clipped, hull)))
    # 2 - (w + w)/R, with degenerate (R = 0) pairs contributing 0
    nsd2 = np.zeros(n)
    ok = hull > 0
    nsd2[ok] = 2.0 - (w_pred[ok] + w_act[ok]) / hull[ok]
    omega_nsd2 = float(nsd2.mean())
    omega_rate = float(np.mean(1.0 - _ratio(signed, w_pred)))

    d2 = dk_distance_sq_arrays(fp.predicted, fp.actual, kernel)
    omega_dk = float(np.sqrt(max(d2.sum(), 0.0)) / n)
    mid_gap = 0.5 * (fp.predicted.sum(axis=1) - fp.actual.sum(axis=1))
    rad_gap = 0.5 * (np.diff(fp.predicted, axis=1)[:, 0] - np.diff(fp.actual, axis=1)[:, 0])
    omega_mde = float(np.mean(np.sqrt(mid_gap ** 2 + np.abs(rad_gap))))
    return CriteriaReport(omega_1, omega_dk, omega_nsd1, omega_nsd2, omega_mde, omega_rate)


def point_criteria(fp: ForecastPairSeries) -> CriteriaReport:
    """RMSEs of lower bound, upper bound, midpoint and radius (raw bounds)."""
    _nonempty(fp)
    e = fp.predicted - fp.actual
    rms = lambda v: float(np.sqrt(np.mean(v ** 2)))  # noqa: E731
    return CriteriaReport(
        omega_l=rms(e[:, 0]),
        omega_h=rms(e[:, 1]),
        omega_m=rms(0.5 * (e[:, 0] + e[:, 1])),
        omega_r=rms(0.5 * (e[:, 1] - e[:, 0])),
    )


def evaluate(fp: ForecastPairSeries, kernel: Kernel, overlap_floor: bool = True) -> CriteriaReport:
    """All ten criteria."""
    return interval_criteria(fp, kernel, overlap_floor).merge(point_criteria(fp))


def dm_test(errors_a, errors_b, horizon: int = 1) -> Tuple[float, float]:
    """Diebold-Mariano test on squared-error loss differentials.

    Long-run variance uses Bartlett weights over ``horizon - 1`` lags;
    the p-value is two-sided against the standard normal. A positive
    statistic means ``errors_a`` has the larger loss.
    """
    ea = np.asarray(errors_a, dtype=float).ravel()
    eb = np.asarray(errors_b, dtype=float).ravel()
    if ea.shape != eb.shape:
        raise ValueError(f"error series lengths differ: {ea.size} vs {eb.size}")
    if ea.size < 10:
        raise ValueError("the DM test needs at least 10 observations")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    d = ea ** 2 - eb ** 2
    T = d.size
    if np.all(d == 0):
        return 0.0, 1.0
    dbar = d.mean()
    dc = d - dbar
    lrv = dc @ dc / T
    for k in range(1, min(horizon, T)):
        lrv += 2.0 * (1.0 - k / horizon) * (dc[k:] @ dc[:-k]) / T
    if lrv <= 0:
        if dbar == 0:
            return 0.0, 1.0
        return math.copysign(math.inf, dbar), 0.0
    stat = dbar / math.sqrt(lrv / T)
    return float(stat), float(math.erfc(abs(stat) / math.sqrt(2.0)))


def _err(portfolio_returns, index_returns) -> np.ndarray:
    r = np.asarray(portfolio_returns, dtype=float).ravel()
    r_hat = np.asarray(index_returns, dtype=float).ravel()
    if r.shape != r_hat.shape:
        raise ValueError(f"return series lengths differ: {r.size} vs {r_hat.size}")
    return r - r_hat


def tracking_errors(portfolio_returns, index_returns) -> Tuple[float, float]:
    """(S, M): sample standard deviation and mean absolute value of the errors."""
    err = _err(portfolio_returns, index_returns)
    if err.size < 1:
        raise ValueError("need at least one return")
    s = float(err.std(ddof=1)) if err.size >= 2 else float("nan")
    return s, float(np.abs(err).mean())


def cumulative_tracking_errors(portfolio_returns, index_returns) -> Tuple[np.ndarray, np.ndarray]:
    """S(tau) and M(tau) for tau = 1..T (S(1) is NaN)."""
    err = _err(portfolio_returns, index_returns)
    tau = np.arange(1, err.size + 1)
    m = np.cumsum(np.abs(err)) / tau
    # direct two-pass std per prefix; series are short and this avoids cancellation
    s = np.array([err[:k].std(ddof=1) if k >= 2 else np.nan for k in tau])
    return s, m


def criteria_csv(reports: Dict[tuple, CriteriaReport]) -> str:
    """Tidy CSV keyed by (model, window, criterion)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["model", "window", "criterion", "value"])
    for (model, window), rep in reports.items():
        for name, value in rep.to_dict().items():
            if not math.isnan(value):
                writer.writerow([model, window, name, f"{value:.10g}"])
    return buf.getvalue()
