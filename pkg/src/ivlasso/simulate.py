"""Data-generating processes and the Monte Carlo harness."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np

from .data import IntervalSample
from .estimators import assemble_gram, min_dk_estimate
from .ivcore import Kernel
from .models import EstimatorConfig, fit_model

__all__ = [
    "FIXED_THETA",
    "DIVERGING_THETA_HEAD",
    "InnovationSpec",
    "DgpSpec",
    "McReport",
    "diverging_p",
    "dgp",
    "gen_regressors",
    "simulate_aci",
    "aci_residuals",
    "gen_innovations",
    "gen_dataset",
    "replication_rngs",
    "monte_carlo",
    "compare_estimators",
    "report_csv",
    "report_table",
]

FIXED_THETA = (0.0, 0.0, 3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0)
DIVERGING_THETA_HEAD = (0.0, 0.0, 11 / 4, -23 / 6, 37 / 12, -13 / 9, 1 / 3)

KINDS = ("fixed-p-aci", "diverging-p-aci", "fixed-p-gaussian", "diverging-p-gaussian")
DGP_KINDS = {1: "fixed-p-aci", 2: "diverging-p-aci", 3: "fixed-p-gaussian", 4: "diverging-p-gaussian"}

SIGMA0 = ((1.0, 0.75), (0.75, 1.0))
REGRESSOR_VARIANCE = 4.0
REGRESSOR_CORRELATION = 0.5
DEFAULT_REGRESSOR_COV = (
    (REGRESSOR_VARIANCE, REGRESSOR_CORRELATION * REGRESSOR_VARIANCE),
    (REGRESSOR_CORRELATION * REGRESSOR_VARIANCE, REGRESSOR_VARIANCE),
)


def diverging_p(T: int) -> int:
    """``floor(3 T^(1/3))``."""
    return int(math.floor(3.0 * T ** (1.0 / 3.0) + 1e-9))


def _spd(cov, what: str) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if cov.shape[-2:] != (2, 2) or not np.allclose(cov, np.swapaxes(cov, -1, -2)):
        raise ValueError(f"{what} must be symmetric 2x2")
    if np.any(np.linalg.eigvalsh(cov) <= 0):
        raise ValueError(f"{what} is not positive definite")
    return cov


@dataclass(frozen=True)
class InnovationSpec:
    """Interval innovations.

    ``bivariate-normal`` draws ``(u_L, u_R) ~ N(0, covariance)``.
    ``aci-process`` simulates ``Y_t = alpha0 + beta0 I0 + beta1 Y_{t-1} + e_t``
    with ``e_t ~ N(0, covariance * shock_scale^2)``, re-estimates the three
    parameters by minimum D_K distance, and bootstraps the centered residuals.
    ``zero`` gives ``[0, 0]`` throughout.
    """

    kind: str = "bivariate-normal"
    alpha0: float = 0.0
    beta0: float = 0.05
    beta1: float = 0.3
    covariance: tuple = SIGMA0
    shock_scale: float = 1.0
    burn_in: int = 200
    pool_size: int = 1000
    kernel: Kernel = Kernel(5.0, 1.0, 1.0)

    def __post_init__(self):
        if self.kind not in ("aci-process", "bivariate-normal", "zero"):
            raise ValueError(f"unknown innovation kind {self.kind!r}")
        if self.kind == "aci-process" and not abs(self.beta1) < 1:
            raise ValueError(f"ACI recursion is nonstationary for beta1={self.beta1}")
        _spd(self.covariance, "innovation covariance")
        object.__setattr__(self, "covariance", tuple(map(tuple, np.asarray(self.covariance, float))))


@dataclass(frozen=True)
class DgpSpec:
    kind: str
    T: int
    theta0: Optional[tuple] = None
    regressor_covariance: tuple = DEFAULT_REGRESSOR_COV
    innovation: Optional[InnovationSpec] = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown DGP kind {self.kind!r}; choose from {KINDS}")
        if self.T < 1:
            raise ValueError("T must be positive")
        p = self.p
        if self.theta0 is None:
            if self.kind.startswith("fixed"):
                theta = FIXED_THETA
            else:
                if p < len(DIVERGING_THETA_HEAD):
                    raise ValueError(f"T={self.T} gives p={p}, too small for the coefficient vector")
                theta = DIVERGING_THETA_HEAD + (0.0,) * (p - len(DIVERGING_THETA_HEAD))
            object.__setattr__(self, "theta0", tuple(theta))
        else:
            object.__setattr__(self, "theta0", tuple(float(v) for v in self.theta0))
        if len(self.theta0) != p:
            raise ValueError(f"theta0 has length {len(self.theta0)} but p = {p}")
        if self.innovation is None:
            kind = "aci-process" if self.kind.endswith("aci") else "bivariate-normal"
            object.__setattr__(self, "innovation", InnovationSpec(kind=kind))
        cov = np.asarray(self.regressor_covariance, dtype=float)
        _spd(cov, "regressor covariance")
        object.__setattr__(self, "regressor_covariance", _freeze(cov))

    @property
    def p(self) -> int:
        if self.theta0 is not None and self.kind.startswith("fixed"):
            return len(self.theta0)
        return 10 if self.kind.startswith("fixed") else diverging_p(self.T)

    @property
    def parameter_names(self) -> tuple:
        return ("alpha0", "beta0") + tuple(f"delta{j}" for j in range(1, self.p - 1))


def _freeze(arr: np.ndarray):
    if arr.ndim == 0:
        return float(arr)
    return tuple(_freeze(a) for a in arr)


def dgp(number: int, T: int, seed: int = 0, **kw) -> DgpSpec:
    """DGP 1-4 by number."""
    return DgpSpec(DGP_KINDS[number], T, seed=seed, **kw)


def gen_regressors(spec: DgpSpec, rng: np.random.Generator) -> np.ndarray:
    """(T, p-2, 2) bound pairs, each column drawn i.i.d. from a bivariate normal."""
    k = spec.p - 2
    cov = _spd(spec.regressor_covariance, "regressor covariance")
    if cov.ndim == 2:
        cov = np.broadcast_to(cov, (k, 2, 2))
    elif cov.shape[0] != k:
        raise ValueError(f"need {k} regressor covariances, got {cov.shape[0]}")
    chol = np.linalg.cholesky(cov)  # (k, 2, 2)
    std = rng.standard_normal((spec.T, k, 2))
    return np.einsum("kab,tkb->tka", chol, std)


def simulate_aci(innov: InnovationSpec, n: int, rng: np.random.Generator):
    """ACI(1,0) path after burn-in, with the shocks that drove it (both (n, 2))."""
    cov = np.asarray(innov.covariance) * innov.shock_scale ** 2
    total = n + innov.burn_in
    shocks = rng.multivariate_normal(np.zeros(2), cov, size=total, method="cholesky")
    const = np.array([innov.alpha0 - 0.5 * innov.beta0, innov.alpha0 + 0.5 * innov.beta0])
    y = np.empty((total, 2))
    prev = const / (1.0 - innov.beta1)
    for t in range(total):
        prev = const + innov.beta1 * prev + shocks[t]
        y[t] = prev
    return y[innov.burn_in:], shocks[innov.burn_in:]


def aci_residuals(path: np.ndarray, kernel: Kernel, params: Optional[Sequence[float]] = None) -> np.ndarray:
    """Residuals of an ACI(1,0) fit to ``path`` ((n, 2) bounds), one row shorter.

    ``params = (alpha0, beta0, beta1)`` skips estimation.
    """
    y = path[1:]
    z = np.empty((y.shape[0], 3, 2))
    z[:, 0] = (1.0, 1.0)
    z[:, 1] = (-0.5, 0.5)
    z[:, 2] = path[:-1]
    if params is None:
        params = min_dk_estimate(assemble_gram(IntervalSample(y, z), kernel))
    return y - np.einsum("tjb,j->tb", z, np.asarray(params, dtype=float))


def gen_innovations(innov: InnovationSpec, T: int, rng: np.random.Generator) -> np.ndarray:
    """(T, 2) interval innovations."""
    if innov.kind == "zero":
        return np.zeros((T, 2))
    if innov.kind == "bivariate-normal":
        return rng.multivariate_normal(np.zeros(2), np.asarray(innov.covariance), size=T, method="cholesky")
    path, _ = simulate_aci(innov, max(innov.pool_size, T) + 1, rng)
    resid = aci_residuals(path, innov.kernel)
    resid -= resid.mean(axis=0)
    return resid[rng.integers(0, resid.shape[0], size=T)]


def gen_dataset(spec: DgpSpec, rng: np.random.Generator) -> IntervalSample:
    x = gen_regressors(spec, rng)
    u = gen_innovations(spec.innovation, spec.T, rng)
    z = np.empty((spec.T, spec.p, 2))
    z[:, 0] = (1.0, 1.0)
    z[:, 1] = (-0.5, 0.5)
    z[:, 2:] = x
    y = np.einsum("tjb,j->tb", z, np.asarray(spec.theta0)) + u
    return IntervalSample(y, z, spec.parameter_names)


# -- Monte Carlo -----------------------------------------------------------------------


@dataclass(frozen=True)
class McReport:
    name: str
    parameter_names: tuple
    theta0: np.ndarray
    estimates: np.ndarray  # (N, p), successful replications only
    n_reps: int
    n_failed: int = 0
    failures: tuple = ()

    @property
    def bias(self) -> np.ndarray:
        return self.estimates.mean(axis=0) - self.theta0

    @property
    def sd(self) -> np.ndarray:
        return self.estimates.std(axis=0, ddof=0)

    @property
    def rmse(self) -> np.ndarray:
        return np.sqrt(((self.estimates - self.theta0) ** 2).mean(axis=0))

    @property
    def zero_mask(self) -> np.ndarray:
        return self.theta0 == 0

    @property
    def exact_zero_rate(self) -> float:
        """Share of true-zero coefficient estimates that are exactly zero."""
        z = self.zero_mask
        return float((self.estimates[:, z] == 0).mean()) if z.any() else float("nan")

    @property
    def retained_rate(self) -> float:
        """Share of true-nonzero coefficient estimates that are nonzero."""
        nz = ~self.zero_mask
        return float((self.estimates[:, nz] != 0).mean()) if nz.any() else float("nan")

    @property
    def error_norms(self) -> np.ndarray:
        return np.linalg.norm(self.estimates - self.theta0, axis=1)

    @property
    def median_error_norm(self) -> float:
        return float(np.median(self.error_norms))


Estimator = Union[EstimatorConfig, Callable[[IntervalSample], np.ndarray]]


def _estimate(estimator: Estimator, sample: IntervalSample) -> np.ndarray:
    if isinstance(estimator, EstimatorConfig):
        return fit_model(sample, estimator).coefficients
    return np.asarray(estimator(sample), dtype=float)


def replication_rngs(seed: int, n_reps: int, seeds: Optional[Sequence[int]] = None) -> list:
    """One independent Philox stream per replication, split from ``seed``."""
    if seeds is not None:
        return [np.random.Generator(np.random.Philox(s)) for s in seeds]
    children = np.random.SeedSequence(seed).spawn(n_reps)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def compare_estimators(
    spec: DgpSpec,
    estimators: Dict[str, Estimator],
    n_reps: int,
    threads: int = 1,
    seeds: Optional[Sequence[int]] = None,
) -> Dict[str, McReport]:
    """Fit every estimator on the same simulated datasets."""
    if n_reps < 2:
        raise ValueError("need at least 2 replications")
    rngs = replication_rngs(spec.seed, n_reps, seeds)
    names = list(estimators)

    def one(rng):
        sample = gen_dataset(spec, rng)
        out = {}
        for name in names:
            try:
                out[name] = _estimate(estimators[name], sample)
            except Exception as err:  # recorded and excluded, see McReport.n_failed
                out[name] = err
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, rngs))
    else:
        results = [one(r) for r in rngs]

    reports = {}
    theta0 = np.asarray(spec.theta0)
    for name in names:
        good = [r[name] for r in results if not isinstance(r[name], Exception)]
        bad = [f"replication {i}: {r[name]!r}" for i, r in enumerate(results) if isinstance(r[name], Exception)]
        est = np.array(good) if good else np.empty((0, spec.p))
        reports[name] = McReport(name, spec.parameter_names, theta0, est, n_reps, len(bad), tuple(bad))
    return reports


def monte_carlo(
    spec: DgpSpec, estimator: Estimator, n_reps: int, threads: int = 1, seeds=None, name: str = "estimator"
) -> McReport:
    return compare_estimators(spec, {name: estimator}, n_reps, threads, seeds)[name]


# -- reporting -------------------------------------------------------------------------


def report_csv(reports: Dict[str, McReport]) -> str:
    """Tidy CSV: parameter, statistic, model, value."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["parameter", "statistic", "model", "value"])
    for name, rep in reports.items():
        stats = {"Bias": rep.bias, "SD": rep.sd, "RMSE": rep.rmse}
        for stat, values in stats.items():
            for pname, v in zip(rep.parameter_names, values):
                writer.writerow([pname, stat, name, f"{v:.10g}"])
    return buf.getvalue()


def report_table(reports: Dict[str, McReport], title: str = "", scale: float = 1.0) -> str:
    """Aligned text: rows statistic x model, columns parameters."""
    reps = list(reports.values())
    names = reps[0].parameter_names
    width = 10
    lines = []
    if title:
        lines.append(title)
    lines.append(f"{'':6}{'':8}" + "".join(f"{n:>{width}}" for n in names))
    for stat in ("Bias", "SD", "RMSE"):
        for k, rep in enumerate(reps):
            values = getattr(rep, stat.lower()) * scale
            label = stat if k == 0 else ""
            lines.append(f"{label:6}{rep.name:8}" + "".join(f"{v:>{width}.4f}" for v in values))
    tail = ", ".join(
        f"{rep.name}: N={rep.n_reps - rep.n_failed}/{rep.n_reps}, zero-rate={rep.exact_zero_rate:.3f}"
        for rep in reps
    )
    lines.append(tail)
    return "\n".join(lines) + "\n"
