"""Penalized minimum D_K-distance estimators.

Every estimator here works on the quadratic reduction of the summed D_K
loss, ``theta' G theta - 2 c' theta + r``, held in a :class:`GramSystem`.
The weighted-l1 solution path is built by a LASSO-modified least angle
homotopy (:func:`ilars_path`); :func:`coordinate_descent_fit` solves the same
objective at a single penalty and serves as its independent check.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import lapack

from . import kernels
from .data import IntervalSample
from .ivcore import Kernel

__all__ = [
    "WEIGHT_CAP",
    "SingularGramError",
    "PathError",
    "ConvergenceError",
    "GramSystem",
    "FitResult",
    "LarsPath",
    "CVResult",
    "assemble_gram",
    "point_gram",
    "min_dk_estimate",
    "adaptive_weights",
    "penalized_mask_for",
    "lambda_max",
    "ilars_path",
    "solve_at_lambda",
    "coordinate_descent_fit",
    "nonnegative_garrote",
    "ridge_estimate",
    "kkt_violation",
    "make_folds",
    "default_lambda_grid",
    "cross_validate_lambda",
]

WEIGHT_CAP = 1e12
_PIVOT_RTOL = 1e-11


class SingularGramError(np.linalg.LinAlgError):
    """Gram matrix not positive definite; ``column`` is the failing pivot."""

    def __init__(self, message: str, column: Optional[int] = None):
        super().__init__(message)
        self.column = column


class PathError(RuntimeError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class GramSystem:
    """Sufficient statistics of the summed D_K loss."""

    gram: np.ndarray
    cross: np.ndarray
    response_norm: float
    n_obs: int
    kernel: Optional[Kernel] = None
    column_names: tuple = ()

    def __post_init__(self):
        g = np.array(self.gram, dtype=float)
        c = np.array(self.cross, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or c.shape != (g.shape[0],):
            raise ValueError(f"inconsistent Gram shapes {g.shape} and {c.shape}")
        g.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "gram", g)
        object.__setattr__(self, "cross", c)
        object.__setattr__(self, "response_norm", float(self.response_norm))

    @property
    def p(self) -> int:
        return self.gram.shape[0]

    def loss(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        return float(theta @ self.gram @ theta - 2.0 * self.cross @ theta + self.response_norm)

    def losses(self, thetas: np.ndarray) -> np.ndarray:
        """Loss for each row of ``thetas``."""
        thetas = np.atleast_2d(thetas)
        quad = np.einsum("ij,jk,ik->i", thetas, self.gram, thetas)
        return quad - 2.0 * thetas @ self.cross + self.response_norm

    def __add__(self, other: "GramSystem") -> "GramSystem":
        return GramSystem(
            self.gram + other.gram, self.cross + other.cross,
            self.response_norm + other.response_norm, self.n_obs + other.n_obs,
            self.kernel, self.column_names,
        )


@dataclass(frozen=True)
class FitResult:
    coefficients: np.ndarray
    active_set: tuple
    lam: float
    weights: np.ndarray
    kernel: Optional[Kernel]
    gamma: Optional[float]
    objective: float
    kkt_violation: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def lambda_(self) -> float:
        return self.lam

    def to_dict(self, column_names: Sequence[str] = ()) -> dict:
        names = list(column_names) or [f"theta{j + 1}" for j in range(len(self.coefficients))]
        return {
            "coefficients": dict(zip(names, map(float, self.coefficients))),
            "active_set": [names[j] for j in self.active_set],
            "lambda": self.lam,
            "weights": [float(w) for w in self.weights],
            "kernel": None if self.kernel is None else list(self.kernel.as_tuple()),
            "gamma": self.gamma,
            "objective": self.objective,
            "kkt_violation": self.kkt_violation,
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class LarsPath:
    """Piecewise-linear weighted-l1 solution path.

    ``breakpoints`` are decreasing penalty levels; ``vertices[k]`` is the
    solution at ``breakpoints[k]``; ``events[k]`` lists the ``(kind, j)``
    changes applied there; ``active_sets[k]`` is the penalized active set on
    the open segment just below ``breakpoints[k]``.
    """

    breakpoints: np.ndarray
    vertices: np.ndarray
    events: tuple
    active_sets: tuple
    weights: np.ndarray
    penalized: np.ndarray
    gram: GramSystem

    @property
    def lambda_max(self) -> float:
        return float(self.breakpoints[0])

    def __len__(self) -> int:
        return len(self.breakpoints)


@dataclass(frozen=True)
class CVResult:
    best_lambda: float
    lambdas: np.ndarray
    cv_curve: np.ndarray
    fold_losses: np.ndarray
    fold_scheme: str


# -- Gram assembly ------------------------------------------------------------


def assemble_gram(sample: IntervalSample, kernel: Kernel, rows=None) -> GramSystem:
    z = sample.regressors if rows is None else sample.regressors[rows]
    y = sample.responses if rows is None else sample.responses[rows]
    g, c, r = kernels.gram_moments(
        z[..., 0], z[..., 1], y[:, 0], y[:, 1], kernel.a, kernel.b, kernel.c
    )
    return GramSystem(g, c, r, y.shape[0], kernel, sample.column_names)


def point_gram(x: np.ndarray, y: np.ndarray, column_names: Sequence[str] = ()) -> GramSystem:
    """Ordinary least-squares Gram system for point data."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return GramSystem(x.T @ x, x.T @ y, float(y @ y), x.shape[0], None, tuple(column_names))


# -- unpenalized, weights -------------------------------------------------------


def _cholesky(gram: np.ndarray, names: Sequence[str] = ()) -> np.ndarray:
    """Lower Cholesky factor, raising :class:`SingularGramError` on a bad pivot."""
    diag = np.diag(gram)
    factor, info = lapack.dpotrf(np.asarray(gram, dtype=float), lower=1, clean=1)
    bad = None
    if info > 0:
        bad = info - 1
    else:
        piv = np.diag(factor) ** 2
        small = np.nonzero(piv <= _PIVOT_RTOL * np.maximum(diag, np.finfo(float).tiny))[0]
        if small.size:
            bad = int(small[0])
    if bad is not None:
        label = names[bad] if bad < len(names) else f"#{bad}"
        raise SingularGramError(
            f"Gram matrix is singular at pivot {bad} (column {label}); "
            "regressors are collinear or constant",
            column=bad,
        )
    return factor


def _chol_solve(factor: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    sol, info = lapack.dpotrs(factor, rhs, lower=1)
    if info != 0:
        raise SingularGramError("Cholesky solve failed")
    return sol


def min_dk_estimate(gs: GramSystem) -> np.ndarray:
    """Unpenalized minimizer: solve ``G theta = c``."""
    factor = _cholesky(gs.gram, gs.column_names)
    return _chol_solve(factor, gs.cross)


def adaptive_weights(theta_tilde, gamma: float, cap: float = WEIGHT_CAP) -> np.ndarray:
    """``1 / |theta_j|^gamma``, capped at ``cap`` (exact zeros get the cap)."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    theta = np.abs(np.asarray(theta_tilde, dtype=float))
    with np.errstate(divide="ignore"):
        w = np.where(theta > 0, theta ** (-gamma), np.inf)
    return np.minimum(w, cap)


def penalized_mask_for(sample: IntervalSample, penalize_intercept: bool = False) -> np.ndarray:
    mask = np.ones(sample.p, dtype=bool)
    if not penalize_intercept:
        mask[sample.intercept_columns()] = False
    return mask


def _mask(p: int, penalized_mask) -> np.ndarray:
    if penalized_mask is None:
        return np.ones(p, dtype=bool)
    m = np.asarray(penalized_mask)
    if m.dtype == bool:
        if m.shape != (p,):
            raise ValueError("penalized mask has the wrong length")
        return m.copy()
    out = np.zeros(p, dtype=bool)
    out[m.astype(int)] = True
    return out


# -- optimality ---------------------------------------------------------------


def kkt_violation(gs: GramSystem, theta, lam: float, weights, penalized_mask=None) -> float:
    """Largest stationarity violation, relative to the gradient scale."""
    theta = np.asarray(theta, dtype=float)
    pen = _mask(gs.p, penalized_mask)
    w = np.asarray(weights, dtype=float)
    active_diag = np.diag(gs.gram) > 0
    grad = 2.0 * (gs.cross - gs.gram @ theta)
    viol = np.zeros(gs.p)
    nz = theta != 0
    on = pen & nz
    viol[on] = np.abs(grad[on] - lam * w[on] * np.sign(theta[on]))
    off = pen & ~nz
    viol[off] = np.maximum(np.abs(grad[off]) - lam * w[off], 0.0)
    viol[~pen] = np.abs(grad[~pen])
    viol[~active_diag] = 0.0
    scale = max(1.0, np.abs(2.0 * gs.cross).max(initial=0.0), np.abs(2.0 * gs.gram @ theta).max(initial=0.0))
    return float(viol.max(initial=0.0) / scale)


def _objective(gs: GramSystem, theta, lam, weights, pen) -> float:
    return gs.loss(theta) + lam * float(np.sum(np.asarray(weights)[pen] * np.abs(theta[pen])))


def _fit_result(gs, theta, lam, weights, pen, gamma=None, **diag) -> FitResult:
    theta = np.asarray(theta, dtype=float)
    active = tuple(int(j) for j in np.flatnonzero(theta != 0))
    return FitResult(
        coefficients=theta,
        active_set=active,
        lam=float(lam),
        weights=np.asarray(weights, dtype=float),
        kernel=gs.kernel,
        gamma=gamma,
        objective=_objective(gs, theta, lam, weights, pen),
        kkt_violation=kkt_violation(gs, theta, lam, weights, pen),
        diagnostics=diag,
    )


# -- the path -------------------------------------------------------------------


def _degenerate_columns(gs: GramSystem) -> np.ndarray:
    d = np.diag(gs.gram)
    return d <= _PIVOT_RTOL * max(d.max(initial=0.0), np.finfo(float).tiny)


def _warn_degenerate(gs: GramSystem) -> np.ndarray:
    degenerate = _degenerate_columns(gs)
    if degenerate.any():
        names = [gs.column_names[j] if gs.column_names else j for j in np.flatnonzero(degenerate)]
        warnings.warn(f"columns with zero Gram diagonal kept inactive: {names}")
    return degenerate


def _solve_active(gs: GramSystem, idx: list, rhs: np.ndarray) -> np.ndarray:
    sub = gs.gram[np.ix_(idx, idx)]
    names = [gs.column_names[j] for j in idx] if gs.column_names else ()
    try:
        factor = _cholesky(sub, names)
    except SingularGramError as err:
        col = idx[err.column] if err.column is not None else None
        label = gs.column_names[col] if (col is not None and gs.column_names) else f"#{col}"
        raise SingularGramError(
            f"active-set Gram is singular when including column {label}", column=col
        ) from None
    return _chol_solve(factor, rhs)


def lambda_max(gs: GramSystem, weights, penalized_mask=None) -> float:
    """Smallest penalty at which every penalized coefficient is zero.

    With no unpenalized columns this is ``max_j 2|c_j| / w_j``; otherwise the
    correlations are taken after fitting the unpenalized columns.
    """
    pen = _mask(gs.p, penalized_mask)
    w = np.asarray(weights, dtype=float)
    theta, rho, eligible = _start(gs, pen)
    if not eligible.any():
        return 0.0
    return float(2.0 * (np.abs(rho[eligible]) / w[eligible]).max())


def _start(gs: GramSystem, pen: np.ndarray):
    """Fit of the unpenalized columns alone, its residual correlations, and
    the penalized columns that can enter."""
    degenerate = _degenerate_columns(gs)
    unpen = [j for j in range(gs.p) if not pen[j] and not degenerate[j]]
    theta = np.zeros(gs.p)
    if unpen:
        theta[unpen] = _solve_active(gs, unpen, gs.cross[unpen])
    return theta, gs.cross - gs.gram @ theta, pen & ~degenerate


def ilars_path(gs: GramSystem, weights, penalized_mask=None, max_events: Optional[int] = None) -> LarsPath:
    """Full solution path of ``theta'G theta - 2c'theta + lam * sum_j w_j |theta_j|``.

    Unpenalized coordinates stay in the active set throughout. Ties in the
    entry order go to the lowest column index. Raises :class:`PathError`
    after ``10 p`` events.
    """
    p = gs.p
    pen = _mask(p, penalized_mask)
    w = np.asarray(weights, dtype=float).copy()
    if w.shape != (p,):
        raise ValueError(f"expected {p} weights, got {w.shape}")
    if np.any(~np.isfinite(w[pen])) or np.any(w[pen] <= 0):
        raise ValueError("penalized weights must be strictly positive and finite")
    w[~pen] = 0.0
    degenerate = _warn_degenerate(gs)
    limit = 10 * p if max_events is None else max_events
    G, c = gs.gram, gs.cross

    unpen = [j for j in range(p) if not pen[j] and not degenerate[j]]
    theta, rho, eligible = _start(gs, pen)
    if eligible.any():
        ratio = np.abs(rho[eligible]) / w[eligible]
        mu = float(ratio.max())
    else:
        mu = 0.0

    breakpoints = [2.0 * mu]
    vertices = [theta.copy()]
    events = [[]]
    active: list = []  # penalized active columns, in entry order
    signs: dict = {}
    n_events = 0
    just_added = just_dropped = None
    scale = max(mu, 1e-300)

    while mu > 0.0:
        E = unpen + active
        ws = np.array([w[j] * signs[j] if j in signs else 0.0 for j in E])
        v = _solve_active(gs, E, ws) if E else np.zeros(0)
        alpha = G[:, E] @ v if E else np.zeros(p)

        cands = []  # (mu, j, kind, sign)
        in_E = np.zeros(p, dtype=bool)
        in_E[E] = True
        for j in np.flatnonzero(eligible & ~in_E):
            if j == just_dropped:
                # may come back later on the path, not at the breakpoint it left
                num = rho[j] - mu * alpha[j]
                for s in (1.0, -1.0):
                    den = s * w[j] - alpha[j]
                    if den != 0.0:
                        m = num / den
                        if -1e-14 * scale <= m < mu * (1.0 - 1e-9):
                            cands.append((max(m, 0.0), int(j), "enter", s))
                continue
            if abs(rho[j]) >= mu * w[j] * (1.0 - 1e-12):
                # already at the boundary (or past it through rounding)
                cands.append((mu, int(j), "enter", 1.0 if rho[j] >= 0 else -1.0))
                continue
            num = rho[j] - mu * alpha[j]
            for s in (1.0, -1.0):
                den = s * w[j] - alpha[j]
                if den == 0.0:
                    continue
                m = num / den
                if -1e-14 * scale <= m <= mu * (1.0 + 1e-10):
                    cands.append((min(max(m, 0.0), mu), int(j), "enter", s))
        for pos, j in enumerate(E):
            if j not in signs:
                continue
            vj = v[pos]
            if vj == 0.0:
                continue
            m = mu + theta[j] / vj
            upper = mu * (1.0 - 1e-9) if j == just_added else mu * (1.0 + 1e-10)
            if -1e-14 * scale <= m < upper and theta[j] * vj < 0:
                cands.append((min(max(m, 0.0), mu), int(j), "drop", 0.0))

        if cands:
            best = max(cd[0] for cd in cands)
            tied = [cd for cd in cands if cd[0] >= best - 1e-12 * scale]
            mu_next, j_evt, kind, s_evt = min(tied, key=lambda cd: cd[1])
        else:
            mu_next, j_evt, kind = 0.0, None, None

        if E:
            theta = np.zeros(p)
            theta[E] = _solve_active(gs, E, c[E] - mu_next * ws)
            if kind == "drop":
                theta[j_evt] = 0.0
        if mu_next < mu * (1.0 - 1e-12) or j_evt is None:
            breakpoints.append(2.0 * mu_next)
            vertices.append(theta.copy())
            events.append([])
        else:
            vertices[-1] = theta.copy()
        mu = mu_next
        if j_evt is None:
            break

        n_events += 1
        if n_events > limit:
            raise PathError(
                f"path did not terminate after {limit} events; Gram geometry is degenerate"
            )
        if kind == "enter":
            active.append(j_evt)
            signs[j_evt] = s_evt
            just_added, just_dropped = j_evt, None
        else:
            active.remove(j_evt)
            del signs[j_evt]
            theta[j_evt] = 0.0
            vertices[-1][j_evt] = 0.0
            just_added, just_dropped = None, j_evt
        events[-1].append((kind, j_evt))
        rho = c - G @ theta
        if mu == 0.0:
            break

    active_sets = []
    current: set = set()
    for evts in events:
        for kind, j in evts:
            if kind == "enter":
                current.add(j)
            else:
                current.discard(j)
        active_sets.append(tuple(sorted(current)))
    return LarsPath(
        breakpoints=np.array(breakpoints),
        vertices=np.array(vertices),
        events=tuple(tuple(e) for e in events),
        active_sets=tuple(active_sets),
        weights=np.where(pen, w, np.asarray(weights, dtype=float)),
        penalized=pen,
        gram=gs,
    )


def solve_at_lambda(path: LarsPath, lam: float, gamma: Optional[float] = None) -> FitResult:
    """Coefficients at ``lam`` by linear interpolation along the path."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    theta = np.array(_path_coefficients(path, lam))
    k = _segment(path.breakpoints, lam)
    if k is not None:
        keep = ~path.penalized.copy()
        keep[list(path.active_sets[k])] = True
        theta[~keep] = 0.0
    return _fit_result(path.gram, theta, lam, path.weights, path.penalized, gamma)


# -- single-penalty solvers -----------------------------------------------------------


def coordinate_descent_fit(
    gs: GramSystem,
    weights,
    lam: float,
    tol: float = 1e-12,
    max_iter: int = 100_000,
    penalized_mask=None,
    theta0=None,
    gamma: Optional[float] = None,
) -> FitResult:
    """Cyclic coordinate descent on the same objective as :func:`ilars_path`."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    pen = _mask(gs.p, penalized_mask)
    w = np.asarray(weights, dtype=float)
    _warn_degenerate(gs)
    thresh = np.where(pen, 0.5 * lam * w, 0.0)
    theta = np.zeros(gs.p) if theta0 is None else np.array(theta0, dtype=float)
    sweeps = kernels.cd_lasso(
        np.ascontiguousarray(gs.gram), np.ascontiguousarray(gs.cross), thresh, theta, tol, max_iter
    )
    if sweeps < 0:
        raise ConvergenceError(f"coordinate descent did not converge in {max_iter} sweeps")
    return _fit_result(gs, theta, lam, w, pen, gamma, sweeps=int(sweeps))


def nonnegative_garrote(
    gs: GramSystem, theta_tilde, lam: float, tol: float = 1e-13, max_iter: int = 200_000
) -> FitResult:
    """Shrink ``theta_tilde`` by nonnegative factors under an l1 budget.

    Minimizes ``sum_t ||Y_t - sum_j Z_jt theta_j c_j||_K^2 + lam * sum_j c_j``
    over ``c >= 0`` and returns ``c * theta_tilde``.
    """
    tt = np.asarray(theta_tilde, dtype=float)
    if not np.isfinite(tt).all():
        raise ValueError("pilot coefficients must be finite")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    g_s = gs.gram * np.outer(tt, tt)
    lin = tt * gs.cross - 0.5 * lam
    shrink = np.zeros(gs.p)
    sweeps = kernels.cd_nonneg(np.ascontiguousarray(g_s), lin, shrink, tol, max_iter)
    if sweeps < 0:
        raise ConvergenceError(f"garrote solver did not converge in {max_iter} sweeps")
    theta = shrink * tt
    with np.errstate(divide="ignore"):
        w = np.minimum(np.where(tt != 0, 1.0 / np.abs(tt), np.inf), WEIGHT_CAP)
    pen = np.ones(gs.p, dtype=bool)
    return _fit_result(gs, theta, lam, w, pen, 1.0, shrinkage=shrink.tolist(), sweeps=int(sweeps))


def ridge_estimate(gs: GramSystem, lam: float) -> np.ndarray:
    """``(G + lam I)^{-1} c``."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    system = gs.gram + lam * np.eye(gs.p)
    factor = _cholesky(system, gs.column_names)
    return _chol_solve(factor, gs.cross)


# -- cross-validation -------------------------------------------------------------


def make_folds(T: int, n_folds: int, scheme: str = "contiguous") -> list:
    """Validation row indices for each fold."""
    if scheme in ("contiguous", "contiguous-blocks", "blocks"):
        return [np.asarray(f) for f in np.array_split(np.arange(T), n_folds)]
    if scheme == "interleaved":
        return [np.arange(i, T, n_folds) for i in range(n_folds)]
    raise ValueError(f"unknown fold scheme {scheme!r}")


def default_lambda_grid(lam_max: float, n: int = 50, ratio: float = 1e-4) -> np.ndarray:
    if lam_max <= 0:
        return np.array([0.0])
    return np.geomspace(lam_max, lam_max * ratio, n)


def _pilot(gs: GramSystem, gamma: float):
    theta_tilde = min_dk_estimate(gs)
    return theta_tilde, adaptive_weights(theta_tilde, gamma)


def cross_validate_lambda(
    sample: IntervalSample,
    kernel: Kernel,
    gamma: float,
    lambda_grid=None,
    n_folds: int = 5,
    fold_scheme: str = "contiguous",
    penalized_mask=None,
) -> CVResult:
    """K-fold choice of the adaptive-LASSO penalty.

    Each fold re-estimates the pilot and the adaptive weights on its training
    rows and scores the summed D_K loss on its validation rows. Ties go to the
    larger penalty.
    """
    T = sample.T
    if n_folds < 2:
        raise ValueError("need at least 2 folds")
    if T < 2 * n_folds:
        raise ValueError(f"T={T} is too short for {n_folds} folds (need T >= {2 * n_folds})")
    pen = _mask(sample.p, penalized_mask)
    if lambda_grid is None:
        full = assemble_gram(sample, kernel)
        _, w = _pilot(full, gamma)
        lambda_grid = default_lambda_grid(lambda_max(full, w, pen))
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("lambda grid is empty")
    folds = make_folds(T, n_folds, fold_scheme)
    # per-row gram pieces are summed fold by fold
    pieces = [assemble_gram(sample, kernel, rows=f) for f in folds]
    total = pieces[0]
    for piece in pieces[1:]:
        total = total + piece
    losses = np.empty((n_folds, grid.size))
    for i, val in enumerate(pieces):
        train = GramSystem(
            total.gram - val.gram, total.cross - val.cross,
            total.response_norm - val.response_norm, total.n_obs - val.n_obs,
            kernel, sample.column_names,
        )
        try:
            _, w = _pilot(train, gamma)
        except SingularGramError as err:
            raise SingularGramError(
                f"fold {i} training rows give a singular Gram ({err}); use fewer folds",
                column=err.column,
            ) from None
        path = ilars_path(train, w, pen)
        thetas = np.array([_path_coefficients(path, lam) for lam in grid])
        losses[i] = val.losses(thetas)
    curve = losses.mean(axis=0)
    lo = curve.min()
    ok = curve <= lo + 1e-12 * max(abs(lo), 1.0)
    best = float(grid[ok].max())
    return CVResult(best, grid, curve, losses, fold_scheme)


def _segment(bp: np.ndarray, lam: float) -> Optional[int]:
    """Index k with ``bp[k] > lam >= bp[k+1]``, or None outside the path."""
    if lam >= bp[0] or len(bp) == 1 or lam <= bp[-1]:
        return None
    return int(np.searchsorted(-bp, -lam, side="right")) - 1


def _path_coefficients(path: LarsPath, lam: float) -> np.ndarray:
    bp = path.breakpoints
    k = _segment(bp, lam)
    if k is None:
        return path.vertices[0] if lam >= bp[0] else path.vertices[-1]
    frac = (lam - bp[k + 1]) / (bp[k] - bp[k + 1])
    return path.vertices[k + 1] + frac * (path.vertices[k] - path.vertices[k + 1])
