"""Inner loops shared by the estimators.

Every kernel exists in a loop form (compiled by numba when enabled) and a
fallback used when ``IVLASSO_DISABLE_NUMBA`` is set. The ``*_py`` names are
always the uncompiled versions, kept importable for benchmarking and for
cross-checking the two paths in the tests.
"""
import numpy as np

from ._accel import NUMBA_ENABLED, jit

__all__ = [
    "NUMBA_ENABLED",
    "gram_moments",
    "gram_moments_numpy",
    "gram_moments_loops_py",
    "cd_lasso",
    "cd_lasso_py",
    "cd_nonneg",
    "cd_nonneg_py",
]


def gram_moments_numpy(zl, zr, yl, yr, a, b, c):
    """Gram matrix, cross moments and response self-moment under kernel (a, b, c).

    ``zl``/``zr`` are (T, p) regressor bounds, ``yl``/``yr`` are (T,) response bounds.
    """
    # strided bound slices miss the BLAS fast path
    zl, zr = np.ascontiguousarray(zl, dtype=np.float64), np.ascontiguousarray(zr, dtype=np.float64)
    yl, yr = np.ascontiguousarray(yl, dtype=np.float64), np.ascontiguousarray(yr, dtype=np.float64)
    gram = a * (zr.T @ zr) + c * (zl.T @ zl) - b * (zr.T @ zl + zl.T @ zr)
    gram = 0.5 * (gram + gram.T)
    cross = a * (zr.T @ yr) + c * (zl.T @ yl) - b * (zr.T @ yl + zl.T @ yr)
    resp = a * (yr @ yr) + c * (yl @ yl) - 2.0 * b * (yr @ yl)
    return gram, cross, float(resp)


def gram_moments_loops_py(zl, zr, yl, yr, a, b, c):
    n, p = zl.shape
    gram = np.zeros((p, p))
    cross = np.zeros(p)
    resp = 0.0
    for t in range(n):
        ylt = yl[t]
        yrt = yr[t]
        resp += a * yrt * yrt + c * ylt * ylt - 2.0 * b * yrt * ylt
        for j in range(p):
            lj = zl[t, j]
            rj = zr[t, j]
            cross[j] += a * rj * yrt + c * lj * ylt - b * (rj * ylt + lj * yrt)
            for k in range(j, p):
                lk = zl[t, k]
                rk = zr[t, k]
                gram[j, k] += a * rj * rk + c * lj * lk - b * (rj * lk + lj * rk)
    for j in range(p):
        for k in range(j + 1, p):
            gram[k, j] = gram[j, k]
    return gram, cross, resp


def cd_lasso_py(gram, cross, thresh, theta, tol, max_iter):
    """Cyclic coordinate descent for ``t'Gt - 2c't + 2 sum_j thresh_j |t_j|``.

    ``thresh`` holds ``lambda * w_j / 2``. ``theta`` is updated in place. Returns
    the number of sweeps used, or -1 when ``max_iter`` sweeps did not converge.
    Coordinates with a non-positive diagonal are pinned at zero.
    """
    p = gram.shape[0]
    for sweep in range(max_iter):
        max_delta = 0.0
        for j in range(p):
            gjj = gram[j, j]
            if gjj <= 0.0:
                theta[j] = 0.0
                continue
            rho = cross[j]
            for k in range(p):
                if k != j:
                    rho -= gram[j, k] * theta[k]
            tj = thresh[j]
            if rho > tj:
                new = (rho - tj) / gjj
            elif rho < -tj:
                new = (rho + tj) / gjj
            else:
                new = 0.0
            delta = abs(new - theta[j])
            if delta > max_delta:
                max_delta = delta
            theta[j] = new
        if max_delta < tol:
            return sweep + 1
    return -1


def cd_nonneg_py(gram, lin, x, tol, max_iter):
    """Projected coordinate descent for ``min_{x >= 0} x'Gx - 2 lin'x``.

    Same conventions as :func:`cd_lasso_py`.
    """
    p = gram.shape[0]
    for sweep in range(max_iter):
        max_delta = 0.0
        for j in range(p):
            gjj = gram[j, j]
            if gjj <= 0.0:
                x[j] = 0.0
                continue
            rho = lin[j]
            for k in range(p):
                if k != j:
                    rho -= gram[j, k] * x[k]
            new = rho / gjj
            if new < 0.0:
                new = 0.0
            delta = abs(new - x[j])
            if delta > max_delta:
                max_delta = delta
            x[j] = new
        if max_delta < tol:
            return sweep + 1
    return -1


# above this T * p^2 the BLAS form beats the compiled loops (see benchmarks/)
GRAM_LOOP_MAX_WORK = 100_000

if NUMBA_ENABLED:
    _gram_loops = jit(gram_moments_loops_py)

    def gram_moments(zl, zr, yl, yr, a, b, c):
        if zl.shape[0] * zl.shape[1] ** 2 > GRAM_LOOP_MAX_WORK:
            return gram_moments_numpy(zl, zr, yl, yr, a, b, c)
        gram, cross, resp = _gram_loops(
            np.ascontiguousarray(zl, dtype=np.float64),
            np.ascontiguousarray(zr, dtype=np.float64),
            np.ascontiguousarray(yl, dtype=np.float64),
            np.ascontiguousarray(yr, dtype=np.float64),
            float(a),
            float(b),
            float(c),
        )
        return gram, cross, float(resp)

else:
    gram_moments = gram_moments_numpy

cd_lasso = jit(cd_lasso_py)
cd_nonneg = jit(cd_nonneg_py)
