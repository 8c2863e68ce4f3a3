"""Compiled and fallback kernels must agree."""
import os
import subprocess
import sys

import numpy as np
import pytest

from ivlasso import kernels
from ivlasso._accel import NUMBA_ENABLED

from conftest import random_kernel


def _gram_inputs(rng, T=30, p=5):
    z = rng.normal(size=(T, p, 2))
    y = rng.normal(size=(T, 2))
    return z[..., 0], z[..., 1], y[:, 0], y[:, 1]


@pytest.mark.parametrize("seed,size", [(s, (30, 5)) for s in range(5)] + [(9, (700, 13))])
def test_gram_loops_match_vectorized(seed, size):
    rng = np.random.default_rng(seed)
    k = random_kernel(rng)
    args = _gram_inputs(rng, *size)
    ref = kernels.gram_moments_numpy(*args, k.a, k.b, k.c)
    for impl in (kernels.gram_moments_loops_py, kernels.gram_moments):
        g, c, r = impl(*args, k.a, k.b, k.c)
        np.testing.assert_allclose(g, ref[0], rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(c, ref[1], rtol=1e-12, atol=1e-12)
        assert r == pytest.approx(ref[2], rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_cd_compiled_matches_python(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(20, 6))
    gram = a.T @ a
    cross = rng.normal(size=6) * 5
    thresh = np.abs(rng.normal(size=6))
    t1, t2 = np.zeros(6), np.zeros(6)
    n1 = kernels.cd_lasso_py(gram, cross, thresh, t1, 1e-13, 10000)
    n2 = kernels.cd_lasso(gram, cross, thresh, t2, 1e-13, 10000)
    assert n1 == n2 > 0
    np.testing.assert_allclose(t1, t2, rtol=0, atol=1e-14)
    x1, x2 = np.zeros(6), np.zeros(6)
    assert kernels.cd_nonneg_py(gram, cross, x1, 1e-13, 10000) == kernels.cd_nonneg(gram, cross, x2, 1e-13, 10000)
    np.testing.assert_allclose(x1, x2, rtol=0, atol=1e-14)
    assert (x1 >= 0).all()


def test_cd_reports_nonconvergence():
    gram = np.array([[1.0, 0.99], [0.99, 1.0]])
    theta = np.zeros(2)
    assert kernels.cd_lasso_py(gram, np.array([1.0, -1.0]), np.zeros(2), theta, 1e-15, 2) == -1


def test_env_flag_selects_fallback():
    code = "import ivlasso, ivlasso.kernels as k; print(ivlasso.NUMBA_ENABLED, k.cd_lasso is k.cd_lasso_py)"
    env = dict(os.environ, IVLASSO_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "True"]


@pytest.mark.skipif(not NUMBA_ENABLED, reason="numba unavailable")
def test_fallback_fit_matches_compiled(tmp_path):
    """Whole-pipeline equality: a PLR fit under both kernel paths."""
    code = (
        "import numpy as np, sys\n"
        "from ivlasso.simulate import dgp, gen_dataset, replication_rngs\n"
        "from ivlasso.models import EstimatorConfig, fit_model\n"
        "s = gen_dataset(dgp(3, 60, seed=4), replication_rngs(4, 1)[0])\n"
        "f = fit_model(s, EstimatorConfig('plr'))\n"
        "g = fit_model(s, EstimatorConfig('garrote', lam=3.0))\n"
        "np.save(sys.argv[1], np.concatenate([f.coefficients, [f.lam], g.coefficients]))\n"
    )
    outs = []
    for flag in ("0", "1"):
        path = tmp_path / f"out{flag}.npy"
        env = dict(os.environ, IVLASSO_DISABLE_NUMBA=flag)
        subprocess.run([sys.executable, "-c", code, str(path)], env=env, check=True)
        outs.append(np.load(path))
    np.testing.assert_allclose(outs[0], outs[1], rtol=1e-9, atol=1e-11)
