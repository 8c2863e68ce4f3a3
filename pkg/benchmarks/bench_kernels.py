"""Compare the numba kernels with the pure-numpy fallback.

Each mode runs in its own interpreter because the backend is chosen at
import time from ``IVLASSO_DISABLE_NUMBA``. Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--quick]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from ivlasso import kernels
from ivlasso.data import IntervalSample
from ivlasso.estimators import adaptive_weights, assemble_gram, coordinate_descent_fit, min_dk_estimate
from ivlasso.ivcore import Kernel
from ivlasso.models import EstimatorConfig
from ivlasso.simulate import dgp, monte_carlo

repeat, quick = int(sys.argv[1]), sys.argv[2] == "1"
rng = np.random.default_rng(0)
k = Kernel(5, 1, 1)

def best(fn):
    fn()  # warm-up (includes compilation for the numba backend)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)

out = {"numba": kernels.NUMBA_ENABLED}
zs = rng.normal(size=(80, 10, 2))
ys = rng.normal(size=(80, 2))
out["gram_80x10"] = best(lambda: [kernels.gram_moments(zs[..., 0], zs[..., 1], ys[:, 0], ys[:, 1], 5.0, 1.0, 1.0)
                                  for _ in range(1000)]) / 1000
T, p = (2000, 20) if quick else (20000, 40)
z = rng.normal(size=(T, p, 2))
y = rng.normal(size=(T, 2))
s = IntervalSample(y, z)
out["gram_large"] = best(lambda: assemble_gram(s, k))
gs = assemble_gram(s, k)
w = adaptive_weights(min_dk_estimate(gs), 1.0)
lam = 0.05 * float(np.max(2 * np.abs(gs.cross) / w))
out["cd_lasso"] = best(lambda: coordinate_descent_fit(gs, w, lam))
n_reps = 20 if quick else 100
cfg = EstimatorConfig("plr")
out["monte_carlo"] = best(lambda: monte_carlo(dgp(3, 80), cfg, n_reps, threads=1))
print(json.dumps(out))
"""


def run_mode(disable: bool, repeat: int, quick: bool) -> dict:
    env = dict(os.environ)
    env.pop("IVLASSO_DISABLE_NUMBA", None)
    if disable:
        env["IVLASSO_DISABLE_NUMBA"] = "1"
    res = subprocess.run(
        [sys.executable, "-c", WORKER, str(repeat), "1" if quick else "0"],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = ap.parse_args(argv)
    fast = run_mode(False, args.repeat, args.quick)
    slow = run_mode(True, args.repeat, args.quick)
    if not fast["numba"]:
        print("numba is not importable: both runs used the numpy fallback")
    print(f"{'kernel':<14}{'numba (s)':>12}{'numpy (s)':>12}{'speedup':>10}")
    for name in ("gram_80x10", "gram_large", "cd_lasso", "monte_carlo"):
        a, b = fast[name], slow[name]
        print(f"{name:<14}{a:>12.3e}{b:>12.3e}{b / a:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
