import subprocess
import sys
from pathlib import Path

BENCH = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"


def test_benchmark_runs_both_backends():
    res = subprocess.run([sys.executable, str(BENCH), "--quick", "--repeat", "1"],
                         capture_output=True, text=True, timeout=600)
    assert res.returncode == 0, res.stderr
    rows = [ln.split()[0] for ln in res.stdout.splitlines()[1:]]
    assert rows == ["gram_80x10", "gram_large", "cd_lasso", "monte_carlo"]
