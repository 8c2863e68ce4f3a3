import numpy as np
import pytest
from hypothesis import strategies as st

from ivlasso.data import IntervalSample
from ivlasso.ivcore import Kernel


def random_kernel(rng) -> Kernel:
    while True:
        a, c = rng.uniform(0.1, 5.0, 2)
        b = rng.uniform(-0.95, 0.95) * np.sqrt(a * c)
        if a * c - b * b > 1e-3:
            return Kernel(a, b, c)


def random_sample(rng, T=40, p=4, noise=1.0, intercepts=False, sparse=True):
    """Random interval regression sample with a sparse true coefficient vector."""
    z = rng.normal(size=(T, p, 2))
    theta = rng.normal(size=p) * (rng.random(p) < 0.6 if sparse else 1.0)
    if intercepts:
        z[:, 0] = (1.0, 1.0)
        if p > 1:
            z[:, 1] = (-0.5, 0.5)
    y = np.einsum("tjb,j->tb", z, theta) + noise * rng.normal(size=(T, 2))
    return IntervalSample(y, z), theta


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
intervals = st.tuples(finite, finite)


@st.composite
def kernels(draw):
    a = draw(st.floats(0.05, 10.0))
    c = draw(st.floats(0.05, 10.0))
    rho = draw(st.floats(-0.95, 0.95))
    return Kernel(a, rho * np.sqrt(a * c), c)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
