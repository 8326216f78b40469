import numpy as np
import pytest
from hypothesis import settings

from garling.sequences import FiniteSequence
from garling.weights import make_weight

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

WEIGHT_SPECS = ["pow:a=0.5", "pow:a=0.25", "logpow:a=0.5,b=1"]

# acceptance lines collected by test_acceptance and echoed in the summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


def random_vector(rng, max_support=12, max_index=40, complex_ok=False):
    """Sparse vector with mixed magnitude regimes, including repeated values."""
    size = int(rng.integers(1, max_support + 1))
    idx = np.sort(rng.choice(np.arange(1, max_index + 1), size=size, replace=False))
    mode = int(rng.integers(0, 4))
    if mode == 0:
        coefs = rng.uniform(-1, 1, size)
    elif mode == 1:
        coefs = rng.choice([-1.0, 0.5, 1.0, 2.0], size=size)
    elif mode == 2:
        coefs = np.exp(rng.uniform(-8, 8, size)) * rng.choice([-1.0, 1.0], size=size)
    else:
        coefs = rng.uniform(0.1, 1, size)
        if complex_ok:
            coefs = coefs * np.exp(1j * rng.uniform(0, 2 * np.pi, size))
    coefs = np.where(coefs == 0, 1.0, coefs)
    return FiniteSequence(idx, coefs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=WEIGHT_SPECS)
def weight(request):
    return make_weight(request.param)
