import math

import numpy as np
import pytest
from hypothesis import settings

from innerbounds.gramcore import Instance

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def rel_close(a: float, b: float, rtol: float, atol: float = 0.0) -> bool:
    return abs(a - b) <= max(atol, rtol * max(abs(a), abs(b)))


def orthonormal_instance(rng: np.random.Generator, n: int, d: int, in_span: bool = True, c=None) -> Instance:
    """QR-orthonormalized complex Gaussian family; x is drawn from its span when asked."""
    z = rng.standard_normal((d, n)) + 1j * rng.standard_normal((d, n))
    qmat, _ = np.linalg.qr(z)
    ys = [qmat[:, i] for i in range(n)]
    w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x = qmat @ w if in_span else rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return Instance.from_coordinates_data(x, ys, c)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def identity_instance(c) -> Instance:
    n = len(c)
    ys = list(np.eye(n, dtype=complex))
    x = np.zeros(n, dtype=complex)
    x[0] = 1.0
    return Instance.from_coordinates_data(x, ys, c)


@pytest.fixture
def close():
    return rel_close


def finite(v: float) -> bool:
    return math.isfinite(v)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
