import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stabgrad import gravity, heat, shaw, svd

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def shaw1000():
    p = shaw(1000)
    return p, svd(p.a)


@pytest.fixture(scope="session")
def gravity1000():
    p = gravity(1000)
    return p, svd(p.a)


@pytest.fixture(scope="session")
def heat1000():
    p = heat(1000)
    return p, svd(p.a)


def random_nonsingular(rng, n, sigma_floor=1e-3):
    """U[-1, 1] entries with singular values lifted to at least `sigma_floor`."""
    a = rng.uniform(-1.0, 1.0, (n, n))
    u, s, vt = np.linalg.svd(a)
    return u @ np.diag(np.maximum(s, sigma_floor)) @ vt


def roundoff_floor(sigma, gamma, x_star):
    """Attainable error level of one solve with ``M = I + gamma A^T A``.

    Below ``n eps cond(M) ||x*||`` (times a small constant) the observed
    error is rounding noise, so contraction bounds are checked up to it.
    """
    n = len(sigma)
    cond_m = (1.0 + gamma * sigma[0] ** 2) / (1.0 + gamma * sigma[-1] ** 2)
    return 4 * n * np.finfo(float).eps * cond_m * np.linalg.norm(x_star)


# lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
