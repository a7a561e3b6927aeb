from dataclasses import replace

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from phonesim.config import SystemConfig

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("default")


@pytest.fixture
def cfg():
    return SystemConfig().calibrated()


@pytest.fixture
def small_cfg():
    """Eight antennas, two chains, two users; calibrated like the defaults."""
    return replace(SystemConfig(n_tx=8, n_rf=2, n_users=2).validate()).calibrated()


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
