import math
import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from thermaltime.spectra import ClockSpectrum
from thermaltime.universe import sample_universe, support_sets

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_clock(rng, d_C, r_max, T=2 * math.pi / 0.01):
    r = np.sort(rng.choice(np.arange(1, r_max + 1), d_C - 1, replace=False))
    return ClockSpectrum([0] + r.tolist(), T)


def random_universe(seed, d_C=300, r_max=600, levels=(0.0, 1.1, 2.3), E=4.0, delta=0.2):
    rng = np.random.default_rng(seed)
    clock = random_clock(rng, d_C, r_max)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        shell = support_sets(clock, list(levels), E, delta)
    return sample_universe(shell, seed)


@pytest.fixture(scope="session")
def small_universes():
    return [random_universe(s) for s in range(6)]


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(test_acceptance.RESULTS):
        terminalreporter.write_line(test_acceptance.RESULTS[number].line())
