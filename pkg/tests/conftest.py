import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("dphlog", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("dphlog")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_word(rng, r, length):
    return [int(x) for x in rng.integers(1, r + 1, size=length)]


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
