from pathlib import Path

import numpy as np
import pytest

from tlrmt.simulate import GfmScenario, generate

SCENARIOS = Path(__file__).parent / "scenarios"


@pytest.fixture(scope="session")
def gfm_scenario():
    return GfmScenario.load(SCENARIOS / "gfm_n48_t10000.json")


@pytest.fixture(scope="session")
def gfm_sample(gfm_scenario):
    return generate(gfm_scenario)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in __import__("sys").modules.items()
                if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(lines):
        terminalreporter.write_line(lines[k])
