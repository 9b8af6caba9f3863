import sys
from pathlib import Path

import pytest

from edcausal.dag import Role, build_dag
from edcausal.scenarios import get_scenario

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def fig3():
    """Treatment X, outcome Y, confounder Z."""
    return build_dag({"X": Role.TREATMENT, "Y": Role.OUTCOME, "Z": Role.OBSERVED_CONFOUNDER},
                     [("Z", "X"), ("Z", "Y"), ("X", "Y")])


@pytest.fixture
def chain():
    return build_dag(["A", "B", "C"], [("A", "B"), ("B", "C")])


@pytest.fixture
def collider():
    return build_dag(["A", "B", "C"], [("A", "B"), ("C", "B")])


@pytest.fixture
def feedback():
    return get_scenario("tv-feedback")


@pytest.fixture
def posttest():
    return get_scenario("single-posttest")


@pytest.fixture
def tv_full():
    return get_scenario("tv-no-unmeasured")


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
