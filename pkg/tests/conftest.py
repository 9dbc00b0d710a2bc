import pytest
from hypothesis import settings

from zetamoments.construction import build_params
from zetamoments.moments import MomentLab

settings.register_profile("suite", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("suite")

# acceptance outcomes, printed at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def lab_15_5000():
    """k = 3/2, T = 5000, theta = 0.3: the central desk-scale configuration."""
    return MomentLab(build_params("1.5", 5000.0))


@pytest.fixture(scope="session")
def lab_15_1e4():
    return MomentLab(build_params("1.5", 1e4))
