import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from biperiodic import material as mat

settings.register_profile(
    "default",
    deadline=None,
    max_examples=30,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def example_profile():
    return mat.build_example_profile(0.01, 0.3, 0.6, 1.0, mat.Bump(mat.Window1D(kind="cubic")))


@pytest.fixture(scope="session")
def smooth_example_profile():
    """Smoothed non-trapping example with breakpoints on every uniform mesh."""
    return mat.build_example_profile(
        0.5, 0.25, 0.5, 1.0, mat.Bump(mat.Window1D(kind="smooth")), smooth_vertical=True
    )


@pytest.fixture(scope="session")
def slab():
    return mat.slab_profile(4.0, 0.3, 1.0)


@pytest.fixture(scope="session")
def graded():
    return mat.layered_profile([0.0, 0.6], [0.4, 1.0], 1.0)


@pytest.fixture(scope="session")
def ramp():
    """Continuous trapping profile: inv_eps increases with height."""
    return mat.layered_profile([0.0, 0.3, 0.6], [0.25, 0.25, 1.0], 1.0)


# ---------------------------------------------------------------------------
# acceptance reporting: one PASS/FAIL line per criterion in the terminal summary

_CRITERIA: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not rep.failed:
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "passed": True, "seconds": 0.0})
    entry["passed"] &= not rep.failed
    if rep.when == "call":
        entry["seconds"] += rep.duration


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "PASS" if e["passed"] else "FAIL"
        terminalreporter.write_line(f"{status} criterion {number:2d}: {e['title']} ({e['seconds']:.1f} s)")
