import numpy as np
import pytest

from surfarea.geometry import DEGENERACY_RTOL

_criteria = {}


def random_triangle(rng, max_aspect=1e4, diameter=(0.05, 0.25), box=0.85):
    """A random triangle with aspect ratio ``10**U(0, log10(max_aspect))``.

    The triangle is rotated, scaled to the given diameter range and centred
    in ``[-box, box]**2``.
    """
    aspect = 10 ** rng.uniform(0, np.log10(max_aspect))
    base = np.array([[0.0, 0.0], [1.0, 0.0], [rng.uniform(-0.5, 1.5), 1.0 / aspect]])
    th = rng.uniform(0, 2 * np.pi)
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    xy = base @ rot.T
    xy -= xy.mean(axis=0)
    xy *= rng.uniform(*diameter) / (2 * np.linalg.norm(xy, axis=1).max())
    return xy + rng.uniform(-box, box, 2)


def well_shaped(xy):
    d1, d2 = xy[1] - xy[0], xy[2] - xy[0]
    diam = max(np.linalg.norm(xy[i] - xy[j]) for i, j in ((0, 1), (1, 2), (2, 0)))
    return abs(d1[0] * d2[1] - d1[1] * d2[0]) > 1e3 * DEGENERACY_RTOL * diam**2


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria[number] = (title, report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, outcome, duration = _criteria[number]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title} ({duration:.2f} s)")
