import math

import numpy as np
import pytest

from finsler_audit import calculus, mesh, norm


@pytest.fixture(scope="session")
def sphere():
    chart, spec, measure = mesh.make_sphere_reduction(256)
    return calculus.make_context(spec, measure)


@pytest.fixture(scope="session")
def gaussian_line():
    chart, spec, measure = mesh.make_gaussian_line(1.0, 1601)
    return calculus.make_context(spec, measure)


def trig_measure(chart, amp=0.3):
    return mesh.make_measure(
        chart,
        lambda x: amp * np.sin(x[..., 0]) * np.cos(x[..., 1]),
        lambda x: amp * np.stack([np.cos(x[..., 0]) * np.cos(x[..., 1]),
                                  -np.sin(x[..., 0]) * np.sin(x[..., 1])], axis=-1),
    )


def randers_torus(N, b=(0.5, 0.0)):
    chart = mesh.periodic_box([2 * math.pi] * 2, [N, N])
    return calculus.make_context(norm.randers(np.array(b), 2), trig_measure(chart))


@pytest.fixture(scope="session")
def torus64():
    return randers_torus(64)


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion at the end of the run

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        measured = "; ".join(f"{k}={v}" for k, v in item.user_properties)
        _CRITERIA[number] = (title, rep.outcome, measured)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, outcome, measured = _CRITERIA[number]
        flag = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"[{flag}] {number}. {title}" + (f"  ({measured})" if measured else ""))
