import math
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fastellipse.ellipse import EllipseParams
from fastellipse.synth import SceneSpec, render

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def single_ellipse():
    e = EllipseParams(200.0, 150.0, 80.0, 45.0, math.radians(25.0))
    return e, render(SceneSpec(400, 300, [e]))


@pytest.fixture(scope="session")
def circle_image():
    e = EllipseParams(100.0, 100.0, 50.0, 50.0, 0.0)
    return e, render(SceneSpec(200, 200, [e]))


def ellipse_points(e, degs):
    return [tuple(e.points(1, math.radians(d), 0)[0]) for d in degs]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
