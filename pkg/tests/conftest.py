import math
import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from circleflow import generators as gen  # noqa: E402
from circleflow.geometry import Background  # noqa: E402

E = Background.EUCLIDEAN
H = Background.HYPERBOLIC


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def z2_small():
    return gen.z2_lattice(4)


@pytest.fixture(scope="session")
def hex2():
    return gen.hex_lattice(2)


def triangle_complex(thetas=(math.pi / 3,) * 3):
    from circleflow.complex import CellComplex
    return CellComplex(vertex_ids=(0, 1, 2), edges=[[0, 1], [1, 2], [2, 0]], theta=list(thetas),
                       faces=[(0, 1, 2)], name="triangle")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
