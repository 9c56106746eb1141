import functools
import os
import sys

import hypothesis
import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from attractor_lab.coupling import build_delta_tensor, delta_kernel
from attractor_lab.spectral import Potential, SpatialGrid, build_basis

hypothesis.settings.register_profile("default", max_examples=25, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=200, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

POTENTIALS = {
    "harmonic": Potential.harmonic(1.0),
    "quartic": Potential.quartic(1.0),
    "double_well": Potential.double_well(1.0, 1.0),
}


@functools.lru_cache(maxsize=None)
def cached_basis(name, d, half_width=8.0, n_points=801):
    return build_basis(POTENTIALS[name], SpatialGrid.symmetric(half_width, n_points), d)


@functools.lru_cache(maxsize=None)
def cached_tensor(name, d, half_width=8.0, n_points=801):
    b = cached_basis(name, d, half_width, n_points)
    return build_delta_tensor(delta_kernel(b.potential), b)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
