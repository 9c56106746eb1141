import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from attractor_lab.errors import ConvergenceError, StiffnessError
from attractor_lab.ode import integrate
from attractor_lab.quadrature import adaptive_simpson
from oracles import rk4_doubling


def test_exponential_decay():
    t = np.array([0.0, 0.5, 1.0, 3.0])
    y = integrate(lambda t, y: -2 * y, [1.0], t)
    assert np.allclose(y[:, 0], np.exp(-2 * t), rtol=1e-9)


def test_hits_output_times_exactly():
    t = np.linspace(0, 2 * math.pi, 7)
    y = integrate(lambda t, y: np.array([y[1], -y[0]]), [0.0, 1.0], t)
    assert np.allclose(y[:, 0], np.sin(t), atol=1e-9)


def test_against_rk4_oracle_for_logistic():
    f = lambda t, y: 3 * y * (1 - y)
    t = np.linspace(0, 4, 9)
    a = integrate(f, [0.01], t)
    b = rk4_doubling(f, np.array([0.01]), t)
    assert np.abs(a - b).max() < 1e-9


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(-2.0, 2.0))
def test_linear_rate_property(k, y0):
    y = integrate(lambda t, y: -k * y, [y0], [0.0, 1.0])
    assert y[-1, 0] == pytest.approx(y0 * math.exp(-k), rel=1e-8, abs=1e-12)


def test_max_norm_batch():
    k = np.array([0.5, 1.0, 20.0])
    y = integrate(lambda t, y: -k * y, np.ones(3), [0.0, 1.0], norm="max")
    assert np.allclose(y[-1], np.exp(-k), rtol=1e-8)


def test_stiffness_error():
    # finite-time blow-up collapses the step
    with pytest.raises(StiffnessError):
        integrate(lambda t, y: y**2, [1.0], [0.0, 2.0])


def test_rejects_unsorted_times():
    with pytest.raises(ValueError):
        integrate(lambda t, y: y, [1.0], [0.0, 1.0, 0.5])


def test_simpson_vector():
    val, n = adaptive_simpson(lambda s: np.array([np.sin(s), np.exp(s)]), 0.0, 3.0, tol=1e-10)
    assert np.allclose(val, [1 - math.cos(3), math.e**3 - 1], atol=1e-10)
    assert n > 5


def test_simpson_oscillatory_complex():
    w = 40.0
    val, _ = adaptive_simpson(lambda s: np.exp(1j * w * s), 0.0, 1.0, tol=1e-9)
    exact = (np.exp(1j * w) - 1) / (1j * w)
    assert abs(val - exact) < 1e-9


def test_simpson_convergence_error():
    with pytest.raises(ConvergenceError):
        adaptive_simpson(lambda s: np.array([1.0 / max(s, 1e-300) ** 0.999]), 0.0, 1.0,
                         tol=1e-12, max_depth=8)
