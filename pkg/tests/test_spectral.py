import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from attractor_lab.errors import ResolutionError, TruncationError
from attractor_lab.spectral import (Potential, SpatialGrid, SpectralBasis, apply_hamiltonian,
                                    build_basis, evaluate_potential, refine)
from conftest import cached_basis
from oracles import box_energies, harmonic_energies

# sinc-DVR reference energies (independent discretization, 401 points on [-7, 7])
QUARTIC_DVR = [0.66798626, 2.39364402, 4.69679539, 7.33573, 10.24430846, 13.37933655]
DOUBLE_WELL_DVR = [0.33796124, 1.61273676, 3.66187284, 6.05078453, 8.73461303, 11.66075578]


def test_harmonic_energies():
    b = build_basis(Potential.harmonic(1.0), SpatialGrid.symmetric(10.0, 2001), 4)
    assert np.allclose(b.energies, harmonic_energies(4), atol=1e-4)


def test_harmonic_frequency_scaling():
    b = build_basis(Potential.harmonic(2.0), SpatialGrid.symmetric(8.0, 2001), 5)
    assert np.allclose(b.energies, harmonic_energies(5, 2.0), atol=5e-4)


def test_box_energies():
    L = math.pi / 2
    b = build_basis(Potential.box(L), SpatialGrid(-L, L, 1001), 2)
    assert np.allclose(b.energies, box_energies(2, L), atol=1e-4)
    assert b.metadata["artificial_walls"] is False


def test_box_inside_wider_grid():
    L = 1.0
    b = build_basis(Potential.box(L), SpatialGrid.symmetric(1.5, 1501), 3)
    assert np.allclose(b.energies, box_energies(3, L), rtol=3e-3)
    x = b.grid.x
    assert np.all(b.functions[:, np.abs(x) >= L] == 0)


@pytest.mark.parametrize("name,ref", [("quartic", QUARTIC_DVR), ("double_well", DOUBLE_WELL_DVR)])
def test_anharmonic_against_dvr(name, ref):
    b = cached_basis(name, 6)
    # second-order stencil at h = 0.02
    assert np.allclose(b.energies, ref, rtol=1e-3)


def test_second_order_convergence():
    pot = Potential.quartic(1.0)
    g1 = SpatialGrid.symmetric(7.0, 351)
    g2 = refine(g1)
    e1 = build_basis(pot, g1, 3).energies
    e2 = build_basis(pot, g2, 3).energies
    e_ref = np.array(QUARTIC_DVR[:3])
    ratio = np.abs(e1 - e_ref) / np.abs(e2 - e_ref)
    assert np.all((ratio > 3.5) & (ratio < 4.5))


def test_orthonormal_and_residual():
    b = cached_basis("quartic", 8)
    assert np.abs(b.overlap() - np.eye(8)).max() < 1e-10
    assert max(b.metadata["residuals"]) < 1e-6
    r = apply_hamiltonian(b.potential, b.grid, b.functions) - b.energies[:, None] * b.functions
    assert np.abs(r).max() < 1e-8


def test_sign_convention():
    b = cached_basis("double_well", 6)
    for g in b.functions:
        a = np.abs(g)
        inner = np.flatnonzero((a[1:-1] >= a[:-2]) & (a[1:-1] >= a[2:]) & (a[1:-1] > 1e-3 * a.max()))
        assert g[inner[0] + 1] > 0


def test_parity_of_eigenfunctions():
    b = cached_basis("quartic", 6)
    for j, g in enumerate(b.functions):
        assert np.allclose(g[::-1], (-1) ** j * g, atol=1e-10)


def test_truncation_error_on_narrow_grid():
    with pytest.raises(TruncationError):
        build_basis(Potential.harmonic(1.0), SpatialGrid.symmetric(3.0, 301), 8)


def test_resolution_error_when_d_too_large():
    with pytest.raises(ResolutionError):
        build_basis(Potential.quartic(1.0), SpatialGrid.symmetric(5.0, 100), 30)


def test_functions_read_only():
    b = cached_basis("quartic", 4)
    with pytest.raises(ValueError):
        b.functions[0, 0] = 1.0


def test_dict_round_trip():
    b = cached_basis("quartic", 4)
    c = SpectralBasis.from_dict(b.to_dict())
    assert c.tag == b.tag
    assert np.array_equal(c.functions, b.functions)
    assert np.array_equal(c.energies, b.energies)


def test_potential_mapping_round_trip():
    for pot in (Potential.harmonic(1.5), Potential.quartic(0.3), Potential.double_well(1, 2),
                Potential.box(2.0), Potential.polynomial([0, 0, 0.5, 0.1, 0.2])):
        assert Potential.from_mapping(pot.to_mapping()) == pot


def test_potential_mapping_rejects_unknown():
    with pytest.raises(ValueError):
        Potential.from_mapping({"kind": "quartic", "g": 1.0, "h": 2.0})
    with pytest.raises(ValueError):
        Potential.from_mapping({"kind": "sextic"})


def test_double_well_shape():
    V, dV = evaluate_potential(Potential.double_well(1.0, 2.0), np.array([0.0, 1.0]))
    assert np.allclose(V, [0.0, -1.0])
    assert np.allclose(dV, [0.0, 0.0])


@given(st.floats(0.2, 3.0), st.floats(-1.5, 1.5))
def test_polynomial_derivative(g, x):
    pot = Potential.polynomial([0.0, 0.1, 0.5, 0.0, g])
    step = 1e-6
    V, dV = evaluate_potential(pot, np.array([x - step, x, x + step]))
    assert dV[1] == pytest.approx((V[2] - V[0]) / (2 * step), rel=1e-6, abs=1e-6)
