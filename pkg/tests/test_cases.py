import numpy as np
import pytest

from rigidlid.cases import (
    CASE_NAMES, case_spec, default_grids, exact_density_wave, init_case,
)
from rigidlid.errors import ConfigError
from rigidlid.grid import build_grid, cell_center
from rigidlid.state import primitive_from_conserved
from rigidlid.timeint import CoupledState, SingleState


def test_case_spec_defaults_and_overrides():
    spec = case_spec("two-vortices")
    assert spec.params["u_inf1"] == 0.05
    assert spec.params["T_inf1"] == 1.1
    assert spec.params["mu_tilde"] == pytest.approx(1.0 / 5000.0)
    spec2 = case_spec("two-vortices", beta2=0.4)
    assert spec2.params["beta2"] == 0.4
    with pytest.raises(ConfigError):
        case_spec("two-vortices", nonsense=1.0)
    with pytest.raises(ConfigError):
        case_spec("unknown-case")


def test_density_wave_point_value():
    # rho at (x, z) = (0.25, 0) is 1 + sin(pi/2) cos(0) / 2 = 1.5
    spec = case_spec("density-wave")
    g = build_grid(2, 2, (0.0, 0.5), (-0.25, 0.25))
    f = exact_density_wave(0.0, g, spec)
    X, Z = g.meshgrid()
    rho = f.data[..., 0]
    expect = 1.0 + 0.5 * np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Z)
    np.testing.assert_allclose(rho, expect, rtol=1e-14)
    g2 = build_grid(1, 1, (0.2, 0.3), (-0.05, 0.05))
    assert cell_center(g2, 1, 1) == (0.25, 0.0)
    f2 = exact_density_wave(0.0, g2, spec)
    assert f2.data[0, 0, 0] == pytest.approx(1.5, rel=1e-14)  # centre (0.25, 0)


def test_density_wave_full_period_returns_to_start():
    spec = case_spec("density-wave")
    g = build_grid(8, 8, (0.0, 1.0), (0.0, 1.0))
    f0 = exact_density_wave(0.0, g, spec)
    f1 = exact_density_wave(1.0, g, spec)
    np.testing.assert_allclose(f1.data, f0.data, rtol=0, atol=1e-13)


def test_density_wave_initial_state_matches_exact_bitwise():
    spec = case_spec("density-wave")
    setup = init_case(spec, default_grids(spec, (12, 12)))
    assert np.array_equal(setup.state.q.data, setup.exact(0.0).data)


def test_two_vortices_far_field():
    spec = case_spec("two-vortices")
    setup = init_case(spec, default_grids(spec, (40, 20, 20)))
    prim2 = setup.state.q2.primitives()
    # far corner of the upper domain: vortex contribution decayed away
    assert prim2.rho[-1, 0] == pytest.approx(1.0, abs=1e-4)
    assert prim2.u[-1, 0] == pytest.approx(0.1, abs=1e-3)
    assert prim2.w[-1, 0] == pytest.approx(0.0, abs=1e-3)
    assert prim2.p[-1, 0] == pytest.approx(1.0 / 1.4, rel=1e-3)
    prim1 = setup.state.q1.primitives()
    assert prim1.T[0, 0] == pytest.approx(1.1, rel=1e-3)


def test_two_vortices_isentropic_relation():
    spec = case_spec("two-vortices")
    setup = init_case(spec, default_grids(spec, (30, 15, 15)))
    for field, T_inf in ((setup.state.q1, 1.1), (setup.state.q2, 1.0)):
        prim = field.primitives()
        np.testing.assert_allclose(prim.p, T_inf / 1.4 * prim.rho ** 1.4,
                                   rtol=1e-12)


def test_khi_jet_profile_values():
    # at z = 2.5 (mid-jet): rho = 2, u = 1.1 to tanh(10) accuracy
    spec = case_spec("khi")
    g1 = build_grid(4, 4, (-5.0, 5.0), (-5.0, 0.0))
    g2 = build_grid(4, 5, (-5.0, 5.0), (0.0, 5.0))  # centres hit z = 2.5
    setup = init_case(spec, (g1, g2))
    prim2 = setup.state.q2.primitives()
    j_mid = 2
    Z = g2.z_centers
    assert Z[j_mid] == pytest.approx(2.5)
    assert prim2.rho[j_mid, 0] == pytest.approx(2.0, abs=1e-6)
    assert prim2.u[j_mid, 0] == pytest.approx(1.1, abs=1e-6)
    # pressure uniform 1/gamma in the upper domain
    np.testing.assert_allclose(prim2.p, 1.0 / 1.4, rtol=1e-13)


def test_khi_perturbation_amplitude():
    spec = case_spec("khi")
    setup = init_case(spec, default_grids(spec, (32, 16, 32)))
    prim2 = setup.state.q2.primitives()
    assert np.abs(prim2.w).max() <= 2 * 0.01 + 1e-12
    assert np.abs(prim2.w).max() > 0.005


def test_wind_driven_initial_state():
    spec = case_spec("wind-driven")
    setup = init_case(spec, default_grids(spec, (16, 8, 8)))
    prim1 = setup.state.q1.primitives()
    prim2 = setup.state.q2.primitives()
    assert np.all(prim1.u == 0.0)
    np.testing.assert_allclose(prim2.u, 0.1, rtol=0, atol=1e-15)
    np.testing.assert_allclose(prim1.T, 1.1, rtol=1e-13)
    np.testing.assert_allclose(prim2.T, 1.0, rtol=1e-13)
    # 10% pressure jump across the interface is allowed by construction
    assert prim1.p[0, 0] == pytest.approx(1.1 / 1.4, rel=1e-13)
    assert prim2.p[0, 0] == pytest.approx(1.0 / 1.4, rel=1e-13)


def test_init_case_state_kinds():
    for name in CASE_NAMES:
        spec = case_spec(name)
        setup = init_case(spec, default_grids(spec, (8, 6, 4) if spec.coupled
                                              else (8, 8)))
        if spec.coupled:
            assert isinstance(setup.state, CoupledState)
        else:
            assert isinstance(setup.state, SingleState)


def test_taylor_green_viscosity_from_reynolds():
    spec = case_spec("taylor-green")
    setup = init_case(spec, default_grids(spec, (8, 8)))
    assert setup.state.q.params.mu_tilde == pytest.approx(1e-3, rel=1e-14)
    prim = setup.state.q.primitives()
    # velocity field is divergence-free at the analytic level; max speed u_inf
    assert np.abs(prim.u).max() <= 0.1 + 1e-12
    assert prim.p.mean() == pytest.approx(1.0 / 1.4, rel=1e-3)
