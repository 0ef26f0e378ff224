import numpy as np
import pytest

from rigidlid.cases import case_spec, default_grids, init_case
from rigidlid.diagnostics import (
    coarsen_field, conservation_sample, courant_numbers, l2_error, observed_order,
)
from rigidlid.grid import build_grid
from rigidlid.state import ConservedField, FluidParams, conserved_from_primitive
from rigidlid.timeint import SingleState


def uniform(grid, params, rho=1.0, u=0.0, w=0.0, p=1.0 / 1.4):
    shape = (grid.nz, grid.nx)
    return ConservedField(grid, params, conserved_from_primitive(
        (np.full(shape, rho), np.full(shape, u), np.full(shape, w),
         np.full(shape, p)), params))


PARAMS = FluidParams()


def test_l2_error_zero_for_identical_fields():
    g = build_grid(5, 4, (0.0, 1.0), (0.0, 1.0))
    f = uniform(g, PARAMS)
    err = l2_error(f, f.copy())
    assert err.rho == 0.0 and err.momentum == 0.0 and err.energy == 0.0


def test_l2_error_single_cell_arithmetic():
    g = build_grid(1, 1, (0.0, 0.5), (0.0, 0.5))  # |K| = 0.25
    f = uniform(g, PARAMS)
    f2 = f.copy()
    f2.data[0, 0, 0] += 0.2
    err = l2_error(f2, f)
    assert err.rho == pytest.approx(0.1, rel=1e-14)


def test_l2_error_momentum_combines_components():
    g = build_grid(1, 1, (0.0, 1.0), (0.0, 1.0))
    f = uniform(g, PARAMS)
    f2 = f.copy()
    f2.data[0, 0, 1] += 3e-4
    f2.data[0, 0, 2] += 4e-4
    err = l2_error(f2, f)
    assert err.momentum == pytest.approx(5e-4, rel=1e-13)


def test_l2_error_requires_matching_grids():
    f1 = uniform(build_grid(4, 4, (0.0, 1.0), (0.0, 1.0)), PARAMS)
    f2 = uniform(build_grid(5, 4, (0.0, 1.0), (0.0, 1.0)), PARAMS)
    with pytest.raises(ValueError):
        l2_error(f1, f2)


def test_l2_error_triangle_inequality():
    g = build_grid(6, 3, (0.0, 1.0), (0.0, 1.0))
    rng = np.random.default_rng(12)
    fields = []
    for _ in range(3):
        data = conserved_from_primitive(
            (1.0 + 0.1 * rng.standard_normal((3, 6)),
             0.1 * rng.standard_normal((3, 6)),
             0.1 * rng.standard_normal((3, 6)),
             0.7 + 0.1 * rng.standard_normal((3, 6))), PARAMS)
        fields.append(ConservedField(g, PARAMS, data))
    a, b, c = fields
    for attr in ("rho", "momentum", "energy"):
        ab = getattr(l2_error(a, b), attr)
        bc = getattr(l2_error(b, c), attr)
        ac = getattr(l2_error(a, c), attr)
        assert ac <= ab + bc + 1e-14


def test_observed_order_values():
    orders = observed_order([3.142e-3, 5.609e-4])
    assert orders[0] == pytest.approx(2.486, abs=5e-4)
    assert observed_order([4e-2, 1e-2])[0] == pytest.approx(2.0, rel=1e-12)
    assert observed_order([1e-3, 1e-3])[0] == 0.0


def test_observed_order_zero_error_flagged_nan():
    orders = observed_order([1e-3, 0.0])
    assert np.isnan(orders[0])


def test_observed_order_validation():
    with pytest.raises(ValueError):
        observed_order([1e-3])
    with pytest.raises(ValueError):
        observed_order([1e-3, 1e-4], ratios=[2.0, 2.0])


def test_conservation_sample_uniform_fields():
    g = build_grid(10, 5, (0.0, 10.0), (0.0, 5.0))  # |K| = 1
    f = uniform(g, PARAMS)
    m1, m2, e = conservation_sample(SingleState(f, 0.0))
    assert m1 == pytest.approx(50.0, rel=1e-14)
    assert m2 == 0.0
    spec = case_spec("two-vortices")
    setup = init_case(spec, default_grids(spec, (10, 5, 5)))
    m1, m2, e = conservation_sample(setup.state)
    assert m1 > 0.0 and m2 > 0.0 and e > 0.0


def test_conservation_sample_reorder_invariant():
    g = build_grid(6, 4, (0.0, 1.0), (0.0, 1.0))
    rng = np.random.default_rng(3)
    f = uniform(g, PARAMS)
    f.data[..., 0] = 1.0 + 0.1 * rng.standard_normal((4, 6))
    m1, _, _ = conservation_sample(SingleState(f, 0.0))
    rolled = ConservedField(g, PARAMS, np.roll(f.data, 2, axis=1))
    m1_r, _, _ = conservation_sample(SingleState(rolled, 0.0))
    assert m1 == pytest.approx(m1_r, rel=1e-14)


def test_courant_numbers():
    g = build_grid(100, 100, (0.0, 1.0), (0.0, 1.0))  # spacing 0.01
    f = uniform(g, PARAMS, rho=1.0, u=0.0, w=0.0, p=1.0 / 1.4)  # a = 1
    cr1, cr2 = courant_numbers(SingleState(f, 0.0), 0.05)
    assert cr1 == pytest.approx(5.0, rel=1e-12)
    assert cr2 == 0.0
    g2 = build_grid(16, 16, (0.0, 1.0), (0.0, 1.0))
    f2 = uniform(g2, PARAMS, u=0.1)
    cr1, _ = courant_numbers(SingleState(f2, 0.0), 0.01)
    assert cr1 == pytest.approx(1.1 * 0.01 / 0.0625, rel=1e-12)
    assert courant_numbers(SingleState(f2, 0.0), 0.0) == (0.0, 0.0)


def test_courant_table_geometry_value():
    # uniform u = 0.1, a = 1, dt = 0.01, spacing 0.0625 -> 0.176
    g = build_grid(16, 16, (0.0, 1.0), (0.0, 1.0))
    f = uniform(g, PARAMS, u=0.1)
    cr1, _ = courant_numbers(SingleState(f, 0.0), 0.01)
    assert cr1 == pytest.approx(0.176, rel=1e-12)


def test_coarsen_field_block_means():
    g = build_grid(8, 4, (0.0, 1.0), (0.0, 1.0))
    f = uniform(g, PARAMS)
    f.data[..., 0] = np.arange(32).reshape(4, 8)
    coarse = coarsen_field(f, 2)
    assert coarse.grid.nx == 4 and coarse.grid.nz == 2
    assert coarse.data[0, 0, 0] == pytest.approx((0 + 1 + 8 + 9) / 4.0)
    with pytest.raises(ValueError):
        coarsen_field(f, 3)


def test_coarsen_preserves_mass():
    spec = case_spec("khi")
    setup = init_case(spec, default_grids(spec, (16, 16, 8)))
    m1, _, _ = conservation_sample(setup.state)
    coarse = coarsen_field(setup.state.q1, 4)
    m1_c = float(np.sum(coarse.data[..., 0]) * coarse.grid.cell_measure)
    assert m1_c == pytest.approx(m1, rel=1e-13)
