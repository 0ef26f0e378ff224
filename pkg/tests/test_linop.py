import numpy as np
import pytest

from rigidlid.boundary import (
    BoundaryConditions, RigidLidInterface, adiabatic_wall, interface,
    interface_first_layer, isothermal_wall, periodic,
)
from rigidlid.errors import SolverError
from rigidlid.grid import build_grid
from rigidlid.linop import (
    LinearOperatorKind, LinearizedOperator, StageSystem, operator_kind, stage_solve,
)
from rigidlid.residual import (
    OPERATOR_FULL_TERMS, OPERATOR_INVISCID_TERMS, VERTICAL_INVISCID_TERMS,
    assemble_rhs,
)
from rigidlid.state import ConservedField, FluidParams, conserved_from_primitive

GAMMA = 1.4


def smooth_field(grid, params, amp=0.08):
    X, Z = grid.meshgrid()
    lx = grid.x_max - grid.x0
    lz = grid.z_max - grid.z0
    sx = 2 * np.pi * (X - grid.x0) / lx
    sz = 2 * np.pi * (Z - grid.z0) / lz
    rho = 1.0 + amp * np.sin(sx) * np.cos(sz)
    u = 0.1 + amp * np.cos(sx)
    w = amp * np.sin(sz)
    p = 1.0 / GAMMA + amp * 0.1 * np.cos(sz)
    return ConservedField(grid, params,
                          conserved_from_primitive((rho, u, w, p), params))


def wall_bcs():
    return BoundaryConditions(periodic(), periodic(),
                              isothermal_wall(0.0, 1.0), isothermal_wall(0.1, 1.0))


TERMS_FOR_KIND = {
    LinearOperatorKind.FULL: OPERATOR_FULL_TERMS,
    LinearOperatorKind.INVISCID: OPERATOR_INVISCID_TERMS,
    LinearOperatorKind.VERTICAL: VERTICAL_INVISCID_TERMS,
}


def test_operator_kind_labels():
    assert operator_kind("Lz") is LinearOperatorKind.VERTICAL
    assert operator_kind("L") is LinearOperatorKind.FULL
    assert operator_kind("LI") is LinearOperatorKind.INVISCID
    with pytest.raises(ValueError):
        operator_kind("Lx")


def test_zero_maps_to_zero():
    g = build_grid(6, 6, (0.0, 1.0), (0.0, 1.0))
    params = FluidParams(mu_tilde=1e-3)
    ref = smooth_field(g, params)
    op = LinearizedOperator(LinearOperatorKind.FULL, ref, wall_bcs())
    out = op.apply(np.zeros((6, 6, 4)))
    assert np.all(out == 0.0)


def test_homogeneity_up_to_fd_error():
    g = build_grid(6, 6, (0.0, 1.0), (0.0, 1.0))
    params = FluidParams(mu_tilde=1e-3)
    ref = smooth_field(g, params)
    rng = np.random.default_rng(5)
    v = rng.standard_normal((6, 6, 4))
    for kind in LinearOperatorKind:
        op = LinearizedOperator(kind, ref, wall_bcs())
        lv = op.apply(v)
        lav = op.apply(3.0 * v)
        np.testing.assert_allclose(lav, 3.0 * lv, rtol=1e-6,
                                   atol=1e-6 * np.abs(lv).max())


@pytest.mark.parametrize("kind", list(LinearOperatorKind))
def test_dense_assembly_matches_fd_of_restricted_rhs(kind):
    # brute-force oracle: assemble L column by column on a 4x4 grid and
    # compare its action with a directional FD of the nonlinear residual
    g = build_grid(4, 4, (0.0, 1.0), (0.0, 1.0))
    params = FluidParams(mu_tilde=1e-3)
    ref = smooth_field(g, params)
    bcs = wall_bcs()
    op = LinearizedOperator(kind, ref, bcs)
    n = 4 * 4 * 4
    dense = np.zeros((n, n))
    for col in range(n):
        e = np.zeros(n)
        e[col] = 1.0
        dense[:, col] = op.apply(e.reshape(4, 4, 4)).ravel()
    terms = TERMS_FOR_KIND[kind]
    rng = np.random.default_rng(17)
    base = assemble_rhs(ref, bcs, terms=terms)
    for _ in range(4):
        v = rng.standard_normal((4, 4, 4))
        eps = 1e-7
        pert = ConservedField(g, params, ref.data + eps * v)
        fd = (assemble_rhs(pert, bcs, terms=terms) - base) / eps
        lv = (dense @ v.ravel()).reshape(4, 4, 4)
        scale = np.abs(fd).max()
        np.testing.assert_allclose(lv, fd, atol=1e-5 * scale, rtol=2e-4)


def test_vertical_operator_column_locality_exact():
    g = build_grid(5, 7, (0.0, 1.0), (0.0, 1.0))
    params = FluidParams(mu_tilde=1e-3)
    ref = smooth_field(g, params)
    op = LinearizedOperator(LinearOperatorKind.VERTICAL, ref, wall_bcs())
    rng = np.random.default_rng(23)
    v = rng.standard_normal((7, 5, 4))
    full = op.apply(v)
    masked = np.zeros_like(v)
    masked[:, 2, :] = v[:, 2, :]
    part = op.apply(masked)
    np.testing.assert_array_equal(full[:, 2, :], part[:, 2, :])
    assert np.all(part[:, [0, 1, 3, 4], :] == 0.0)


def test_vertical_equals_z_part_of_inviscid():
    g = build_grid(5, 6, (0.0, 1.0), (0.0, 1.0))
    params = FluidParams(mu_tilde=1e-3)
    ref = smooth_field(g, params)
    bcs = wall_bcs()
    op_vert = LinearizedOperator(LinearOperatorKind.VERTICAL, ref, bcs)
    op_inv = LinearizedOperator(LinearOperatorKind.INVISCID, ref, bcs)
    # the x-restricted assembly isolates the horizontal part
    from rigidlid.residual import RhsTerms
    x_only = RhsTerms(inviscid_x=True, inviscid_z=False, viscous=False)
    rng = np.random.default_rng(2)
    v = rng.standard_normal((6, 5, 4))
    lv_inv = op_inv.apply(v)
    lv_vert = op_vert.apply(v)
    # difference restricted to x faces: compare against FD of x-only assembly
    eps = 1e-8
    base = assemble_rhs(ref, bcs, terms=x_only)
    pert = ConservedField(g, params, ref.data + eps * v)
    fd_x = (assemble_rhs(pert, bcs, terms=x_only) - base) / eps
    np.testing.assert_allclose(lv_inv - lv_vert, fd_x, rtol=5e-5,
                               atol=1e-6 * np.abs(fd_x).max())


def test_consistency_second_order_in_perturbation():
    # || R(q + dv) - R(q) - L(q, dv) || = O(||dv||^2) on a periodic box
    g = build_grid(8, 8, (0.0, 1.0), (0.0, 1.0))
    params = FluidParams(mu_tilde=1e-3)
    ref = smooth_field(g, params)
    bcs = BoundaryConditions(periodic(), periodic(), periodic(), periodic())
    op = LinearizedOperator(LinearOperatorKind.FULL, ref, bcs)
    rng = np.random.default_rng(31)
    v = rng.standard_normal((8, 8, 4))
    v /= np.abs(v).max()
    base = assemble_rhs(ref, bcs, terms=OPERATOR_FULL_TERMS)
    lv = op.apply(v)
    scales = np.array([1e-2, 5e-3, 2.5e-3, 1.25e-3])
    defects = []
    for s in scales:
        pert = ConservedField(g, params, ref.data + s * v)
        defect = assemble_rhs(pert, bcs, terms=OPERATOR_FULL_TERMS) - base - s * lv
        defects.append(np.linalg.norm(defect))
    slope = np.polyfit(np.log(scales), np.log(defects), 1)[0]
    assert slope >= 1.9


def test_operator_respects_frozen_interface_exchange():
    # perturbing the field does not change the bulk fluxes inside L, but the
    # ghost reflection of the interior state does respond
    g1 = build_grid(6, 5, (0.0, 1.0), (-1.0, 0.0))
    params = FluidParams(mu_tilde=1 / 5000.0)
    ref = smooth_field(g1, params)
    iface = RigidLidInterface(params.mu_tilde, params.mu_tilde,
                              params.kappa_tilde, params.kappa_tilde, g1.dz, g1.dz)
    u1, T1 = interface_first_layer(ref, 1)
    ex = iface.exchange(u1, T1, u1 + 0.05, T1 - 0.1)
    bcs = BoundaryConditions(periodic(), periodic(), adiabatic_wall(), interface())
    op = LinearizedOperator(LinearOperatorKind.VERTICAL, ref, bcs, exchange=ex)
    rng = np.random.default_rng(41)
    v = rng.standard_normal(ref.data.shape)
    lv = op.apply(v)
    assert np.isfinite(lv).all() and np.abs(lv).max() > 0.0
    # FD of the restricted assembly with the same frozen exchange agrees
    eps = 1e-7
    base = assemble_rhs(ref, bcs, exchange=ex, terms=VERTICAL_INVISCID_TERMS)
    pert = ConservedField(g1, params, ref.data + eps * v)
    fd = (assemble_rhs(pert, bcs, exchange=ex, terms=VERTICAL_INVISCID_TERMS)
          - base) / eps
    np.testing.assert_allclose(lv, fd, rtol=2e-4, atol=1e-5 * np.abs(fd).max())


# ----------------------------------------------------------------- solves

def test_stage_solve_alpha_zero_returns_rhs():
    g = build_grid(4, 4, (0.0, 1.0), (0.0, 1.0))
    params = FluidParams()
    ref = smooth_field(g, params)
    op = LinearizedOperator(LinearOperatorKind.VERTICAL, ref, wall_bcs())
    rhs = np.ones((4, 4, 4))
    x, stats = stage_solve(op, StageSystem(alpha=0.0, rhs=rhs, tolerance=1e-6))
    np.testing.assert_array_equal(x, rhs)
    assert stats.iterations == 0


def test_stage_solve_zero_rhs():
    g = build_grid(4, 4, (0.0, 1.0), (0.0, 1.0))
    params = FluidParams()
    ref = smooth_field(g, params)
    op = LinearizedOperator(LinearOperatorKind.VERTICAL, ref, wall_bcs())
    x, stats = stage_solve(op, StageSystem(alpha=0.1, rhs=np.zeros((4, 4, 4)),
                                           tolerance=1e-8))
    assert np.all(x == 0.0)


@pytest.mark.parametrize("kind", list(LinearOperatorKind))
def test_stage_solve_against_dense_direct_solve(kind):
    g = build_grid(3, 8, (0.0, 1.0), (0.0, 1.0))
    params = FluidParams(mu_tilde=1e-3)
    ref = smooth_field(g, params)
    bcs = wall_bcs()
    op = LinearizedOperator(kind, ref, bcs)
    n = 3 * 8 * 4
    dense = np.zeros((n, n))
    for col in range(n):
        e = np.zeros(n)
        e[col] = 1.0
        dense[:, col] = op.apply(e.reshape(8, 3, 4)).ravel()
    alpha = 0.004
    rng = np.random.default_rng(3)
    rhs = rng.standard_normal((8, 3, 4))
    # tolerances much below 1e-8 are masked by the FD noise of the operator
    tol = 1e-8
    x, stats = stage_solve(op, StageSystem(alpha=alpha, rhs=rhs, tolerance=tol))
    direct = np.linalg.solve(np.eye(n) - alpha * dense, rhs.ravel())
    scale = np.abs(direct).max()
    np.testing.assert_allclose(x.ravel(), direct, rtol=0, atol=10 * tol * scale)
    assert stats.residual <= tol


def test_stage_solve_reports_failure():
    g = build_grid(3, 6, (0.0, 1.0), (0.0, 1.0))
    params = FluidParams()
    ref = smooth_field(g, params)
    op = LinearizedOperator(LinearOperatorKind.VERTICAL, ref, wall_bcs())
    rhs = np.ones((6, 3, 4))
    with pytest.raises(SolverError) as err:
        stage_solve(op, StageSystem(alpha=0.5, rhs=rhs, tolerance=1e-14,
                                    max_iterations=2))
    assert err.value.iterations >= 2
    assert np.isfinite(err.value.residual)


def test_stage_system_validation():
    with pytest.raises(ValueError):
        StageSystem(alpha=-1.0, rhs=np.zeros(4), tolerance=1e-4)
    with pytest.raises(ValueError):
        StageSystem(alpha=0.1, rhs=np.zeros(4), tolerance=2.0)
