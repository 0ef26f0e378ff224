"""Face flux kernels: LS gradients, linear reconstruction, Roe and viscous fluxes.

All kernels are vectorized over faces; the component axis is last. The
x-direction kernel is the primitive one, the z-direction reuses it through
the (rho*u <-> rho*w) component swap, which makes the two directions exactly
symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StateError
from .grid import StructuredGrid2D
from .state import NCOMP, RHO, RHOU, RHOW, RHOE, FluidParams, pressure

_AXIS_NORMALS = {(1, 0): ("x", +1), (-1, 0): ("x", -1),
                 (0, 1): ("z", +1), (0, -1): ("z", -1)}


@dataclass(frozen=True)
class CellGradients:
    """Central-difference (least-squares) cell gradients, interior cells only."""

    d_dx: np.ndarray
    d_dz: np.ndarray


def central_gradients(values_ext, grid: StructuredGrid2D) -> CellGradients:
    """Row/column-local central differences,
    d_dx[j, i] = (f[j, i+1] - f[j, i-1]) / (2 dx) and analogously in z.

    This is the single-row reduction of the least-squares gradient; it is
    what the column-local (HEVI) linear operator linearizes in z.
    """
    values_ext = np.asarray(values_ext)
    _require_extended(values_ext, grid)
    d_dx = (values_ext[1:-1, 2:] - values_ext[1:-1, :-2]) / (2.0 * grid.dx)
    d_dz = (values_ext[2:, 1:-1] - values_ext[:-2, 1:-1]) / (2.0 * grid.dz)
    return CellGradients(d_dx=d_dx, d_dz=d_dz)


def ls_gradients(values_ext, grid: StructuredGrid2D) -> CellGradients:
    """Least-squares cell gradients over the 8-neighbour stencil.

    On a uniform mesh the unweighted LS fit across all eight neighbours
    reduces to the mean of the three adjacent central differences,

        d_dx[j, i] = sum_{r=-1..1} (f[j+r, i+1] - f[j+r, i-1]) / (6 dx),

    exact for linear fields and second-order accurate in general. values_ext
    must be shaped (nz+2, nx+2, ...) with all four ghost sides populated
    (corners included); the returned gradients cover the nz x nx interior.
    """
    values_ext = np.asarray(values_ext)
    _require_extended(values_ext, grid)
    cd_x = (values_ext[:, 2:] - values_ext[:, :-2]) / (2.0 * grid.dx)
    d_dx = (cd_x[:-2] + cd_x[1:-1] + cd_x[2:]) / 3.0
    cd_z = (values_ext[2:, :] - values_ext[:-2, :]) / (2.0 * grid.dz)
    d_dz = (cd_z[:, :-2] + cd_z[:, 1:-1] + cd_z[:, 2:]) / 3.0
    return CellGradients(d_dx=d_dx, d_dz=d_dz)


def _require_extended(values_ext, grid):
    expected = (grid.nz + 2, grid.nx + 2)
    if values_ext.shape[:2] != expected:
        raise ValueError(
            f"expected ghost-extended array with leading shape {expected}, "
            f"got {values_ext.shape[:2]}; populate the boundary closure first")


def reconstruct_pair(q_minus, grad_minus, q_plus, grad_plus, half_width):
    """One-sided linear extrapolations to the face between two cells.

    qL = q_minus + grad_minus * h/2 from the left/lower cell and
    qR = q_plus - grad_plus * h/2 from the right/upper cell.
    """
    qL = q_minus + grad_minus * half_width
    qR = q_plus - grad_plus * half_width
    return qL, qR


_DIR_COMPONENTS = {"x": (RHOU, RHOW), "z": (RHOW, RHOU)}


def inviscid_flux(q, gamma, direction):
    """Physical inviscid flux in +x or +z for conserved state(s) q."""
    q = np.asarray(q)
    iu, iw = _DIR_COMPONENTS[direction]
    rho = q[..., RHO]
    un = q[..., iu] / rho
    p = pressure(q, gamma)
    f = np.empty(q.shape)
    f[..., RHO] = q[..., iu]
    f[..., iu] = q[..., iu] * un + p
    f[..., iw] = q[..., iw] * un
    f[..., RHOE] = (q[..., RHOE] + p) * un
    return f


def _roe_core(qL, qR, gamma, direction, want_flux):
    """Fused Roe kernel: dissipation |A|(qR-qL), optionally the full flux.

    The normal/tangential roles of the velocity components are selected by
    the direction, making x and z exactly symmetric. The characteristic
    form uses waves (un-a, un, un, un+a) at the sqrt(rho)-weighted Roe
    state, with the shear wave carrying the tangential velocity jump; it
    satisfies the Roe property F(qR)-F(qL) = A (qR-qL) for the ideal gas.
    """
    iu, iw = _DIR_COMPONENTS[direction]
    g1 = gamma - 1.0
    rhoL = qL[..., RHO]
    rhoR = qR[..., RHO]
    uL = qL[..., iu] / rhoL
    uR = qR[..., iu] / rhoR
    wL = qL[..., iw] / rhoL
    wR = qR[..., iw] / rhoR
    pL = g1 * (qL[..., RHOE] - 0.5 * (qL[..., iu] * uL + qL[..., iw] * wL))
    pR = g1 * (qR[..., RHOE] - 0.5 * (qR[..., iu] * uR + qR[..., iw] * wR))
    hL = qL[..., RHOE] + pL
    hR = qR[..., RHOE] + pR

    sL = np.sqrt(rhoL)
    sR = np.sqrt(rhoR)
    inv = 1.0 / (sL + sR)
    u = (sL * uL + sR * uR) * inv
    w = (sL * wL + sR * wR) * inv
    H = (hL / sL + hR / sR) * inv  # sL*HL = hL/sL
    a2 = g1 * (H - 0.5 * (u * u + w * w))
    if np.any(a2 <= 0.0):
        raise StateError("Roe average has nonpositive sound speed")
    a = np.sqrt(a2)
    rho_hat = sL * sR

    d_p = pR - pL
    d_u = uR - uL
    half_over_a2 = 0.5 / a2
    rah = rho_hat * a
    cm = np.abs(u - a) * ((d_p - rah * d_u) * half_over_a2)
    cp = np.abs(u + a) * ((d_p + rah * d_u) * half_over_a2)
    lam0 = np.abs(u)
    c0 = lam0 * ((rhoR - rhoL) - d_p / a2)
    cs = lam0 * rho_hat * (wR - wL)

    acoustic = cm + c0 + cp
    diss = np.empty(qL.shape)
    diss[..., RHO] = acoustic
    diss[..., iu] = (cm + cp) * u - (cm - cp) * a + c0 * u
    diss[..., iw] = acoustic * w + cs
    diss[..., RHOE] = ((cm + cp) * H - (cm - cp) * (u * a)
                       + c0 * (0.5 * (u * u + w * w)) + cs * w)
    if not want_flux:
        return diss
    flux = np.empty(qL.shape)
    mL = qL[..., iu]
    mR = qR[..., iu]
    flux[..., RHO] = 0.5 * (mL + mR) - 0.5 * diss[..., RHO]
    flux[..., iu] = 0.5 * (mL * uL + pL + mR * uR + pR) - 0.5 * diss[..., iu]
    flux[..., iw] = 0.5 * (qL[..., iw] * uL + qR[..., iw] * uR) - 0.5 * diss[..., iw]
    flux[..., RHOE] = 0.5 * (hL * uL + hR * uR) - 0.5 * diss[..., RHOE]
    return flux


def roe_dissipation(qL, qR, gamma, direction):
    """Upwind dissipation |A|(qR - qL) for +x or +z faces."""
    return _roe_core(np.asarray(qL), np.asarray(qR), gamma, direction,
                     want_flux=False)


def roe_flux_axis(qL, qR, gamma, direction):
    """Roe flux through a +x or +z face:
    F* = (F(qL) + F(qR))/2 - |A|(qR - qL)/2."""
    return _roe_core(np.asarray(qL), np.asarray(qR), gamma, direction,
                     want_flux=True)


def roe_flux(qL, qR, normal, params: FluidParams):
    """Roe flux for an axis-aligned unit normal (+-1, 0) or (0, +-1).

    qL is the state reconstructed from the left/lower cell, qR from the
    right/upper one, independent of the normal's sign. Consistent
    (qL = qR gives the analytic flux dotted with the normal) and
    conservative: roe_flux(qL, qR, n) = -roe_flux(qR, qL, -n).
    """
    key = tuple(int(np.sign(x)) for x in normal)
    if key not in _AXIS_NORMALS:
        raise ValueError(f"normal must be axis-aligned, got {normal}")
    direction, sign = _AXIS_NORMALS[key]
    qL = np.asarray(qL, dtype=float)
    qR = np.asarray(qR, dtype=float)
    for name, q in (("left", qL), ("right", qR)):
        if np.any(q[..., RHO] <= 0.0) or np.any(pressure(q, params.gamma) <= 0.0):
            raise StateError(f"inadmissible {name} face state")
    centered = 0.5 * (inviscid_flux(qL, params.gamma, direction)
                      + inviscid_flux(qR, params.gamma, direction))
    # |A(-n)| = |A(n)|, so only the centered part follows the normal's sign
    return sign * centered - 0.5 * roe_dissipation(qL, qR, params.gamma, direction)


def flux_jacobian(q, gamma, direction):
    """Analytic Jacobian d(F . e_dir)/dq, shape (..., 4, 4)."""
    q = np.asarray(q)
    if direction == "z":
        perm = np.array([RHO, RHOW, RHOU, RHOE])
        J = flux_jacobian(q[..., perm], gamma, "x")
        return J[..., perm[:, None], perm[None, :]]
    rho = q[..., RHO]
    u = q[..., RHOU] / rho
    w = q[..., RHOW] / rho
    E = q[..., RHOE] / rho
    g1 = gamma - 1.0
    ke = 0.5 * (u * u + w * w)
    H = gamma * E - g1 * ke
    J = np.empty(q.shape[:-1] + (NCOMP, NCOMP))
    J[..., 0, 0] = 0.0
    J[..., 0, 1] = 1.0
    J[..., 0, 2] = 0.0
    J[..., 0, 3] = 0.0
    J[..., 1, 0] = g1 * ke - u * u
    J[..., 1, 1] = (3.0 - gamma) * u
    J[..., 1, 2] = -g1 * w
    J[..., 1, 3] = g1
    J[..., 2, 0] = -u * w
    J[..., 2, 1] = w
    J[..., 2, 2] = u
    J[..., 2, 3] = 0.0
    J[..., 3, 0] = u * (g1 * ke - H)
    J[..., 3, 1] = H - g1 * u * u
    J[..., 3, 2] = -g1 * u * w
    J[..., 3, 3] = gamma * u
    return J


def pressure_gradient(q, gamma):
    """Row vector dp/dq = (gamma-1) (ke, -u, -w, 1), shape (..., 4)."""
    q = np.asarray(q)
    rho = q[..., RHO]
    u = q[..., RHOU] / rho
    w = q[..., RHOW] / rho
    g = np.empty_like(q)
    g[..., RHO] = 0.5 * (u * u + w * w)
    g[..., RHOU] = -u
    g[..., RHOW] = -w
    g[..., RHOE] = 1.0
    return (gamma - 1.0) * g


def viscous_face_flux(u_hat, grad_u, grad_T, params: FluidParams, normal):
    """Viscous flux (0, sigma.n, (sigma u_hat - Pi).n) from common face values.

    u_hat = (u, w); grad_u is the 2x2 velocity gradient [[du/dx, du/dz],
    [dw/dx, dw/dz]]; grad_T = (dT/dx, dT/dz); Pi = -kappa_tilde grad_T.
    """
    u, w = (np.asarray(x, dtype=float) for x in u_hat)
    (dudx, dudz), (dwdx, dwdz) = ((np.asarray(g, dtype=float) for g in row)
                                  for row in grad_u)
    dTdx, dTdz = (np.asarray(x, dtype=float) for x in grad_T)
    mu = params.mu_tilde
    div = dudx + dwdz
    sxx = mu * (2.0 * dudx - 2.0 / 3.0 * div)
    szz = mu * (2.0 * dwdz - 2.0 / 3.0 * div)
    sxz = mu * (dudz + dwdx)
    kappa = params.kappa_tilde
    nx, nz = normal
    flux = np.zeros(np.broadcast(u, dudx).shape + (NCOMP,))
    flux[..., RHOU] = sxx * nx + sxz * nz
    flux[..., RHOW] = sxz * nx + szz * nz
    flux[..., RHOE] = ((sxx * u + sxz * w + kappa * dTdx) * nx
                       + (sxz * u + szz * w + kappa * dTdz) * nz)
    return flux
