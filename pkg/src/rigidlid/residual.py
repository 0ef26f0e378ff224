"""Semi-discrete finite-volume right-hand side for one subdomain.

The update for cell (i, j) is the flux difference

    R = -(F*_{i+1/2,j} - F*_{i-1/2,j})/dx - (G*_{i,j+1/2} - G*_{i,j-1/2})/dz

with F* = F_inviscid - F_viscous. Every face flux is computed once and
scattered with opposite signs to its two neighbours, so interior fluxes
telescope exactly in floating point. Periodic faces are evaluated from
wrapped ghost data, which makes the two copies of the seam face bitwise
identical. At wall and rigid-lid faces the inviscid flux is the
pressure-only flux (zero mass flux by construction, using the
interior-side reconstructed face pressure), and the viscous flux follows
from the mirror-ghost closure, which reproduces the one-sided wall
gradients and the wall-velocity work term; the normal viscous stress is
dropped at rigid-lid faces (zero normal traction).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .boundary import (
    BoundaryConditions, BoundaryKind, InterfaceExchange, fill_ghosts,
)
from .errors import StateError
from .grid import StructuredGrid2D
from .numflux import pressure, roe_flux_axis
from .state import NCOMP, RHO, RHOU, RHOW, RHOE, ConservedField, primitive_from_conserved


@dataclass(frozen=True)
class RhsTerms:
    """Selects which flux groups enter the assembly and which vertical
    reconstruction stencil is used.

    The production scheme reconstructs with the 8-neighbour least-squares
    gradients. hevi_vertical switches the z-direction reconstruction to the
    column-local central-difference gradient; this is the convention the
    linearized operators (and their oracles) are built on, so that the
    vertical operator couples cells within one column only. The
    cross-column slope terms it omits stay in the explicitly treated
    remainder of the splitting.
    """

    inviscid_x: bool = True
    inviscid_z: bool = True
    viscous: bool = True
    hevi_vertical: bool = False


ALL_TERMS = RhsTerms()
INVISCID_TERMS = RhsTerms(viscous=False)
OPERATOR_FULL_TERMS = RhsTerms(hevi_vertical=True)
OPERATOR_INVISCID_TERMS = RhsTerms(viscous=False, hevi_vertical=True)
VERTICAL_INVISCID_TERMS = RhsTerms(inviscid_x=False, viscous=False,
                                   hevi_vertical=True)


def check_admissible(field: ConservedField):
    """Raise StateError naming the first inadmissible cell, if any."""
    rho = field.data[..., RHO]
    p = pressure(field.data, field.params.gamma)
    bad = (rho <= 0.0) | (p <= 0.0)
    if np.any(bad):
        j, i = np.argwhere(bad)[0]
        raise StateError(
            f"inadmissible state in cell (i={i + 1}, j={j + 1}): "
            f"rho={rho[j, i]:.6e}, p={p[j, i]:.6e}")


def _gradient_x(ext, grid, periodic, ls9=True):
    """d/dx of the extended array for extended columns 0..nx+1 at interior
    rows; ghost-column entries wrap when periodic and are zero otherwise
    (wall faces never use them). ls9 selects the 8-neighbour least-squares
    stencil (mean of the three adjacent row central differences)."""
    nz, nx = grid.nz, grid.nx
    out = np.zeros((nz,) + (nx + 2,) + ext.shape[2:])
    cd = (ext[:, 2:] - ext[:, :-2]) / (2.0 * grid.dx)
    if ls9:
        out[:, 1:-1] = (cd[:-2] + cd[1:-1] + cd[2:]) / 3.0
    else:
        out[:, 1:-1] = cd[1:-1]
    if periodic:
        out[:, 0] = out[:, nx]
        out[:, -1] = out[:, 1]
    return out


def _gradient_z(ext, grid, periodic, ls9=True):
    nz, nx = grid.nz, grid.nx
    out = np.zeros((nz + 2,) + (nx,) + ext.shape[2:])
    cd = (ext[2:, :] - ext[:-2, :]) / (2.0 * grid.dz)
    if ls9:
        out[1:-1] = (cd[:, :-2] + cd[:, 1:-1] + cd[:, 2:]) / 3.0
    else:
        out[1:-1] = cd[:, 1:-1]
    if periodic:
        out[0] = out[nz]
        out[-1] = out[1]
    return out


def conserved_face_states(ext, grid: StructuredGrid2D, bcs: BoundaryConditions,
                          direction: str, hevi_vertical: bool = False):
    """Linearly reconstructed (qL, qR) for every face of one direction.

    x faces are shaped (nz, nx+1, 4) (face f sits between extended columns
    f and f+1), z faces (nz+1, nx, 4). Reconstruction is linear in the
    extended array, a property the linearized operators rely on.
    hevi_vertical switches the z reconstruction to the column-local
    central-difference slope.
    """
    if direction == "x":
        grad = _gradient_x(ext, grid, bcs.periodic_x)
        qL = ext[1:-1, :-1] + grad[:, :-1] * (0.5 * grid.dx)
        qR = ext[1:-1, 1:] - grad[:, 1:] * (0.5 * grid.dx)
    else:
        grad = _gradient_z(ext, grid, bcs.periodic_z, ls9=not hevi_vertical)
        qL = ext[:-1, 1:-1] + grad[:-1] * (0.5 * grid.dz)
        qR = ext[1:, 1:-1] - grad[1:] * (0.5 * grid.dz)
    return qL, qR


_WALL_KINDS = (BoundaryKind.ISOTHERMAL_MOVING_WALL, BoundaryKind.ADIABATIC_NO_SLIP,
               BoundaryKind.RIGID_LID_INTERFACE)


def wall_pressure_flux(q_face, gamma, direction):
    """Inviscid flux through an impermeable face: (0, p n_x, p n_z, 0)."""
    flux = np.zeros(q_face.shape[:-1] + (NCOMP,))
    comp = RHOU if direction == "x" else RHOW
    flux[..., comp] = pressure(q_face, gamma)
    return flux


def inviscid_fluxes(ext, grid, params, bcs, direction, hevi_vertical=False):
    """Roe fluxes on all faces of one direction, boundary faces overridden
    by the impermeable-wall pressure flux where the closure demands it."""
    qL, qR = conserved_face_states(ext, grid, bcs, direction, hevi_vertical)
    flux = roe_flux_axis(qL, qR, params.gamma, direction)
    if direction == "x" and not bcs.periodic_x:
        flux[:, 0] = wall_pressure_flux(qR[:, 0], params.gamma, "x")
        flux[:, -1] = wall_pressure_flux(qL[:, -1], params.gamma, "x")
    if direction == "z" and not bcs.periodic_z:
        flux[0] = wall_pressure_flux(qR[0], params.gamma, "z")
        flux[-1] = wall_pressure_flux(qL[-1], params.gamma, "z")
    return flux


def viscous_rhs_from_extended(ext, grid, params, bcs: BoundaryConditions):
    """Viscous contribution to the RHS from the ghost-extended state.

    Common face values follow the two-point normal finite differences, the
    arithmetic-mean face velocity, and tangential derivatives averaged from
    the adjacent cells' LS gradients. Mirror ghosts make these formulas
    produce the exact moving-wall values at boundary faces.
    """
    if params.mu_tilde == 0.0:
        return np.zeros((grid.nz, grid.nx, NCOMP))
    mu = params.mu_tilde
    kappa = params.kappa_tilde
    dx, dz = grid.dx, grid.dz
    prim = primitive_from_conserved(ext, params, check=False)
    u, w, T = prim.u, prim.w, prim.T

    # cell-centred LS gradients over the extended region (ghost rows keep
    # their x-gradients, ghost columns their z-gradients, for the
    # tangential averages at boundary faces)
    dudz_c = (u[2:, :] - u[:-2, :]) / (2.0 * dz)   # (nz, nx+2)
    dwdz_c = (w[2:, :] - w[:-2, :]) / (2.0 * dz)
    dTdz_c = (T[2:, :] - T[:-2, :]) / (2.0 * dz)
    dudx_c = (u[:, 2:] - u[:, :-2]) / (2.0 * dx)   # (nz+2, nx)
    dwdx_c = (w[:, 2:] - w[:, :-2]) / (2.0 * dx)
    dTdx_c = (T[:, 2:] - T[:, :-2]) / (2.0 * dx)

    # x faces: (nz, nx+1)
    ui, uj = u[1:-1, :-1], u[1:-1, 1:]
    wi, wj = w[1:-1, :-1], w[1:-1, 1:]
    u_hat = 0.5 * (ui + uj)
    w_hat = 0.5 * (wi + wj)
    dudx = (uj - ui) / dx
    dwdx = (wj - wi) / dx
    dTdx = (T[1:-1, 1:] - T[1:-1, :-1]) / dx
    dudz = 0.5 * (dudz_c[:, :-1] + dudz_c[:, 1:])
    dwdz = 0.5 * (dwdz_c[:, :-1] + dwdz_c[:, 1:])
    div = dudx + dwdz
    sxx = mu * (2.0 * dudx - 2.0 / 3.0 * div)
    sxz = mu * (dudz + dwdx)
    fx = np.zeros((grid.nz, grid.nx + 1, NCOMP))
    fx[..., RHOU] = sxx
    fx[..., RHOW] = sxz
    fx[..., RHOE] = sxx * u_hat + sxz * w_hat + kappa * dTdx

    # z faces: (nz+1, nx)
    ui, uj = u[:-1, 1:-1], u[1:, 1:-1]
    wi, wj = w[:-1, 1:-1], w[1:, 1:-1]
    u_hat = 0.5 * (ui + uj)
    w_hat = 0.5 * (wi + wj)
    dudz = (uj - ui) / dz
    dwdz = (wj - wi) / dz
    dTdz = (T[1:, 1:-1] - T[:-1, 1:-1]) / dz
    dudx = 0.5 * (dudx_c[:-1, :] + dudx_c[1:, :])
    dwdx = 0.5 * (dwdx_c[:-1, :] + dwdx_c[1:, :])
    div = dudx + dwdz
    szx = mu * (dudz + dwdx)
    szz = mu * (2.0 * dwdz - 2.0 / 3.0 * div)
    # rigid lid: zero normal viscous traction at the interface face
    if bcs.bottom.kind is BoundaryKind.RIGID_LID_INTERFACE:
        szz[0, :] = 0.0
    if bcs.top.kind is BoundaryKind.RIGID_LID_INTERFACE:
        szz[-1, :] = 0.0
    gz = np.zeros((grid.nz + 1, grid.nx, NCOMP))
    gz[..., RHOU] = szx
    gz[..., RHOW] = szz
    gz[..., RHOE] = szx * u_hat + szz * w_hat + kappa * dTdz

    return ((fx[:, 1:] - fx[:, :-1]) / dx + (gz[1:] - gz[:-1]) / dz)


def rhs_from_extended(ext, grid, params, bcs, terms: RhsTerms = ALL_TERMS):
    """Assemble the RHS from an already ghost-extended conserved array."""
    rhs = np.zeros((grid.nz, grid.nx, NCOMP))
    if terms.inviscid_x:
        fx = inviscid_fluxes(ext, grid, params, bcs, "x")
        rhs -= (fx[:, 1:] - fx[:, :-1]) / grid.dx
    if terms.inviscid_z:
        gz = inviscid_fluxes(ext, grid, params, bcs, "z",
                             hevi_vertical=terms.hevi_vertical)
        rhs -= (gz[1:] - gz[:-1]) / grid.dz
    if terms.viscous and params.mu_tilde != 0.0:
        rhs += viscous_rhs_from_extended(ext, grid, params, bcs)
    return rhs


def assemble_rhs(field: ConservedField, bcs: BoundaryConditions,
                 exchange: Optional[InterfaceExchange] = None,
                 terms: RhsTerms = ALL_TERMS):
    """Semi-discrete RHS dq/dt = R(q) for one subdomain, shape (nz, nx, 4)."""
    check_admissible(field)
    ext = fill_ghosts(field, bcs, exchange)
    return rhs_from_extended(ext, field.grid, field.params, bcs, terms)


def global_mass_rate(rhs, grid: StructuredGrid2D) -> float:
    """Measure-weighted sum of the mass component of an RHS field."""
    return float(np.sum(rhs[..., RHO]) * grid.cell_measure)
