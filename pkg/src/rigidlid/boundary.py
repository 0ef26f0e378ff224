"""Ghost-cell closures and the rigid-lid interface exchange.

The interface transmits tangential stress and heat only: with first-layer
cell values (u_m, T_m) on each side, the bulk fluxes are

    sigma_xz = b_u (u_2 - u_1),      pi_z = -b_T (T_2 - T_1),

with the linear bulk coefficients

    b_u = 2 mu_1 mu_2 / (dz_2 mu_1 + dz_1 mu_2),
    b_T = 2 kap_1 kap_2 / (dz_2 kap_1 + dz_1 kap_2),

obtained from two-sided finite differences over the half-cell distances.
Each side then estimates isothermal moving-wall states

    lower:  u_w = u_1 + sigma_xz dz_1 / (2 mu_1),  T_w = T_1 - pi_z dz_1 / (2 kap_1),
    upper:  u_w = u_2 - sigma_xz dz_2 / (2 mu_2),  T_w = T_2 + pi_z dz_2 / (2 kap_2),

and applies the same single-ghost mirror closure as a solid isothermal
moving wall: the ghost state reflects the interior state through the
prescribed face values (face u = u_w, face w = 0, face T = T_w) with the
ghost density chosen so the ghost pressure equals the interior pressure.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .state import (
    NCOMP, RHO, RHOU, RHOW, RHOE,
    ConservedField, FluidParams, conserved_from_primitive, primitive_from_conserved,
)


class BoundaryKind(Enum):
    PERIODIC = "periodic"
    ISOTHERMAL_MOVING_WALL = "isothermal-moving-wall"
    ADIABATIC_NO_SLIP = "adiabatic-no-slip"
    RIGID_LID_INTERFACE = "rigid-lid-interface"


@dataclass(frozen=True)
class BoundarySpec:
    """One side's closure. wall_u is the tangential wall speed; wall_T the
    wall temperature (isothermal kinds only)."""

    kind: BoundaryKind
    wall_u: float = 0.0
    wall_T: Optional[float] = None

    def __post_init__(self):
        if self.kind is BoundaryKind.ISOTHERMAL_MOVING_WALL and self.wall_T is None:
            raise ValueError("isothermal wall requires wall_T")
        if self.kind is not BoundaryKind.ISOTHERMAL_MOVING_WALL and self.wall_T is not None:
            raise ValueError(f"wall_T is meaningless for kind {self.kind.value}")


def periodic() -> BoundarySpec:
    return BoundarySpec(BoundaryKind.PERIODIC)


def isothermal_wall(wall_u: float, wall_T: float) -> BoundarySpec:
    return BoundarySpec(BoundaryKind.ISOTHERMAL_MOVING_WALL, wall_u=wall_u, wall_T=wall_T)


def adiabatic_wall() -> BoundarySpec:
    return BoundarySpec(BoundaryKind.ADIABATIC_NO_SLIP)


def interface() -> BoundarySpec:
    return BoundarySpec(BoundaryKind.RIGID_LID_INTERFACE)


@dataclass(frozen=True)
class BoundaryConditions:
    """Closures for the four sides of one subdomain."""

    left: BoundarySpec
    right: BoundarySpec
    bottom: BoundarySpec
    top: BoundarySpec

    def __post_init__(self):
        for a, b, pair in (
            (self.left, self.right, "left/right"),
            (self.bottom, self.top, "bottom/top"),
        ):
            if (a.kind is BoundaryKind.PERIODIC) != (b.kind is BoundaryKind.PERIODIC):
                raise ValueError(f"periodic closure must pair on {pair}")
        for side in (self.left, self.right):
            if side.kind is BoundaryKind.RIGID_LID_INTERFACE:
                raise ValueError("rigid-lid interface must be horizontal (bottom/top)")

    @property
    def periodic_x(self) -> bool:
        return self.left.kind is BoundaryKind.PERIODIC

    @property
    def periodic_z(self) -> bool:
        return self.bottom.kind is BoundaryKind.PERIODIC

    @property
    def has_interface(self) -> bool:
        return BoundaryKind.RIGID_LID_INTERFACE in (self.bottom.kind, self.top.kind)


@dataclass(frozen=True)
class BulkCoefficients:
    b_u: float
    b_T: float

    def __post_init__(self):
        if not (self.b_u > 0.0 and self.b_T > 0.0):
            raise ValueError("bulk coefficients must be positive")


def bulk_coefficients(mu1, mu2, kappa1, kappa2, dz1, dz2) -> BulkCoefficients:
    """Linear bulk coefficients from the two-sided FD flux matching."""
    for name, v in (("mu1", mu1), ("mu2", mu2), ("kappa1", kappa1),
                    ("kappa2", kappa2), ("dz1", dz1), ("dz2", dz2)):
        if not v > 0.0:
            raise ValueError(f"{name} must be positive, got {v}")
    return BulkCoefficients(
        b_u=2.0 * mu1 * mu2 / (dz2 * mu1 + dz1 * mu2),
        b_T=2.0 * kappa1 * kappa2 / (dz2 * kappa1 + dz1 * kappa2),
    )


def interface_fluxes(u1, T1, u2, T2, coeffs: BulkCoefficients):
    """Bulk fluxes (sigma_xz, pi_z) from first-layer values of both sides."""
    sigma_xz = coeffs.b_u * (np.asarray(u2) - np.asarray(u1))
    pi_z = -coeffs.b_T * (np.asarray(T2) - np.asarray(T1))
    return sigma_xz, pi_z


def interface_wall_states(u, T, sigma_xz, pi_z, dz, mu, kappa, side):
    """Per-side wall state implied by the interface fluxes.

    side = 1 is the lower domain (interface above), side = 2 the upper.
    """
    if not (mu > 0.0 and kappa > 0.0 and dz > 0.0):
        raise ValueError("mu, kappa, dz must be positive")
    if side == 1:
        wall_u = u + sigma_xz * dz / (2.0 * mu)
        wall_T = T - pi_z * dz / (2.0 * kappa)
    elif side == 2:
        wall_u = u - sigma_xz * dz / (2.0 * mu)
        wall_T = T + pi_z * dz / (2.0 * kappa)
    else:
        raise ValueError(f"side must be 1 or 2, got {side}")
    return wall_u, wall_T


@dataclass(frozen=True)
class InterfaceExchange:
    """Per-column interface fluxes and derived wall states for both sides."""

    sigma_xz: np.ndarray
    pi_z: np.ndarray
    wall_u_1: np.ndarray
    wall_T_1: np.ndarray
    wall_u_2: np.ndarray
    wall_T_2: np.ndarray

    def wall_state(self, side):
        if side == 1:
            return self.wall_u_1, self.wall_T_1
        if side == 2:
            return self.wall_u_2, self.wall_T_2
        raise ValueError(f"side must be 1 or 2, got {side}")


@dataclass(frozen=True)
class RigidLidInterface:
    """Geometry and transport coefficients of the coupling interface."""

    mu1: float
    mu2: float
    kappa1: float
    kappa2: float
    dz1: float
    dz2: float

    @property
    def coefficients(self) -> BulkCoefficients:
        return bulk_coefficients(self.mu1, self.mu2, self.kappa1, self.kappa2,
                                 self.dz1, self.dz2)

    def exchange(self, u1, T1, u2, T2) -> InterfaceExchange:
        """Shared fluxes and both sides' wall states from first-layer values."""
        coeffs = self.coefficients
        sigma_xz, pi_z = interface_fluxes(u1, T1, u2, T2, coeffs)
        wall_u_1, wall_T_1 = interface_wall_states(
            u1, T1, sigma_xz, pi_z, self.dz1, self.mu1, self.kappa1, side=1)
        wall_u_2, wall_T_2 = interface_wall_states(
            u2, T2, sigma_xz, pi_z, self.dz2, self.mu2, self.kappa2, side=2)
        return InterfaceExchange(
            sigma_xz=np.asarray(sigma_xz, dtype=float),
            pi_z=np.asarray(pi_z, dtype=float),
            wall_u_1=np.asarray(wall_u_1, dtype=float),
            wall_T_1=np.asarray(wall_T_1, dtype=float),
            wall_u_2=np.asarray(wall_u_2, dtype=float),
            wall_T_2=np.asarray(wall_T_2, dtype=float),
        )


def interface_first_layer(field: ConservedField, side):
    """First-layer (u, T) of the given side: top row for side 1, bottom for 2."""
    row = -1 if side == 1 else 0
    prim = primitive_from_conserved(field.data[row, :, :], field.params)
    return prim.u, prim.T


def _mirror_wall_row(q_row, params, wall_u, wall_T, tangential: str):
    """Ghost row reflecting interior q_row through prescribed face values.

    tangential names the velocity component parallel to the wall ("u" for
    horizontal walls, "w" for vertical walls); the other component mirrors
    to enforce zero normal flow. wall_T = None mirrors adiabatically.
    """
    prim = primitive_from_conserved(q_row, params)
    if tangential == "u":
        u_g = 2.0 * wall_u - prim.u
        w_g = -prim.w
    else:
        u_g = -prim.u
        w_g = 2.0 * wall_u - prim.w
    T_g = prim.T if wall_T is None else 2.0 * np.asarray(wall_T) - prim.T
    if np.any(T_g <= 0.0):
        raise ValueError("wall mirror produced nonpositive ghost temperature")
    rho_g = params.gamma * prim.p / T_g  # ghost pressure equals interior pressure
    return conserved_from_primitive((rho_g, u_g, w_g, prim.p), params)


def fill_ghosts(field: ConservedField, bcs: BoundaryConditions,
                exchange: Optional[InterfaceExchange] = None) -> np.ndarray:
    """Ghost-extended conserved array of shape (nz+2, nx+2, 4).

    z-sides are filled first from interior rows, then x-sides from the
    already extended rows so that corner ghosts are consistent for the
    tangential-gradient stencils.
    """
    nz, nx = field.grid.nz, field.grid.nx
    params = field.params
    ext = np.empty((nz + 2, nx + 2, NCOMP))
    ext[1:-1, 1:-1, :] = field.data

    for side_name, row_ghost, row_int, row_wrap in (
        ("bottom", 0, 1, nz), ("top", nz + 1, nz, 1),
    ):
        spec = getattr(bcs, side_name)
        if spec.kind is BoundaryKind.PERIODIC:
            ext[row_ghost, 1:-1, :] = ext[row_wrap, 1:-1, :]
        elif spec.kind is BoundaryKind.RIGID_LID_INTERFACE:
            if exchange is None:
                raise ValueError(f"{side_name} is a rigid-lid interface but no "
                                 "exchange data was supplied")
            side = 1 if side_name == "top" else 2
            wall_u, wall_T = exchange.wall_state(side)
            ext[row_ghost, 1:-1, :] = _mirror_wall_row(
                ext[row_int, 1:-1, :], params, wall_u, wall_T, tangential="u")
        elif spec.kind is BoundaryKind.ISOTHERMAL_MOVING_WALL:
            ext[row_ghost, 1:-1, :] = _mirror_wall_row(
                ext[row_int, 1:-1, :], params, spec.wall_u, spec.wall_T, tangential="u")
        else:  # adiabatic no-slip
            ext[row_ghost, 1:-1, :] = _mirror_wall_row(
                ext[row_int, 1:-1, :], params, spec.wall_u, None, tangential="u")

    for side_name, col_ghost, col_int, col_wrap in (
        ("left", 0, 1, nx), ("right", nx + 1, nx, 1),
    ):
        spec = getattr(bcs, side_name)
        if spec.kind is BoundaryKind.PERIODIC:
            ext[:, col_ghost, :] = ext[:, col_wrap, :]
        elif spec.kind is BoundaryKind.ISOTHERMAL_MOVING_WALL:
            ext[:, col_ghost, :] = _mirror_wall_row(
                ext[:, col_int, :], params, spec.wall_u, spec.wall_T, tangential="w")
        else:  # adiabatic no-slip
            ext[:, col_ghost, :] = _mirror_wall_row(
                ext[:, col_int, :], params, spec.wall_u, None, tangential="w")

    return ext
