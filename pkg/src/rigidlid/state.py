"""Conservative/primitive state representations and the ideal-gas EOS.

All quantities are nondimensional. The reference scaling uses the
free-stream sound speed as velocity scale, so the EOS reads

    p = rho * T / gamma,        e = p / (rho * (gamma - 1)),

and the conserved vector per cell is q = (rho, rho*u, rho*w, rho*E) with
rho*E = rho*e + rho*(u^2 + w^2)/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import StateError
from .grid import StructuredGrid2D

# component indices of the conserved vector
RHO, RHOU, RHOW, RHOE = 0, 1, 2, 3
NCOMP = 4


@dataclass(frozen=True)
class FluidParams:
    """Nondimensional fluid parameters of one subdomain.

    mu_tilde is the nondimensional dynamic viscosity (mu*/Re_r); the heat
    capacity is fixed by the sound-speed scaling, cp_tilde = 1/(gamma-1),
    and the conductivity is kappa_tilde = cp_tilde * mu_tilde / Pr.
    """

    gamma: float = 1.4
    Pr: float = 0.72
    mu_tilde: float = 0.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not self.Pr > 0.0:
            raise ValueError(f"Pr must be positive, got {self.Pr}")
        if self.mu_tilde < 0.0:
            raise ValueError(f"mu_tilde must be nonnegative, got {self.mu_tilde}")

    @property
    def cp_tilde(self) -> float:
        return 1.0 / (self.gamma - 1.0)

    @property
    def kappa_tilde(self) -> float:
        return self.cp_tilde * self.mu_tilde / self.Pr


class Primitive(NamedTuple):
    """Primitive state (arrays or scalars): density, velocities, p, T."""

    rho: np.ndarray
    u: np.ndarray
    w: np.ndarray
    p: np.ndarray
    T: np.ndarray


def pressure(q, gamma):
    """Pressure of conserved state(s) q with component axis last."""
    q = np.asarray(q)
    rho = q[..., RHO]
    kinetic = 0.5 * (q[..., RHOU] ** 2 + q[..., RHOW] ** 2) / rho
    return (gamma - 1.0) * (q[..., RHOE] - kinetic)


def primitive_from_conserved(q, params: FluidParams, check: bool = True) -> Primitive:
    """Convert conserved state(s) to primitives.

    Raises StateError on nonpositive density or pressure when check=True;
    nonphysical states are never clamped.
    """
    q = np.asarray(q, dtype=float)
    rho = q[..., RHO]
    if check and not np.all(rho > 0.0):
        raise StateError(f"nonpositive density: min rho = {np.min(rho)}")
    u = q[..., RHOU] / rho
    w = q[..., RHOW] / rho
    p = (params.gamma - 1.0) * (q[..., RHOE] - 0.5 * rho * (u * u + w * w))
    if check and not np.all(p > 0.0):
        raise StateError(f"nonpositive pressure: min p = {np.min(p)}")
    T = params.gamma * p / rho
    return Primitive(rho=rho, u=u, w=w, p=p, T=T)


def conserved_from_primitive(prim, params: FluidParams):
    """Exact algebraic inverse of primitive_from_conserved.

    Accepts a Primitive or any (rho, u, w, p[, T]) sequence; T is derived
    from the EOS and need not be supplied.
    """
    rho, u, w, p = (np.asarray(x, dtype=float) for x in tuple(prim)[:4])
    if not np.all(rho > 0.0):
        raise StateError(f"nonpositive density: min rho = {np.min(rho)}")
    if not np.all(p > 0.0):
        raise StateError(f"nonpositive pressure: min p = {np.min(p)}")
    q = np.empty(np.broadcast(rho, u, w, p).shape + (NCOMP,))
    q[..., RHO] = rho
    q[..., RHOU] = rho * u
    q[..., RHOW] = rho * w
    q[..., RHOE] = p / (params.gamma - 1.0) + 0.5 * rho * (u * u + w * w)
    return q


def sound_speed(rho, p, gamma):
    """Ideal-gas sound speed a = sqrt(gamma p / rho)."""
    rho = np.asarray(rho, dtype=float)
    p = np.asarray(p, dtype=float)
    if not np.all(rho > 0.0) or not np.all(p > 0.0):
        raise StateError("sound speed requires rho > 0 and p > 0")
    return np.sqrt(gamma * p / rho)


def total_enthalpy(q, gamma):
    """Total specific enthalpy H = E + p/rho of conserved state(s)."""
    q = np.asarray(q)
    rho = q[..., RHO]
    return (q[..., RHOE] + pressure(q, gamma)) / rho


@dataclass
class ConservedField:
    """Cell-averaged conserved variables on one subdomain.

    data is shaped (nz, nx, 4) with data[j-1, i-1] the state of cell (i, j).
    """

    grid: StructuredGrid2D
    params: FluidParams
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        expected = (self.grid.nz, self.grid.nx, NCOMP)
        if self.data.shape != expected:
            raise ValueError(f"field data shape {self.data.shape} != {expected}")

    def copy(self) -> "ConservedField":
        return ConservedField(self.grid, self.params, self.data.copy())

    def with_data(self, data) -> "ConservedField":
        return ConservedField(self.grid, self.params, data)

    def primitives(self, check: bool = True) -> Primitive:
        return primitive_from_conserved(self.data, self.params, check=check)
