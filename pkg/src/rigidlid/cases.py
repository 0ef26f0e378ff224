"""Initial conditions, boundary setups and exact solutions for the test cases.

Five cases are provided. Two single-domain verification flows on the
periodic unit square:

* ``density-wave``: advected density profile with constant velocity and
  pressure; has an exact solution (pure advection, zero viscosity).
* ``taylor-green``: the viscous Taylor-Green vortex at Mach 0.1.

Three two-domain rigid-lid coupling flows on (-5,5) x (-5,0) | (0,5):

* ``two-vortices``: isentropic vortices superposed on uniform streams with
  temperature and velocity jumps across the interface.
* ``wind-driven``: lid-driven-cavity-like circulation forced through the
  interface by the moving upper wall.
* ``khi``: the wind-driven setup with a jet in the upper domain (rolling
  up through Kelvin-Helmholtz instability) and a vortex below.

All initial fields are point evaluations of the analytic formulas at cell
centers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .boundary import (
    BoundaryConditions, RigidLidInterface, adiabatic_wall, interface,
    isothermal_wall, periodic,
)
from .errors import ConfigError
from .grid import StructuredGrid2D, build_grid
from .state import ConservedField, FluidParams, conserved_from_primitive
from .timeint import (
    CoupledCnsSystem, CoupledState, SingleCnsSystem, SingleState,
)

CASE_NAMES = ("density-wave", "taylor-green", "two-vortices", "wind-driven", "khi")

TWO_DOMAIN_X = (-5.0, 5.0)
DOMAIN1_Z = (-5.0, 0.0)
DOMAIN2_Z = (0.0, 5.0)
UNIT_X = (0.0, 1.0)
UNIT_Z = (0.0, 1.0)

_DEFAULTS = {
    "density-wave": dict(rho_inf=1.0, u_inf=1.0, w_inf=1.0, p_inf=1.0,
                         gamma=1.4, Pr=0.72, mu_tilde=0.0),
    "taylor-green": dict(rho_inf=1.0, u_inf=0.1, gamma=1.4, Pr=0.72, re=100.0),
    "two-vortices": dict(u_inf1=0.05, u_inf2=0.1, T_inf1=1.1, T_inf2=1.0,
                         alpha=2.0, beta1=0.1, beta2=0.5,
                         xc1=0.0, zc1=-2.5, xc2=0.0, zc2=2.5,
                         gamma=1.4, Pr=0.72, mu_tilde=1.0 / 5000.0),
    "wind-driven": dict(rho_inf=1.0, T_inf1=1.1, T_inf2=1.0,
                        u_inf1=0.0, u_inf2=0.1,
                        wall_u_top=0.1, wall_T_top=0.9,
                        wall_u_bottom=0.0, wall_T_bottom=1.0,
                        gamma=1.4, Pr=0.72, mu_tilde=1.0 / 5000.0),
    "khi": dict(a=0.05, amplitude=0.01, sigma=0.2, s1=2.0, s2=3.0,
                xc=0.0, zc=-3.0, alpha=5.0, beta=0.5,
                wall_u_top=0.1, wall_T_top=0.9,
                wall_u_bottom=0.0, wall_T_bottom=1.0,
                gamma=1.4, Pr=0.72, mu_tilde=1.0 / 5000.0),
}


@dataclass(frozen=True)
class CaseSpec:
    name: str
    params: dict

    @property
    def coupled(self) -> bool:
        return self.name in ("two-vortices", "wind-driven", "khi")


def case_spec(name: str, **overrides) -> CaseSpec:
    if name not in _DEFAULTS:
        raise ConfigError(f"unknown case {name!r}; available: {', '.join(CASE_NAMES)}")
    params = dict(_DEFAULTS[name])
    for key, value in overrides.items():
        if key not in params:
            raise ConfigError(f"case {name!r} has no parameter {key!r}")
        params[key] = float(value)
    return CaseSpec(name=name, params=params)


def default_grids(spec: CaseSpec, resolution=None):
    """Grid(s) at the case's default extents.

    resolution: (nx, nz) for single-domain cases, (nx, nz1, nz2) for
    coupled ones; defaults to the desk-scale sizes.
    """
    if spec.coupled:
        nx, nz1, nz2 = resolution or (40, 40, 40)
        return (build_grid(nx, nz1, TWO_DOMAIN_X, DOMAIN1_Z),
                build_grid(nx, nz2, TWO_DOMAIN_X, DOMAIN2_Z))
    nx, nz = resolution or (20, 20)
    return (build_grid(nx, nz, UNIT_X, UNIT_Z),)


@dataclass
class CaseSetup:
    """Everything a driver needs: initial state, evaluation system, exact
    solution when available."""

    spec: CaseSpec
    state: object
    system: object
    exact: Optional[Callable] = None


def _field(grid, fluid, rho, u, w, p):
    shape = (grid.nz, grid.nx)
    data = conserved_from_primitive(
        (np.broadcast_to(rho, shape), np.broadcast_to(u, shape),
         np.broadcast_to(w, shape), np.broadcast_to(p, shape)), fluid)
    return ConservedField(grid, fluid, data)


def exact_density_wave(t: float, grid: StructuredGrid2D, spec: CaseSpec) -> ConservedField:
    """Advected profile rho = rho_inf + sin(2 pi x~) cos(2 pi z~)/2."""
    p = spec.params
    fluid = FluidParams(gamma=p["gamma"], Pr=p["Pr"], mu_tilde=p["mu_tilde"])
    X, Z = grid.meshgrid()
    xt = X - p["u_inf"] * t
    zt = Z - p["w_inf"] * t
    rho = p["rho_inf"] + 0.5 * np.sin(2 * np.pi * xt) * np.cos(2 * np.pi * zt)
    return _field(grid, fluid, rho, p["u_inf"], p["w_inf"], p["p_inf"])


def _taylor_green_field(grid, spec):
    p = spec.params
    gamma = p["gamma"]
    # reference velocity is the free-stream sound speed (= 1 for p = 1/gamma),
    # so mu_tilde = rho u_inf L / re in these units
    fluid = FluidParams(gamma=gamma, Pr=p["Pr"],
                        mu_tilde=p["rho_inf"] * p["u_inf"] / p["re"])
    X, Z = grid.meshgrid()
    u0 = p["u_inf"]
    u = u0 * np.cos(2 * np.pi * X) * np.sin(2 * np.pi * Z)
    w = -u0 * np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Z)
    press = (1.0 / gamma + p["rho_inf"] * u0 ** 2 / 4.0
             * (np.cos(4 * np.pi * X) + np.cos(4 * np.pi * Z)))
    return _field(grid, fluid, p["rho_inf"], u, w, press)


def _vortex(X, Z, xc, zc, alpha, beta, gamma):
    xt = X - xc
    zt = Z - zc
    r2 = xt * xt + zt * zt
    envelope = np.exp(0.5 * alpha * (1.0 - r2))
    rho = (1.0 - (gamma - 1.0) * beta ** 2 / (8.0 * alpha * gamma * np.pi ** 2)
           * np.exp(alpha * (1.0 - r2))) ** (1.0 / (gamma - 1.0))
    du = beta / (2.0 * np.pi) * zt * envelope
    dw = -beta / (2.0 * np.pi) * xt * envelope
    return rho, du, dw


def _two_vortices_fields(grids, spec):
    p = spec.params
    gamma = p["gamma"]
    fluid = FluidParams(gamma=gamma, Pr=p["Pr"], mu_tilde=p["mu_tilde"])
    fields = []
    for m, grid in enumerate(grids, start=1):
        X, Z = grid.meshgrid()
        rho, du, dw = _vortex(X, Z, p[f"xc{m}"], p[f"zc{m}"],
                              p["alpha"], p[f"beta{m}"], gamma)
        u = p[f"u_inf{m}"] + du
        press = p[f"T_inf{m}"] / gamma * rho ** gamma
        fields.append(_field(grid, fluid, rho, u, dw, press))
    return fields


def _wind_driven_fields(grids, spec):
    p = spec.params
    gamma = p["gamma"]
    fluid = FluidParams(gamma=gamma, Pr=p["Pr"], mu_tilde=p["mu_tilde"])
    fields = []
    for m, grid in enumerate(grids, start=1):
        press = p["rho_inf"] * p[f"T_inf{m}"] / gamma
        fields.append(_field(grid, fluid, p["rho_inf"], p[f"u_inf{m}"], 0.0, press))
    return fields


def _khi_fields(grids, spec):
    p = spec.params
    gamma = p["gamma"]
    fluid = FluidParams(gamma=gamma, Pr=p["Pr"], mu_tilde=p["mu_tilde"])
    g1, g2 = grids
    X1, Z1 = g1.meshgrid()
    rho1, du1, dw1 = _vortex(X1, Z1, p["xc"], p["zc"], p["alpha"], p["beta"], gamma)
    p1 = 1.1 / gamma * rho1 ** gamma
    f1 = _field(g1, fluid, rho1, du1, dw1, p1)
    X2, Z2 = g2.meshgrid()
    jet = (np.tanh((Z2 - p["s1"]) / p["a"]) - np.tanh((Z2 - p["s2"]) / p["a"]))
    rho2 = 1.0 + 0.5 * jet
    u2 = 0.1 + (jet - 1.0)
    w2 = p["amplitude"] * np.sin(2 * np.pi * X2) * (
        np.exp(-((Z2 - p["s1"]) / p["sigma"]) ** 2)
        + np.exp(-((Z2 - p["s2"]) / p["sigma"]) ** 2))
    f2 = _field(g2, fluid, rho2, u2, w2, 1.0 / gamma)
    return [f1, f2]


def _coupled_setup(spec, grids, fields, bcs1, bcs2):
    f1, f2 = fields
    iface = RigidLidInterface(
        mu1=f1.params.mu_tilde, mu2=f2.params.mu_tilde,
        kappa1=f1.params.kappa_tilde, kappa2=f2.params.kappa_tilde,
        dz1=f1.grid.dz, dz2=f2.grid.dz)
    system = CoupledCnsSystem(f1.grid, f1.params, bcs1,
                              f2.grid, f2.params, bcs2, iface)
    return CaseSetup(spec=spec, state=CoupledState(f1, f2, 0.0), system=system)


def init_case(spec: CaseSpec, grids) -> CaseSetup:
    """Build the initial state and evaluation system for a case.

    grids comes from default_grids or compatible build_grid calls: one grid
    for the single-domain cases, (lower, upper) for the coupled ones.
    """
    p = spec.params
    if spec.name == "density-wave":
        (grid,) = grids
        f = exact_density_wave(0.0, grid, spec)
        bcs = BoundaryConditions(periodic(), periodic(), periodic(), periodic())
        system = SingleCnsSystem(grid, f.params, bcs)
        return CaseSetup(spec=spec, state=SingleState(f, 0.0), system=system,
                         exact=lambda t, g=grid: exact_density_wave(t, g, spec))
    if spec.name == "taylor-green":
        (grid,) = grids
        f = _taylor_green_field(grid, spec)
        bcs = BoundaryConditions(periodic(), periodic(), periodic(), periodic())
        return CaseSetup(spec=spec, state=SingleState(f, 0.0),
                         system=SingleCnsSystem(grid, f.params, bcs))
    if spec.name == "two-vortices":
        fields = _two_vortices_fields(grids, spec)
        bcs1 = BoundaryConditions(periodic(), periodic(),
                                  isothermal_wall(p["u_inf1"], p["T_inf1"]),
                                  interface())
        bcs2 = BoundaryConditions(periodic(), periodic(), interface(),
                                  isothermal_wall(p["u_inf2"], p["T_inf2"]))
        return _coupled_setup(spec, grids, fields, bcs1, bcs2)
    if spec.name in ("wind-driven", "khi"):
        fields = (_wind_driven_fields(grids, spec) if spec.name == "wind-driven"
                  else _khi_fields(grids, spec))
        bcs1 = BoundaryConditions(adiabatic_wall(), adiabatic_wall(),
                                  isothermal_wall(p["wall_u_bottom"], p["wall_T_bottom"]),
                                  interface())
        bcs2 = BoundaryConditions(periodic(), periodic(), interface(),
                                  isothermal_wall(p["wall_u_top"], p["wall_T_top"]))
        return _coupled_setup(spec, grids, fields, bcs1, bcs2)
    raise ConfigError(f"unknown case {spec.name!r}")
