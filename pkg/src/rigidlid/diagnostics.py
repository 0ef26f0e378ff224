"""Error norms, observed convergence orders, conservation and Courant audits.

The error norm is the cell-measure-weighted L2 norm

    || q - q_r || = ( sum_cells |K| (q - q_r)^2 )^(1/2),

summed over both subdomains for coupled states; the momentum entry
combines the two components as one vector norm. The Courant number is
Cr = max_cells (a + |u|) dt / min(dx, dz) per domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .grid import StructuredGrid2D, build_grid
from .state import RHO, RHOU, RHOW, RHOE, ConservedField, sound_speed
from .timeint import CoupledState, SingleState


@dataclass(frozen=True)
class ErrorReport:
    """Per-variable L2 errors of a state against a reference."""

    rho: float
    momentum: float
    energy: float

    def as_tuple(self):
        return (self.rho, self.momentum, self.energy)


def _fields_of(state):
    if isinstance(state, CoupledState):
        return (state.q1, state.q2)
    if isinstance(state, SingleState):
        return (state.q,)
    if isinstance(state, ConservedField):
        return (state,)
    return tuple(state)


def l2_error(state, reference) -> ErrorReport:
    """Cell-measure-weighted L2 errors (rho, momentum, energy).

    Both arguments may be ConservedField, SingleState, CoupledState or
    sequences of fields; grids must match field by field.
    """
    fields = _fields_of(state)
    refs = _fields_of(reference)
    if len(fields) != len(refs):
        raise ValueError("state and reference have different domain counts")
    acc = np.zeros(3)
    for f, r in zip(fields, refs):
        if f.grid != r.grid:
            raise ValueError("grids differ between state and reference")
        diff = f.data - r.data
        measure = f.grid.cell_measure
        acc[0] += measure * np.sum(diff[..., RHO] ** 2)
        acc[1] += measure * np.sum(diff[..., RHOU] ** 2 + diff[..., RHOW] ** 2)
        acc[2] += measure * np.sum(diff[..., RHOE] ** 2)
    return ErrorReport(*np.sqrt(acc))


def observed_order(errors: Sequence[float], ratios=None):
    """Observed orders log(e_{k-1}/e_k) / log(ratio_k).

    ratios defaults to 2 for every refinement. Zero errors yield NaN
    (undefined order) rather than raising.
    """
    errors = np.asarray(errors, dtype=float)
    if errors.size < 2:
        raise ValueError("need at least two errors")
    if np.any(errors < 0.0):
        raise ValueError("errors must be nonnegative")
    if ratios is None:
        ratios = np.full(errors.size - 1, 2.0)
    ratios = np.asarray(ratios, dtype=float)
    if ratios.size != errors.size - 1:
        raise ValueError("need one ratio per refinement")
    with np.errstate(divide="ignore", invalid="ignore"):
        orders = np.log(errors[:-1] / errors[1:]) / np.log(ratios)
    orders[(errors[:-1] == 0.0) | (errors[1:] == 0.0)] = np.nan
    return orders


def masses(state):
    """Per-domain masses (mass_2 = 0 for single-domain states)."""
    fields = _fields_of(state)
    vals = [float(np.sum(f.data[..., RHO]) * f.grid.cell_measure) for f in fields]
    while len(vals) < 2:
        vals.append(0.0)
    return vals[0], vals[1]


def total_energy(state):
    return float(sum(np.sum(f.data[..., RHOE]) * f.grid.cell_measure
                     for f in _fields_of(state)))


def conservation_sample(state):
    """(mass_1, mass_2, total energy), summed in fixed ascending cell order."""
    m1, m2 = masses(state)
    return m1, m2, total_energy(state)


def _domain_courant(field: ConservedField, dt: float) -> float:
    prim = field.primitives()
    a = sound_speed(prim.rho, prim.p, field.params.gamma)
    speed = float(np.max(a + np.sqrt(prim.u ** 2 + prim.w ** 2)))
    return speed * dt / min(field.grid.dx, field.grid.dz)


def courant_numbers(state, dt1: float, dt2: Optional[float] = None):
    """(Cr_1, Cr_2) with dt2 defaulting to dt1 (Cr_2 = 0 for single domain)."""
    if dt2 is None:
        dt2 = dt1
    fields = _fields_of(state)
    if dt1 == 0.0 and dt2 == 0.0:
        return 0.0, 0.0
    cr1 = _domain_courant(fields[0], dt1)
    cr2 = _domain_courant(fields[1], dt2) if len(fields) > 1 else 0.0
    return cr1, cr2


def coarsen_field(field: ConservedField, factor: int) -> ConservedField:
    """Block-mean restriction onto a grid coarsened by an integer factor.

    Used to compare a fine nested reference solution with coarse-grid runs:
    the mean over each factor x factor block is the exact cell average of
    the fine solution on the coarse cell.
    """
    g = field.grid
    if factor < 1 or g.nx % factor or g.nz % factor:
        raise ValueError(f"grid {g.nx}x{g.nz} not divisible by factor {factor}")
    nx_c, nz_c = g.nx // factor, g.nz // factor
    data = field.data.reshape(nz_c, factor, nx_c, factor, 4).mean(axis=(1, 3))
    coarse = build_grid(nx_c, nz_c, (g.x0, g.x_max), (g.z0, g.z_max))
    return ConservedField(coarse, field.params, data)
