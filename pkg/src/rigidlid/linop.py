"""Matrix-free linearized flux operators and the Krylov stage solves.

Three operator kinds approximate the Jacobian action of the stiff
subdomain's RHS about a reference state q_ref:

* FULL     - linearized inviscid + viscous flux divergence,
* INVISCID - linearized inviscid part only,
* VERTICAL - linearized inviscid flux in z only (the HEVI operator, which
  couples cells within each vertical column and nothing else).

The centred half of the Roe flux is linearized analytically through cached
face Jacobians (reconstruction is linear, so the perturbation face states
are exact); the nonsmooth |A| dissipation, the ghost-cell closure, and the
viscous terms are differentiated by one-sided finite differences with
eps = 1e-8. Interface exchange data is frozen: the operator never varies
the bulk fluxes, only the reflection of the interior state in the ghosts.

All kinds linearize the vertical fluxes in the column-local convention
(central z slope, see residual.OPERATOR_*_TERMS): the cross-column part of
the production scheme's least-squares z slope is left to the explicitly
treated remainder N = R - L, which keeps the vertical operator exactly
column-block-diagonal and the VERTICAL/INVISCID nesting exact.

Stage systems (I - alpha L) x = b are solved by restarted GMRES without
preconditioning. The VERTICAL operator decouples into independent
tridiagonal-block column systems, solved by a batched GMRES that performs
one vectorized operator application per Krylov iteration for all columns
while keeping per-column Arnoldi data, in fixed column order.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator as ScipyLinearOperator
from scipy.sparse.linalg import gmres as scipy_gmres

from .boundary import BoundaryConditions, InterfaceExchange, fill_ghosts
from .errors import SolverError
from .grid import StructuredGrid2D
from .numflux import flux_jacobian, pressure_gradient, roe_dissipation
from .residual import conserved_face_states, viscous_rhs_from_extended
from .state import NCOMP, RHOU, RHOW, ConservedField

FD_EPS = 1e-8


class LinearOperatorKind(Enum):
    FULL = "L"
    INVISCID = "LI"
    VERTICAL = "Lz"


def operator_kind(label: str) -> LinearOperatorKind:
    table = {"l": LinearOperatorKind.FULL,
             "li": LinearOperatorKind.INVISCID,
             "lz": LinearOperatorKind.VERTICAL}
    key = label.lower().replace("^", "")
    if key not in table:
        raise ValueError(f"unknown linear operator {label!r}; use L, LI or Lz")
    return table[key]


@dataclass
class SolveStats:
    iterations: int
    residual: float


class LinearizedOperator:
    """Action q -> L(q_ref) q realized as described in the module docstring."""

    def __init__(self, kind: LinearOperatorKind, reference: ConservedField,
                 bcs: BoundaryConditions,
                 exchange: Optional[InterfaceExchange] = None,
                 eps: float = FD_EPS):
        self.kind = kind
        self.reference = reference
        self.grid = reference.grid
        self.params = reference.params
        self.bcs = bcs
        self.exchange = exchange
        self.eps = eps
        self.directions = ("z",) if kind is LinearOperatorKind.VERTICAL else ("x", "z")
        self._ext0 = fill_ghosts(reference, bcs, exchange)
        gamma = self.params.gamma
        self._faces = {}
        for d in self.directions:
            # column-local central slope in z (HEVI convention); the omitted
            # cross-column slope terms stay in the explicit remainder
            qL0, qR0 = conserved_face_states(self._ext0, self.grid, bcs, d,
                                             hevi_vertical=True)
            cache = {
                "qL0": qL0, "qR0": qR0,
                "AL": flux_jacobian(qL0, gamma, d),
                "AR": flux_jacobian(qR0, gamma, d),
                "D0": roe_dissipation(qL0, qR0, gamma, d),
            }
            periodic = bcs.periodic_x if d == "x" else bcs.periodic_z
            if not periodic:
                # boundary faces carry the pressure-only wall flux; cache the
                # analytic dp/dq rows of the interior-side face states
                if d == "x":
                    cache["dp_lo"] = pressure_gradient(qR0[:, 0], gamma)
                    cache["dp_hi"] = pressure_gradient(qL0[:, -1], gamma)
                else:
                    cache["dp_lo"] = pressure_gradient(qR0[0], gamma)
                    cache["dp_hi"] = pressure_gradient(qL0[-1], gamma)
            self._faces[d] = cache
        self._viscous = (kind is LinearOperatorKind.FULL
                         and self.params.mu_tilde != 0.0)
        if self._viscous:
            self._visc0 = viscous_rhs_from_extended(
                self._ext0, self.grid, self.params, bcs)

    def apply(self, v) -> np.ndarray:
        """L v for a field-shaped perturbation v."""
        grid, params, bcs = self.grid, self.params, self.bcs
        gamma = params.gamma
        eps = self.eps
        perturbed = ConservedField(grid, params, self.reference.data + eps * v)
        ext1 = fill_ghosts(perturbed, bcs, self.exchange)
        out = np.zeros((grid.nz, grid.nx, NCOMP))
        for d in self.directions:
            cache = self._faces[d]
            qL1, qR1 = conserved_face_states(ext1, grid, bcs, d,
                                             hevi_vertical=True)
            dqL = (qL1 - cache["qL0"]) / eps
            dqR = (qR1 - cache["qR0"]) / eps
            centred = 0.5 * (
                np.einsum("...ij,...j->...i", cache["AL"], dqL)
                + np.einsum("...ij,...j->...i", cache["AR"], dqR))
            ddiss = (roe_dissipation(qL1, qR1, gamma, d) - cache["D0"]) / eps
            dflux = centred - 0.5 * ddiss
            periodic = bcs.periodic_x if d == "x" else bcs.periodic_z
            if not periodic:
                comp = RHOU if d == "x" else RHOW
                if d == "x":
                    dflux[:, 0] = 0.0
                    dflux[:, 0, comp] = np.einsum(
                        "...j,...j->...", cache["dp_lo"], dqR[:, 0])
                    dflux[:, -1] = 0.0
                    dflux[:, -1, comp] = np.einsum(
                        "...j,...j->...", cache["dp_hi"], dqL[:, -1])
                else:
                    dflux[0] = 0.0
                    dflux[0, :, comp] = np.einsum(
                        "...j,...j->...", cache["dp_lo"], dqR[0])
                    dflux[-1] = 0.0
                    dflux[-1, :, comp] = np.einsum(
                        "...j,...j->...", cache["dp_hi"], dqL[-1])
            if d == "x":
                out -= (dflux[:, 1:] - dflux[:, :-1]) / grid.dx
            else:
                out -= (dflux[1:] - dflux[:-1]) / grid.dz
        if self._viscous:
            visc1 = viscous_rhs_from_extended(ext1, grid, params, bcs)
            out += (visc1 - self._visc0) / eps
        return out


@dataclass
class StageSystem:
    """One implicit stage system (I - alpha L) x = rhs."""

    alpha: float
    rhs: np.ndarray
    tolerance: float
    max_iterations: int = 500
    restart: int = 30

    def __post_init__(self):
        if self.alpha < 0.0:
            raise ValueError("alpha must be nonnegative")
        if not 0.0 < self.tolerance < 1.0:
            raise ValueError("tolerance must lie in (0, 1)")


def stage_solve(op: LinearizedOperator, system: StageSystem):
    """Solve (I - alpha L) x = rhs to the relative tolerance.

    Returns (solution, SolveStats). alpha = 0 short-circuits to x = rhs.
    VERTICAL operators are solved column by column (batched); the other
    kinds use a single global GMRES.
    """
    if system.alpha == 0.0:
        return system.rhs.copy(), SolveStats(0, 0.0)
    bnorm = float(np.linalg.norm(system.rhs))
    if bnorm == 0.0:
        return np.zeros_like(system.rhs), SolveStats(0, 0.0)
    if op.kind is LinearOperatorKind.VERTICAL:
        return _solve_columns(op, system)
    return _solve_global(op, system)


def _solve_global(op, system):
    # the FD realization of the operator carries an absolute noise floor of
    # order eps * ||R(q_ref)||, so the system is solved for the normalized
    # right-hand side and rescaled afterwards
    grid = op.grid
    shape = (grid.nz, grid.nx, NCOMP)
    n = int(np.prod(shape))
    alpha = system.alpha

    def matvec(xflat):
        x = xflat.reshape(shape)
        return (x - alpha * op.apply(x)).ravel()

    scale = float(np.linalg.norm(system.rhs))
    b = system.rhs.ravel() / scale
    iters = [0]

    def count(_):
        iters[0] += 1

    outer = max(1, -(-system.max_iterations // system.restart))
    x, info = scipy_gmres(
        ScipyLinearOperator((n, n), matvec=matvec), b, x0=b.copy(),
        rtol=system.tolerance, atol=0.0, restart=system.restart,
        maxiter=outer, callback=count, callback_type="pr_norm")
    residual = float(np.linalg.norm(b - matvec(x)) / np.linalg.norm(b))
    if info != 0 and residual > system.tolerance:
        raise SolverError(
            f"global GMRES failed after {iters[0]} iterations "
            f"(relative residual {residual:.3e})",
            residual=residual, iterations=iters[0])
    return (scale * x).reshape(shape), SolveStats(iters[0], residual)


def _solve_columns(op, system):
    """Batched restarted GMRES over the independent vertical columns."""
    grid = op.grid
    nz, nx = grid.nz, grid.nx
    n = nz * NCOMP
    alpha = system.alpha
    tol = system.tolerance

    def to_cols(x):
        return np.ascontiguousarray(x.transpose(1, 0, 2)).reshape(nx, n)

    def from_cols(xc):
        return np.ascontiguousarray(xc.reshape(nx, nz, NCOMP).transpose(1, 0, 2))

    def matvec(xc):
        x = from_cols(xc)
        return to_cols(x - alpha * op.apply(x))

    # normalize per column (exact for this column-block-diagonal operator)
    # to keep the FD noise floor of the operator away from small columns
    b_raw = to_cols(system.rhs)
    bnorm = np.linalg.norm(b_raw, axis=1)
    bscale = np.where(bnorm > 0.0, bnorm, 1.0)
    b = b_raw / bscale[:, None]
    x = b.copy()
    total = 0
    while True:
        r = b - matvec(x)
        res = np.linalg.norm(r, axis=1)
        worst = float(res.max())
        if worst <= tol:
            return from_cols(x * bscale[:, None]), SolveStats(total, worst)
        if total >= system.max_iterations:
            raise SolverError(
                f"column GMRES failed after {total} iterations "
                f"(worst relative residual {worst:.3e})",
                residual=worst, iterations=total)
        m = min(system.restart, system.max_iterations - total)
        V = np.zeros((m + 1, nx, n))
        H = np.zeros((nx, m + 1, m))
        cs = np.zeros((nx, m))
        sn = np.zeros((nx, m))
        g = np.zeros((nx, m + 1))
        beta = np.linalg.norm(r, axis=1)
        g[:, 0] = beta
        V[0] = r / np.where(beta > 0.0, beta, 1.0)[:, None]
        j_used = 0
        for j in range(m):
            w = matvec(V[j])
            for k in range(j + 1):
                h = np.einsum("cn,cn->c", V[k], w)
                H[:, k, j] = h
                w -= h[:, None] * V[k]
            hnew = np.linalg.norm(w, axis=1)
            H[:, j + 1, j] = hnew
            V[j + 1] = w / np.where(hnew > 0.0, hnew, 1.0)[:, None]
            for k in range(j):
                t = cs[:, k] * H[:, k, j] + sn[:, k] * H[:, k + 1, j]
                H[:, k + 1, j] = -sn[:, k] * H[:, k, j] + cs[:, k] * H[:, k + 1, j]
                H[:, k, j] = t
            denom = np.hypot(H[:, j, j], H[:, j + 1, j])
            safe = np.where(denom > 0.0, denom, 1.0)
            cs[:, j] = np.where(denom > 0.0, H[:, j, j] / safe, 1.0)
            sn[:, j] = np.where(denom > 0.0, H[:, j + 1, j] / safe, 0.0)
            H[:, j, j] = denom
            H[:, j + 1, j] = 0.0
            g[:, j + 1] = -sn[:, j] * g[:, j]
            g[:, j] = cs[:, j] * g[:, j]
            total += 1
            j_used = j + 1
            if np.all(np.abs(g[:, j + 1]) <= tol):
                break
        y = np.zeros((nx, j_used))
        for k in reversed(range(j_used)):
            tail = np.einsum("cj,cj->c", H[:, k, k + 1:j_used], y[:, k + 1:])
            diag = H[:, k, k]
            y[:, k] = np.where(diag != 0.0, (g[:, k] - tail) / np.where(diag != 0.0, diag, 1.0), 0.0)
        x = x + np.einsum("jcn,cj->cn", V[:j_used], y)
