"""IMEX-RK tight and loose coupling drivers.

Tight coupling (TC) exchanges interface data at every stage: the upper
(atmosphere) domain is advanced explicitly, the lower (ocean) domain
implicitly, and both stage RHS evaluations share one freshly computed
bulk-flux exchange, which makes the interface fluxes continuous by
construction. The linearized variant splits the stiff RHS as
R1 = N + L(q_ref, .) and solves one linear stage system per stage; with
b = b_tilde the b-weighted update telescopes back to R1, so mass
conservation is independent of the operator and of the Krylov tolerance.

Loose coupling exchanges only at step boundaries. The ocean advances one
IMEX step of size dt with the atmosphere frozen at its step-start value;
the atmosphere then advances Ns explicit substeps of size dt/Ns, reading
the ocean state either frozen (concurrent, CC) or interpolated in time
through the scheme's dense output (sequential, SC).

Pure explicit tableaus route both domains through a monolithic RK step
with per-stage exchange, which is also the reference path for the
explicit-limit equivalence of the IMEX driver.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional

import numpy as np

from .boundary import BoundaryConditions, InterfaceExchange, RigidLidInterface
from .errors import RunAborted, SolverError
from .grid import StructuredGrid2D
from .linop import LinearizedOperator, StageSystem, operator_kind, stage_solve
from .residual import assemble_rhs
from .state import ConservedField, FluidParams, primitive_from_conserved
from .tableaus import IMEXTableau, tableau as get_tableau

MODES = ("TC", "CC", "SC")


@dataclass
class CouplingConfig:
    """Scheme, operator, coupling mode and solver settings for one run."""

    scheme: str = "ark2"
    operator: str = "Lz"
    mode: str = "TC"
    substeps: int = 1
    dt: float = 0.01
    krylov_tol: float = 1e-4
    krylov_restart: int = 30
    krylov_maxiter: int = 500
    stiff_treatment: str = "linearized"
    fixed_point_iterations: int = 4
    linearization_refresh: str = "stage"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")
        if self.mode == "TC" and self.substeps != 1:
            raise ValueError("tight coupling admits no substeps")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.stiff_treatment not in ("linearized", "nonlinear"):
            raise ValueError("stiff_treatment must be 'linearized' or 'nonlinear'")
        if self.linearization_refresh not in ("step", "stage"):
            raise ValueError("linearization_refresh must be 'step' or 'stage'")

    def label(self) -> str:
        """Naming convention, e.g. ARK2(Lz,SC2) or RK4."""
        name = self.scheme.upper()
        if name.startswith("RK"):
            return name
        mode = self.mode if self.mode == "TC" else f"{self.mode}{self.substeps}"
        return f"{name}({self.operator},{mode})"


@dataclass
class CoupledState:
    """States of both subdomains; q1 is the lower (implicit) domain."""

    q1: ConservedField
    q2: ConservedField
    time: float = 0.0

    def __post_init__(self):
        g1, g2 = self.q1.grid, self.q2.grid
        if g1.nx != g2.nx or abs(g1.x0 - g2.x0) > 1e-12 or abs(g1.dx - g2.dx) > 1e-12:
            raise ValueError("subdomain grids must conform at the interface")
        if abs(g1.z_max - g2.z0) > 1e-12:
            raise ValueError("domain 1 must sit directly below domain 2")

    def copy(self) -> "CoupledState":
        return CoupledState(self.q1.copy(), self.q2.copy(), self.time)


@dataclass
class SingleState:
    q: ConservedField
    time: float = 0.0

    def copy(self) -> "SingleState":
        return SingleState(self.q.copy(), self.time)


@dataclass
class StepStats:
    krylov_iterations: int = 0
    max_residual: float = 0.0
    solves: int = 0

    def absorb(self, stats):
        self.krylov_iterations += stats.iterations
        self.max_residual = max(self.max_residual, stats.residual)
        self.solves += 1


class CoupledCnsSystem:
    """Two-domain evaluation backend used by the coupling drivers."""

    def __init__(self, grid1: StructuredGrid2D, params1: FluidParams,
                 bcs1: BoundaryConditions, grid2: StructuredGrid2D,
                 params2: FluidParams, bcs2: BoundaryConditions,
                 iface: RigidLidInterface):
        self.grid1, self.params1, self.bcs1 = grid1, params1, bcs1
        self.grid2, self.params2, self.bcs2 = grid2, params2, bcs2
        self.iface = iface

    def field1(self, data) -> ConservedField:
        return ConservedField(self.grid1, self.params1, data)

    def field2(self, data) -> ConservedField:
        return ConservedField(self.grid2, self.params2, data)

    def exchange(self, q1_data, q2_data) -> InterfaceExchange:
        prim1 = primitive_from_conserved(q1_data[-1, :, :], self.params1)
        prim2 = primitive_from_conserved(q2_data[0, :, :], self.params2)
        return self.iface.exchange(prim1.u, prim1.T, prim2.u, prim2.T)

    def rhs1(self, q1_data, exch):
        return assemble_rhs(self.field1(q1_data), self.bcs1, exchange=exch)

    def rhs2(self, q2_data, exch):
        return assemble_rhs(self.field2(q2_data), self.bcs2, exchange=exch)

    def make_operator(self, ref_data, exch, config: CouplingConfig):
        return LinearizedOperator(operator_kind(config.operator),
                                  self.field1(ref_data), self.bcs1, exchange=exch)

    def solve(self, op, alpha, rhs, config: CouplingConfig, dt_scale=1.0):
        system = StageSystem(alpha=alpha, rhs=rhs, tolerance=config.krylov_tol,
                             max_iterations=config.krylov_maxiter,
                             restart=config.krylov_restart)
        return stage_solve(op, system)


class SingleCnsSystem:
    """Single-domain backend (verification cases): explicit only."""

    def __init__(self, grid, params, bcs):
        self.grid, self.params, self.bcs = grid, params, bcs

    def rhs(self, q_data):
        return assemble_rhs(ConservedField(self.grid, self.params, q_data), self.bcs)


def dense_output(qn, stage_rhs, tab: IMEXTableau, theta: float, dt: float):
    """Dense-output state qn + dt sum_i B*_i(theta) R_i for theta in [0, 1]."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    weights = tab.bstar_at(theta)
    out = np.array(qn, copy=True)
    for wi, ri in zip(weights, stage_rhs):
        if wi != 0.0:
            out += (dt * wi) * ri
    return out


def _explicit_accumulate(qn, coeffs, rhs_list, dt):
    out = np.array(qn, copy=True)
    for cij, rj in zip(coeffs, rhs_list):
        if cij != 0.0 and rj is not None:
            out += (dt * cij) * rj
    return out


def step_explicit(state: CoupledState, system, tab: IMEXTableau,
                  config: CouplingConfig, dt: float):
    """Monolithic explicit RK step with a two-way exchange at every stage."""
    s = tab.stages
    q1n, q2n = state.q1.data, state.q2.data
    R1: List = [None] * s
    R2: List = [None] * s
    for i in range(s):
        Q1 = _explicit_accumulate(q1n, tab.a[i, :i], R1[:i], dt)
        Q2 = _explicit_accumulate(q2n, tab.a[i, :i], R2[:i], dt)
        exch = system.exchange(Q1, Q2)
        R1[i] = system.rhs1(Q1, exch)
        R2[i] = system.rhs2(Q2, exch)
    q1_new = _explicit_accumulate(q1n, tab.b, R1, dt)
    q2_new = _explicit_accumulate(q2n, tab.b, R2, dt)
    new = CoupledState(system.field1(q1_new), system.field2(q2_new),
                       state.time + dt)
    return new, StepStats()


def _ocean_stage_arrays(s):
    return [None] * s, [None] * s, [None] * s


def step_tight(state: CoupledState, system, tab: IMEXTableau,
               config: CouplingConfig, dt: Optional[float] = None):
    """One tight-coupling step; dispatches on the tableau and treatment."""
    dt = config.dt if dt is None else dt
    if tab.is_explicit:
        return step_explicit(state, system, tab, config, dt)
    if config.stiff_treatment == "nonlinear":
        return _step_tight_nonlinear(state, system, tab, config, dt)
    s = tab.stages
    a, at = tab.a, tab.a_tilde
    q1n, q2n = state.q1.data, state.q2.data
    stats = StepStats()
    N, Lv, R2 = _ocean_stage_arrays(s)
    exch = system.exchange(q1n, q2n)
    op = None
    if config.linearization_refresh == "step":
        op = system.make_operator(q1n, exch, config)
    for i in range(s):
        alpha = dt * at[i, i]
        if i == 0:
            Q1, Q2 = q1n, q2n
            if op is None:
                op = system.make_operator(q1n, exch, config)
            solved_L = None
        else:
            Q2 = _explicit_accumulate(q2n, a[i, :i], R2[:i], dt)
            chk = np.array(q1n, copy=True)
            for j in range(i):
                if a[i, j] != 0.0:
                    chk += (dt * a[i, j]) * N[j]
                if at[i, j] != 0.0:
                    chk += (dt * at[i, j]) * Lv[j]
            if alpha == 0.0:
                Q1 = chk
                solved_L = None
            else:
                if config.linearization_refresh == "stage":
                    op = system.make_operator(chk, exch, config)
                # incremental form: (I - alpha L)(chk + d) = chk reduces to
                # (I - alpha L) d = alpha L chk, whose solve error scales
                # with dt instead of with the state norm
                l_chk = op.apply(chk)
                d, solve_stats = system.solve(op, alpha, alpha * l_chk, config)
                stats.absorb(solve_stats)
                Q1 = chk + d
                solved_L = d / alpha
        exch = system.exchange(Q1, Q2)
        R1i = system.rhs1(Q1, exch)
        R2[i] = system.rhs2(Q2, exch)
        Lv[i] = solved_L if solved_L is not None else op.apply(Q1)
        N[i] = R1i - Lv[i]
    q1_new = np.array(q1n, copy=True)
    for i in range(s):
        q1_new += dt * (tab.b[i] * N[i] + tab.b_tilde[i] * Lv[i])
    q2_new = _explicit_accumulate(q2n, tab.b, R2, dt)
    new = CoupledState(system.field1(q1_new), system.field2(q2_new),
                       state.time + dt)
    return new, stats


def _step_tight_nonlinear(state, system, tab, config, dt):
    """Stage-nonlinear variant: linearized solve plus fixed-point correction."""
    s = tab.stages
    a, at = tab.a, tab.a_tilde
    q1n, q2n = state.q1.data, state.q2.data
    stats = StepStats()
    R1: List = [None] * s
    R2: List = [None] * s
    exch = system.exchange(q1n, q2n)
    op = system.make_operator(q1n, exch, config)
    for i in range(s):
        alpha = dt * at[i, i]
        if i == 0:
            Q1, Q2 = q1n, q2n
        else:
            Q2 = _explicit_accumulate(q2n, a[i, :i], R2[:i], dt)
            chk = _explicit_accumulate(q1n, at[i, :i], R1[:i], dt)
            if alpha == 0.0:
                Q1 = chk
            else:
                if config.linearization_refresh == "stage":
                    op = system.make_operator(chk, exch, config)
                Q1 = chk
                norm = np.linalg.norm(chk)
                for _ in range(max(1, config.fixed_point_iterations)):
                    residual = chk + alpha * system.rhs1(Q1, exch) - Q1
                    delta, solve_stats = system.solve(op, alpha, residual, config)
                    stats.absorb(solve_stats)
                    Q1 = Q1 + delta
                    if np.linalg.norm(residual) <= config.krylov_tol * max(norm, 1.0):
                        break
        exch = system.exchange(Q1, Q2)
        R1[i] = system.rhs1(Q1, exch)
        R2[i] = system.rhs2(Q2, exch)
    q1_new = _explicit_accumulate(q1n, tab.b_tilde, R1, dt)
    q2_new = _explicit_accumulate(q2n, tab.b, R2, dt)
    new = CoupledState(system.field1(q1_new), system.field2(q2_new),
                       state.time + dt)
    return new, stats


def step_loose(state: CoupledState, system, tab: IMEXTableau,
               config: CouplingConfig, dt: Optional[float] = None):
    """One loose-coupling step (CC or SC) with Ns explicit substeps."""
    if config.mode not in ("CC", "SC"):
        raise ValueError("step_loose requires mode CC or SC")
    dt1 = config.dt if dt is None else dt
    ns = config.substeps
    dt2 = dt1 / ns
    s = tab.stages
    a, at = tab.a, tab.a_tilde
    q1n, q2n = state.q1.data, state.q2.data
    stats = StepStats()

    # ocean: one IMEX step with the atmosphere frozen at q2n
    N, Lv, _ = _ocean_stage_arrays(s)
    R1stage: List = [None] * s
    exch = system.exchange(q1n, q2n)
    op = None
    if not tab.is_explicit and config.linearization_refresh == "step":
        op = system.make_operator(q1n, exch, config)
    for i in range(s):
        alpha = dt1 * at[i, i]
        if i == 0:
            Q1 = q1n
            if op is None and not tab.is_explicit:
                op = system.make_operator(q1n, exch, config)
            solved_L = None
        else:
            chk = np.array(q1n, copy=True)
            for j in range(i):
                if a[i, j] != 0.0:
                    chk += (dt1 * a[i, j]) * N[j]
                if at[i, j] != 0.0:
                    chk += (dt1 * at[i, j]) * Lv[j]
            if alpha == 0.0:
                Q1 = chk
                solved_L = None
            else:
                if config.linearization_refresh == "stage":
                    op = system.make_operator(chk, exch, config)
                l_chk = op.apply(chk)
                d, solve_stats = system.solve(op, alpha, alpha * l_chk, config)
                stats.absorb(solve_stats)
                Q1 = chk + d
                solved_L = d / alpha
        exch = system.exchange(Q1, q2n)  # ocean side live, atmosphere frozen
        R1i = system.rhs1(Q1, exch)
        if tab.is_explicit:
            Lv[i] = np.zeros_like(R1i)
        else:
            Lv[i] = solved_L if solved_L is not None else op.apply(Q1)
        N[i] = R1i - Lv[i]
        R1stage[i] = R1i
    q1_new = np.array(q1n, copy=True)
    for i in range(s):
        q1_new += dt1 * (tab.b[i] * N[i] + tab.b_tilde[i] * Lv[i])

    # atmosphere: Ns explicit substeps; SC interpolates the ocean stages
    q2k = q2n
    for k in range(1, ns + 1):
        R2: List = [None] * s
        for i in range(s):
            Q2 = _explicit_accumulate(q2k, a[i, :i], R2[:i], dt2)
            if config.mode == "SC":
                theta = (k - 1 + tab.c[i]) / ns
                q1_star = dense_output(q1n, R1stage, tab, theta, dt1)
            else:
                q1_star = q1n
            exch2 = system.exchange(q1_star, Q2)
            R2[i] = system.rhs2(Q2, exch2)
        q2k = _explicit_accumulate(q2k, tab.b, R2, dt2)

    new = CoupledState(system.field1(q1_new), system.field2(q2k),
                       state.time + dt1)
    return new, stats


def step_single(state: SingleState, system: SingleCnsSystem, tab: IMEXTableau,
                dt: float):
    """Explicit RK step of a single (uncoupled) domain."""
    if not tab.is_explicit:
        raise ValueError("single-domain runs support explicit tableaus only")
    s = tab.stages
    qn = state.q.data
    R: List = [None] * s
    for i in range(s):
        Q = _explicit_accumulate(qn, tab.a[i, :i], R[:i], dt)
        R[i] = system.rhs(Q)
    q_new = _explicit_accumulate(qn, tab.b, R, dt)
    return SingleState(ConservedField(state.q.grid, state.q.params, q_new),
                       state.time + dt), StepStats()


@dataclass
class RunResult:
    state: object
    diagnostics: List[dict] = field(default_factory=list)
    steps: int = 0
    krylov_iterations: int = 0
    max_residual: float = 0.0


def _plan_steps(t0, t_end, dt):
    span = t_end - t0
    if span < 0.0:
        raise ValueError("t_end must not precede the initial time")
    n_full = int(np.floor(span / dt + 1e-9))
    remainder = span - n_full * dt
    if remainder <= 1e-12 * max(dt, 1.0):
        remainder = 0.0
    return n_full, remainder


def run(state, system, config: CouplingConfig, t_end: float, *,
        diagnostics_every: int = 0,
        sample: Optional[Callable] = None,
        on_step: Optional[Callable] = None) -> RunResult:
    """March the configured scheme from state.time to t_end.

    The final partial step is shortened to land exactly on t_end. When
    ``sample`` is given it is called as sample(state, config, dt) at step 0,
    every ``diagnostics_every`` steps (when positive) and at the end; its
    return value is appended to the diagnostics list. ``on_step`` is called
    as on_step(step_index, state) after every completed step. A failed
    stage aborts the run with the last completed state checkpointed.
    """
    tab = get_tableau(config.scheme)
    single = isinstance(state, SingleState)
    if single:
        def advance(st, dt):
            return step_single(st, system, tab, dt)
    elif config.mode == "TC":
        def advance(st, dt):
            return step_tight(st, system, tab, config, dt)
    else:
        def advance(st, dt):
            return step_loose(st, system, tab, config, dt)

    n_full, remainder = _plan_steps(state.time, t_end, config.dt)
    result = RunResult(state=state)

    def record(st, dt):
        if sample is not None:
            result.diagnostics.append(sample(st, config, dt))

    record(state, config.dt)
    current = state
    total = n_full + (1 if remainder > 0.0 else 0)
    for step_index in range(1, total + 1):
        dt = config.dt if step_index <= n_full else remainder
        try:
            current, stats = advance(current, dt)
        except SolverError as err:
            raise RunAborted(
                f"step {step_index} failed: {err}", last_state=current,
                time=current.time) from err
        result.steps += 1
        result.krylov_iterations += stats.krylov_iterations
        result.max_residual = max(result.max_residual, stats.max_residual)
        if on_step is not None:
            on_step(step_index, current)
        if diagnostics_every and step_index % diagnostics_every == 0 and step_index != total:
            record(current, dt)
    if total > 0:
        record(current, config.dt)
    result.state = current
    return result
