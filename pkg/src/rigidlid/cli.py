"""Command-line interface: run, converge, validate-tableaus.

Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .cases import default_grids, init_case
from .config import RunConfig, echo_config, parse_config
from .diagnostics import (
    conservation_sample, coarsen_field, courant_numbers, l2_error, observed_order,
)
from .errors import ConfigError, RigidlidError, RunAborted, SolverError
from .output import (
    format_convergence_table, snapshot_state, write_convergence_table,
    write_diagnostics,
)
from .tableaus import tableau, tableau_names, validate_tableau
from .timeint import CoupledState, SingleState, run as run_steps


def _make_sampler(initial_state, substeps):
    m1_0, m2_0, e_0 = conservation_sample(initial_state)
    mass_0 = m1_0 + m2_0

    def sample(state, config, dt):
        m1, m2, e = conservation_sample(state)
        cr1, cr2 = courant_numbers(state, config.dt, config.dt / substeps)
        return (state.time, m1, m2, abs(m1 + m2 - mass_0), abs(e - e_0), cr1, cr2)

    return sample


def _execute(config: RunConfig, quiet=False):
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.ini").write_text(echo_config(config))
    setup = init_case(config.case, default_grids(config.case, config.resolution))
    sampler = _make_sampler(setup.state, config.coupling.substeps)
    name = config.case.name

    snapshots = []

    def on_step(step_index, state):
        if config.snapshots_every and step_index % config.snapshots_every == 0:
            snapshots.extend(snapshot_state(outdir, name, step_index, state))

    snapshot_state(outdir, name, 0, setup.state)
    result = run_steps(setup.state, setup.system, config.coupling, config.t_end,
                       diagnostics_every=config.diagnostics_every,
                       sample=sampler, on_step=on_step)
    snapshot_state(outdir, name, result.steps, result.state)
    write_diagnostics(outdir / "diagnostics.dat", result.diagnostics)
    if not quiet:
        last = result.diagnostics[-1]
        print(f"{config.label()}: {result.steps} steps to t={result.state.time:g}, "
              f"mass loss {last[3]:.3e}, energy loss {last[4]:.3e}, "
              f"krylov iterations {result.krylov_iterations}")
    return result, setup


def cmd_run(args):
    config = parse_config(args.config, args.set or ())
    _execute(config)
    return 0


def _space_levels(config: RunConfig, levels):
    base = config.resolution
    out = []
    for k in range(levels):
        out.append(tuple(int(n) * 2 ** k for n in base))
    return out


def cmd_converge(args):
    config = parse_config(args.config, args.set or ())
    levels = args.levels
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.ini").write_text(echo_config(config))
    errors = []
    labels = []
    if args.axis == "space":
        resolutions = _space_levels(config, levels)
        states = []
        for resolution in resolutions:
            setup = init_case(config.case, default_grids(config.case, resolution))
            result = run_steps(setup.state, setup.system, config.coupling,
                               config.t_end)
            states.append((resolution, setup, result.state))
        # reference: exact solution when available, otherwise the finest
        # level restricted onto each coarser grid by block means
        for resolution, setup, state in states:
            if setup.exact is not None:
                ref = SingleState(setup.exact(config.t_end), config.t_end)
            else:
                fine_res, _, fine_state = states[-1]
                factor = fine_res[0] // resolution[0]
                if factor == 1:
                    continue
                if isinstance(fine_state, CoupledState):
                    ref = CoupledState(coarsen_field(fine_state.q1, factor),
                                       coarsen_field(fine_state.q2, factor),
                                       fine_state.time)
                else:
                    ref = SingleState(coarsen_field(fine_state.q, factor),
                                      fine_state.time)
            errors.append(l2_error(state, ref))
            labels.append(f"h=1/{resolution[0]}")
    else:
        ref_dt = config.reference_dt
        if ref_dt <= 0.0:
            ref_dt = config.coupling.dt / 2 ** (levels + 1)
        ref_coupling = replace(config.coupling, scheme=config.reference_scheme,
                               mode="TC", substeps=1, dt=ref_dt)
        setup = init_case(config.case, default_grids(config.case, config.resolution))
        reference = run_steps(setup.state, setup.system, ref_coupling,
                              config.t_end).state
        for k in range(levels):
            dt = config.coupling.dt / 2 ** k
            setup = init_case(config.case, default_grids(config.case,
                                                         config.resolution))
            coupling = replace(config.coupling, dt=dt)
            result = run_steps(setup.state, setup.system, coupling, config.t_end)
            errors.append(l2_error(result.state, reference))
            labels.append(f"dt={dt:g}")
    stacked = np.array([e.as_tuple() for e in errors])
    orders = np.stack([observed_order(stacked[:, v]) for v in range(3)], axis=1)
    table = format_convergence_table(labels, errors, orders)
    print(table)
    write_convergence_table(outdir / "convergence.dat", labels, errors, orders)
    return 0


def cmd_validate_tableaus(args):
    failed = False
    for name in tableau_names():
        try:
            validate_tableau(tableau(name))
            print(f"{name}: ok (order {tableau(name).order}, "
                  f"{tableau(name).stages} stages)")
        except RigidlidError as err:
            failed = True
            print(f"{name}: FAILED - {err}")
    return 2 if failed else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rigidlid",
        description="Two-domain compressible Navier-Stokes solver with "
                    "IMEX-RK rigid-lid coupling")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configured case")
    p_run.add_argument("config")
    p_run.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help="override any config key")
    p_run.set_defaults(func=cmd_run)

    p_conv = sub.add_parser("converge", help="convergence study harness")
    p_conv.add_argument("config")
    p_conv.add_argument("--levels", type=int, default=4)
    p_conv.add_argument("--axis", choices=("space", "time"), default="space")
    p_conv.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE")
    p_conv.set_defaults(func=cmd_converge)

    p_val = sub.add_parser("validate-tableaus",
                           help="check every registered Butcher tableau")
    p_val.set_defaults(func=cmd_validate_tableaus)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except (SolverError, RunAborted) as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
