"""Text output: field snapshots, diagnostics table, convergence summaries.

All numbers are written in fixed 17-significant-digit scientific notation,
so identical runs produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .state import ConservedField
from .timeint import CoupledState, SingleState

FMT = "%.16e"


def _fmt(values):
    return " ".join(FMT % v for v in values)


def write_field_snapshot(path, field: ConservedField):
    """One row per cell: x z rho u w p T (cell-centred values)."""
    X, Z = field.grid.meshgrid()
    prim = field.primitives()
    rows = np.column_stack([
        X.ravel(), Z.ravel(), prim.rho.ravel(), prim.u.ravel(),
        prim.w.ravel(), prim.p.ravel(), prim.T.ravel(),
    ])
    with open(path, "w") as handle:
        handle.write("x z rho u w p T\n")
        for row in rows:
            handle.write(_fmt(row) + "\n")


def read_field_snapshot(path):
    """Columns of a snapshot file as a dict of arrays."""
    data = np.loadtxt(path, skiprows=1)
    data = np.atleast_2d(data)
    names = ("x", "z", "rho", "u", "w", "p", "T")
    return {name: data[:, k] for k, name in enumerate(names)}


def snapshot_state(directory, case_name, index, state):
    """Write one snapshot file per domain; returns the paths."""
    directory = Path(directory)
    paths = []
    if isinstance(state, CoupledState):
        domains = (("d1", state.q1), ("d2", state.q2))
    else:
        field = state.q if isinstance(state, SingleState) else state
        domains = (("d1", field),)
    for tag, field in domains:
        path = directory / f"{case_name}_{tag}_{index:05d}.dat"
        write_field_snapshot(path, field)
        paths.append(path)
    return paths


DIAG_HEADER = "time mass1 mass2 mass_loss energy_loss cr1 cr2"


def write_diagnostics(path, rows):
    """Rows: (time, mass1, mass2, mass_loss, energy_loss, cr1, cr2)."""
    with open(path, "w") as handle:
        handle.write(DIAG_HEADER + "\n")
        for row in rows:
            handle.write(_fmt(row) + "\n")


def write_convergence_table(path, labels, errors, orders):
    """(error, order) columns per variable, mirroring the study tables.

    labels: per-level description (h or dt); errors: list of ErrorReport;
    orders: array (levels-1, 3) of observed orders (first row is printed
    as '-').
    """
    with open(path, "w") as handle:
        handle.write("level error_rho order_rho error_mom order_mom "
                     "error_energy order_energy\n")
        for k, (label, err) in enumerate(zip(labels, errors)):
            cols = []
            for v in range(3):
                cols.append(FMT % err.as_tuple()[v])
                cols.append("-" if k == 0 else "%.3f" % orders[k - 1][v])
            handle.write(f"{label} " + " ".join(cols) + "\n")


def format_convergence_table(labels, errors, orders):
    lines = ["%-12s %13s %8s %13s %8s %13s %8s" % (
        "level", "err(rho)", "order", "err(mom)", "order", "err(rhoE)", "order")]
    for k, (label, err) in enumerate(zip(labels, errors)):
        cols = []
        for v in range(3):
            cols.append("%13.4e" % err.as_tuple()[v])
            cols.append("%8s" % ("-" if k == 0 else "%.3f" % orders[k - 1][v]))
        lines.append("%-12s %s" % (label, " ".join(cols)))
    return "\n".join(lines)
