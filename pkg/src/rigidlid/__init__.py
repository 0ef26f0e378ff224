"""Two-domain compressible Navier-Stokes solver with IMEX-RK rigid-lid coupling.

A finite-volume toolkit for a pair of vertically stacked ideal-gas domains
exchanging heat and horizontal momentum through a rigid-lid interface via
linear bulk flux formulas, advanced in time by explicit and additive
(IMEX) Runge-Kutta methods in tight or loose (concurrent/sequential)
coupling modes, with mass conservation by construction.
"""

from .boundary import (
    BoundaryConditions, BoundarySpec, BulkCoefficients, InterfaceExchange,
    RigidLidInterface, adiabatic_wall, bulk_coefficients, fill_ghosts,
    interface, interface_fluxes, interface_wall_states, isothermal_wall,
    periodic,
)
from .cases import CaseSpec, case_spec, default_grids, exact_density_wave, init_case
from .config import RunConfig, echo_config, parse_config
from .diagnostics import (
    ErrorReport, coarsen_field, conservation_sample, courant_numbers,
    l2_error, observed_order,
)
from .errors import (
    ConfigError, RigidlidError, RunAborted, SolverError, StateError, TableauError,
)
from .grid import StructuredGrid2D, build_grid, cell_center
from .linop import LinearOperatorKind, LinearizedOperator, StageSystem, stage_solve
from .numflux import ls_gradients, roe_flux, viscous_face_flux
from .residual import assemble_rhs, global_mass_rate
from .state import (
    ConservedField, FluidParams, conserved_from_primitive,
    primitive_from_conserved, sound_speed,
)
from .tableaus import IMEXTableau, tableau, validate_tableau
from .timeint import (
    CoupledCnsSystem, CoupledState, CouplingConfig, SingleState, dense_output,
    run, step_loose, step_tight,
)

__version__ = "0.1.0"
