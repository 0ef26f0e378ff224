"""Run configuration: INI-style files with a fixed, documented schema.

Sections and keys (defaults in parentheses):

[case]
    name                one of the registered cases (required)
    <parameter> = ...   any parameter of that case, e.g. alpha, mu_tilde

[grid]
    nx (20)             cells in x
    nz (20)             cells in z            -- single-domain cases
    nz1 (40), nz2 (40)  cells in z per domain -- coupled cases

[scheme]
    name (rk4)          rk2 | rk3 | rk4 | ark2 | ark3 | ark4
    operator (Lz)       L | LI | Lz
    stiff_treatment (linearized)   linearized | nonlinear
    refresh (stage)     stage | step    linearization reference refresh

[coupling]
    mode (TC)           TC | CC | SC
    substeps (1)        explicit-domain substeps per loose step
    dt (6.25e-5)        implicit-domain timestep
    t_end (0.1)         final time
    krylov_tol (1e-4)   relative Krylov tolerance
    reference_scheme (rk4), reference_dt (0 = auto)   converge harness

[output]
    directory (out)     output directory
    diagnostics_every (100)   diagnostics cadence in steps (0 = ends only)
    snapshots_every (0)       field snapshot cadence in steps (0 = ends only)

Unknown sections or keys are rejected; duplicate keys are syntax errors.
The parsed configuration is echoed in canonical form into the output
directory, and parse(echo(parse(f))) == parse(f).
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .cases import CASE_NAMES, CaseSpec, case_spec, _DEFAULTS as CASE_DEFAULTS
from .errors import ConfigError
from .timeint import CouplingConfig

_SCHEMA = {
    "grid": {"nx": (int, 20), "nz": (int, 20), "nz1": (int, 40), "nz2": (int, 40)},
    "scheme": {
        "name": (str, "rk4"),
        "operator": (str, "Lz"),
        "stiff_treatment": (str, "linearized"),
        "refresh": (str, "stage"),
    },
    "coupling": {
        "mode": (str, "TC"),
        "substeps": (int, 1),
        "dt": (float, 6.25e-5),
        "t_end": (float, 0.1),
        "krylov_tol": (float, 1e-4),
        "reference_scheme": (str, "rk4"),
        "reference_dt": (float, 0.0),
    },
    "output": {
        "directory": (str, "out"),
        "diagnostics_every": (int, 100),
        "snapshots_every": (int, 0),
    },
}


@dataclass
class RunConfig:
    """Validated run description assembled from a config file."""

    case: CaseSpec
    resolution: tuple
    coupling: CouplingConfig
    t_end: float
    output_dir: str = "out"
    diagnostics_every: int = 100
    snapshots_every: int = 0
    reference_scheme: str = "rk4"
    reference_dt: float = 0.0

    def label(self) -> str:
        return f"{self.case.name}:{self.coupling.label()}"


def _parse_values(parser) -> dict:
    values = {}
    for section in parser.sections():
        if section == "case":
            continue
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            typ, _ = _SCHEMA[section][key]
            try:
                values[(section, key)] = typ(raw)
            except ValueError as err:
                raise ConfigError(
                    f"key {key!r} in [{section}]: cannot parse {raw!r}") from err
    return values


def _build(parser) -> RunConfig:
    if not parser.has_section("case") or not parser.has_option("case", "name"):
        raise ConfigError("section [case] with key 'name' is required")
    name = parser.get("case", "name")
    if name not in CASE_NAMES:
        raise ConfigError(f"unknown case {name!r}; available: {', '.join(CASE_NAMES)}")
    overrides = {}
    for key, raw in parser.items("case"):
        if key == "name":
            continue
        if key not in CASE_DEFAULTS[name]:
            raise ConfigError(f"case {name!r} has no parameter {key!r}")
        try:
            overrides[key] = float(raw)
        except ValueError as err:
            raise ConfigError(f"case parameter {key!r}: cannot parse {raw!r}") from err
    spec = case_spec(name, **overrides)

    values = _parse_values(parser)

    def get(section, key):
        return values.get((section, key), _SCHEMA[section][key][1])

    if spec.coupled:
        resolution = (get("grid", "nx"), get("grid", "nz1"), get("grid", "nz2"))
    else:
        resolution = (get("grid", "nx"), get("grid", "nz"))
    try:
        coupling = CouplingConfig(
            scheme=get("scheme", "name"),
            operator=get("scheme", "operator"),
            stiff_treatment=get("scheme", "stiff_treatment"),
            linearization_refresh=get("scheme", "refresh"),
            mode=get("coupling", "mode"),
            substeps=get("coupling", "substeps"),
            dt=get("coupling", "dt"),
            krylov_tol=get("coupling", "krylov_tol"),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err
    if not spec.coupled and coupling.mode != "TC":
        raise ConfigError(f"case {name!r} is single-domain; mode must be TC")
    t_end = get("coupling", "t_end")
    if t_end < 0.0:
        raise ConfigError("t_end must be nonnegative")
    return RunConfig(
        case=spec, resolution=resolution, coupling=coupling, t_end=t_end,
        output_dir=get("output", "directory"),
        diagnostics_every=get("output", "diagnostics_every"),
        snapshots_every=get("output", "snapshots_every"),
        reference_scheme=get("coupling", "reference_scheme"),
        reference_dt=get("coupling", "reference_dt"),
    )


def _make_parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(strict=True, interpolation=None,
                                       inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # case parameters are case-sensitive (T_inf1)
    return parser


def parse_config(path, overrides=()) -> RunConfig:
    """Parse an INI config file; overrides are 'section.key=value' strings."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = _make_parser()
    try:
        with open(path) as handle:
            parser.read_file(handle, source=str(path))
    except configparser.Error as err:
        raise ConfigError(f"config syntax error: {err}") from err
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value: {item!r}")
        target, value = item.split("=", 1)
        section, key = target.split(".", 1)
        section = section.strip()
        key = key.strip()
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, value.strip())
    return _build(parser)


def echo_config(config: RunConfig) -> str:
    """Canonical INI text of a RunConfig; parsing it reproduces the config."""
    lines = ["[case]", f"name = {config.case.name}"]
    for key, value in config.case.params.items():
        lines.append(f"{key} = {value!r}")
    lines.append("")
    lines.append("[grid]")
    if config.case.coupled:
        nx, nz1, nz2 = config.resolution
        lines += [f"nx = {nx}", f"nz1 = {nz1}", f"nz2 = {nz2}"]
    else:
        nx, nz = config.resolution
        lines += [f"nx = {nx}", f"nz = {nz}"]
    c = config.coupling
    lines += [
        "",
        "[scheme]",
        f"name = {c.scheme}",
        f"operator = {c.operator}",
        f"stiff_treatment = {c.stiff_treatment}",
        f"refresh = {c.linearization_refresh}",
        "",
        "[coupling]",
        f"mode = {c.mode}",
        f"substeps = {c.substeps}",
        f"dt = {c.dt!r}",
        f"t_end = {config.t_end!r}",
        f"krylov_tol = {c.krylov_tol!r}",
        f"reference_scheme = {config.reference_scheme}",
        f"reference_dt = {config.reference_dt!r}",
        "",
        "[output]",
        f"directory = {config.output_dir}",
        f"diagnostics_every = {config.diagnostics_every}",
        f"snapshots_every = {config.snapshots_every}",
        "",
    ]
    return "\n".join(lines)


def parse_config_text(text: str) -> RunConfig:
    """Parse configuration from a string (round-trip checks, tests)."""
    parser = _make_parser()
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ConfigError(f"config syntax error: {err}") from err
    return _build(parser)
