import numpy as np
import pytest

from rigidlid.cli import main
from rigidlid.config import echo_config, parse_config, parse_config_text
from rigidlid.errors import ConfigError
from rigidlid.output import read_field_snapshot

MINIMAL = """
[case]
name = density-wave
"""

COUPLED = """
[case]
name = two-vortices
beta2 = 0.4

[grid]
nx = 16
nz1 = 12
nz2 = 8

[scheme]
name = ark2
operator = Lz

[coupling]
mode = SC
substeps = 2
dt = 0.01
t_end = 0.05

[output]
directory = {out}
"""


def test_minimal_config_defaults(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text(MINIMAL)
    cfg = parse_config(path)
    assert cfg.case.name == "density-wave"
    assert cfg.coupling.scheme == "rk4"
    assert cfg.coupling.dt == pytest.approx(6.25e-5)
    assert cfg.resolution == (20, 20)
    assert cfg.t_end == pytest.approx(0.1)


def test_coupled_config_and_label(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text(COUPLED.format(out=tmp_path / "out"))
    cfg = parse_config(path)
    assert cfg.case.params["beta2"] == 0.4
    assert cfg.resolution == (16, 12, 8)
    assert cfg.coupling.label() == "ARK2(Lz,SC2)"


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text(MINIMAL + "\n[grid]\nnq = 3\n")
    with pytest.raises(ConfigError, match="nq"):
        parse_config(path)


def test_unknown_case_parameter_rejected(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[case]\nname = density-wave\nbeta9 = 1\n")
    with pytest.raises(ConfigError, match="beta9"):
        parse_config(path)


def test_duplicate_key_rejected(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[case]\nname = density-wave\nname = khi\n")
    with pytest.raises(ConfigError, match="syntax"):
        parse_config(path)


def test_single_domain_rejects_loose_mode(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text(MINIMAL + "\n[coupling]\nmode = CC\nsubsteps = 2\n")
    with pytest.raises(ConfigError, match="single-domain"):
        parse_config(path)


def test_overrides(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text(MINIMAL)
    cfg = parse_config(path, ["coupling.dt=1e-3", "grid.nx=10", "grid.nz = 10"])
    assert cfg.coupling.dt == pytest.approx(1e-3)
    assert cfg.resolution == (10, 10)
    with pytest.raises(ConfigError):
        parse_config(path, ["nonsense"])


def test_echo_round_trip(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text(COUPLED.format(out=tmp_path / "out"))
    cfg = parse_config(path)
    echoed = echo_config(cfg)
    cfg2 = parse_config_text(echoed)
    assert cfg2 == cfg
    assert echo_config(cfg2) == echoed


def test_cli_run_density_wave(tmp_path, capsys):
    path = tmp_path / "c.ini"
    out = tmp_path / "out"
    path.write_text(MINIMAL)
    code = main(["run", str(path),
                 "--set", "grid.nx=8", "--set", "grid.nz=8",
                 "--set", "coupling.dt=2e-3", "--set", "coupling.t_end=0.01",
                 "--set", f"output.directory={out}",
                 "--set", "output.diagnostics_every=2"])
    assert code == 0
    assert (out / "config.ini").exists()
    diag = (out / "diagnostics.dat").read_text().splitlines()
    assert diag[0].startswith("time mass1")
    assert len(diag) >= 3
    # equilibrium-free run still conserves mass to roundoff
    last = [float(v) for v in diag[-1].split()]
    assert last[3] <= 1e-13


def test_cli_snapshot_round_trip(tmp_path):
    path = tmp_path / "c.ini"
    out = tmp_path / "out"
    path.write_text(MINIMAL)
    code = main(["run", str(path),
                 "--set", "grid.nx=6", "--set", "grid.nz=6",
                 "--set", "coupling.dt=1e-3", "--set", "coupling.t_end=0",
                 "--set", f"output.directory={out}"])
    assert code == 0
    snap = read_field_snapshot(out / "density-wave_d1_00000.dat")
    from rigidlid.cases import case_spec, default_grids, init_case
    setup = init_case(case_spec("density-wave"), default_grids(
        case_spec("density-wave"), (6, 6)))
    prim = setup.state.q.primitives()
    np.testing.assert_allclose(snap["rho"], prim.rho.ravel(), rtol=0, atol=0)
    np.testing.assert_allclose(snap["T"], prim.T.ravel(), rtol=0, atol=0)


def test_cli_outputs_byte_identical_across_runs(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text(COUPLED.format(out=tmp_path / "o1"))
    args = ["run", str(path), "--set", "coupling.t_end=0.02"]
    assert main(args + ["--set", f"output.directory={tmp_path/'o1'}"]) == 0
    assert main(args + ["--set", f"output.directory={tmp_path/'o2'}"]) == 0
    for name in ("diagnostics.dat", "two-vortices_d1_00002.dat",
                 "two-vortices_d2_00002.dat"):
        b1 = (tmp_path / "o1" / name).read_bytes()
        b2 = (tmp_path / "o2" / name).read_bytes()
        assert b1 == b2, name


def test_cli_exit_codes(tmp_path):
    assert main(["run", str(tmp_path / "missing.ini")]) == 2
    bad = tmp_path / "bad.ini"
    bad.write_text("[case]\nname = nonsense\n")
    assert main(["run", str(bad)]) == 2
    assert main(["validate-tableaus"]) == 0


def test_cli_converge_space_density_wave(tmp_path, capsys):
    path = tmp_path / "c.ini"
    out = tmp_path / "out"
    path.write_text(MINIMAL)
    code = main(["converge", str(path), "--levels", "2", "--axis", "space",
                 "--set", "grid.nx=8", "--set", "grid.nz=8",
                 "--set", "coupling.dt=1e-3", "--set", "coupling.t_end=0.02",
                 "--set", f"output.directory={out}"])
    assert code == 0
    table = (out / "convergence.dat").read_text().splitlines()
    assert table[0].startswith("level")
    assert len(table) == 3
    captured = capsys.readouterr()
    assert "err(rho)" in captured.out
