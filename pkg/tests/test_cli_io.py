import json
import subprocess
import sys

import pytest

from fanno_periodic.cli_io import main, run_subcommand, to_json
from fanno_periodic.config import DEFAULTS, ConfigError, default_config, load_config, loads

COARSE = "duct.n_x = 65\ntime.n_t = 32\nharness.windows = 6\n"
FIXED = COARSE + "boundary.G1.terms =\nboundary.G2.terms =\nboundary.G3.terms =\n"


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_defaults():
    cfg = loads("")
    assert cfg["duct.n_x"] == 512 and cfg["time.n_t"] == 256
    assert cfg == default_config()
    assert set(cfg.as_dict()) == set(DEFAULTS)


def test_gamma_out_of_range_names_key_and_invariant():
    with pytest.raises(ConfigError) as exc:
        loads("gas.gamma = 3.5\n")
    assert "1<γ<3" in str(exc.value) and exc.value.key == "gas.gamma"


def test_gain_product():
    cfg = loads("boundary.K1 = 0.8\nboundary.K3 = 0.9\n")
    assert cfg["boundary.K1"] * cfg["boundary.K3"] == pytest.approx(0.72)
    with pytest.raises(ConfigError, match=r"\|K1K3\|<1"):
        loads("boundary.K1 = 1.0\nboundary.K3 = 1.0\n")


@pytest.mark.parametrize("text, line", [
    ("duct.L = 1\nnonsense\n", 2),
    ("duct.L = 1\n\n# c\nduct.n_x = many\n", 4),
    ("duct.L = 1\nduct.L = 2\n", 2),
    ("bogus.key = 1\n", 1),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as exc:
        loads(text)
    assert exc.value.line == line and f"line {line}" in str(exc.value)


def test_domain_errors_surface_as_named_config_errors():
    with pytest.raises(ConfigError) as exc:
        loads("inflow.u_minus = 1.2\n")
    assert exc.value.key is not None


def test_round_trip():
    cfg = loads(COARSE + "boundary.G2.terms = 0.002 2 0.25; 1e-3 1 0\ngas.gamma = 1.3\n")
    again = loads(cfg.to_text())
    assert again == cfg
    assert loads(cfg.to_text()).to_text() == cfg.to_text()


def test_lmax_sentinel(tmp_path, capsys):
    cfg = write(tmp_path, "damping.coeffs = 0\n")
    rep = tmp_path / "lmax.json"
    assert main(["lmax", "--config", cfg, "--report", str(rep)]) == 0
    assert capsys.readouterr().out.strip() == "LMAX=inf"
    data = json.loads(rep.read_text())
    assert data["chokes"] is False and data["sentinel"] == "LMAX=inf"


def test_lmax_choking_value(tmp_path, capsys):
    cfg = write(tmp_path, "damping.coeffs = -0.5\ninflow.u_minus = 0.9\n")
    assert main(["lmax", "--config", cfg]) == 0
    out = capsys.readouterr().out.strip()
    assert out.startswith("LMAX=") and 0 < float(out[5:]) < 1


def test_build_periodic_fixed_point(tmp_path):
    cfg = write(tmp_path, FIXED)
    rep = tmp_path / "b.json"
    out = tmp_path / "b.csv"
    assert main(["build-periodic", "--config", cfg, "--report", str(rep), "--out", str(out)]) == 0
    data = json.loads(rep.read_text())
    assert data["report"]["iterations"] <= 2
    lines = out.read_text().splitlines()
    assert lines[0] == "t,x,phi1,phi2,phi3" and len(lines) == 1 + 32 * 65


def test_outputs_byte_identical(tmp_path):
    cfg = write(tmp_path, COARSE)
    blobs = []
    for k in range(2):
        out, rep = tmp_path / f"s{k}.csv", tmp_path / f"s{k}.json"
        assert main(["simulate", "--config", cfg, "--out", str(out), "--report", str(rep), "--tfinal", "1.5"]) == 0
        blobs.append((out.read_bytes(), rep.read_bytes()))
    assert blobs[0] == blobs[1]
    assert b"\r\n" not in blobs[0][0]
    header = blobs[0][0].split(b"\n")[0]
    assert header == b"t,x,phi1,phi2,phi3,rho,u,S"
    rep = json.loads(blobs[0][1])
    assert rep["certificate"]["cfl"] <= 0.9 and rep["provenance"] == "periodic-slice-plus-bump"


def test_report_echo_reloads(tmp_path):
    cfg = write(tmp_path, COARSE)
    rep = tmp_path / "steady.json"
    out = tmp_path / "steady.csv"
    assert main(["steady", "--config", cfg, "--report", str(rep), "--out", str(out)]) == 0
    echo = json.loads(rep.read_text())["config"]
    assert loads("".join(f"{k} = {v}\n" for k, v in echo.items())) == load_config(cfg)
    assert out.read_text().splitlines()[0] == "x,u_tilde,c_tilde,r1_tilde,r3_tilde"


def test_error_json_and_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, "gas.gamma = 3.5\n")
    rep = tmp_path / "err.json"
    assert main(["steady", "--config", cfg, "--report", str(rep)]) == 1
    err = json.loads(capsys.readouterr().out)
    assert err["error"] == "config_error" and err["key"] == "gas.gamma"
    assert json.loads(rep.read_text()) == err


def test_choking_surfaces_as_error(tmp_path, capsys):
    cfg = write(tmp_path, "damping.coeffs = -0.5\ninflow.u_minus = 0.9\nduct.L = 2\n")
    assert main(["steady", "--config", cfg]) == 1
    assert "error" in json.loads(capsys.readouterr().out)


def test_stability_subcommand(tmp_path):
    rep = run_subcommand("stability", loads(COARSE))
    assert rep["xi_hat"] < 1
    text = to_json(rep)
    assert "wall_time" not in text and text.endswith("\n")


def test_json_encoding():
    text = to_json({"a": 0.1, "b": float("inf"), "c": [1, 2.5], "d": True})
    data = json.loads(text)
    assert data == {"a": 0.1, "b": None, "c": [1, 2.5], "d": True}
    assert "0.10000000000000001" in text


def test_unknown_subcommand_rejected():
    with pytest.raises(Exception):
        run_subcommand("plot", default_config())


def test_console_entry_point(tmp_path):
    cfg = write(tmp_path, "damping.coeffs = 0\n")
    res = subprocess.run([sys.executable, "-m", "fanno_periodic.cli_io", "lmax", "--config", cfg],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "LMAX=inf"
