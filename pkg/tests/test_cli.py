import json

import numpy as np
import pytest

from qsix import io as qio
from qsix.cli import main
from qsix.dimension import make_params


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def manifest(tmp_path):
    return json.loads((tmp_path / "manifest.json").read_text())


def test_params_json(tmp_path, capsys):
    assert run(tmp_path, "params", "--n", "7") == 0
    out = json.loads(capsys.readouterr().out)
    assert out["params"]["K4"] == 26.75
    entry = manifest(tmp_path)[-1]
    assert entry["command"] == "params" and entry["exit_code"] == 0
    assert {"config", "wall_time_s", "artifacts", "version"} <= set(entry)


def test_params_csv(tmp_path, capsys):
    assert run(tmp_path, "params", "--n", "7", "--format", "csv") == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2 and lines[0].startswith("n,")


def test_params_bad_dimension(tmp_path, capsys):
    assert run(tmp_path, "params", "--n", "6") == 2
    assert "7" in capsys.readouterr().err


def test_orbit(tmp_path, capsys):
    assert run(tmp_path, "orbit", "--n", "7", "--eps0-rel", "0.8") == 0
    res = json.loads(capsys.readouterr().out)
    assert res["residual"] < 1e-9
    header, data = qio.read_csv(tmp_path / "orbit_table.csv")
    assert tuple(header) == qio.ORBIT_HEADER and data.shape[0] == 1
    traj = next(tmp_path.glob("orbit_n7_e*.csv"))
    h, y = qio.read_csv(traj)
    assert tuple(h) == qio.TRAJECTORY_HEADER
    assert y[-1, 0] == pytest.approx(res["period"])
    assert y[0, 1] == pytest.approx(y[-1, 1], abs=1e-9)


def test_orbit_out_of_range(tmp_path):
    assert run(tmp_path, "orbit", "--n", "7", "--eps0", "2.0") == 2
    assert not list(tmp_path.glob("orbit_n7_*.csv"))


def test_orbit_exclusive_flags(tmp_path):
    with pytest.raises(SystemExit) as info:
        run(tmp_path, "orbit", "--n", "7", "--eps0", "0.5", "--eps0-rel", "0.5")
    assert info.value.code == 2


def test_orbit_constant(tmp_path, capsys):
    assert run(tmp_path, "orbit", "--n", "7", "--eps0-rel", "1.0") == 0
    res = json.loads(capsys.readouterr().out)
    assert res["constant"] and res["residual"] == 0.0
    assert res["period"] == pytest.approx(4.4503, abs=1e-4)


def test_orbit_non_convergence(tmp_path, capsys):
    status = run(tmp_path, "orbit", "--n", "7", "--eps0-rel", "0.8", "--tol", "1e-30", "--max-iter", "1")
    assert status == 3
    assert "non-convergence" in capsys.readouterr().err
    assert not list(tmp_path.glob("orbit_n7_*.csv"))
    assert manifest(tmp_path)[-1]["exit_code"] == 3


def test_sweep_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ("sweep", "--n", "7", "--from-rel", "0.95", "--to-rel", "0.5", "--steps", "10")
    assert run(a, *args) == 0 and run(b, *args) == 0
    ta, tb = (a / "pohozaev_n7.csv").read_bytes(), (b / "pohozaev_n7.csv").read_bytes()
    assert ta == tb
    header, data = qio.read_csv(a / "pohozaev_n7.csv")
    assert tuple(header) == qio.POHOZAEV_HEADER and data.shape[0] == 10
    assert np.all(np.diff(data[:, 3]) > 0)
    assert all(manifest(a)[-1]["results"]["p_cyl_increasing"])


def test_sweep_empty(tmp_path):
    assert run(tmp_path, "sweep", "--n", "7", "--steps", "0") == 2


@pytest.mark.parametrize("n", [7, 9])
def test_verify(tmp_path, n):
    assert run(tmp_path, "verify", "--n", str(n)) == 0
    rep = json.loads((tmp_path / f"verify_n{n}.json").read_text())
    assert rep["passed"] and not rep["failing"]


def test_verify_unattainable(tmp_path, capsys):
    assert run(tmp_path, "verify", "--n", "7", "--tol", "1e-20") == 1
    captured = capsys.readouterr()
    assert "verification failed" in captured.err
    rep = json.loads((tmp_path / "verify_n7.json").read_text())
    assert rep["failing"] and all("defect" in c for c in rep["checks"])


def test_modica_sources(tmp_path):
    assert run(tmp_path, "modica", "--n", "7", "--source", "spherical") == 0
    assert len(list(tmp_path.glob("modica_n7_spherical_*.csv"))) == 4
    assert run(tmp_path, "modica", "--n", "7", "--source", "orbit", "--eps0-rel", "0.7") == 0
    assert len(list(tmp_path.glob("modica_n7_orbit_*.csv"))) == 4


def test_modica_file(tmp_path):
    good = tmp_path / "p.csv"
    from qsix.transforms import spherical_profile
    qio.write_profile(good, spherical_profile(np.geomspace(0.1, 10, 50), make_params(7), order=4))
    assert run(tmp_path, "modica", "--n", "7", "--source", "file", "--path", str(good)) == 0
    bad = tmp_path / "bad.csv"
    bad.write_text("radius,u\n1,1\n")
    assert run(tmp_path, "modica", "--n", "7", "--source", "file", "--path", str(bad)) == 2


def test_output_dir_from_env(tmp_path, monkeypatch):
    monkeypatch.setenv("QSIX_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["params", "--n", "8"]) == 0
    assert (tmp_path / "env" / "manifest.json").exists()
