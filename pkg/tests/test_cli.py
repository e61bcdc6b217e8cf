import csv
import hashlib
import os

import pytest

import spinwell.integrator as integ
from spinwell.cli import main
from spinwell.config import parse_config
from spinwell.io import TRAJECTORY_COLUMNS, read_snapshot

TINY = "modes = 3\nem_modes = 3\nT = 0.02\ndt = 1e-3\nrecord_every = 5\nsnapshot_every = 10\nconvergence_T = 0.02\n"


def _write(tmp_path, text, name="c.txt"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _digests(root):
    out = {}
    for d, _, files in os.walk(root):
        for f in files:
            p = os.path.join(d, f)
            with open(p, "rb") as fh:
                out[os.path.relpath(p, root)] = hashlib.sha256(fh.read()).hexdigest()
    return out


def test_print_config(capsys):
    assert main(["print-config", "--set", "seed=4"]) == 0
    text = capsys.readouterr().out
    assert "seed = 4" in text
    assert parse_config(text).seed == 4


def test_run_outputs_and_determinism(tmp_path):
    cfg = _write(tmp_path, TINY)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", cfg, "--out", str(a)]) == 0
    assert main(["run", cfg, "--out", str(b)]) == 0
    da, db = _digests(a), _digests(b)
    assert da == db
    snaps = {os.path.join("snapshots", f"snap_{k:08d}.bin") for k in (0, 10, 20)}
    assert set(da) == {"config.txt", "trajectory.csv"} | snaps
    with open(a / "trajectory.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == TRAJECTORY_COLUMNS and len(rows) == 6
    st, K = read_snapshot(a / "snapshots" / "snap_00000020.bin")
    assert st.t == pytest.approx(0.02) and K == (3, 3, 3)
    assert parse_config((a / "config.txt").read_text()) == parse_config(TINY)


def test_different_seed_changes_output(tmp_path):
    cfg = _write(tmp_path, TINY)
    main(["run", cfg, "--out", str(tmp_path / "a")])
    main(["run", cfg, "--set", "seed=1", "--out", str(tmp_path / "b")])
    assert _digests(tmp_path / "a")["trajectory.csv"] != _digests(tmp_path / "b")["trajectory.csv"]


@pytest.mark.parametrize("text", ["lambda2 = 0\n", "seed 3\n", "foo = 1\n", "dt = 0.3\n"])
def test_config_errors_exit_2(tmp_path, text, capsys):
    assert main(["run", _write(tmp_path, text), "--out", str(tmp_path / "o")]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_config_exit_2(tmp_path):
    assert main(["run", str(tmp_path / "nope.txt")]) == 2


def test_ensemble(tmp_path):
    cfg = _write(tmp_path, TINY + "ensemble = 3\n")
    out = tmp_path / "e"
    assert main(["ensemble", cfg, "--out", str(out)]) == 0
    with open(out / "stats.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["quantity", "mean", "stderr", "n_paths"]
    assert {r[0] for r in rows[1:]} >= {"sup_M_V_sq", "sup_BmM_sq", "sup_E_sq", "int_mxrho_sq"}
    assert (out / "moments.csv").exists()
    assert (out / "failures.csv").read_text() == "seed,error\n"


def test_ensemble_abort_exit_3(tmp_path, monkeypatch):
    monkeypatch.setattr(integ, "BLOWUP", 1e-3)
    cfg = _write(tmp_path, TINY + "ensemble = 2\n")
    out = tmp_path / "e"
    assert main(["ensemble", cfg, "--out", str(out)]) == 3
    assert len((out / "failures.csv").read_text().splitlines()) == 3


def test_run_abort_exit_3(tmp_path, monkeypatch):
    monkeypatch.setattr(integ, "BLOWUP", 1e-3)
    assert main(["run", _write(tmp_path, TINY), "--out", str(tmp_path / "o")]) == 3


def test_check_on_default_config(tmp_path):
    # default resolution, only the seed given
    cfg = _write(tmp_path, "seed = 3\n")
    out = tmp_path / "chk"
    assert main(["check", cfg, "--out", str(out)]) == 0
    with open(out / "report.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and all(r["passed"] == "1" for r in rows)
    names = {r["name"] for r in rows}
    assert "noise_off:divB" in names and "identity:norm_rate" in names


def test_check_fails_with_tolerance_exit_1(tmp_path, monkeypatch):
    import spinwell.cli as cli

    monkeypatch.setattr(cli, "TOL_IDENTITY", 0.0)
    cfg = _write(tmp_path, "modes = 3\nem_modes = 3\ncheck_states = 2\ncheck_steps = 5\n")
    assert main(["check", cfg, "--out", str(tmp_path / "c")]) == 1


def test_convergence(tmp_path):
    cfg = _write(tmp_path, "modes = 4\nem_modes = 4\nconvergence_levels = 2\nconvergence_T = 0.08\ndt = 5e-3\n"
                           "T = 0.08\ninitial_m = wall\n")
    out = tmp_path / "conv"
    code = main(["convergence", cfg, "--out", str(out)])
    with open(out / "convergence.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["study"] for r in rows} == {"dt_ladder", "heun_vs_em", "mode_ladder"}
    assert code == (0 if all(r["passed"] == "1" for r in rows) else 1)
    assert code == 0


def test_convergence_rejects_misaligned_horizon(tmp_path, capsys):
    # the coarsest ladder step is 4 * dt = 0.04, which does not divide 0.05
    cfg = _write(tmp_path, "modes = 3\nem_modes = 3\ndt = 1e-2\nconvergence_T = 0.05\n")
    assert main(["run", cfg, "--set", "T=0.02", "--out", str(tmp_path / "r")]) == 0
    assert main(["convergence", cfg, "--out", str(tmp_path / "c")]) == 2
    assert "convergence_T" in capsys.readouterr().err
