import json
import shutil
import subprocess

import numpy as np
import pytest

from opshort import make_kit, save_matrix
from opshort.cli import dispatch

RNG = np.random.default_rng(6006)


def _write(tmp_path, name, m):
    path = tmp_path / name
    save_matrix(path, np.asarray(m, dtype=complex))
    return str(path)


def _run(capsys, argv):
    code = dispatch(argv)
    captured = capsys.readouterr()
    return code, captured.out


def _run_json(capsys, argv):
    code, out = _run(capsys, argv)
    return code, json.loads(out)


def _check_envelope(payload, command):
    assert payload["command"] == command
    assert payload["version"]
    assert set(payload["tol"]) == {"rank_rel", "residual_rel", "eig_clamp_rel"}


# --- plumbing -------------------------------------------------------------------


def test_version_flag(capsys):
    code, out = _run(capsys, ["--version"])
    assert code == 0
    assert "opshort" in out


def test_unknown_subcommand(capsys):
    code, _ = _run(capsys, ["no-such-command"])
    assert code == 2


def test_missing_input_file(capsys, tmp_path):
    code, _ = _run(capsys, ["v-op", "--input", str(tmp_path / "absent.json")])
    assert code == 2


def test_malformed_input_file(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("this is not json")
    code, _ = _run(capsys, ["v-op", "--input", str(path)])
    assert code == 2
    path.write_text('{"rows": 1}')
    code, _ = _run(capsys, ["v-op", "--input", str(path)])
    assert code == 2


def test_bad_tol_rejected(capsys, tmp_path):
    f = _write(tmp_path, "m.json", np.eye(2))
    code, _ = _run(capsys, ["v-op", "--input", f, "--tol", "2.0"])
    assert code == 2


def test_tol_flag_scales_whole_policy(capsys, tmp_path):
    f = _write(tmp_path, "m.json", np.eye(2))
    code, payload = _run_json(capsys, ["v-op", "--input", f, "--tol", "1e-6"])
    assert code == 0
    assert payload["tol"]["residual_rel"] == pytest.approx(1e-6)
    assert payload["tol"]["rank_rel"] == pytest.approx(1e-10)
    assert payload["tol"]["eig_clamp_rel"] == pytest.approx(1e-8)


def test_out_flag_writes_file(capsys, tmp_path):
    f = _write(tmp_path, "m.json", np.eye(2))
    target = tmp_path / "result.json"
    code, out = _run(capsys, ["v-op", "--input", f, "--out", str(target)])
    assert code == 0
    assert out == ""
    _check_envelope(json.loads(target.read_text()), "v-op")


# --- polar family ------------------------------------------------------------------


def test_polar_classical(capsys, tmp_path):
    f = _write(tmp_path, "t.json", RNG.normal(size=(4, 3)))
    code, payload = _run_json(capsys, ["polar", "--input", f])
    assert code == 0
    _check_envelope(payload, "polar")
    assert payload["mode"] == "classical"
    assert payload["alpha"] == 1.0
    res = payload["residuals"]
    assert res["reconstruction"] <= 1e-10
    assert res["initial_isometry"] <= 1e-10
    assert res["final_isometry"] <= 1e-10


def test_polar_generalized(capsys, tmp_path):
    f = _write(tmp_path, "t.json", RNG.normal(size=(4, 4)))
    code, payload = _run_json(capsys, ["polar", "--input", f, "--alpha", "0.5"])
    assert code == 0
    assert payload["mode"] == "generalized"
    assert payload["alpha"] == 0.5
    assert payload["residuals"]["gram"] <= 1e-9


def test_polar_iterate(capsys, tmp_path):
    f = _write(tmp_path, "t.json", [[1.0]])
    code, payload = _run_json(capsys, ["polar", "--input", f, "--iterate", "100"])
    assert code == 0
    assert payload["mode"] == "iterate"
    assert payload["n"] == 100
    got = payload["U"]["data"][0][0]
    assert got == pytest.approx(np.sqrt(100.0 / 101.0), abs=1e-12)
    assert payload["residuals"]["distance_to_limit"] == pytest.approx(
        1.0 - np.sqrt(100.0 / 101.0), abs=1e-12
    )


def test_polar_bad_alpha(capsys, tmp_path):
    f = _write(tmp_path, "t.json", np.eye(2))
    code, _ = _run(capsys, ["polar", "--input", f, "--alpha", "1.5"])
    assert code == 2


def test_gpolar_default_alpha(capsys, tmp_path):
    f = _write(tmp_path, "t.json", RNG.normal(size=(3, 3)))
    code, payload = _run_json(capsys, ["gpolar", "--input", f])
    assert code == 0
    assert payload["alpha"] == 0.75
    assert payload["residuals"]["reconstruction"] <= 1e-9
    assert payload["residuals"]["intertwining_beta_1"] <= 1e-9


def test_v_op_residuals(capsys, tmp_path):
    f = _write(tmp_path, "t.json", RNG.normal(size=(5, 3)))
    code, payload = _run_json(capsys, ["v-op", "--input", f])
    assert code == 0
    for value in payload["residuals"].values():
        assert value <= 1e-9


# --- reduced-solve -------------------------------------------------------------------


def test_reduced_solve_success(capsys, tmp_path):
    a = _write(tmp_path, "a.json", np.diag([2.0, 1.0]))
    c = _write(tmp_path, "c.json", np.diag([1.0, 1.0]))
    code, payload = _run_json(capsys, ["reduced-solve", "--a", a, "--c", c])
    assert code == 0
    _check_envelope(payload, "reduced-solve")
    assert payload["solvable"] is True
    assert payload["borderline"] is False
    assert payload["range_ok"] is True
    assert payload["D"]["data"][0] == [0.5, 0.0]
    assert payload["norm_D"] == pytest.approx(1.0)


def test_reduced_solve_not_solvable(capsys, tmp_path):
    a = _write(tmp_path, "a.json", np.diag([1.0, 0.0]))
    c = _write(tmp_path, "c.json", [[0.0], [1.0]])
    code, payload = _run_json(capsys, ["reduced-solve", "--a", a, "--c", c])
    assert code == 3
    assert payload["solvable"] is False
    assert payload["margin"] == pytest.approx(1.0)


def test_reduced_solve_borderline(capsys, tmp_path):
    a = _write(tmp_path, "a.json", np.diag([1.0, 1.0, 0.0]))
    c = _write(tmp_path, "c.json", [[0.5], [0.0], [3e-8]])
    code, payload = _run_json(capsys, ["reduced-solve", "--a", a, "--c", c])
    assert code == 4
    assert payload["borderline"] is True
    assert payload["margin"] == pytest.approx(3e-8, rel=1e-6)


def test_reduced_solve_kit_headline(capsys, tmp_path):
    kit = make_kit(32)
    a = _write(tmp_path, "a.json", kit.A0 + kit.B0)
    c = _write(tmp_path, "c.json", kit.B0)
    code, payload = _run_json(capsys, ["reduced-solve", "--a", a, "--c", c])
    assert code == 0
    assert payload["norm_D"] == pytest.approx(np.sqrt(1.0 + 32.0**2), rel=1e-9)


# --- partition and shorted --------------------------------------------------------------


def test_partition_payload(capsys, tmp_path):
    t = RNG.normal(size=(4, 4))
    f = _write(tmp_path, "t.json", t)
    p = _write(tmp_path, "p.json", np.diag([1.0, 1.0, 0.0, 0.0]))
    code, payload = _run_json(
        capsys, ["partition", "--input", f, "--pm", p, "--pn", p]
    )
    assert code == 0
    assert payload["rank_PM"] == 2 and payload["rank_PN"] == 2
    assert payload["T11"]["rows"] == 2
    got = np.array(payload["T22"]["data"]).reshape(2, 2, 2)
    assert np.allclose(got[..., 0], t[2:, 2:])
    assert payload["reassembly_residual"] <= 1e-10


def test_partition_rejects_non_projector(capsys, tmp_path):
    f = _write(tmp_path, "t.json", RNG.normal(size=(3, 3)))
    p = _write(tmp_path, "p.json", np.diag([1.0, 0.4, 0.0]))
    code, _ = _run(capsys, ["partition", "--input", f, "--pm", p, "--pn", p])
    assert code == 2


def test_shorted_success(capsys, tmp_path):
    f = _write(tmp_path, "t.json", [[2.0, 1.0], [1.0, 1.0]])
    p = _write(tmp_path, "p.json", np.diag([1.0, 0.0]))
    code, payload = _run_json(capsys, ["shorted", "--input", f, "--pm", p, "--pn", p])
    assert code == 0
    _check_envelope(payload, "shorted")
    assert payload["mode"] == "complementable"
    assert payload["core"]["data"][0][0] == pytest.approx(1.0, abs=1e-12)
    assert payload["cross_gap"] <= 1e-10
    assert payload["report"]["range_equal"] is True
    assert payload["report"]["kernel_equal"] is True
    assert payload["witnesses"]["solvable"] == [True] * 4
    assert payload["redundancy"]["redundant_within_tol"] is True


def test_shorted_weak_failure(capsys, tmp_path):
    t = np.zeros((3, 3))
    t[1, 0] = 1.0
    f = _write(tmp_path, "t.json", t)
    p = _write(tmp_path, "p.json", np.diag([1.0, 0.0, 0.0]))
    code, payload = _run_json(capsys, ["shorted", "--input", f, "--pm", p, "--pn", p])
    assert code == 3
    assert payload["failing_systems"] == [1, 3]
    assert payload["system_solvable"] == [False, True, False, True]


# --- parallel family -----------------------------------------------------------------------


def test_parallel_sum_scalars(capsys, tmp_path):
    a = _write(tmp_path, "a.json", [[2.0]])
    b = _write(tmp_path, "b.json", [[2.0]])
    code, payload = _run_json(capsys, ["parallel-sum", "--a", a, "--b", b])
    assert code == 0
    _check_envelope(payload, "parallel-sum")
    assert payload["value"]["data"] == [[1.0, 0.0]]
    assert payload["route"] == "shorted_block"
    assert set(payload["regularized"]) == {"0.0001", "1e-06"}


def test_parallel_sum_deterministic_bytes(capsys, tmp_path):
    a = _write(tmp_path, "a.json", [[2.0, 1.0], [1.0, 1.0]])
    b = _write(tmp_path, "b.json", np.eye(2))
    _, out1 = _run(capsys, ["parallel-sum", "--a", a, "--b", b])
    _, out2 = _run(capsys, ["parallel-sum", "--a", a, "--b", b])
    assert out1 == out2


def test_parallel_sum_rejects_indefinite(capsys, tmp_path):
    a = _write(tmp_path, "a.json", np.diag([1.0, -1.0]))
    b = _write(tmp_path, "b.json", np.eye(2))
    code, _ = _run(capsys, ["parallel-sum", "--a", a, "--b", b])
    assert code == 2


def test_parallel_eq(capsys, tmp_path):
    a = _write(tmp_path, "a.json", np.eye(3))
    b = _write(tmp_path, "b.json", np.eye(3))
    code, payload = _run_json(capsys, ["parallel-eq", "--a", a, "--b", b])
    assert code == 0
    assert payload["norm"] == pytest.approx(0.5, abs=1e-12)
    x = np.array(payload["X"]["data"])[:, 0].reshape(3, 3)
    assert np.allclose(x, np.eye(3) / 2.0, atol=1e-12)
    assert payload["diagnostics"]["equation_residual"] <= 1e-10


def test_hansen_probe_mode_deterministic(capsys, tmp_path):
    a = _write(tmp_path, "a.json", [[2.0, 1.0], [1.0, 1.0]])
    b = _write(tmp_path, "b.json", np.eye(2))
    argv = ["hansen-check", "--a", a, "--b", b, "--probes", "50", "--seed", "7"]
    code, out1 = _run(capsys, argv)
    _, out2 = _run(capsys, argv)
    assert code == 0
    assert out1 == out2
    payload = json.loads(out1)
    assert payload["mode"] == "probes"
    assert payload["probes"] == 50
    assert payload["seed"] == 7
    assert payload["lambda_min_worst"] >= -1e-8 * 4.0


def test_hansen_explicit_probe(capsys, tmp_path):
    a = _write(tmp_path, "a.json", np.eye(2))
    b = _write(tmp_path, "b.json", np.eye(2))
    c = _write(tmp_path, "c.json", np.eye(2) / 2.0)
    code, payload = _run_json(capsys, ["hansen-check", "--a", a, "--b", b, "--c", c])
    assert code == 0
    assert payload["mode"] == "explicit"
    # optimal probe: equality up to round-off
    assert abs(payload["lambda_min"]) <= 1e-12


def test_lemma69_command(capsys, tmp_path):
    x = _write(tmp_path, "x.json", np.eye(3))
    y = _write(tmp_path, "y.json", np.eye(3) / 2.0)
    code, payload = _run_json(capsys, ["lemma69", "--x", x, "--y", y])
    assert code == 0
    assert payload["lambda_min"] == pytest.approx(0.0, abs=1e-14)
    assert payload["equality_gap"] == pytest.approx(0.0, abs=1e-14)
    x2 = _write(tmp_path, "x2.json", np.diag([1.0, 0.0, 0.0]))
    code, _ = _run(capsys, ["lemma69", "--x", x2, "--y", y])
    assert code == 2


# --- lab -------------------------------------------------------------------------------------


def test_lab_sweep_csv(capsys, tmp_path):
    target = tmp_path / "sweep.csv"
    code, _ = _run(capsys, ["lab", "sweep", "--dims", "4,8", "--csv", str(target)])
    assert code == 0
    lines = target.read_text().splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("d,norm_strong_solution")
    assert lines[1].split(",")[0] == "4"
    assert lines[2].split(",")[0] == "8"


def test_lab_sweep_deterministic_and_thread_invariant(capsys, tmp_path, monkeypatch):
    argv = ["lab", "sweep", "--dims", "4,8"]
    _, out1 = _run(capsys, argv)
    _, out2 = _run(capsys, argv)
    assert out1 == out2
    monkeypatch.setenv("OPSHORT_THREADS", "2")
    _, out3 = _run(capsys, argv)
    assert out3 == out1


def test_lab_sweep_rejects_bad_dims(capsys):
    code, _ = _run(capsys, ["lab", "sweep", "--dims", "8,4"])
    assert code == 2


def test_lab_verify(capsys):
    code, payload = _run_json(capsys, ["lab", "verify", "--dim", "8"])
    assert code == 0
    _check_envelope(payload, "lab-verify")
    assert payload["passed"] is True
    assert payload["d"] == 8
    assert all(v <= 1e-9 for v in payload["residuals"].values())


# --- installed entry point ----------------------------------------------------------------


def test_console_script(tmp_path):
    exe = shutil.which("opshort")
    assert exe, "opshort console script is not on PATH"
    x = _write(tmp_path, "x.json", np.eye(2))
    y = _write(tmp_path, "y.json", np.eye(2) / 2.0)
    proc = subprocess.run(
        [exe, "lemma69", "--x", x, "--y", y],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    payload = json.loads(proc.stdout)
    assert payload["lambda_min"] == pytest.approx(0.0, abs=1e-14)
