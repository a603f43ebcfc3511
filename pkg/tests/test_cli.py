import json
import subprocess
import sys

import numpy as np
import pytest

from blockamp.cli import apply_overrides, canonical_hash, main, parse_snr_grid, task_seed
from blockamp.model import load_instance_dump


def run_cli(args, cwd=None):
    return subprocess.run([sys.executable, "-m", "blockamp.cli", *args],
                          capture_output=True, text=True, cwd=cwd)


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


AMP_CONFIG = {
    "n": 120,
    "seeds": 2,
    "snr_grid": [0.7, 1.8],
    "prior": {"kind": "rademacher"},
    "profile": {"delta": [[1.0, 3.0], [3.0, 2.0]], "fractions": [0.5, 0.5]},
    "max_iters": 6,
    "tol": 0.0,
    "init": {"kind": "informed", "eps": 0.5},
    "seed": 5,
}


def read_outputs(outdir, names):
    return {name: (outdir / name).read_bytes() for name in names}


# ---------------------------------------------------------------------------
# plumbing helpers
# ---------------------------------------------------------------------------

def test_canonical_hash_order_independent():
    assert canonical_hash({"a": 1, "b": 2}) == canonical_hash({"b": 2, "a": 1})
    assert canonical_hash({"a": 1}) != canonical_hash({"a": 2})
    assert len(canonical_hash({})) == 12


def test_apply_overrides_dotted_paths():
    config = {"init": {"kind": "noise"}}
    apply_overrides(config, ["init.eps=0.25", "n=100", "prior.kind=rademacher"])
    assert config == {"init": {"kind": "noise", "eps": 0.25}, "n": 100,
                      "prior": {"kind": "rademacher"}}


def test_parse_snr_grid_forms():
    assert parse_snr_grid({"snr": 1.5}) == [1.5]
    assert parse_snr_grid({"snr_grid": [0.7, 1.8]}) == [0.7, 1.8]
    grid = parse_snr_grid({"snr_grid": {"start": 0.5, "stop": 1.0, "step": 0.25}})
    assert grid == [0.5, 0.75, 1.0]


def test_task_seed_depends_on_index_not_schedule():
    assert task_seed(5, 0) != task_seed(5, 1)
    assert task_seed(5, 3) == task_seed(5, 3)
    assert task_seed(6, 0) != task_seed(5, 0)


# ---------------------------------------------------------------------------
# determinism
# ---------------------------------------------------------------------------

def test_amp_byte_identical_across_runs_and_threads(tmp_path):
    cfg = write_config(tmp_path, AMP_CONFIG)
    outputs = {}
    for label, extra in (("a", ["--threads", "1"]), ("b", ["--threads", "1"]),
                         ("c", ["--threads", "8"])):
        outdir = tmp_path / label
        proc = run_cli(["amp", cfg, "--out", str(outdir), *extra])
        assert proc.returncode == 0, proc.stderr
        outputs[label] = (outdir / "amp.csv").read_bytes()
    assert outputs["a"] == outputs["b"] == outputs["c"]


def test_spectrum_byte_identical_across_threads(tmp_path):
    cfg = write_config(tmp_path, {
        "n": 150, "seeds": 3, "snr_grid": [0.7, 1.8],
        "profile": {"delta": [[1.0, 3.0], [3.0, 2.0]]}, "seed": 1,
    })
    blobs = []
    for label, threads in (("a", "1"), ("b", "8")):
        outdir = tmp_path / label
        proc = run_cli(["spectrum", cfg, "--out", str(outdir), "--threads", threads])
        assert proc.returncode == 0, proc.stderr
        blobs.append((outdir / "spectrum_report.csv").read_bytes())
    assert blobs[0] == blobs[1]


def test_se_byte_identical_across_runs(tmp_path):
    cfg = write_config(tmp_path, {"snr_grid": [0.8, 1.5], "t_max": 20, "seed": 2,
                                  "prior": {"kind": "gaussian"}})
    blobs = []
    for label in ("a", "b"):
        outdir = tmp_path / label
        proc = run_cli(["se", cfg, "--out", str(outdir)])
        assert proc.returncode == 0, proc.stderr
        blobs.append(read_outputs(outdir, ["se_trajectory.csv", "se_fixed_points.csv"]))
    assert blobs[0] == blobs[1]


# ---------------------------------------------------------------------------
# outputs
# ---------------------------------------------------------------------------

def test_amp_csv_contents(tmp_path):
    cfg = write_config(tmp_path, AMP_CONFIG)
    outdir = tmp_path / "out"
    assert run_cli(["amp", cfg, "--out", str(outdir)]).returncode == 0
    lines = (outdir / "amp.csv").read_text().splitlines()
    assert lines[0].startswith("# blockamp=") and "config=" in lines[0] and "seed=5" in lines[0]
    assert lines[1] == ("row,snr,seed,t,block,mu_hat,iterate_mu,"
                        "sigma2_hat,mse,se_mse,converged")
    rows = [line.split(",") for line in lines[2:]]
    # 2 snr x 2 seeds x (6 iters + 1 summary) x 2 blocks
    assert len(rows) == 2 * 2 * 7 * 2
    summaries = [r for r in rows if r[0] == "summary"]
    assert len(summaries) == 8
    for r in summaries:
        assert r[9] != ""  # se_mse filled on summary rows
        float(r[5]), float(r[8])


def test_se_fixed_point_values(tmp_path):
    cfg = write_config(tmp_path, {"snr": 2.0, "prior": {"kind": "gaussian"}, "seed": 0})
    outdir = tmp_path / "out"
    assert run_cli(["se", cfg, "--out", str(outdir)]).returncode == 0
    lines = (outdir / "se_fixed_points.csv").read_text().splitlines()
    rows = [line.split(",") for line in lines[2:]]
    mu_by_mode = {r[3]: float(r[2]) for r in rows}
    assert mu_by_mode["uninformed"] == pytest.approx(1.0, abs=1e-6)
    assert mu_by_mode["informed"] == pytest.approx(1.0, abs=1e-6)


def test_se_sparse_branches_disagree(tmp_path):
    cfg = write_config(tmp_path, {
        "snr": 0.9, "prior": {"kind": "sparse_rademacher", "rho": 0.02},
        "gh_nodes": 121, "t_max": 5, "seed": 0,
    })
    outdir = tmp_path / "out"
    assert run_cli(["se", cfg, "--out", str(outdir)]).returncode == 0
    lines = (outdir / "se_fixed_points.csv").read_text().splitlines()
    rows = [line.split(",") for line in lines[2:]]
    mu_by_mode = {r[3]: float(r[2]) for r in rows}
    assert mu_by_mode["uninformed"] <= 1e-3
    assert mu_by_mode["informed"] >= 0.2


def test_gen_roundtrip(tmp_path):
    cfg = write_config(tmp_path, {"n": 50, "snr": 1.8, "seed": 9,
                                  "profile": {"delta": [[1.0, 3.0], [3.0, 2.0]]}})
    outdir = tmp_path / "out"
    assert run_cli(["gen", cfg, "--out", str(outdir)]).returncode == 0
    header, spike, y = load_instance_dump(outdir / "instance.bin")
    assert header["n"] == 50 and header["q"] == 2
    assert np.array_equal(y, y.T)
    csv_spike = np.loadtxt(outdir / "spike.csv", delimiter=",", skiprows=1, usecols=2)
    assert np.array_equal(csv_spike, spike)


def test_spectrum_full_spectrum_files(tmp_path):
    cfg = write_config(tmp_path, {
        "n": 80, "seeds": 1, "snr": 1.8, "with_spectrum": True,
        "methods": ["tilde"], "seed": 3,
        "profile": {"delta": [[1.0, 3.0], [3.0, 2.0]]},
    })
    outdir = tmp_path / "out"
    assert run_cli(["spectrum", cfg, "--out", str(outdir)]).returncode == 0
    spectra = list(outdir.glob("spectrum_tilde_snr1.8_seed*.csv"))
    assert len(spectra) == 1
    vals = np.loadtxt(spectra[0], delimiter=",", skiprows=2, usecols=1)
    assert vals.size == 80


# ---------------------------------------------------------------------------
# overrides, exit codes, verify
# ---------------------------------------------------------------------------

def test_set_overrides_change_output(tmp_path):
    cfg = write_config(tmp_path, AMP_CONFIG)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert run_cli(["amp", cfg, "--out", str(out1)]).returncode == 0
    assert run_cli(["amp", cfg, "--out", str(out2), "--set", "seed=77"]).returncode == 0
    a, b = (out1 / "amp.csv").read_text(), (out2 / "amp.csv").read_text()
    assert a != b
    assert "seed=77" in b.splitlines()[0]


def test_exit_code_config_errors(tmp_path):
    assert run_cli(["amp", str(tmp_path / "missing.json")]).returncode == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli(["se", str(bad)]).returncode == 2
    assert run_cli(["amp", write_config(tmp_path, {**AMP_CONFIG, "n": 0})]).returncode == 2
    empty_grid = write_config(tmp_path, {"n": 10, "snr_grid": []}, "g.json")
    assert run_cli(["amp", empty_grid]).returncode == 2


def test_main_in_process_config_error(capsys, tmp_path):
    assert main(["amp", str(tmp_path / "nope.json")]) == 2
    assert "config error" in capsys.readouterr().err


def test_verify_passes(tmp_path):
    cfg = write_config(tmp_path, {"checks": ["snr_closed_form", "gaussian_fixed_points",
                                             "nishimori_identity"]})
    outdir = tmp_path / "out"
    proc = run_cli(["verify", cfg, "--out", str(outdir)])
    assert proc.returncode == 0, proc.stderr
    assert "snr_closed_form: pass" in proc.stdout
    lines = (outdir / "verify_report.csv").read_text().splitlines()
    assert all(line.split(",")[1] == "pass" for line in lines[2:])
