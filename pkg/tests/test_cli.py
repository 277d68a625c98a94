"""CLI tests: file formats, config round trip, determinism, exit codes."""
import numpy as np
import pytest

from qseisinv.cli import main
from qseisinv.textio import (
    ConfigError,
    InputFileError,
    dump_config,
    parse_config_text,
    read_matrix,
    resolve_config,
    write_matrix,
)

WEDGE_CFG = """
mode = post-stack-1d
epochs = 40
reg_weight = 0.05
prior_window = 9
wavelet_frequency = 60
dt = 0.002
bounds_margin = 0.1
zp_values = 6.0,8.5,6.0
rng_seed = 0
"""


@pytest.fixture()
def wedge_config(tmp_path):
    path = tmp_path / "wedge.cfg"
    path.write_text(WEDGE_CFG)
    return path


# ---------------------------------------------------------------------------
# delimited text round trip
# ---------------------------------------------------------------------------

def test_matrix_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    arr = rng.normal(size=(17, 3))
    path = tmp_path / "m.csv"
    write_matrix(path, arr)
    header = path.read_text().splitlines()[0]
    assert header == "# rows=17 cols=3"
    assert np.array_equal(read_matrix(path), arr)  # %.17g is lossless


def test_matrix_1d_written_as_column(tmp_path):
    path = tmp_path / "v.csv"
    write_matrix(path, np.arange(4.0))
    out = read_matrix(path)
    assert out.shape == (4, 1)


def test_read_matrix_errors_name_file_and_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# rows=2 cols=2\n1.0,2.0\n3.0\n")
    with pytest.raises(InputFileError, match=r"bad.csv:3"):
        read_matrix(path)
    with pytest.raises(InputFileError, match="nope.csv"):
        read_matrix(tmp_path / "nope.csv")


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def test_config_round_trip_materializes_defaults():
    resolved = resolve_config(parse_config_text("epochs = 7\nangles = 5,15,25"))
    assert resolved["epochs"] == 7
    assert resolved["angles"] == (5.0, 15.0, 25.0)
    assert resolved["learning_rate"] == 0.1  # default materialized
    again = resolve_config(parse_config_text(dump_config(resolved)))
    assert again == resolved


def test_config_unknown_key_is_error():
    with pytest.raises(ConfigError, match="bogus"):
        parse_config_text("bogus = 1")


def test_config_bad_value_is_error():
    with pytest.raises(ConfigError, match="epochs"):
        resolve_config(parse_config_text("epochs = many"))


# ---------------------------------------------------------------------------
# end-to-end commands
# ---------------------------------------------------------------------------

def run_cli(*argv):
    return main([str(a) for a in argv])


def test_synth_then_invert_then_forward(tmp_path, wedge_config, capsys):
    data = tmp_path / "data"
    out = tmp_path / "run"
    assert run_cli("synth", "--config", wedge_config, "--out", data) == 0
    for name in ("observed.csv", "truth_zp.csv", "prior_zp.csv", "manifest.txt",
                 "config_resolved.cfg", "model.png", "gather.png"):
        assert (data / name).exists()
    assert run_cli("invert", "--config", wedge_config, "--data", data, "--out", out) == 0
    for name in ("estimated_zp.csv", "predicted.csv", "loss_curve.csv", "misfit.csv",
                 "manifest.txt", "loss_curve.png", "impedance.png", "seismic.png"):
        assert (out / name).exists()
    est = read_matrix(out / "estimated_zp.csv")
    assert est.shape == (64, 1)
    fwd = tmp_path / "fwd"
    assert run_cli("forward", "--config", wedge_config, "--data", data, "--out", fwd) == 0
    # forward from the truth reproduces the noise-free observed data
    assert np.allclose(
        read_matrix(fwd / "predicted.csv"), read_matrix(data / "observed.csv"), atol=1e-12
    )


def test_invert_reruns_byte_identical(tmp_path, wedge_config):
    data = tmp_path / "data"
    run_cli("synth", "--config", wedge_config, "--out", data, "--no-figures")
    a, b = tmp_path / "a", tmp_path / "b"
    run_cli("invert", "--config", wedge_config, "--data", data, "--out", a,
            "--threads", "1", "--no-figures")
    run_cli("invert", "--config", wedge_config, "--data", data, "--out", b,
            "--threads", "1", "--no-figures")
    for name in ("estimated_zp.csv", "predicted.csv", "loss_curve.csv", "misfit.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_resolved_config_snapshot_reproduces_run(tmp_path, wedge_config):
    data = tmp_path / "data"
    run_cli("synth", "--config", wedge_config, "--out", data, "--no-figures")
    first = tmp_path / "first"
    run_cli("invert", "--config", wedge_config, "--data", data, "--out", first,
            "--no-figures")
    # re-running from the materialized snapshot recorded by the manifest
    # reproduces the numeric outputs bit for bit
    again = tmp_path / "again"
    run_cli("invert", "--config", first / "config_resolved.cfg", "--data", data,
            "--out", again, "--no-figures")
    for name in ("estimated_zp.csv", "predicted.csv", "loss_curve.csv"):
        assert (first / name).read_bytes() == (again / name).read_bytes()


def test_grad_flag_changes_manifest_counts(tmp_path, wedge_config):
    data = tmp_path / "data"
    run_cli("synth", "--config", wedge_config, "--out", data, "--no-figures")
    runs = {}
    for method in ("adjoint", "spsa"):
        out = tmp_path / method
        run_cli("invert", "--config", wedge_config, "--data", data, "--out", out,
                "--grad", method, "--epochs", "5", "--no-figures")
        manifest = dict(
            line.split(" = ", 1)
            for line in (out / "manifest.txt").read_text().splitlines()
        )
        runs[method] = manifest
    assert runs["adjoint"]["evaluations_per_epoch"] != runs["spsa"]["evaluations_per_epoch"]


def test_ansatz_none_records_zero_parameters(tmp_path, wedge_config):
    data = tmp_path / "data"
    run_cli("synth", "--config", wedge_config, "--out", data, "--no-figures")
    out = tmp_path / "none"
    run_cli("invert", "--config", wedge_config, "--data", data, "--out", out,
            "--ansatz", "none", "--epochs", "5", "--no-figures")
    manifest = (out / "manifest.txt").read_text()
    assert "quantum_parameters = 0" in manifest


def test_gradcheck_outputs_table(tmp_path, wedge_config, capsys):
    out = tmp_path / "gc"
    assert run_cli("gradcheck", "--config", wedge_config, "--out", out) == 0
    lines = (out / "gradcheck.csv").read_text().splitlines()
    rows = {l.split(",")[0]: l.split(",") for l in lines[1:]}
    assert float(rows["parameter-shift"][1]) < 1e-10
    assert float(rows["finite-difference"][1]) < 1e-5
    assert int(rows["spsa"][2]) == 2  # 2 x num_samples evaluations
    assert int(rows["adjoint"][2]) == 0


def test_synth_noise_reported(tmp_path):
    cfg = tmp_path / "noisy.cfg"
    cfg.write_text(WEDGE_CFG + "noise_sigma = 0.01\n")
    data = tmp_path / "noisy"
    run_cli("synth", "--config", cfg, "--out", data, "--no-figures")
    manifest = dict(
        line.split(" = ", 1)
        for line in (data / "manifest.txt").read_text().splitlines()
    )
    assert float(manifest["noise_sigma_measured"]) == pytest.approx(0.01, rel=0.3)


def test_exit_codes(tmp_path, wedge_config, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("bogus = 1\n")
    assert run_cli("synth", "--config", bad, "--out", tmp_path / "x") == 1
    assert run_cli(
        "invert", "--config", wedge_config, "--data", tmp_path / "missing",
        "--out", tmp_path / "y",
    ) == 2
    assert run_cli(
        "invert", "--config", wedge_config, "--data", tmp_path, "--out", tmp_path / "z",
        "--epochs", "-3",
    ) == 1


def test_simultaneous_mode_files(tmp_path):
    cfg = tmp_path / "sim.cfg"
    cfg.write_text(
        "mode = simultaneous-2d\nepochs = 25\nn_samples = 16\nn_traces = 16\n"
        "dt = 0.004\nprior_window = 5\nreg_weight = 0.05\nbounds_margin = 0.1\n"
        "zp_values = 6.0,8.5,6.0\n"
    )
    data = tmp_path / "sdata"
    out = tmp_path / "srun"
    assert run_cli("synth", "--config", cfg, "--out", data, "--no-figures") == 0
    assert (data / "observed_s0.csv").exists()
    assert (data / "observed_s1.csv").exists()
    assert run_cli("invert", "--config", cfg, "--data", data, "--out", out,
                   "--no-figures") == 0
    assert (out / "estimated_zp_s0.csv").exists()
    assert (out / "estimated_zp_s1.csv").exists()
    manifest = (out / "manifest.txt").read_text()
    assert "n_qubits = 9" in manifest
