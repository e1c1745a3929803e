import math

import numpy as np
import pytest

from qstreak.cli import EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK, EXIT_VERIFY, main
from qstreak.config import ConfigError, RunConfig, config_from_header
from qstreak.traces import read_header, read_moments, read_spectrogram

BENCH_CFG = """\
seed = 1
[light]
mode = macroscopic
total_intensity = 1e12
ratio = 0.3333333333333333
phi = 0.7853981633974483
theta = 1.5707963267948966
[ir]
wavelength_nm = 800
cycles = 8
[xuv]
photon_energy_ev = 54
intensity = 1e12
duration_as = 250
"""

# small box and a 2-cycle IR pulse keep TDSE commands to seconds
TINY_TDSE = """\
[tdse]
x_min = -200
x_max = 200
n_points = 2048
absorber_width = 40
drift = 300
[scan]
tau_start_cycles = -0.25
tau_stop_cycles = 0.25
tau_count = 3
nodes = 1
"""


@pytest.fixture
def cfg_path(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(BENCH_CFG)
    return path


def write(tmp_path, text, name="c.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_config_round_trip_default():
    cfg = RunConfig()
    assert RunConfig.from_text(cfg.to_text()) == cfg


@pytest.mark.parametrize("text", [
    BENCH_CFG,
    "[light]\nmode = exact\nalpha_mag = 3\nr = 0.5\ne_vac = 1e-3\n",
    "[light]\ncoherent_intensity = 2.5e11\nsqueezed_intensity = 7.5e11\n[ir]\nduration_fs = 21.3\n",
])
def test_config_round_trip(text):
    cfg = RunConfig.from_text(text)
    assert RunConfig.from_text(cfg.to_text()) == cfg
    assert RunConfig.from_text(RunConfig.from_text(cfg.to_text()).to_text()) == cfg


def test_config_units_converted():
    cfg = RunConfig.from_text(BENCH_CFG)
    assert cfg.omega == pytest.approx(0.05695, abs=1e-5)
    assert cfg.xuv_pulse().photon_energy == pytest.approx(1.9845, abs=1e-4)
    assert cfg.light_state().e_coh / cfg.omega == pytest.approx(4.687e-2, rel=1e-3)
    assert cfg.ir_envelope().duration == pytest.approx(8 * 2 * math.pi / cfg.omega)
    h = cfg.header()
    assert h["xuv.photon_energy_ev"] == 54.0 and h["au.xuv_photon_energy"] == pytest.approx(1.98446, abs=1e-5)


@pytest.mark.parametrize("text", [
    "[light]\nmode = exact\nalpha_mag = 3\nr = 0.5\n",
    "[light]\nmode = exact\ntotal_intensity = 1e12\nalpha_mag = 3\nr = 0.5\ne_vac = 1e-3\n",
    "[light]\ncoherent_intensity = 1e11\nsqueezed_intensity = 1e11\ntotal_intensity = 1e12\n",
    "[light]\nmode = quantum\n",
    "[light]\ntotal_intensity = -1\n",
    "[tdse]\nabsorber_width = 400\n",
    "[tdse]\nn_points = 1000\n",
    "[tdse]\nscheme = rk4\n",
    "[ir]\ncycles = 8\nduration_fs = 20\n",
    "[scan]\nwindow_half_width = 2\n",
    "[bogus]\nx = 1\n",
    "[light]\nphi = abc\n",
    "colour = blue\n",
])
def test_config_rejects(text):
    with pytest.raises(ConfigError):
        RunConfig.from_text(text)


def test_oracle_command_and_header_audit(tmp_path, cfg_path):
    assert main(["oracle", "--config", str(cfg_path), "--out", str(tmp_path)]) == EXIT_OK
    path = tmp_path / "oracle_moments.dat"
    trace = read_moments(path)
    cfg = RunConfig.load(cfg_path).with_(out=str(tmp_path))
    assert config_from_header(read_header(path)) == cfg
    # variance minimum where 2 w tau = theta
    tmin = cfg.light.theta / (2 * cfg.omega)
    k = np.argmin(np.abs(trace.tau - tmin))
    assert trace.variance[k] == pytest.approx(trace.variance[np.abs(trace.tau - tmin) < 2].min())


def test_oracle_coherent_flat_variance(tmp_path):
    cfg = write(tmp_path, "[light]\nmode = exact\nalpha_mag = 100\nr = 0\ne_vac = 1e-5\n[ir]\nenvelope = flattop\n"
                          "cycles = 1000\n")
    assert main(["oracle", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
    v = read_moments(tmp_path / "oracle_moments.dat").variance
    assert np.ptp(v) < 1e-12 * v.mean()


def test_oracle_mc_seeded(tmp_path, cfg_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["oracle", "--config", str(cfg_path), "--out", str(d), "--mc", "100000", "--seed", "1"]) == 0
    ta, tb = read_moments(a / "oracle_moments.dat"), read_moments(b / "oracle_moments.dat")
    assert ta.mean_err is not None
    np.testing.assert_array_equal(ta.variance, tb.variance)
    strip = lambda p: [l for l in p.read_text().splitlines() if not l.startswith("# out =")]
    assert strip(a / "oracle_moments.dat") == strip(b / "oracle_moments.dat")


def test_oracle_variants(tmp_path, cfg_path):
    assert main(["oracle", "--config", str(cfg_path), "--out", str(tmp_path / "f"), "--focal", "32"]) == 0
    assert main(["oracle", "--config", str(cfg_path), "--out", str(tmp_path / "c"), "--cep", "0.05"]) == 0
    assert read_header(tmp_path / "c" / "oracle_moments.dat")["source"] == "oracle-cep"


def test_fit_round_trip_and_missing_reference(tmp_path, cfg_path, capsys):
    main(["oracle", "--config", str(cfg_path), "--out", str(tmp_path)])
    capsys.readouterr()
    assert main(["fit", "--config", str(cfg_path), "--out", str(tmp_path),
                 "--moments", str(tmp_path / "oracle_moments.dat")]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("warning = no coherent reference given; delta assumed 0")
    values = dict(line.split(" = ", 1) for line in out.splitlines() if " = " in line and not line.startswith("warn"))
    assert float(values["phi"]) == pytest.approx(math.pi / 4, abs=1e-9)
    assert float(values["theta"]) == pytest.approx(math.pi / 2, abs=1e-9)
    assert (tmp_path / "report.txt").exists()


def test_fit_with_reference(tmp_path, cfg_path, capsys):
    ref_cfg = write(tmp_path, BENCH_CFG.replace("ratio = 0.3333333333333333", "ratio = inf")
                    .replace("phi = 0.7853981633974483", "phi = 0.0"), "ref.cfg")
    main(["oracle", "--config", str(ref_cfg), "--out", str(tmp_path / "ref")])
    main(["oracle", "--config", str(cfg_path), "--out", str(tmp_path / "sq")])
    capsys.readouterr()
    assert main(["fit", "--config", str(cfg_path), "--out", str(tmp_path), "--moments",
                 str(tmp_path / "sq" / "oracle_moments.dat"), "--reference",
                 str(tmp_path / "ref" / "oracle_moments.dat")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "warning = " not in out
    delta = float(next(line for line in out.splitlines() if line.startswith("delta = ")).split(" = ")[1])
    assert abs(delta) < 1e-8


def test_fit_rejects_mismatched_omega(tmp_path, cfg_path):
    main(["oracle", "--config", str(cfg_path), "--out", str(tmp_path)])
    other = write(tmp_path, BENCH_CFG.replace("wavelength_nm = 800", "wavelength_nm = 1600"), "o.cfg")
    assert main(["fit", "--config", str(other), "--out", str(tmp_path),
                 "--moments", str(tmp_path / "oracle_moments.dat")]) == EXIT_INVALID


def test_invalid_config_exit_code(tmp_path):
    bad = write(tmp_path, "[tdse]\nabsorber_width = 400\n")
    assert main(["ground", "--config", str(bad)]) == EXIT_INVALID
    assert main(["ground", "--config", str(tmp_path / "missing.cfg")]) == EXIT_INVALID


def test_ground_command(tmp_path, capsys):
    cfg = write(tmp_path, TINY_TDSE)
    assert main(["ground", "--config", str(cfg)]) == EXIT_OK
    first = capsys.readouterr().out
    e = float(first.splitlines()[0].split(" = ")[1])
    assert e == pytest.approx(-0.5, abs=1e-3)
    assert main(["ground", "--config", str(cfg)]) == EXIT_OK
    assert capsys.readouterr().out == first


def test_ground_nonconvergence_exit_code(tmp_path, monkeypatch):
    import qstreak.cli as cli
    from qstreak.tdse import NumericalError

    def fail(grid):
        raise NumericalError("ground state not converged")
    monkeypatch.setattr(cli, "ground_state", fail)
    assert main(["ground", "--config", str(write(tmp_path, TINY_TDSE))]) == EXIT_NUMERICAL


def test_trace_and_moments_commands(tmp_path):
    cfg = write(tmp_path, "[light]\nmode = macroscopic\ncoherent_intensity = 0\nsqueezed_intensity = 0\n" + TINY_TDSE)
    assert main(["trace", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
    spec = read_spectrogram(tmp_path / "spectrogram.dat")
    # no IR field: the spectrogram does not depend on the delay
    np.testing.assert_allclose(spec.values, spec.values[:1].repeat(len(spec.tau_grid), 0), rtol=0,
                               atol=1e-6 * spec.values.max())
    assert spec.metadata["kind"] == "state"
    trace = read_moments(tmp_path / "moments.dat")
    assert np.max(np.abs(trace.mean_shift)) < 1e-6
    (tmp_path / "moments.dat").unlink()
    assert main(["moments", "--config", str(cfg), "--out", str(tmp_path),
                 "--spectrogram", str(tmp_path / "spectrogram.dat")]) == EXIT_OK
    again = read_moments(tmp_path / "moments.dat")
    np.testing.assert_allclose(again.variance, trace.variance, rtol=1e-12)


def test_verify_fast_and_mutation(tmp_path, cfg_path, capsys):
    assert main(["verify", "--config", str(cfg_path), "--fast"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "[PASS] lightmodel" in out and "[PASS] oracle" in out and "tdse" not in out
    assert main(["verify", "--config", str(cfg_path), "--fast", "--mutate", "kernel-sign"]) == EXIT_VERIFY
    out = capsys.readouterr().out
    assert "violated: noise_kernel equals the sampled covariance" in out
