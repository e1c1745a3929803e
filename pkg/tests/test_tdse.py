import math

import numpy as np
import pytest

from qstreak.fields import Envelope, IrRealization, XuvPulse, a_cl_beta
from qstreak.lightmodel import PhaseSpacePoint
from qstreak.tdse import (GridError, InvalidRunError, NumericalError, SpatialGrid, Wavefunction,
                          _plane_wave_phase, extract_spectrum, ground_state, ground_state_diagonalize, propagate, single_run,
                          validate_run)
from qstreak.units import as_to_au, ev_to_hartree, intensity_to_field

from .conftest import OMEGA_800, PERIOD_800

SMALL = SpatialGrid(x_min=-200.0, x_max=200.0, n_points=2048, absorber_width=40.0)
PULSE = XuvPulse(ev_to_hartree(54.0), intensity_to_field(1e12), as_to_au(250.0))
P0 = math.sqrt(2 * (PULSE.photon_energy - 0.5))
WINDOW = (P0 - 0.7, P0 + 0.7)
SHORT_IR = Envelope("cos2", 4 * PERIOD_800)


@pytest.fixture(scope="module")
def ground():
    return ground_state(SMALL)


def mean_momentum(spec):
    return float(np.sum(spec.p_grid * spec.density) / np.sum(spec.density))


def ir_member(field_x, field_y=0.0, env=SHORT_IR):
    return IrRealization(field_x, field_y, env, OMEGA_800)


def test_ground_energy_matches_diagonalization(ground):
    _, energy = ground
    _, _, e_diag = ground_state_diagonalize(SMALL)
    assert energy == pytest.approx(-0.5, abs=1e-3)
    assert energy == pytest.approx(e_diag, abs=1e-6)


def test_ground_state_parity_and_norm(ground):
    psi, _ = ground
    v = psi.values
    np.testing.assert_allclose(v[1:], v[1:][::-1], rtol=0, atol=1e-10)
    assert psi.norm == pytest.approx(1.0, abs=1e-12)


def test_ground_state_shape_matches_diagonalization(ground):
    psi, _ = ground
    x, phi, _ = ground_state_diagonalize(SMALL)
    ours = np.interp(x, SMALL.x, psi.values.real)
    assert np.max(np.abs(ours - phi)) < 1e-4 * np.max(phi)


def test_ground_state_not_converged():
    with pytest.raises(NumericalError):
        ground_state(SMALL, max_iter=20)


def test_stationary_evolution(ground):
    psi, energy = ground
    out = propagate(psi, lambda t: np.zeros_like(t), 0.0, 100.0)
    overlap = np.vdot(psi.values, out.values) * SMALL.dx
    assert abs(overlap) == pytest.approx(1.0, abs=1e-8)
    assert np.angle(overlap) == pytest.approx(math.remainder(-energy * 100.0, 2 * math.pi), abs=1e-3)


def test_norm_conserved_without_absorber(ground):
    psi, _ = ground
    member = ir_member(intensity_to_field(1e13), env=Envelope("cos2", 200.0))
    out = propagate(psi, lambda t: a_cl_beta(member, t), -100.0, 100.0, absorb=False)
    assert out.norm == pytest.approx(1.0, abs=1e-10)


def test_norm_non_increasing_with_absorber(ground):
    psi, _ = ground
    member = ir_member(intensity_to_field(1e12))
    log = []
    final = propagate(psi, lambda t: a_cl_beta(member, t) + np.where(np.abs(t) < 20, 0.05 * np.cos(2 * t), 0), -30.0,
                      200.0, log=log)
    norms = np.array([n for _, n in log])
    assert np.all(np.diff(norms) <= 1e-14)
    assert final.norm <= 1.0


def test_nonfinite_detected(ground):
    psi, _ = ground
    with pytest.raises(NumericalError):
        propagate(psi, lambda t: np.full_like(t, np.nan), 0.0, 1.0)


def test_free_gaussian_mean_momentum():
    x = SMALL.x
    p0, width = 1.5, 8.0
    values = np.exp(-((x - 110.0) / width) ** 2 / 2 + 1j * p0 * x).astype(complex)
    values /= math.sqrt(np.sum(np.abs(values) ** 2) * SMALL.dx)
    spec = extract_spectrum(Wavefunction(SMALL, values), (p0 - 1.0, p0 + 1.0))
    assert mean_momentum(spec) == pytest.approx(p0, abs=1e-6)
    assert spec.window_yield == pytest.approx(1.0, abs=1e-6)


def test_extract_rejects_packet_at_the_core(ground):
    psi, _ = ground
    kicked = Wavefunction(SMALL, psi.values * np.exp(1j * P0 * SMALL.x))
    with pytest.raises(InvalidRunError):
        extract_spectrum(kicked, WINDOW)


def test_extract_rejects_window_outside_grid(ground):
    psi, _ = ground
    with pytest.raises(GridError):
        extract_spectrum(psi, (0.0, 2 * SMALL.p_max))


def test_xuv_only_spectrum(ground):
    psi, _ = ground
    spec = single_run(SMALL, psi, PULSE, ir_member(0.0), 0.0, WINDOW)
    assert mean_momentum(spec) == pytest.approx(P0, abs=0.05)
    assert 0 < spec.window_yield < 1
    assert np.all(spec.density >= 0)
    shifted = single_run(SMALL, psi, PULSE, ir_member(0.0), 40 * SMALL.dt, WINDOW)
    np.testing.assert_allclose(shifted.density, spec.density, rtol=0, atol=1e-6 * spec.density.max())


def test_delay_translation(ground):
    psi, _ = ground
    shift = 200 * SMALL.dt
    e = intensity_to_field(1e12)
    a = single_run(SMALL, psi, PULSE, ir_member(e), 30.0, WINDOW)
    moved = ir_member(e, env=Envelope("cos2", SHORT_IR.duration, shift))
    # the carrier phase moves with the envelope: cos w(t - shift)
    c, s = math.cos(OMEGA_800 * shift), math.sin(OMEGA_800 * shift)
    moved = IrRealization(e * c, e * s, moved.envelope, OMEGA_800)
    b = single_run(SMALL, psi, PULSE, moved, 30.0 + shift, WINDOW)
    np.testing.assert_allclose(b.density, a.density, rtol=0, atol=1e-8 * a.density.max())


def test_coherent_mean_shift_follows_vector_potential(ground):
    psi, _ = ground
    e = intensity_to_field(1e12)
    member = ir_member(e)
    ref = mean_momentum(single_run(SMALL, psi, PULSE, ir_member(0.0), 0.0, WINDOW))
    shift = mean_momentum(single_run(SMALL, psi, PULSE, member, 0.0, WINDOW)) - ref
    expected = -float(a_cl_beta(member, 0.0))
    assert shift == pytest.approx(expected, rel=0.05)


def test_sign_flip_mirrors_shift(ground):
    psi, _ = ground
    e = intensity_to_field(1e11)
    ref = mean_momentum(single_run(SMALL, psi, PULSE, ir_member(0.0), 0.0, WINDOW))
    spec = single_run(SMALL, psi, PULSE, [ir_member(e), ir_member(-e)], 0.0, WINDOW)
    plus, minus = (float(np.sum(spec.p_grid * d) / np.sum(d)) - ref for d in spec.density)
    amplitude = e / OMEGA_800
    assert abs(plus + minus) < 0.02 * amplitude


def test_batch_matches_single(ground):
    psi, _ = ground
    e = intensity_to_field(1e12)
    members = [ir_member(e, 0.3 * e), ir_member(-0.5 * e, e)]
    batch = single_run(SMALL, psi, PULSE, members, 12.0, WINDOW)
    for k, m in enumerate(members):
        one = single_run(SMALL, psi, PULSE, m, 12.0, WINDOW)
        np.testing.assert_allclose(batch.density[k], one.density, rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("kwargs", [dict(n_points=1000), dict(scheme="rk4"), dict(absorber_width=120.0), dict(dt=0.0),
                                    dict(x_mask=170.0), dict(x_min=10.0, x_max=10.0)])
def test_invalid_grid(kwargs):
    with pytest.raises(GridError):
        SMALL.with_(**kwargs)


def test_validate_run():
    with pytest.raises(GridError):
        validate_run(SMALL.with_(dt=0.2), PULSE, WINDOW)
    with pytest.raises(GridError):
        validate_run(SpatialGrid(x_min=-200, x_max=200, n_points=256, absorber_width=40), PULSE, WINDOW)
    validate_run(SMALL, PULSE, WINDOW)


def test_wavefunction_dump(tmp_path, ground):
    psi, _ = ground
    psi.save(tmp_path / "psi.npz")
    data = np.load(tmp_path / "psi.npz")
    np.testing.assert_array_equal(data["values"], psi.values)
    np.testing.assert_array_equal(data["x"], SMALL.x)


def test_ground_state_is_stationary_under_real_time_steps(ground):
    # continuum admixture would leave the core and show up outside the mask
    psi, _ = ground
    out = propagate(psi, lambda t: np.zeros_like(t), 0.0, 60.0, absorb=False)
    band = np.abs(np.fft.fft(out.values * SMALL.bound_mask)) ** 2
    before = np.abs(np.fft.fft(psi.values * SMALL.bound_mask)) ** 2
    near = np.abs(SMALL.p - P0) < 0.7
    assert band[near].sum() < 2 * before[near].sum() + 1e-20


def test_extraction_independent_of_drift(ground):
    psi, _ = ground
    member = ir_member(intensity_to_field(1e12), env=Envelope("cos2", 8 * PERIOD_800))
    a = single_run(SMALL, psi, PULSE, member, -150.0, WINDOW, drift=500.0)
    b = single_run(SMALL, psi, PULSE, member, -150.0, WINDOW, drift=560.0)
    assert mean_momentum(a) == pytest.approx(mean_momentum(b), abs=1e-6)


@pytest.mark.parametrize("n", [2, 8, 512, 4096])
def test_plane_wave_phase_matches_direct_exponential(n):
    dp = 2 * math.pi / 400.0
    p = dp * np.round(np.fft.fftfreq(n, 1.0 / n))
    shift, offset = np.array([0.37, -2.1]), np.array([0.5, -3.0])
    direct = np.exp(-1j * (p * shift[:, None] + offset[:, None]))
    np.testing.assert_allclose(_plane_wave_phase(n, dp, shift, offset), direct, rtol=0, atol=1e-13)
    np.testing.assert_allclose(_plane_wave_phase(n, dp, 0.37), direct[0] * np.exp(0.5j), rtol=0, atol=1e-13)


def _packet_after(grid, t_end=6.0):
    x = grid.x
    packet = np.exp(-((x + 3.0) ** 2) / 4.0 + 1.2j * x).astype(complex)
    packet /= math.sqrt(np.sum(np.abs(packet) ** 2) * grid.dx)
    field = lambda t: 0.05 * np.sin(0.7 * np.asarray(t))
    return propagate(Wavefunction(grid, packet), field, 0.0, t_end, absorb=False).values


@pytest.mark.parametrize("scheme, order", [("strang", 2), ("yoshida4", 4)])
def test_convergence_order(scheme, order):
    grid = SpatialGrid(x_min=-100.0, x_max=100.0, n_points=1024, absorber_width=20.0, scheme=scheme)
    exact = _packet_after(grid.with_(scheme="yoshida4", dt=0.005))
    errors = [np.max(np.abs(_packet_after(grid.with_(dt=dt)) - exact)) for dt in (0.1, 0.05)]
    assert math.log2(errors[0] / errors[1]) == pytest.approx(order, abs=0.3)
