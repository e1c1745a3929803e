"""Coulomb-free streaking model: closed-form and Monte-Carlo moments.

An electron released at delay ``tau`` with momentum ``p0`` ends up at
``p0 - A_cl(tau) - N(tau)`` where ``N`` is the zero-mean stochastic part of
the vector potential.  Its mean therefore follows the coherent field and
its variance the equal-time noise kernel.  No scattering phase is included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import Envelope, a_cl_coherent
from .lightmodel import (LightState, macroscopic_reduce, noise_kernel, sample_beta)
from .traces import MomentTrace


@dataclass(frozen=True)
class OracleMoments:
    tau: float
    mean_shift: float
    variance: float
    mean_err: float = 0.0
    var_err: float = 0.0


def asymptotic_momentum(p0, a_cl_value, noise_value):
    return p0 - a_cl_value - noise_value


def oracle_mean(state: LightState, env: Envelope, tau, p0: float = 0.0):
    return p0 - a_cl_coherent(state, env, tau)


def oracle_variance(state: LightState, env: Envelope, tau, sigma0_sq: float = 0.0):
    if sigma0_sq < 0:
        raise ValueError("sigma0_sq must be >= 0")
    return noise_kernel(state, env, tau, tau) + sigma0_sq


def oracle_trace(state: LightState, env: Envelope, tau_grid, sigma0_sq: float = 0.0,
                 metadata: dict | None = None) -> MomentTrace:
    tau = np.asarray(tau_grid, dtype=float)
    meta = {"source": "oracle", "omega": state.omega}
    meta.update(metadata or {})
    return MomentTrace(tau, oracle_mean(state, env, tau), oracle_variance(state, env, tau, sigma0_sq),
                       metadata=meta)


def _field_samples(state: LightState, n: int, rng: np.random.Generator) -> np.ndarray:
    """Field-plane amplitudes (E_x, E_y) of ``n`` members drawn from the state; shape (n, 2)."""
    if state.is_macroscopic:
        dist = macroscopic_reduce(state)
        return dist.field(dist.sigma * rng.standard_normal(n))
    return 2.0 * state.e_vac * sample_beta(state, n, rng)


def _member_potential(fields: np.ndarray, env: Envelope, omega: float, t):
    t = np.asarray(t, dtype=float)
    carrier = np.multiply.outer(fields[:, 0], np.cos(omega * t)) + np.multiply.outer(fields[:, 1], np.sin(omega * t))
    return env(t) / omega * carrier


def monte_carlo_moments(state: LightState, env: Envelope, tau, n_samples: int, seed: int,
                        p0: float = 0.0) -> list[OracleMoments]:
    """Sample mean shift and variance of the asymptotic momentum with standard errors.

    The same member draws are used at every delay in ``tau``.
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be >= 1000")
    rng = np.random.default_rng(seed)
    fields = _field_samples(state, n_samples, rng)
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    a_members = _member_potential(fields, env, state.omega, taus)   # (n, n_tau)
    a_coh = a_cl_coherent(state, env, taus)
    noise = a_members - a_coh
    p = asymptotic_momentum(p0, a_coh, noise)
    mean = p.mean(axis=0)
    dev = p - mean
    var = np.mean(dev**2, axis=0) * n_samples / (n_samples - 1)
    mean_err = np.sqrt(var / n_samples)
    m4 = np.mean(dev**4, axis=0)
    var_err = np.sqrt(np.maximum(m4 - var**2, 0.0) / n_samples)
    return [OracleMoments(float(t), float(m - p0), float(v), float(me), float(ve))
            for t, m, v, me, ve in zip(taus, mean, var, mean_err, var_err)]


def monte_carlo_trace(state, env, tau_grid, n_samples, seed, sigma0_sq=0.0) -> MomentTrace:
    rows = monte_carlo_moments(state, env, tau_grid, n_samples, seed)
    return MomentTrace([r.tau for r in rows], [r.mean_shift for r in rows],
                       [r.variance + sigma0_sq for r in rows],
                       [r.mean_err for r in rows], [r.var_err for r in rows],
                       metadata={"source": "oracle-mc", "omega": state.omega,
                                 "n_samples": n_samples, "seed": seed})


def sample_field_covariance(state: LightState, env: Envelope, t, t_prime, n_samples: int, seed: int):
    """Monte-Carlo covariance of the member vector potential at (t, t') and its standard error."""
    rng = np.random.default_rng(seed)
    fields = _field_samples(state, n_samples, rng)
    a = _member_potential(fields, env, state.omega, np.array([t, t_prime]))
    x = a[:, 0] - a[:, 0].mean()
    y = a[:, 1] - a[:, 1].mean()
    prod = x * y
    cov = prod.sum() / (n_samples - 1)
    return float(cov), float(prod.std(ddof=1) / math.sqrt(n_samples))


def gaussian_focal_profile(n_annuli: int = 32, depth: float = 4.0):
    """Gaussian-beam cross-section as (relative intensity, weight) pairs.

    The beam ``I = exp(-2 rho^2 / w^2)`` is cut into ``n_annuli`` rings of
    equal area out to relative intensity ``exp(-depth)``; each ring is
    weighted by area times intensity.
    """
    u = (np.arange(n_annuli) + 0.5) * depth / n_annuli
    rel = np.exp(-u)
    weights = rel / rel.sum()
    return list(zip(rel.tolist(), weights.tolist()))


def focal_average_moments(state: LightState, env: Envelope, tau_grid, focal_profile,
                          sigma0_sq: float = 0.0) -> MomentTrace:
    """Moment trace averaged over a focal intensity distribution.

    Field scales go as the square root of the relative intensity; the
    moments themselves (not the spectra) are averaged.
    """
    weights = np.array([w for _, w in focal_profile], dtype=float)
    if not math.isclose(weights.sum(), 1.0, rel_tol=0, abs_tol=1e-9):
        raise ValueError("focal profile weights must sum to 1")
    tau = np.asarray(tau_grid, dtype=float)
    mean = np.zeros_like(tau)
    var = np.zeros_like(tau)
    for rel, w in focal_profile:
        scaled = state.scaled(math.sqrt(rel))
        mean += w * oracle_mean(scaled, env, tau)
        var += w * oracle_variance(scaled, env, tau, sigma0_sq)
    return MomentTrace(tau, mean, var, metadata={"source": "oracle-focal", "omega": state.omega,
                                                 "annuli": len(focal_profile)})


def cep_jitter_moments(state: LightState, env: Envelope, tau_grid, jitter_sigma_rad: float,
                       n_draws: int, seed: int, sigma0_sq: float = 0.0) -> MomentTrace:
    """Moment trace averaged over carrier-envelope phase jitter.

    A CEP offset ``d`` shifts the coherent phase by ``d`` and the squeezing
    phase by ``2 d``.
    """
    if jitter_sigma_rad < 0:
        raise ValueError("jitter sigma must be >= 0")
    tau = np.asarray(tau_grid, dtype=float)
    if jitter_sigma_rad == 0:
        offsets = np.zeros(1)
    else:
        offsets = np.random.default_rng(seed).normal(0.0, jitter_sigma_rad, n_draws)
    mean = np.zeros_like(tau)
    var = np.zeros_like(tau)
    for d in offsets:
        s = state.with_phases(phi=state.phi + d, theta=state.theta + 2 * d)
        mean += oracle_mean(s, env, tau)
        var += oracle_variance(s, env, tau, sigma0_sq)
    return MomentTrace(tau, mean / len(offsets), var / len(offsets),
                       metadata={"source": "oracle-cep", "omega": state.omega,
                                 "jitter_sigma": jitter_sigma_rad, "n_draws": len(offsets), "seed": seed})


def harmonic_amplitude(tau, values, frequency):
    """Amplitude of the ``frequency`` Fourier component of ``values`` on a uniform delay grid.

    The mean is removed first; for a grid spanning whole periods this is the
    plain DFT coefficient ``2/N |sum y exp(-i f tau)|``.
    """
    tau = np.asarray(tau, dtype=float)
    y = np.asarray(values, dtype=float) - np.mean(values)
    return float(2.0 / len(y) * abs(np.sum(y * np.exp(-1j * frequency * tau))))


def dominant_frequency(tau, values):
    """Angular frequency of the largest nonzero-frequency DFT peak and the peak-to-floor ratio."""
    tau = np.asarray(tau, dtype=float)
    y = np.asarray(values, dtype=float) - np.mean(values)
    spec = np.abs(np.fft.rfft(y))
    freqs = 2.0 * math.pi * np.fft.rfftfreq(len(y), tau[1] - tau[0])
    k = 1 + int(np.argmax(spec[1:]))
    return float(freqs[k]), float(spec[k])
