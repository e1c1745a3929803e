"""Envelopes and vector potentials for the IR ensemble members and the XUV probe."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lightmodel import LightState, MacroscopicDistribution, PhaseSpacePoint
from .units import wavelength_to_omega

__all__ = [
    "Envelope", "XuvPulse", "IrRealization", "envelope_value", "a_xuv",
    "a_cl_beta", "a_cl_coherent", "wavelength_to_omega",
]

SHAPES = ("cos2", "gaussian", "flattop")


@dataclass(frozen=True)
class Envelope:
    """Pulse envelope with unit peak at ``center``.

    ``duration`` is the full support for ``cos2`` and ``flattop`` and the
    FWHM of ``f`` for ``gaussian``.  Flat-top envelopes ramp up and down with
    ``sin^2`` edges of length ``ramp_fraction * duration``.
    """

    shape: str = "cos2"
    duration: float = 1.0
    center: float = 0.0
    ramp_fraction: float = 0.125

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown envelope shape {self.shape!r}; expected one of {SHAPES}")
        if not self.duration > 0:
            raise ValueError("envelope duration must be positive")
        if not 0 < self.ramp_fraction <= 0.5:
            raise ValueError("ramp_fraction must be in (0, 0.5]")

    def __call__(self, t):
        return envelope_value(self, t)

    @property
    def support(self) -> tuple[float, float]:
        """Interval outside of which the envelope is (numerically) zero."""
        if self.shape == "gaussian":
            half = 3.0 * self.duration  # f < 1e-10 beyond
        else:
            half = self.duration / 2
        return self.center - half, self.center + half


def envelope_value(env: Envelope, t):
    u = np.asarray(t, dtype=float) - env.center
    if env.shape == "cos2":
        inside = np.abs(u) < env.duration / 2
        return np.where(inside, np.cos(math.pi * u / env.duration) ** 2, 0.0)
    if env.shape == "gaussian":
        return np.exp(-4.0 * math.log(2.0) * (u / env.duration) ** 2)
    half = env.duration / 2
    ramp = env.ramp_fraction * env.duration
    edge = np.clip((half - np.abs(u)) / ramp, 0.0, 1.0)
    return np.sin(0.5 * math.pi * edge) ** 2


@dataclass(frozen=True)
class XuvPulse:
    """Attosecond probe pulse centred at t = 0; delays are applied as A(t - tau)."""

    photon_energy: float
    peak_field: float
    duration_fwhm: float
    shape: str = "cos2"

    def __post_init__(self):
        if not self.photon_energy > 0:
            raise ValueError("photon energy must be positive")
        if not self.duration_fwhm > 0:
            raise ValueError("XUV duration must be positive")

    @property
    def envelope(self) -> Envelope:
        if self.shape == "cos2":
            # FWHM of cos^2(pi t / T) is T / 2
            return Envelope("cos2", 2.0 * self.duration_fwhm, 0.0)
        return Envelope(self.shape, self.duration_fwhm, 0.0)


def a_xuv(pulse: XuvPulse, t):
    return (pulse.peak_field / pulse.photon_energy) * pulse.envelope(t) * np.cos(pulse.photon_energy * np.asarray(t))


@dataclass(frozen=True)
class IrRealization:
    """Classical IR field of one ensemble member.

    ``field_x``/``field_y`` are the cosine and sine quadrature amplitudes of
    the electric field in a.u.; ``(field_x, field_y) = 2 e_vac (beta_x, beta_y)``.
    """

    field_x: float
    field_y: float
    envelope: Envelope
    omega: float

    @classmethod
    def from_beta(cls, point: PhaseSpacePoint, e_vac: float, envelope: Envelope, omega: float):
        return cls(2.0 * e_vac * point.beta_x, 2.0 * e_vac * point.beta_y, envelope, omega)

    @classmethod
    def from_macroscopic(cls, dist: MacroscopicDistribution, s: float, envelope: Envelope, omega: float):
        fx, fy = dist.field(s)
        return cls(float(fx), float(fy), envelope, omega)

    @classmethod
    def coherent(cls, state: LightState, envelope: Envelope):
        return cls(state.e_coh * math.cos(state.phi), state.e_coh * math.sin(state.phi),
                   envelope, state.omega)


def a_cl_beta(realization: IrRealization, t):
    t = np.asarray(t, dtype=float)
    w = realization.omega
    carrier = realization.field_x * np.cos(w * t) + realization.field_y * np.sin(w * t)
    return realization.envelope(t) / w * carrier


def a_cl_coherent(state: LightState, envelope: Envelope, t):
    """Vector potential of the coherent displacement, (E_c/w) f(t) cos(wt - phi)."""
    t = np.asarray(t, dtype=float)
    return state.e_coh / state.omega * envelope(t) * np.cos(state.omega * t - state.phi)
