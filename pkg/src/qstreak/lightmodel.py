"""Squeezed-coherent light state of a single effective mode.

The state is ``D(alpha) S(xi) |0>`` with ``alpha = |alpha| e^{i phi}`` and
``xi = r e^{i theta}``.  Two parameterizations are supported:

* exact mode: ``(|alpha|, r, e_vac)`` with the single-photon field ``e_vac``;
* macroscopic mode: the field scales ``E_c = 2 |alpha| e_vac`` and
  ``E_s = e^r e_vac`` are given directly and ``e_vac -> 0``.

The phase-space variable ``beta`` maps onto a physical field amplitude
``(E_x, E_y) = 2 e_vac (beta_x, beta_y)``; in that plane the classical vector
potential of a member is ``f(t)/omega [E_x cos(wt) + E_y sin(wt)]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .units import field_to_intensity, intensity_to_field

TWO_PI = 2.0 * math.pi


class DegenerateStateError(ValueError):
    """Raised when a state carries neither a coherent nor a fluctuating field."""


@dataclass(frozen=True)
class PhaseSpacePoint:
    """A point (or broadcastable arrays of points) in the beta plane."""

    beta_x: float
    beta_y: float

    @property
    def complex(self):
        return self.beta_x + 1j * self.beta_y


@dataclass(frozen=True)
class FieldScales:
    """Coherent and squeezed field amplitudes (a.u.) with their intensities (W/cm^2)."""

    e_coh: float
    e_sq: float
    i_coh: float = field(init=False)
    i_sq: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "i_coh", field_to_intensity(self.e_coh))
        object.__setattr__(self, "i_sq", field_to_intensity(self.e_sq))

    @property
    def ratio(self) -> float:
        """I_c / I_s (inf for a purely coherent field)."""
        return self.i_coh / self.i_sq if self.e_sq > 0 else math.inf


@dataclass(frozen=True)
class LightState:
    """Squeezed-coherent state parameters.

    In exact mode ``alpha_mag``, ``r`` and ``e_vac`` are meaningful.  Use
    :meth:`macroscopic` to build a state from field scales only; such a state
    has ``e_vac == 0`` and stores ``E_c``, ``E_s`` explicitly.
    ``theta`` is reduced modulo 2 pi on construction.
    """

    phi: float
    theta: float
    omega: float
    alpha_mag: float = 0.0
    r: float = 0.0
    e_vac: float = 0.0
    macro_e_coh: float | None = None
    macro_e_sq: float | None = None

    def __post_init__(self):
        if not self.alpha_mag >= 0:
            raise ValueError("alpha_mag must be >= 0")
        if not self.r >= 0:
            raise ValueError("squeezing amplitude r must be >= 0")
        if not self.omega > 0:
            raise ValueError("omega must be > 0")
        if not self.e_vac >= 0:
            raise ValueError("e_vac must be >= 0")
        if (self.macro_e_coh is None) != (self.macro_e_sq is None):
            raise ValueError("macroscopic mode needs both E_c and E_s")
        if self.is_macroscopic and not (self.macro_e_coh >= 0 and self.macro_e_sq >= 0):
            raise ValueError("field scales must be >= 0")
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)

    @classmethod
    def macroscopic(cls, e_coh, e_sq, phi, theta, omega) -> LightState:
        return cls(phi=phi, theta=theta, omega=omega,
                   macro_e_coh=float(e_coh), macro_e_sq=float(e_sq))

    @classmethod
    def from_intensities(cls, i_coh, i_sq, phi, theta, omega) -> LightState:
        """Macroscopic state from effective intensities in W/cm^2."""
        return cls.macroscopic(intensity_to_field(i_coh), intensity_to_field(i_sq),
                               phi, theta, omega)

    @classmethod
    def from_total_intensity(cls, total, ratio, phi, theta, omega) -> LightState:
        """Macroscopic state with ``I_c + I_s = total`` and ``I_c / I_s = ratio``.

        ``ratio = inf`` gives a purely coherent field.
        """
        if math.isinf(ratio):
            i_coh, i_sq = total, 0.0
        else:
            i_sq = total / (1.0 + ratio)
            i_coh = total - i_sq
        return cls.from_intensities(i_coh, i_sq, phi, theta, omega)

    @property
    def is_macroscopic(self) -> bool:
        return self.macro_e_coh is not None

    @property
    def alpha_x(self) -> float:
        return self.alpha_mag * math.cos(self.phi)

    @property
    def alpha_y(self) -> float:
        return self.alpha_mag * math.sin(self.phi)

    @property
    def e_coh(self) -> float:
        if self.macro_e_coh is not None:
            return self.macro_e_coh
        return 2.0 * self.alpha_mag * self.e_vac

    @property
    def e_sq(self) -> float:
        if self.macro_e_sq is not None:
            return self.macro_e_sq
        return math.exp(self.r) * self.e_vac

    def scales(self) -> FieldScales:
        return FieldScales(self.e_coh, self.e_sq)

    def with_phases(self, phi=None, theta=None) -> LightState:
        return replace(self,
                       phi=self.phi if phi is None else phi,
                       theta=self.theta if theta is None else theta)

    def scaled(self, factor: float) -> LightState:
        """Same state with every field amplitude multiplied by ``factor``."""
        if self.is_macroscopic:
            return replace(self, macro_e_coh=self.macro_e_coh * factor,
                           macro_e_sq=self.macro_e_sq * factor)
        return replace(self, e_vac=self.e_vac * factor)

    def to_macroscopic(self) -> LightState:
        """Macroscopic state with the same field scales."""
        return LightState.macroscopic(self.e_coh, self.e_sq, self.phi, self.theta, self.omega)


def _require_exact(state: LightState):
    if state.is_macroscopic:
        raise ValueError("operation needs an exact-mode state (|alpha|, r, e_vac)")


def anti_squeezed_axis(theta):
    """Unit vector of the broad (variance e^{2r}/4) axis of the beta distribution."""
    return np.array([math.sin(theta / 2), -math.cos(theta / 2)])


def squeezed_axis(theta):
    """Unit vector of the narrow (variance e^{-2r}/4) axis."""
    return np.array([math.cos(theta / 2), math.sin(theta / 2)])


def weight_beta(state: LightState, point: PhaseSpacePoint):
    """Phase-space weight W(beta) of the squeezed-coherent state.

    A normalized Gaussian centred on ``alpha`` whose contours are ellipses
    tilted by ``theta/2``.  ``point`` may hold numpy arrays, in which case the
    result broadcasts.
    """
    _require_exact(state)
    dx = np.asarray(point.beta_x) - state.alpha_x
    dy = np.asarray(point.beta_y) - state.alpha_y
    s, c = math.sin(state.theta / 2), math.cos(state.theta / 2)
    broad = dx * s - dy * c
    narrow = dx * c + dy * s
    exponent = -2.0 * math.exp(-2 * state.r) * broad**2 - 2.0 * math.exp(2 * state.r) * narrow**2
    return (2.0 / math.pi) * np.exp(exponent)


def beta_mean(state: LightState) -> np.ndarray:
    _require_exact(state)
    return np.array([state.alpha_x, state.alpha_y])


def beta_covariance(state: LightState) -> np.ndarray:
    """Covariance matrix of (beta_x, beta_y) under :func:`weight_beta`."""
    _require_exact(state)
    u = anti_squeezed_axis(state.theta)
    v = squeezed_axis(state.theta)
    return (math.exp(2 * state.r) / 4) * np.outer(u, u) + (math.exp(-2 * state.r) / 4) * np.outer(v, v)


def sample_beta(state: LightState, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` samples of (beta_x, beta_y) from the weight; shape (n, 2)."""
    _require_exact(state)
    z = rng.standard_normal((n, 2))
    u = anti_squeezed_axis(state.theta)
    v = squeezed_axis(state.theta)
    sd_u = math.exp(state.r) / 2
    sd_v = math.exp(-state.r) / 2
    return beta_mean(state) + (sd_u * z[:, :1]) * u + (sd_v * z[:, 1:]) * v


def noise_kernel(state: LightState, envelope, t, t_prime):
    """Two-time covariance of the stochastic vector potential.

    ``envelope`` is any callable ``f(t)``.  Exact states use the full
    ``cosh(2r)``/``sinh(2r)`` form; macroscopic states use its ``r -> inf``
    limit at fixed ``E_s``.
    """
    t = np.asarray(t, dtype=float)
    t_prime = np.asarray(t_prime, dtype=float)
    w = state.omega
    ff = envelope(t) * envelope(t_prime)
    stationary = np.cos(w * (t - t_prime))
    nonstationary = np.cos(w * (t + t_prime) - state.theta)
    if state.is_macroscopic:
        return state.e_sq**2 / (2 * w**2) * ff * (stationary - nonstationary)
    pref = state.e_vac**2 / w**2
    return pref * ff * (math.cosh(2 * state.r) * stationary - math.sinh(2 * state.r) * nonstationary)


@dataclass(frozen=True)
class MacroscopicDistribution:
    """Degenerate Gaussian over the physical field plane (E_x, E_y).

    Field amplitude of a member: ``center + s * axis`` with ``s ~ N(0, sigma^2)``.
    """

    center: np.ndarray
    axis: np.ndarray
    sigma: float

    def field(self, s):
        s = np.asarray(s, dtype=float)
        return self.center + s[..., None] * self.axis

    def covariance(self) -> np.ndarray:
        return self.sigma**2 * np.outer(self.axis, self.axis)


def macroscopic_reduce(state: LightState) -> MacroscopicDistribution:
    """Limit of the field-amplitude distribution for ``e_vac -> 0`` at fixed E_c, E_s."""
    e_coh, e_sq = state.e_coh, state.e_sq
    if e_coh == 0 and e_sq == 0:
        raise DegenerateStateError("state has E_c = E_s = 0; no field to reduce")
    center = e_coh * np.array([math.cos(state.phi), math.sin(state.phi)])
    return MacroscopicDistribution(center=center, axis=anti_squeezed_axis(state.theta), sigma=e_sq)
