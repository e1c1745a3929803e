"""One-dimensional velocity-gauge TDSE for the soft-core hydrogen model.

The wavefunction lives on a periodic FFT grid.  Each time step applies the
kinetic operator ``exp(-i dt (p + A)^2 / 2)`` in momentum space (Strang
splitting, consecutive half steps merged) and the potential in position
space.  Flux entering the absorbing layer at the box edges is not thrown
away: it is split off, transformed to momentum space and carried forward
analytically with the free velocity-gauge (Volkov) phase, so photoelectrons
may leave the box long before the spectrum is taken.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.fft as sfft
from scipy.linalg import eigh

from .fields import IrRealization, XuvPulse, a_cl_beta, a_xuv


class GridError(ValueError):
    """Invalid grid or time-step configuration."""


class NumericalError(RuntimeError):
    """Non-finite values or failed convergence during a propagation."""


class InvalidRunError(RuntimeError):
    """A run whose spectrum cannot be trusted (e.g. packet not clear of the mask)."""


_CBRT2 = 2.0 ** (1.0 / 3.0)
# potential weights of the split steps composing one time step
SCHEMES = {
    "strang": (1.0,),
    "yoshida4": (1.0 / (2.0 - _CBRT2), -_CBRT2 / (2.0 - _CBRT2), 1.0 / (2.0 - _CBRT2)),
}


@dataclass(frozen=True)
class SpatialGrid:
    x_min: float = -600.0
    x_max: float = 600.0
    n_points: int = 8192
    dt: float = 0.1
    absorber_width: float = 100.0
    softcore_a2: float = 2.0
    x_mask: float = 20.0
    split_interval: float = 0.5
    scheme: str = "yoshida4"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise GridError(f"unknown scheme {self.scheme!r}; expected one of {tuple(SCHEMES)}")
        n = self.n_points
        if n < 2 or n & (n - 1):
            raise GridError(f"n_points must be a power of two >= 2, got {n}")
        length = self.x_max - self.x_min
        if not length > 0:
            raise GridError("x_max must exceed x_min")
        if not 0 <= self.absorber_width < length / 4:
            raise GridError(
                f"absorber_width {self.absorber_width} must be below a quarter of the box ({length / 4})")
        if not self.dt > 0:
            raise GridError("dt must be positive")
        if not self.softcore_a2 > 0:
            raise GridError("softcore_a2 must be positive")
        if not 0 < self.x_mask < min(-self.x_min, self.x_max) - self.absorber_width:
            raise GridError("x_mask must lie inside the absorber-free region")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def p_max(self) -> float:
        return math.pi / self.dx

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @cached_property
    def p(self) -> np.ndarray:
        """Momentum grid in FFT order."""
        return 2.0 * math.pi * sfft.fftfreq(self.n_points, self.dx)

    @cached_property
    def potential(self) -> np.ndarray:
        return -1.0 / np.sqrt(self.x**2 + self.softcore_a2)

    @cached_property
    def absorber(self) -> np.ndarray:
        """cos^(1/8) mask, 1 in the interior and 0 at the box edges."""
        mask = np.ones(self.n_points)
        if self.absorber_width == 0:
            return mask
        depth = np.maximum(self.x - (self.x_max - self.absorber_width),
                           (self.x_min + self.absorber_width) - self.x)
        inside = depth > 0
        mask[inside] = np.cos(0.5 * math.pi * np.clip(depth[inside] / self.absorber_width, 0, 1)) ** 0.125
        return mask

    @cached_property
    def bound_mask(self) -> np.ndarray:
        """Smooth mask that removes the region |x| < x_mask."""
        return 1.0 - np.exp(-((self.x / self.x_mask) ** 8))

    def with_(self, **changes) -> SpatialGrid:
        from dataclasses import replace
        return replace(self, **changes)


@dataclass
class Wavefunction:
    """State on a grid.

    ``values`` holds the interior amplitude (possibly with leading batch
    axes).  ``outgoing`` is the momentum-space amplitude (unnormalized FFT
    convention, same as ``fft(values)``) of flux split off at the absorber,
    already advanced to ``time``.
    """

    grid: SpatialGrid
    values: np.ndarray
    time: float = 0.0
    outgoing: np.ndarray | None = None

    @property
    def norm(self):
        return np.sum(np.abs(self.values) ** 2, axis=-1) * self.grid.dx

    def copy(self) -> Wavefunction:
        out = None if self.outgoing is None else self.outgoing.copy()
        return Wavefunction(self.grid, self.values.copy(), self.time, out)

    def save(self, path) -> None:
        """Debug dump: ``.npz`` with x, values, time and (if present) outgoing."""
        arrays = {"x": self.grid.x, "values": self.values, "time": np.array(self.time)}
        if self.outgoing is not None:
            arrays["outgoing"] = self.outgoing
        np.savez(Path(path), **arrays)


@dataclass
class MomentumSpectrum:
    p_grid: np.ndarray
    density: np.ndarray
    total_yield: float = field(default=float("nan"))
    leak: np.ndarray | float = 0.0

    def check_leak(self, weights=None, leak_tol: float = 1e-3) -> None:
        """Raise :class:`InvalidRunError` if amplitude near the bound-state mask exceeds
        ``leak_tol`` of the window yield (weighted over batch members if ``weights``)."""
        dens = np.sum(self.density, axis=-1)
        leak = np.asarray(self.leak, dtype=float)
        if weights is not None:
            dens, leak = np.dot(weights, dens), np.dot(weights, leak)
        if np.any(leak > leak_tol * dens):
            raise InvalidRunError("photoelectron still near the bound-state mask at extraction; extend the drift")

    @property
    def window_yield(self) -> float:
        return float(np.sum(self.density) * (self.p_grid[1] - self.p_grid[0]))


def _energy(grid: SpatialGrid, psi: np.ndarray) -> float:
    psi_p = sfft.fft(psi)
    kinetic = np.sum(0.5 * grid.p**2 * np.abs(psi_p) ** 2) / np.sum(np.abs(psi_p) ** 2)
    potential = np.sum(grid.potential * np.abs(psi) ** 2) / np.sum(np.abs(psi) ** 2)
    return float(kinetic + potential)


def ground_state(grid: SpatialGrid, dt_imag: float = 0.05, tol: float = 1e-12,
                 max_iter: int = 200_000, check_every: int = 10, filter_time: float = 200.0):
    """Ground state by imaginary-time split-step propagation.

    Renormalizes after every step; converged once the energy changes by less
    than ``tol`` per step.  The result is then energy-filtered over
    ``filter_time`` of real-time evolution (0 disables) so that it is
    stationary under :func:`propagate` with the grid's ``dt``.  Returns
    ``(Wavefunction, energy)``.
    """
    x = grid.x
    half_kin = np.exp(-0.25 * dt_imag * grid.p**2)
    pot = np.exp(-dt_imag * grid.potential)
    psi = np.exp(-np.sqrt(x**2 + 1.0)).astype(complex)
    psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    energy = _energy(grid, psi)
    for it in range(1, max_iter + 1):
        psi = sfft.ifft(half_kin * sfft.fft(psi))
        psi *= pot
        psi = sfft.ifft(half_kin * sfft.fft(psi))
        psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
        if it % check_every == 0:
            new = _energy(grid, psi)
            if not math.isfinite(new):
                raise NumericalError("imaginary-time propagation produced non-finite energy")
            drift = abs(new - energy) / check_every
            energy = new
            if drift < tol:
                break
    else:
        raise NumericalError(f"ground state not converged after {max_iter} iterations")
    psi = psi.real.astype(complex)
    if filter_time > 0:
        psi = _stationary_filter(grid, psi, filter_time)
    # fix the global phase so the state is real and positive at the origin
    origin = psi[np.argmin(np.abs(x))]
    psi *= abs(origin) / origin
    psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    return Wavefunction(grid, psi), _energy(grid, psi)


def _stationary_filter(grid: SpatialGrid, psi: np.ndarray, duration: float) -> np.ndarray:
    """Project onto the ground eigenstate of the real-time split-step propagator.

    The imaginary-time state is an eigenvector of a slightly different
    operator; the splitting error leaves a small continuum admixture that is
    emitted once real-time propagation starts and interferes with weak
    photoelectron signals.  A Hann-windowed energy filter centred on the
    propagator's ground eigenphase removes it.
    """
    dt = grid.dt
    weights, bounds = _kinetic_intervals(grid.scheme)
    free = [np.exp(-0.5j * length * grid.p**2) for length in dt * np.diff(bounds)]
    pots = [np.exp(-1j * w * dt * grid.potential) for w in weights]

    def step(v):
        psi_p = free[0] * sfft.fft(v)
        for pot, kin in zip(pots, free[1:]):
            psi_p = kin * sfft.fft(pot * sfft.ifft(psi_p))
        return sfft.ifft(psi_p)

    probe, n_probe = psi.copy(), int(round(10.0 / dt))
    for _ in range(n_probe):
        probe = step(probe)
    t_probe = n_probe * dt
    guess = _energy(grid, psi)
    eigen = guess - np.angle(np.vdot(psi, probe) * np.exp(1j * guess * t_probe)) / t_probe
    n = int(round(duration / dt))
    window = np.hanning(n + 1)
    acc = window[0] * psi
    v = psi
    for k in range(1, n + 1):
        v = step(v)
        acc = acc + window[k] * np.exp(1j * eigen * k * dt) * v
    return acc / math.sqrt(np.sum(np.abs(acc) ** 2) * grid.dx)


def ground_state_diagonalize(grid: SpatialGrid, half_width: float = 60.0):
    """Ground state from dense diagonalization of the Fourier-grid Hamiltonian.

    Uses the same spacing ``dx`` as ``grid`` on the truncated box
    ``|x| < half_width``; the kinetic matrix is the exact sinc-DVR form.
    Returns ``(x, psi, energy)``.
    """
    dx = grid.dx
    n = int(2 * half_width / dx)
    x = (np.arange(n) - n // 2) * dx
    i = np.arange(n)
    diff = i[:, None] - i[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        kin = np.where(diff == 0, math.pi**2 / 6.0, (-1.0) ** diff / diff.astype(float) ** 2)
    kin /= dx**2
    ham = kin + np.diag(-1.0 / np.sqrt(x**2 + grid.softcore_a2))
    w, v = eigh(ham, subset_by_index=[0, 0])
    psi = v[:, 0] / math.sqrt(dx)
    return x, psi * np.sign(psi[n // 2]), float(w[0])


def _plane_wave_phase(n: int, dp: float, shift, offset=0.0, out=None) -> np.ndarray:
    """``exp(-i (p shift + offset))`` on the FFT-ordered momentum grid ``p = dp * m``.

    Uses ``m = lo + n_lo * hi`` so that only two tables of length ~sqrt(n)
    need complex exponentials; the full factor is their outer product.
    ``shift`` and ``offset`` broadcast over leading batch axes.
    """
    shift = np.asarray(shift, dtype=float)
    n_lo = 1 << ((n.bit_length() - 1) // 2)
    n_hi = n // n_lo
    theta = -dp * shift[..., None]
    lo = np.exp(1j * (theta * np.arange(n_lo) - np.asarray(offset, dtype=float)[..., None]))
    hi_index = n_lo * np.arange(n_hi) - n * (np.arange(n_hi) >= n_hi // 2)
    hi = np.exp(1j * theta * hi_index)
    shape = shift.shape + (n_hi, n_lo)
    if out is None:
        out = np.empty(shape[:-2] + (n,), dtype=complex)
    np.multiply(hi[..., :, None], lo[..., None, :], out=out.reshape(shape))
    return out


def _kinetic_intervals(scheme: str) -> tuple[np.ndarray, np.ndarray]:
    """Potential weights and kinetic interval boundaries of one step.

    A step of length dt applies the potential for ``weights[j] * dt`` at the
    fractional position ``bounds[j + 1]``; the kinetic flow between
    consecutive potentials runs over ``[bounds[j], bounds[j + 1]] * dt``.
    ``yoshida4`` is the symmetric triple jump of the Strang step.
    """
    weights = np.array(SCHEMES[scheme])
    centres = np.cumsum(weights) - 0.5 * weights
    return weights, np.concatenate([[0.0], centres, [1.0]])


def _field_integrals(vector_potential, t_lo, t_hi, batch_shape):
    """Integrals of A and A^2 over [t_lo, t_hi] by 4-point Gauss-Legendre."""
    nodes, gl_w = np.polynomial.legendre.leggauss(4)
    mid, half = 0.5 * (t_lo + t_hi), 0.5 * (t_hi - t_lo)
    t = (mid[:, None] + half[:, None] * nodes).ravel()
    a = np.asarray(vector_potential(t), dtype=float)
    a = np.broadcast_to(a, batch_shape + t.shape).reshape(batch_shape + (len(mid), len(nodes)))
    w = half[:, None] * gl_w
    return np.sum(a * w, axis=-1), np.sum(a * a * w, axis=-1)


def propagate(psi: Wavefunction, vector_potential, t_start: float, t_end: float,
              *, coulomb: bool = True, absorb: bool = True, log: list | None = None,
              split_offset: int = 0) -> Wavefunction:
    """Advance ``psi`` from ``t_start`` to ``t_end`` under 1/2 (p + A(t))^2 + V(x).

    ``vector_potential(t)`` must accept an array of times and return an
    array of shape ``(n_t,)`` or, for batched states, ``(batch, n_t)``.
    The step size is the largest value <= ``grid.dt`` that divides the
    interval evenly; each step is a composition of split steps given by
    ``grid.scheme``.  Kinetic flows are exact for the time-dependent A (its
    integrals are taken by quadrature).  With ``absorb`` the absorber splits
    outgoing flux into ``psi.outgoing`` after every ``grid.split_interval``;
    splits happen after steps ``k`` with ``(k + 1 + split_offset) %
    split_every == 0`` so that a propagation resumed mid-way keeps the
    cadence.  ``log`` receives ``(t, norm)`` pairs at each split.
    """
    grid = psi.grid
    span = t_end - t_start
    if span < 0:
        raise ValueError("t_end must not precede t_start")
    n_steps = max(1, int(math.ceil(span / grid.dt - 1e-9)))
    dt = span / n_steps
    split_every = max(1, int(round(grid.split_interval / dt)))
    batch_shape = psi.values.shape[:-1]

    weights, bounds = _kinetic_intervals(grid.scheme)
    n_stage = len(weights)
    lengths = dt * np.diff(bounds)
    starts = t_start + dt * np.arange(n_steps)
    t_lo = (starts[:, None] + dt * bounds[None, :-1]).ravel()
    t_hi = (starts[:, None] + dt * bounds[None, 1:]).ravel()
    int_a, int_a2 = _field_integrals(vector_potential, t_lo, t_hi, batch_shape)
    int_a = int_a.reshape(batch_shape + (n_steps, n_stage + 1))
    int_a2 = int_a2.reshape(batch_shape + (n_steps, n_stage + 1))
    # the last flow of step k and the first of step k + 1 are merged
    merged_a = int_a[..., :-1, -1] + int_a[..., 1:, 0]
    merged_a2 = int_a2[..., :-1, -1] + int_a2[..., 1:, 0]

    p = grid.p
    n_p, dp = grid.n_points, 2.0 * math.pi / grid.length
    free = [np.exp(-0.5j * length * p**2) for length in lengths]
    free_merged = np.exp(-0.5j * (lengths[-1] + lengths[0]) * p**2)
    pots = [np.exp(-1j * w * dt * grid.potential) for w in weights] if coulomb else None
    mask = grid.absorber if absorb else None

    buffer = np.empty(batch_shape + (n_p,), dtype=complex)

    def kinetic(psi_p, base, shift, square):
        _plane_wave_phase(n_p, dp, shift, 0.5 * square, out=buffer)
        np.multiply(buffer, base, out=buffer)
        psi_p *= buffer

    # Volkov phase from the last potential of step k to t_end:
    #   S_k(p) = (p^2/2) T_k + p I_k + J_k / 2
    step_a = int_a.sum(axis=-1)
    step_a2 = int_a2.sum(axis=-1)
    after_a = np.cumsum(step_a[..., ::-1], axis=-1)[..., ::-1] - step_a
    after_a2 = np.cumsum(step_a2[..., ::-1], axis=-1)[..., ::-1] - step_a2
    rem_time = dt * (n_steps - 1 - np.arange(n_steps)) + lengths[-1]
    rem_a = after_a + int_a[..., -1]
    rem_a2 = after_a2 + int_a2[..., -1]

    values = psi.values.astype(complex, copy=True)
    if psi.outgoing is not None:
        total = step_a.sum(axis=-1)
        total2 = step_a2.sum(axis=-1)
        phase = 0.5 * p**2 * span + p * np.asarray(total)[..., None] + 0.5 * np.asarray(total2)[..., None]
        outgoing = psi.outgoing * np.exp(-1j * phase)
    else:
        outgoing = np.zeros(values.shape, dtype=complex)

    psi_p = sfft.fft(values, axis=-1)
    kinetic(psi_p, free[0], int_a[..., 0, 0], int_a2[..., 0, 0])
    for k in range(n_steps):
        for j in range(n_stage):
            values = sfft.ifft(psi_p, axis=-1, overwrite_x=True)
            if pots is not None:
                values *= pots[j]
            if j == n_stage - 1 and mask is not None and (k + 1 + split_offset) % split_every == 0:
                out = values * (1.0 - mask)
                values *= mask
                if not np.all(np.isfinite(values)):
                    raise NumericalError(f"non-finite wavefunction at t = {t_start + (k + 1) * dt:.6g}")
                phase = (0.5 * p**2 * rem_time[k] + p * rem_a[..., k, None]
                         + 0.5 * rem_a2[..., k, None])
                outgoing += sfft.fft(out, axis=-1) * np.exp(-1j * phase)
                if log is not None:
                    log.append((t_start + (k + 1) * dt, np.sum(np.abs(values) ** 2, axis=-1) * grid.dx))
            psi_p = sfft.fft(values, axis=-1, overwrite_x=True)
            if j < n_stage - 1:
                kinetic(psi_p, free[j + 1], int_a[..., k, j + 1], int_a2[..., k, j + 1])
            elif k < n_steps - 1:
                kinetic(psi_p, free_merged, merged_a[..., k], merged_a2[..., k])
            else:
                kinetic(psi_p, free[-1], int_a[..., k, -1], int_a2[..., k, -1])
    values = sfft.ifft(psi_p, axis=-1)
    if not np.all(np.isfinite(values)):
        raise NumericalError(f"non-finite wavefunction at t = {t_end:.6g}")
    if log is not None:
        log.append((t_end, np.sum(np.abs(values) ** 2, axis=-1) * grid.dx))
    return Wavefunction(grid, values, t_end, outgoing if absorb or psi.outgoing is not None else None)


def momentum_amplitude(psi: Wavefunction) -> np.ndarray:
    """Continuum amplitude in FFT order, normalized so that sum |.|^2 dp is a probability."""
    grid = psi.grid
    amp = sfft.fft(psi.values * grid.bound_mask, axis=-1)
    if psi.outgoing is not None:
        amp = amp + psi.outgoing
    return amp * (grid.dx / math.sqrt(2.0 * math.pi))


def extract_spectrum(psi: Wavefunction, p_window: tuple[float, float], check: bool = True,
                     leak_tol: float = 1e-3, ground: Wavefunction | None = None,
                     a_end=0.0) -> MomentumSpectrum:
    """Photoelectron momentum density restricted to ``p_window``.

    Projects out ``ground`` (if given), removes the bound region |x| < x_mask
    with a smooth mask, Fourier transforms the remainder and adds the
    split-off outgoing amplitude.  Without the projection the ground-state
    tail that survives the mask interferes with weak signals at the 1e-4
    level.  ``a_end`` is the vector potential at ``psi.time`` (scalar or one
    value per batch member); in velocity gauge the bound state under a
    constant ``A`` is ``exp(-i A x) psi_g``.
    ``leak`` records the window-momentum content still close to the mask
    edge (x_mask < |x| < 3 x_mask); with ``check``, raises
    :class:`InvalidRunError` when it exceeds ``leak_tol`` of the window yield.
    """
    grid = psi.grid
    lo, hi = p_window
    if not (-grid.p_max < lo < hi < grid.p_max):
        raise GridError(f"momentum window {p_window} outside the grid range +-{grid.p_max:.4g}")
    if ground is not None:
        g = ground.values * np.exp(-1j * np.multiply.outer(np.asarray(a_end, dtype=float), grid.x))
        coef = np.sum(np.conj(g) * psi.values, axis=-1, keepdims=True) * grid.dx
        psi = Wavefunction(grid, psi.values - coef * g, psi.time, psi.outgoing)
    amp = momentum_amplitude(psi)
    dens = np.abs(amp) ** 2
    dp = 2.0 * math.pi / grid.length
    order = np.argsort(grid.p, kind="stable")
    p_sorted = grid.p[order]
    sel = (p_sorted >= lo) & (p_sorted <= hi)
    if not np.any(sel):
        raise GridError("momentum window contains no grid points")
    dens_sorted = dens[..., order][..., sel]
    total = np.sum(dens, axis=-1) * dp
    band = grid.bound_mask * np.exp(-((grid.x / (3.0 * grid.x_mask)) ** 8))
    near = np.abs(sfft.fft(psi.values * band, axis=-1) * (grid.dx / math.sqrt(2.0 * math.pi))) ** 2
    spec = MomentumSpectrum(p_sorted[sel], dens_sorted, total, np.sum(near[..., order][..., sel], axis=-1))
    if check:
        spec.check_leak(leak_tol=leak_tol)
    return spec


def validate_run(grid: SpatialGrid, pulse: XuvPulse, p_window) -> None:
    """Reject time steps that do not resolve the XUV carrier and grids too coarse for the window."""
    if grid.dt > 0.2 / pulse.photon_energy:
        raise GridError(
            f"dt = {grid.dt} does not resolve the XUV carrier; need dt <= {0.2 / pulse.photon_energy:.4g}")
    if p_window[1] >= 0.8 * grid.p_max:
        raise GridError(f"grid momentum range +-{grid.p_max:.4g} too small for window {p_window}")


def run_interval(grid: SpatialGrid, ir_envelope, pulse: XuvPulse, tau: float, drift: float):
    """Time window ``(t_start, t_end)`` of a run at delay ``tau``.

    Both ends lie on the step lattice anchored at the IR envelope start so
    that runs at different delays share their pre-XUV history exactly.  The
    run starts with the IR field and ends ``drift`` after the XUV pulse; by
    then the photoelectron has reached the absorber and been collected with
    its exact free-motion phase, so the rest of the IR pulse only adds a
    momentum-dependent phase that does not change the spectrum.
    """
    anchor = ir_envelope.support[0]
    x_lo, x_hi = pulse.envelope.support
    dt = grid.dt
    k_start = math.floor((min(anchor, tau + x_lo) - anchor) / dt + 1e-9)
    k_end = math.ceil((tau + x_hi + drift - anchor) / dt - 1e-9)
    return anchor + k_start * dt, anchor + k_end * dt


def xuv_start_step(grid: SpatialGrid, ir_envelope, pulse: XuvPulse, tau: float) -> int:
    """Index on the anchored step lattice of the last step before the XUV starts."""
    anchor = ir_envelope.support[0]
    return math.floor((tau + pulse.envelope.support[0] - anchor) / grid.dt + 1e-9)


def total_vector_potential(pulse: XuvPulse, members, tau: float):
    def vector_potential(t):
        probe = a_xuv(pulse, t - tau)
        return np.stack([a_cl_beta(m, t) for m in members]) + probe
    return vector_potential


def ir_vector_potential(members):
    def vector_potential(t):
        return np.stack([a_cl_beta(m, t) for m in members])
    return vector_potential


def single_run(grid: SpatialGrid, ground: Wavefunction, pulse: XuvPulse,
               realizations, tau: float, p_window, drift: float = 500.0,
               check: bool = True) -> MomentumSpectrum:
    """Photoelectron spectrum of one or more ensemble members at delay ``tau``.

    ``realizations`` is an :class:`IrRealization` or a sequence of them; a
    sequence is propagated as one batch and yields a density of shape
    ``(n_members, n_p)``.
    """
    validate_run(grid, pulse, p_window)
    batched = not isinstance(realizations, IrRealization)
    members = list(realizations) if batched else [realizations]
    if not members:
        raise ValueError("no ensemble members given")
    envelope = members[0].envelope
    t0, t1 = run_interval(grid, envelope, pulse, tau, drift)
    anchor = envelope.support[0]
    offset = int(round((t0 - anchor) / grid.dt))
    start = Wavefunction(grid, np.broadcast_to(ground.values, (len(members), grid.n_points)).copy(), t0)
    field = total_vector_potential(pulse, members, tau)
    final = propagate(start, field, t0, t1, split_offset=offset)
    spec = extract_spectrum(final, p_window, check=check, ground=ground, a_end=field(np.array([t1]))[:, 0])
    if not batched:
        spec = MomentumSpectrum(spec.p_grid, spec.density[0], float(spec.total_yield[0]), float(spec.leak[0]))
    return spec
