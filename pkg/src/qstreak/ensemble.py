"""Quadrature over the light-state weight and the (member x delay) TDSE scan.

The photoelectron spectrum of the quantum field is the weight-average of
spectra computed with classical IR fields, one per quadrature node.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fields import Envelope, IrRealization, XuvPulse
from .lightmodel import (LightState, PhaseSpacePoint, anti_squeezed_axis, beta_mean,
                         macroscopic_reduce, squeezed_axis)
from .tdse import (InvalidRunError, SpatialGrid, Wavefunction, extract_spectrum, ground_state, ir_vector_potential,
                   propagate, run_interval, total_vector_potential, validate_run, xuv_start_step)
from .traces import MomentTrace, StreakSpectrogram

log = logging.getLogger(__name__)

MODES = ("exact", "macroscopic")


@dataclass(frozen=True)
class BetaNode:
    """One quadrature node: a phase-space point (exact mode) or an amplitude
    ``s`` along the anti-squeezed field axis (macroscopic mode)."""

    weight: float
    point: PhaseSpacePoint | None = None
    s: float | None = None

    def realization(self, state: LightState, envelope: Envelope) -> IrRealization:
        if self.point is not None:
            return IrRealization.from_beta(self.point, state.e_vac, envelope, state.omega)
        return IrRealization.from_macroscopic(macroscopic_reduce(state), self.s, envelope, state.omega)


def _hermite(n: int):
    x, w = np.polynomial.hermite_e.hermegauss(n)
    return x, w / w.sum()


def quadrature_nodes(state: LightState, n_per_axis: int, mode: str = "macroscopic") -> list[BetaNode]:
    """Gauss-Hermite nodes for the state's Gaussian weight.

    ``exact`` places ``n^2`` nodes on the principal axes of W(beta);
    ``macroscopic`` places ``n`` nodes along the anti-squeezed field axis
    (a single node when the state has no fluctuating field).
    """
    if n_per_axis < 1:
        raise ValueError("n_per_axis must be >= 1")
    if mode not in MODES:
        raise ValueError(f"unknown quadrature mode {mode!r}; expected one of {MODES}")
    x, w = _hermite(n_per_axis)
    if mode == "exact":
        if state.is_macroscopic:
            raise ValueError("exact-2D quadrature needs an exact-mode state (|alpha|, r, e_vac)")
        center = beta_mean(state)
        u = anti_squeezed_axis(state.theta) * (math.exp(state.r) / 2)
        v = squeezed_axis(state.theta) * (math.exp(-state.r) / 2)
        nodes = []
        for i in range(n_per_axis):
            for j in range(n_per_axis):
                b = center + x[i] * u + x[j] * v
                nodes.append(BetaNode(float(w[i] * w[j]), point=PhaseSpacePoint(float(b[0]), float(b[1]))))
        return nodes
    if state.e_coh == 0 and state.e_sq == 0:
        # field-free (XUV-only reference): one member with zero IR field
        return [BetaNode(1.0, point=PhaseSpacePoint(0.0, 0.0))]
    dist = macroscopic_reduce(state)
    if dist.sigma == 0:
        return [BetaNode(1.0, s=0.0)]
    return [BetaNode(float(wi), s=float(dist.sigma * xi)) for xi, wi in zip(x, w)]


def _scan_chunk(grid: SpatialGrid, ground_values: np.ndarray, pulse: XuvPulse,
                members: list[IrRealization], weights: np.ndarray, taus: np.ndarray, p_window, drift: float):
    """Member spectra for a sorted run of delays; shape (n_tau, n_members, n_p).

    The IR-only evolution before each XUV pulse is shared: one batch state is
    advanced through the IR field and branched off at each delay.  The
    extraction check is applied to the weighted ensemble: far-out nodes
    streaked out of the window carry negligible weight.
    """
    envelope = members[0].envelope
    anchor = envelope.support[0]
    t_pre = min(run_interval(grid, envelope, pulse, t, drift)[0] for t in taus)
    k_pre = int(round((t_pre - anchor) / grid.dt))
    ground = Wavefunction(grid, ground_values)
    pre = Wavefunction(grid, np.broadcast_to(ground_values, (len(members), grid.n_points)).copy(), t_pre)
    ir_only = ir_vector_potential(members)
    out = []
    p_grid = None
    for tau in taus:
        k_branch = max(xuv_start_step(grid, envelope, pulse, tau), k_pre)
        if k_branch > k_pre:
            t_branch = anchor + k_branch * grid.dt
            pre = propagate(pre, ir_only, pre.time, t_branch, split_offset=k_pre)
            k_pre = k_branch
        t_end = run_interval(grid, envelope, pulse, tau, drift)[1]
        field = total_vector_potential(pulse, members, tau)
        final = propagate(pre.copy(), field, pre.time, t_end, split_offset=k_pre)
        spec = extract_spectrum(final, p_window, check=False, ground=ground,
                                a_end=field(np.array([t_end]))[:, 0])
        try:
            spec.check_leak(weights)
        except InvalidRunError as exc:
            raise InvalidRunError(f"delay tau = {tau:.6g}: {exc}") from None
        p_grid = spec.p_grid
        out.append(spec.density)
        log.debug("tau = %.4f done", tau)
    return p_grid, np.array(out)


def run_scan(grid: SpatialGrid, state: LightState, envelope: Envelope, pulse: XuvPulse,
             tau_grid, nodes: list[BetaNode], p_window, *, drift: float = 500.0,
             ground: Wavefunction | None = None, workers: int = 1, chunk_size: int = 16,
             metadata: dict | None = None) -> StreakSpectrogram:
    """Delay-resolved spectrogram ``P(p, tau) = sum_k w_k P_k(p, tau)``.

    Delays are processed in fixed chunks of ``chunk_size`` (independent of
    ``workers``) and member spectra are summed in node order, so the result
    does not depend on the worker count.
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    if not nodes:
        raise ValueError("no quadrature nodes")
    if len(tau_grid) == 0 or np.any(np.diff(tau_grid) <= 0):
        raise ValueError("tau_grid must be non-empty and strictly increasing")
    validate_run(grid, pulse, p_window)
    if ground is None:
        ground, _ = ground_state(grid)
    members = [node.realization(state, envelope) for node in nodes]
    chunks = [tau_grid[i:i + chunk_size] for i in range(0, len(tau_grid), chunk_size)]
    weights = np.array([node.weight for node in nodes])
    args = [(grid, ground.values, pulse, members, weights, c, p_window, drift) for c in chunks]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_chunk, *zip(*args)))
    else:
        results = []
        for i, a in enumerate(args):
            results.append(_scan_chunk(*a))
            log.info("scan chunk %d/%d done", i + 1, len(args))
    p_grid = results[0][0]
    member_density = np.concatenate([r[1] for r in results], axis=0)
    values = np.zeros((len(tau_grid), len(p_grid)))
    for k, node in enumerate(nodes):
        values += node.weight * member_density[:, k, :]
    return StreakSpectrogram(tau_grid, p_grid, values, dict(metadata or {}))


def accumulate_moments(spec: StreakSpectrogram, window, p0: float) -> MomentTrace:
    """Per-delay mean shift ``<p> - p0`` and variance of P normalized on ``window``."""
    lo, hi = window
    p = np.asarray(spec.p_grid)
    step = p[1] - p[0] if len(p) > 1 else 0.0
    if lo < p[0] - step or hi > p[-1] + step:
        raise ValueError(f"moment window {window} exceeds the spectrogram range [{p[0]}, {p[-1]}]")
    sel = (p >= lo) & (p <= hi)
    if not np.any(sel):
        raise ValueError("moment window is empty")
    vals = spec.values[:, sel]
    ps = p[sel]
    norm = vals.sum(axis=1)
    if np.any(norm <= 0):
        bad = spec.tau_grid[norm <= 0]
        raise ValueError(f"zero yield in the moment window at delays {bad}")
    mean = vals @ ps / norm
    second = vals @ (ps * ps) / norm
    meta = dict(spec.metadata)
    meta.update(p0=p0, window_lo=lo, window_hi=hi)
    return MomentTrace(spec.tau_grid, mean - p0, second - mean**2, metadata=meta)
