"""Reduced-scale invariant suites behind ``qstreak verify``.

Each suite is a list of checks; a check returns ``(invariant, ok, detail)``
where ``invariant`` is the property stated in words.  ``mutate="kernel-sign"``
flips the sign of the squeezing term in the noise kernel used by the
kernel-covariance check, which that check must then catch.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .ensemble import quadrature_nodes
from .fields import Envelope, IrRealization, a_cl_beta, a_cl_coherent
from .lightmodel import (LightState, PhaseSpacePoint, beta_covariance, noise_kernel, weight_beta)
from .oracle import (dominant_frequency, monte_carlo_moments, oracle_mean, oracle_trace, oracle_variance,
                     sample_field_covariance)
from .retrieval import fit_mean, fit_variance, retrieve, wrap_pi
from .units import wavelength_to_omega

OMEGA = wavelength_to_omega(800.0)
PERIOD = 2 * math.pi / OMEGA
ENV = Envelope("cos2", 8 * PERIOD)
TAU = np.linspace(-1.5 * PERIOD, 1.5 * PERIOD, 64, endpoint=False)
MUTATIONS = ("kernel-sign",)


@dataclass
class CheckResult:
    invariant: str
    ok: bool
    detail: str = ""


@dataclass
class SuiteResult:
    name: str
    checks: list
    seconds: float

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)


def _random_exact_state(rng, alpha_max=3.0, r_max=1.5, e_vac=1e-3):
    phi, theta = rng.uniform(0, 2 * math.pi, 2)
    return LightState(phi=phi, theta=theta, omega=OMEGA, alpha_mag=rng.uniform(0, alpha_max),
                      r=rng.uniform(0, r_max), e_vac=e_vac)


def _mutated_kernel(state, envelope, t, t_prime):
    """Noise kernel with the sign of the squeezing term flipped (mutation test)."""
    t = np.asarray(t, dtype=float)
    t_prime = np.asarray(t_prime, dtype=float)
    w = state.omega
    ff = envelope(t) * envelope(t_prime)
    return (state.e_vac**2 / w**2 * ff * (math.cosh(2 * state.r) * np.cos(w * (t - t_prime))
                                          + math.sinh(2 * state.r) * np.cos(w * (t + t_prime) - state.theta)))


def kernel_consistency(n_states=20, n_samples=1_000_000, seed=2024, kernel=noise_kernel):
    """Kernel vs sampled covariance over random states and time pairs; returns (ok, worst |z|)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(n_states):
        state = _random_exact_state(rng)
        t, tp = rng.uniform(-350, 350, 2)
        cov, se = sample_field_covariance(state, ENV, t, tp, n_samples, seed + k)
        worst = max(worst, abs(cov - float(kernel(state, ENV, t, tp))) / se)
    return worst < 3.0, worst


def _lightmodel_checks(mutate):
    rng = np.random.default_rng(7)
    out = []
    errs = []
    for _ in range(3):
        s = _random_exact_state(rng)
        half = s.alpha_mag + 9 * math.exp(s.r) / 2
        b = np.linspace(-half, half, 1201)
        bx, by = np.meshgrid(b, b, indexing="ij")
        w = weight_beta(s, PhaseSpacePoint(bx, by))
        errs.append(abs(np.trapezoid(np.trapezoid(w, b, axis=1), b) - 1.0))
    out.append(CheckResult("weight_beta integrates to 1 over the beta plane", max(errs) < 1e-6,
                           f"max error {max(errs):.2e}"))
    dets = [abs(np.linalg.det(beta_covariance(_random_exact_state(rng))) - 1 / 16) for _ in range(50)]
    out.append(CheckResult("det(beta_covariance) = 1/16 for every state", max(dets) < 1e-12,
                           f"max deviation {max(dets):.2e}"))
    worst = 0.0
    for _ in range(50):
        s = _random_exact_state(rng)
        s0 = s.with_phases(phi=s.phi, theta=0.0)
        bx, by = rng.uniform(-4, 4, 2)
        c, sn = math.cos(-s.theta / 2), math.sin(-s.theta / 2)
        dx, dy = bx - s.alpha_x, by - s.alpha_y
        rot = PhaseSpacePoint(s.alpha_x + c * dx - sn * dy, s.alpha_y + sn * dx + c * dy)
        a, b0 = float(weight_beta(s, PhaseSpacePoint(bx, by))), float(weight_beta(s0, rot))
        worst = max(worst, abs(a - b0) / max(abs(b0), 1e-300))
    out.append(CheckResult("weight at theta equals weight at theta=0 after rotating by -theta/2 about alpha",
                           worst < 1e-12, f"max relative deviation {worst:.2e}"))
    kernel = _mutated_kernel if mutate == "kernel-sign" else noise_kernel
    ok, z = kernel_consistency(kernel=kernel)
    out.append(CheckResult("noise_kernel equals the sampled covariance of A_cl(t;beta) within 3 standard errors",
                           ok, f"worst |z| = {z:.2f}"))
    return out


def _fields_checks(mutate):
    s = LightState(phi=1.1, theta=2.3, omega=OMEGA, alpha_mag=4.0, r=0.8, e_vac=1e-3)
    t = np.linspace(-450, 450, 101)
    total = np.zeros_like(t)
    for node in quadrature_nodes(s, 16, "exact"):
        total += node.weight * a_cl_beta(node.realization(s, ENV), t)
    err = float(np.max(np.abs(total - a_cl_coherent(s, ENV, t))))
    out = [CheckResult("Gauss-Hermite ensemble mean of a_cl_beta equals a_cl_coherent", err < 1e-10,
                       f"max error {err:.2e}")]
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(50):
        bx, by, tt = rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-500, 500)
        a = float(a_cl_beta(IrRealization.from_beta(PhaseSpacePoint(bx, by), 1e-3, ENV, OMEGA), tt))
        ex = float(a_cl_beta(IrRealization.from_beta(PhaseSpacePoint(1.0, 0.0), 1e-3, ENV, OMEGA), tt))
        ey = float(a_cl_beta(IrRealization.from_beta(PhaseSpacePoint(0.0, 1.0), 1e-3, ENV, OMEGA), tt))
        worst = max(worst, abs(a - bx * ex - by * ey))
    out.append(CheckResult("a_cl_beta = beta_x A(1) + beta_y A(i) pointwise", worst < 1e-12, f"max {worst:.2e}"))
    return out


def _oracle_checks(mutate):
    rng = np.random.default_rng(11)
    worst = 0.0
    for k in range(6):
        if k % 2:
            s = LightState.macroscopic(rng.uniform(0, 5e-3), rng.uniform(1e-4, 5e-3), *rng.uniform(0, 6.28, 2), OMEGA)
        else:
            s = _random_exact_state(rng, alpha_max=3e3, e_vac=1e-6)
        tau = rng.uniform(-300, 300, 3)
        for row, t in zip(monte_carlo_moments(s, ENV, tau, 100_000, k), tau):
            worst = max(worst, abs(row.mean_shift - oracle_mean(s, ENV, t)) / max(row.mean_err, 1e-300),
                        abs(row.variance - oracle_variance(s, ENV, t)) / max(row.var_err, 1e-300))
    out = [CheckResult("Monte-Carlo moments agree with closed form within 3 standard errors", worst < 3.0,
                       f"worst |z| = {worst:.2f}")]
    flat = Envelope("flattop", 1e7)
    tau = np.arange(256) * (8 * PERIOD / 256)
    sq = LightState.macroscopic(2.7e-3, 4.6e-3, 0.3, 1.2, OMEGA)
    freq, _ = dominant_frequency(tau, oracle_variance(sq, flat, tau))
    out.append(CheckResult("variance trace of a squeezed state peaks at 2 omega",
                           abs(freq - 2 * OMEGA) < 1e-9 * OMEGA, f"peak at {freq / OMEGA:.6f} omega"))
    fit = fit_variance(oracle_trace(sq, ENV, TAU, sigma0_sq=1e-3), OMEGA, ENV)
    out.append(CheckResult("fitting a noiseless oracle variance trace recovers theta",
                           abs(fit.theta_streak - sq.theta) < 1e-8, f"error {fit.theta_streak - sq.theta:.2e}"))
    return out


def _retrieval_checks(mutate):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        e_c, e_s = rng.uniform(1e-4, 1e-2, 2)
        phi, theta = rng.uniform(-math.pi, math.pi), rng.uniform(0, 2 * math.pi)
        s = LightState.macroscopic(e_c, e_s, phi, theta, OMEGA)
        rep = retrieve(oracle_trace(s, ENV, TAU, sigma0_sq=rng.uniform(1e-4, 1e-2)), 0.0, OMEGA, ENV)
        worst = max(worst, abs(rep.e_coh / e_c - 1), abs(rep.e_sq / e_s - 1),
                    abs(wrap_pi(rep.phi - phi)), abs(wrap_pi(rep.theta - s.theta)))
    out = [CheckResult("oracle round trip recovers (E_c, E_s, phi, theta) to 1e-6", worst < 1e-6,
                       f"worst {worst:.2e}")]
    phis = np.linspace(0, 2 * math.pi, 24, endpoint=False)
    got = [fit_mean(oracle_trace(LightState.macroscopic(3e-3, 4e-3, p, 1.0, OMEGA), ENV, TAU),
                    OMEGA, ENV).phi_streak for p in phis]
    slope = np.polyfit(phis, np.unwrap(got), 1)[0]
    out.append(CheckResult("fitted mean phase follows phi with slope 1", abs(slope - 1) < 1e-6,
                           f"slope {slope:.9f}"))
    return out


def _tdse_checks(mutate):
    from .tdse import SpatialGrid, ground_state, ground_state_diagonalize, propagate
    grid = SpatialGrid(x_min=-200.0, x_max=200.0, n_points=2048, absorber_width=40.0)
    psi, energy = ground_state(grid)
    _, _, e_diag = ground_state_diagonalize(grid)
    out = [CheckResult("ground-state energy matches diagonalization", abs(energy - e_diag) < 1e-6,
                       f"E = {energy:.9f}, E_diag = {e_diag:.9f}")]
    out_state = propagate(psi, lambda t: np.zeros_like(t), 0.0, 100.0)
    overlap = abs(np.vdot(psi.values, out_state.values) * grid.dx)
    out.append(CheckResult("field-free ground state is stationary", abs(overlap - 1) < 1e-8,
                           f"|overlap| - 1 = {overlap - 1:.2e}"))
    member = IrRealization(0.02, 0.0, Envelope("cos2", 200.0), OMEGA)
    log = []
    propagate(psi, lambda t: a_cl_beta(member, t) + np.where(np.abs(t) < 20, 0.05 * np.cos(2 * t), 0.0),
              -100.0, 150.0, log=log)
    norms = np.array([n for _, n in log])
    out.append(CheckResult("norm is non-increasing during propagation", bool(np.all(np.diff(norms) <= 1e-14)),
                           f"max increase {np.max(np.diff(norms)):.2e}"))
    return out


def _ensemble_checks(mutate):
    s = LightState(phi=0.4, theta=2.2, omega=OMEGA, alpha_mag=2.0, r=0.9, e_vac=1e-3)
    nodes = quadrature_nodes(s, 8, "exact")
    w = np.array([n.weight for n in nodes])
    d = np.array([[n.point.beta_x - s.alpha_x, n.point.beta_y - s.alpha_y] for n in nodes])
    err = float(np.max(np.abs((w[:, None] * d).T @ d - beta_covariance(s))))
    return [CheckResult("quadrature nodes reproduce beta_covariance", err < 1e-10, f"max error {err:.2e}"),
            CheckResult("quadrature weights sum to 1", abs(w.sum() - 1) < 1e-12, f"sum - 1 = {w.sum() - 1:.1e}")]


SUITES = {
    "lightmodel": _lightmodel_checks,
    "oracle": _oracle_checks,
    "fields": _fields_checks,
    "retrieval": _retrieval_checks,
    "ensemble": _ensemble_checks,
    "tdse": _tdse_checks,
}
FAST_SUITES = ("lightmodel", "oracle")


def run_suites(fast: bool = False, mutate: str | None = None) -> list[SuiteResult]:
    if mutate is not None and mutate not in MUTATIONS:
        raise ValueError(f"unknown mutation {mutate!r}; expected one of {MUTATIONS}")
    names = FAST_SUITES if fast else tuple(SUITES)
    results = []
    for name in names:
        start = time.perf_counter()
        checks = SUITES[name](mutate)
        results.append(SuiteResult(name, checks, time.perf_counter() - start))
    return results
