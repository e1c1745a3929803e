"""Light-state retrieval from delay-resolved moment traces.

Mean model:      <dp(tau)>   = -a f(tau) cos(w tau - phi_s)
Variance model:  <Dp^2(tau)> = (b/2) f(tau)^2 [1 - cos(2 w tau - theta_s)] + sigma0^2

with ``a = E_c / w`` and ``b = E_s^2 / w^2``.  The observed phases carry
the scattering offset: ``phi_s = phi + delta`` and ``theta_s = theta + 2 delta``.
Fits are unweighted and use only delays where ``f(tau) > f_min``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .traces import MomentTrace

TWO_PI = 2.0 * math.pi


class FitError(ValueError):
    """The trace does not determine the model parameters."""


class NonPhysicalFitWarning(UserWarning):
    pass


def wrap_pi(angle: float) -> float:
    """Map to (-pi, pi]."""
    a = math.remainder(angle, TWO_PI)
    return math.pi if a == -math.pi else a


def wrap_2pi(angle: float) -> float:
    a = angle % TWO_PI
    return 0.0 if a == TWO_PI else a


@dataclass
class MeanFit:
    amplitude: float
    phi_streak: float
    residual: float
    covariance: np.ndarray
    n_points: int


@dataclass
class VarianceFit:
    amplitude: float
    theta_streak: float
    sigma0_sq: float
    residual: float
    covariance: np.ndarray
    n_points: int
    physical: bool = True


def _select(trace: MomentTrace, envelope, f_min: float, min_points: int = 3):
    f = np.asarray(envelope(trace.tau), dtype=float)
    sel = f > f_min
    if sel.sum() < min_points:
        raise FitError(f"only {int(sel.sum())} delays with f(tau) > {f_min}")
    return sel, f


def _check_coverage(tau, omega, min_periods=1.5, min_points=16):
    span = tau.max() - tau.min() if len(tau) else 0.0
    if len(tau) < min_points or span * omega / TWO_PI < min_periods:
        raise FitError(f"trace must cover >= {min_periods} IR periods with >= {min_points} points "
                       f"(got {len(tau)} points over {span * omega / TWO_PI:.3g} periods)")


def fit_mean(trace: MomentTrace, omega: float, envelope, f_min: float = 0.1,
             check_coverage: bool = True) -> MeanFit:
    """Least-squares fit of the mean model.

    Linear in ``(a cos phi_s, a sin phi_s)``, so the normal-equations optimum
    is the exact minimizer.  ``phi_s`` is returned in (-pi, pi] and ``a >= 0``.
    """
    sel, f = _select(trace, envelope, f_min)
    tau, y, f = trace.tau[sel], trace.mean_shift[sel], f[sel]
    if check_coverage:
        _check_coverage(tau, omega)
    design = np.column_stack([-f * np.cos(omega * tau), -f * np.sin(omega * tau)])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 2:
        raise FitError("mean model is rank deficient on the fitted delays (envelope vanishes?)")
    c, s = coef
    amplitude = math.hypot(c, s)
    phi = wrap_pi(math.atan2(s, c))
    resid = y - design @ coef
    rss = float(resid @ resid)
    dof = max(len(y) - 2, 1)
    cov_cs = rss / dof * np.linalg.inv(design.T @ design)
    if amplitude > 0:
        jac = np.array([[c / amplitude, s / amplitude],
                        [-s / amplitude**2, c / amplitude**2]])
        cov = jac @ cov_cs @ jac.T
    else:
        cov = np.full((2, 2), np.inf)
    return MeanFit(amplitude, phi, math.sqrt(rss / len(y)), cov, len(y))


def _variance_model(params, tau, f2, omega):
    b, theta, s0 = params
    return 0.5 * b * f2 * (1.0 - np.cos(2 * omega * tau - theta)) + s0


def _variance_jacobian(params, tau, f2, omega):
    b, theta, _ = params
    phase = 2 * omega * tau - theta
    return np.column_stack([0.5 * f2 * (1.0 - np.cos(phase)),
                            -0.5 * b * f2 * np.sin(phase),
                            np.ones_like(tau)])


def _refine(params, tau, y, f2, omega, max_iter=50):
    """Damped Gauss-Newton (Levenberg-Marquardt) on the constrained variance model."""
    params = np.array(params, dtype=float)
    lam = 1e-3
    resid = y - _variance_model(params, tau, f2, omega)
    cost = resid @ resid
    for _ in range(max_iter):
        jac = _variance_jacobian(params, tau, f2, omega)
        jtj = jac.T @ jac
        grad = jac.T @ resid
        improved = False
        while lam < 1e12:
            step = np.linalg.solve(jtj + lam * np.diag(np.diag(jtj) + 1e-300), grad)
            trial = params + step
            r_new = y - _variance_model(trial, tau, f2, omega)
            c_new = r_new @ r_new
            if c_new <= cost:
                params, resid, lam, improved = trial, r_new, lam * 0.1, True
                break
            lam *= 10.0
        if not improved:
            break
        if abs(cost - c_new) <= 1e-15 * max(cost, 1e-300) or np.all(np.abs(step) <= 1e-14 * (1 + np.abs(params))):
            cost = c_new
            break
        cost = c_new
    return params, resid


def fit_variance(trace: MomentTrace, omega: float, envelope, f_min: float = 0.1,
                 check_coverage: bool = True) -> VarianceFit:
    """Fit of the variance model.

    The linear problem in ``(b, b cos theta_s, b sin theta_s, sigma0^2)`` is
    solved first; the constraint tying the first three together is then
    imposed by a damped Gauss-Newton refinement in ``(b, theta_s, sigma0^2)``.
    ``theta_s`` is returned in [0, 2 pi) with ``b >= 0``.  A negative
    ``sigma0^2`` (beyond round-off) is kept but flagged with a :class:`NonPhysicalFitWarning`.
    """
    sel, f = _select(trace, envelope, f_min)
    tau, y, f = trace.tau[sel], trace.variance[sel], f[sel]
    if check_coverage:
        _check_coverage(tau, omega)
    if np.any(y < -1e-12 * float(np.max(np.abs(y), initial=0.0))) or not np.any(y > 0):
        raise FitError("variance must be non-negative at every fitted delay")
    f2 = f * f
    design = np.column_stack([0.5 * f2, -0.5 * f2 * np.cos(2 * omega * tau),
                              -0.5 * f2 * np.sin(2 * omega * tau), np.ones_like(tau)])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 4:
        raise FitError("variance model is rank deficient on the fitted delays")
    _, bc, bs, s0 = coef
    start = (math.hypot(bc, bs), math.atan2(bs, bc), s0)
    params, resid = _refine(start, tau, y, f2, omega)
    if params[0] < 0:
        params, resid = _refine((-params[0], params[1] + math.pi, params[2]), tau, y, f2, omega)
        params[0] = abs(params[0])
    b, theta, s0 = params
    rss = float(resid @ resid)
    jac = _variance_jacobian(params, tau, f2, omega)
    dof = max(len(y) - 3, 1)
    try:
        cov = rss / dof * np.linalg.inv(jac.T @ jac)
    except np.linalg.LinAlgError:
        cov = np.full((3, 3), np.inf)
    # round-off of a zero offset is not a diagnosis
    physical = s0 >= -1e-9 * float(np.max(np.abs(y)))
    if not physical:
        warnings.warn(f"fitted sigma0^2 = {s0:.3e} < 0 (non-physical)", NonPhysicalFitWarning, stacklevel=2)
    return VarianceFit(float(b), wrap_2pi(theta), float(s0), math.sqrt(rss / len(y)), cov, len(y), physical)


def calibrate_delta(reference: MomentTrace, known_phi: float, omega: float, envelope,
                    f_min: float = 0.1) -> float:
    """Scattering phase from a coherent reference of known coherent phase."""
    return wrap_pi(fit_mean(reference, omega, envelope, f_min).phi_streak - known_phi)


@dataclass
class RetrievalReport:
    e_coh: float
    e_sq: float
    phi_streak: float
    theta_streak: float
    delta: float
    phi: float
    theta: float
    sigma0_sq: float
    residual_mean: float
    residual_var: float
    cov_mean: list = field(default_factory=list)
    cov_var: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    KEYS = ("e_coh", "e_sq", "phi_streak", "theta_streak", "delta", "phi", "theta",
            "sigma0_sq", "residual_mean", "residual_var")

    def to_text(self) -> str:
        lines = [f"{k} = {getattr(self, k):.16e}" for k in self.KEYS]
        for w in self.warnings:
            lines.append(f"warning = {w}")
        lines.append("[machine]")
        lines.append(json.dumps(asdict(self), sort_keys=True))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> RetrievalReport:
        block = text.split("[machine]", 1)[1].strip()
        return cls(**json.loads(block))


def retrieve(trace: MomentTrace, delta: float, omega: float, envelope, f_min: float = 0.1,
             variance_trace: MomentTrace | None = None) -> RetrievalReport:
    """Fit both models and remove the scattering phase.

    ``variance_trace`` defaults to ``trace`` (both moments from one scan).
    """
    var_trace = trace if variance_trace is None else variance_trace
    caught = []
    mf = fit_mean(trace, omega, envelope, f_min)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always", NonPhysicalFitWarning)
        vf = fit_variance(var_trace, omega, envelope, f_min)
    caught.extend(str(r.message) for r in rec)
    for msg in caught:
        warnings.warn(msg, NonPhysicalFitWarning, stacklevel=2)
    return RetrievalReport(
        e_coh=omega * mf.amplitude,
        e_sq=omega * math.sqrt(max(vf.amplitude, 0.0)),
        phi_streak=mf.phi_streak,
        theta_streak=vf.theta_streak,
        delta=delta,
        phi=mf.phi_streak - delta,
        theta=wrap_2pi(vf.theta_streak - 2 * delta),
        sigma0_sq=vf.sigma0_sq,
        residual_mean=mf.residual,
        residual_var=vf.residual,
        cov_mean=mf.covariance.tolist(),
        cov_var=vf.covariance.tolist(),
        warnings=caught,
    )
