"""Command-line interface: ``qstreak <command> --config run.cfg``.

Commands
--------
ground   ground state of the soft-core atom and the diagonalization cross-check
trace    ensemble TDSE scan -> spectrogram.dat and moments.dat
moments  moments of an existing spectrogram file
fit      calibrate delta on a coherent reference and retrieve the light state
oracle   Coulomb-free model traces (closed form, Monte Carlo, focal, CEP jitter)
verify   reduced-scale invariant suites

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig
from .ensemble import accumulate_moments, quadrature_nodes, run_scan
from .fields import IrRealization
from .lightmodel import LightState
from .oracle import cep_jitter_moments, focal_average_moments, gaussian_focal_profile, monte_carlo_trace, oracle_trace
from .retrieval import NonPhysicalFitWarning, calibrate_delta, retrieve
from .tdse import InvalidRunError, NumericalError, ground_state, ground_state_diagonalize, single_run
from .traces import (MomentTrace, ensure_parent, is_close_header, read_moments, read_spectrogram, write_moments,
                     write_spectrogram)

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3
FAST = {"tdse": {"n_points": 4096}, "scan": {"nodes": 8, "tau_count": 32}}
EXACT_ALPHA = 1e3

log = logging.getLogger("qstreak")


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if getattr(args, "fast", False):
        cfg = cfg.with_(**FAST)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_(seed=args.seed)
    if getattr(args, "mode", None):
        cfg = cfg.with_(scan={"quadrature": args.mode})
    if getattr(args, "out", None):
        cfg = cfg.with_(out=args.out)
    return cfg


def _ensemble_state(cfg: RunConfig) -> LightState:
    """Light state in the representation the quadrature mode needs.

    Exact quadrature of a macroscopic configuration uses the equivalent exact
    state with ``|alpha| = 1e3`` (same E_c, E_s)."""
    state = cfg.light_state()
    if cfg.scan.quadrature == "exact" and state.is_macroscopic:
        if state.e_coh == 0:
            raise ConfigError("exact quadrature of a macroscopic state needs E_c > 0")
        e_vac = state.e_coh / (2 * EXACT_ALPHA)
        r = math.log(state.e_sq / e_vac) if state.e_sq > 0 else 0.0
        state = LightState(phi=state.phi, theta=state.theta, omega=state.omega, alpha_mag=EXACT_ALPHA,
                           r=max(r, 0.0), e_vac=e_vac)
    return state


def _p0(cfg: RunConfig, ground, energy) -> tuple[float, float]:
    """(p0 used for moments, p0 from energy conservation).

    The moment window is always centred on the energy-conservation value; the
    ``xuv`` reference is the field-free centroid inside that same window, so a
    trace without IR has zero mean shift.
    """
    pulse = cfg.xuv_pulse()
    formula = math.sqrt(2.0 * (pulse.photon_energy + energy))
    if cfg.scan.p0_reference == "formula":
        return formula, formula
    half = cfg.scan.extraction_half_width
    dark = IrRealization(0.0, 0.0, cfg.ir_envelope(), cfg.omega)
    spec = single_run(cfg.grid(), ground, pulse, dark, 0.0, (formula - half, formula + half), cfg.tdse.drift)
    sel = np.abs(spec.p_grid - formula) <= cfg.scan.window_half_width
    centroid = float(np.sum(spec.p_grid[sel] * spec.density[sel]) / np.sum(spec.density[sel]))
    return centroid, formula


def _write_trace_outputs(out: Path, stem: str, spec, trace) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_spectrogram(out / f"{stem}spectrogram.dat", spec)
    write_moments(out / f"{stem}moments.dat", trace)
    print(f"wrote {out / f'{stem}spectrogram.dat'}")
    print(f"wrote {out / f'{stem}moments.dat'}")


def cmd_ground(cfg: RunConfig, args) -> int:
    grid = cfg.grid()
    psi, energy = ground_state(grid)
    _, _, e_diag = ground_state_diagonalize(grid)
    print(f"E_g = {energy:.12e}")
    print(f"E_diag = {e_diag:.12e}")
    print(f"difference = {energy - e_diag:.3e}")
    print(f"norm = {float(psi.norm):.15f}")
    return EXIT_OK


def cmd_trace(cfg: RunConfig, args) -> int:
    grid, pulse, env = cfg.grid(), cfg.xuv_pulse(), cfg.ir_envelope()
    if args.reference:
        total = cfg.light_state().scales()
        state = LightState.macroscopic(math.hypot(total.e_coh, total.e_sq), 0.0, cfg.scan.reference_phi, 0.0,
                                       cfg.omega)
        nodes = quadrature_nodes(state, 1)
        stem = "reference_"
    else:
        state = _ensemble_state(cfg)
        nodes = quadrature_nodes(state, cfg.scan.nodes, cfg.scan.quadrature)
        stem = ""
    ground, energy = ground_state(grid)
    p0, p0_formula = _p0(cfg, ground, energy)
    half = cfg.scan.extraction_half_width
    meta = cfg.header()
    meta.update({"kind": "reference" if args.reference else "state", "e_ground": energy, "p0": p0,
                 "p0_formula": p0_formula, "n_members": len(nodes)})
    log.info("scan: %d nodes x %d delays on %d points", len(nodes), cfg.scan.tau_count, grid.n_points)
    spec = run_scan(grid, state, env, pulse, cfg.tau_grid(), nodes, (p0_formula - half, p0_formula + half),
                    drift=cfg.tdse.drift, ground=ground, workers=args.threads, chunk_size=cfg.scan.chunk_size,
                    metadata=meta)
    w = cfg.scan.window_half_width
    trace = accumulate_moments(spec, (p0_formula - w, p0_formula + w), p0)
    _write_trace_outputs(Path(cfg.out), stem, spec, trace)
    return EXIT_OK


def cmd_moments(cfg: RunConfig, args) -> int:
    spec = read_spectrogram(args.spectrogram)
    formula = float(spec.metadata.get("p0_formula", math.sqrt(2 * (cfg.xuv_pulse().photon_energy - 0.5))))
    p0 = float(spec.metadata.get("p0", formula))
    w = cfg.scan.window_half_width
    trace = accumulate_moments(spec, (formula - w, formula + w), p0)
    out = ensure_parent(Path(cfg.out) / (Path(args.spectrogram).stem.replace("spectrogram", "") + "moments.dat"))
    write_moments(out, trace)
    print(f"wrote {out}")
    return EXIT_OK


def _check_omega(trace: MomentTrace, cfg: RunConfig, name: str) -> None:
    omega = trace.metadata.get("au.omega", trace.metadata.get("omega"))
    if omega is not None and not is_close_header(float(omega), cfg.omega, rel=1e-9):
        raise ConfigError(f"{name}: omega = {omega} in file header does not match the configuration ({cfg.omega})")


def cmd_fit(cfg: RunConfig, args) -> int:
    trace = read_moments(args.moments)
    _check_omega(trace, cfg, args.moments)
    env, omega = cfg.ir_envelope(), cfg.omega
    lines = []
    if args.reference:
        ref = read_moments(args.reference)
        _check_omega(ref, cfg, args.reference)
        delta = calibrate_delta(ref, cfg.scan.reference_phi, omega, env)
    else:
        delta = 0.0
        lines.append("warning = no coherent reference given; delta assumed 0")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonPhysicalFitWarning)
        report = retrieve(trace, delta, omega, env)
    text = "\n".join(lines + [report.to_text().rstrip("\n")]) + "\n"
    out = ensure_parent(Path(cfg.out) / "report.txt")
    out.write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_oracle(cfg: RunConfig, args) -> int:
    state, env, tau = cfg.light_state(), cfg.ir_envelope(), cfg.tau_grid()
    meta = cfg.header()
    if args.mc:
        trace = monte_carlo_trace(state, env, tau, args.mc, cfg.seed)
        meta.update(source="oracle-mc", n_samples=args.mc)
    elif args.focal:
        trace = focal_average_moments(state, env, tau, gaussian_focal_profile(args.focal))
        meta.update(source="oracle-focal", annuli=args.focal)
    elif args.cep is not None:
        trace = cep_jitter_moments(state, env, tau, args.cep, args.draws, cfg.seed)
        meta.update(source="oracle-cep", jitter_sigma=args.cep, n_draws=args.draws)
    else:
        trace = oracle_trace(state, env, tau)
        meta.update(source="oracle")
    trace.metadata = meta
    out = ensure_parent(Path(cfg.out) / "oracle_moments.dat")
    write_moments(out, trace)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig | None, args) -> int:
    from .verify import run_suites
    results = run_suites(fast=args.fast, mutate=args.mutate)
    failed = False
    for suite in results:
        print(f"[{'PASS' if suite.ok else 'FAIL'}] {suite.name} ({suite.seconds:.2f} s)")
        for check in suite.checks:
            if not check.ok:
                failed = True
                print(f"    violated: {check.invariant} ({check.detail})")
    print(f"total {sum(s.seconds for s in results):.2f} s")
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {"ground": cmd_ground, "trace": cmd_trace, "moments": cmd_moments, "fit": cmd_fit,
            "oracle": cmd_oracle, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="run configuration file")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--threads", type=int, default=1, help="worker processes for the TDSE scan")
    common.add_argument("--seed", type=int, help="random seed (overrides the config)")
    common.add_argument("--fast", action="store_true", help="reduced scale (4096 points, 8 nodes, 32 delays)")
    common.add_argument("--mc", type=int, default=0, help="Monte-Carlo samples for oracle traces")
    common.add_argument("--mode", choices=("exact", "macroscopic"), help="quadrature mode")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="qstreak", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ground", parents=[common], help="ground state and diagonalization check")
    p = sub.add_parser("trace", parents=[common], help="ensemble TDSE scan")
    p.add_argument("--reference", action="store_true", help="scan the coherent reference instead of the state")
    p = sub.add_parser("moments", parents=[common], help="moments of a spectrogram file")
    p.add_argument("--spectrogram", required=True)
    p = sub.add_parser("fit", parents=[common], help="retrieve the light state from a moment file")
    p.add_argument("--moments", required=True)
    p.add_argument("--reference", help="moment file of the coherent reference")
    p = sub.add_parser("oracle", parents=[common], help="Coulomb-free model traces")
    p.add_argument("--focal", type=int, default=0, help="average over a Gaussian focus with N annuli")
    p.add_argument("--cep", type=float, help="CEP jitter sigma in rad")
    p.add_argument("--draws", type=int, default=200, help="CEP jitter draws")
    p = sub.add_parser("verify", parents=[common], help="invariant suites")
    p.add_argument("--mutate", choices=("kernel-sign",), help="inject a known bug; the suites must fail")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.mc and args.mc < 1000:
            raise ConfigError("--mc needs at least 1000 samples")
        cfg = _apply_overrides(RunConfig.load(args.config), args)
        return COMMANDS[args.command](cfg, args)
    except (NumericalError, InvalidRunError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError, OSError, KeyError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
