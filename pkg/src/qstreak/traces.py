"""Spectrogram and moment-trace containers and their text file formats.

Both formats start with a block of ``# key = value`` header lines that
record the configuration the data came from.  Numbers are written in
scientific notation with 17 significant digits (exact float round trip).

Spectrogram body: one row per delay, first column tau (a.u.), then P(p, tau)
at ``p = p_start + j * p_step`` for ``j < p_count`` (header keys).

Moment body: columns tau, mean shift <dp>, variance <Dp^2>, optionally
followed by their standard errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.16e"


@dataclass
class MomentTrace:
    tau: np.ndarray
    mean_shift: np.ndarray
    variance: np.ndarray
    mean_err: np.ndarray | None = None
    var_err: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.tau = np.asarray(self.tau, dtype=float)
        self.mean_shift = np.asarray(self.mean_shift, dtype=float)
        self.variance = np.asarray(self.variance, dtype=float)
        if not (self.tau.shape == self.mean_shift.shape == self.variance.shape):
            raise ValueError("tau, mean_shift and variance must have equal shapes")

    def __len__(self):
        return len(self.tau)


@dataclass
class StreakSpectrogram:
    tau_grid: np.ndarray
    p_grid: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.tau_grid), len(self.p_grid)):
            raise ValueError("values must have shape (n_tau, n_p)")


def _format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return FLOAT_FMT % value
    return str(value)


def _parse_value(text: str):
    text = text.strip()
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def write_header(fh, metadata: dict) -> None:
    for key, value in metadata.items():
        fh.write(f"# {key} = {_format_value(value)}\n")


def read_header(path) -> dict:
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            if "=" in body:
                key, value = body.split("=", 1)
                meta[key.strip()] = _parse_value(value)
    return meta


def write_spectrogram(path, spec: StreakSpectrogram) -> None:
    p = np.asarray(spec.p_grid)
    meta = dict(spec.metadata)
    meta.update(p_start=float(p[0]), p_step=float(p[1] - p[0]) if len(p) > 1 else 0.0,
                p_count=len(p), tau_count=len(spec.tau_grid))
    data = np.column_stack([spec.tau_grid, spec.values])
    with open(path, "w") as fh:
        write_header(fh, meta)
        np.savetxt(fh, data, fmt=FLOAT_FMT)


def read_spectrogram(path) -> StreakSpectrogram:
    meta = read_header(path)
    data = np.atleast_2d(np.loadtxt(path, comments="#"))
    n_p = int(meta["p_count"])
    p = meta["p_start"] + meta["p_step"] * np.arange(n_p)
    for key in ("p_start", "p_step", "p_count", "tau_count"):
        meta.pop(key, None)
    return StreakSpectrogram(data[:, 0], p, data[:, 1:], meta)


def write_moments(path, trace: MomentTrace) -> None:
    cols = [trace.tau, trace.mean_shift, trace.variance]
    names = "tau mean_shift variance"
    if trace.mean_err is not None:
        cols += [trace.mean_err, trace.var_err]
        names += " mean_err var_err"
    meta = dict(trace.metadata)
    meta["columns"] = names
    with open(path, "w") as fh:
        write_header(fh, meta)
        np.savetxt(fh, np.column_stack(cols), fmt=FLOAT_FMT)


def read_moments(path) -> MomentTrace:
    meta = read_header(path)
    data = np.atleast_2d(np.loadtxt(path, comments="#"))
    meta.pop("columns", None)
    if data.shape[1] >= 5:
        return MomentTrace(data[:, 0], data[:, 1], data[:, 2], data[:, 3], data[:, 4], meta)
    return MomentTrace(data[:, 0], data[:, 1], data[:, 2], metadata=meta)


def ensure_parent(path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def is_close_header(a, b, rel=1e-12) -> bool:
    """Compare two header values, numerically when both are numbers."""
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return math.isclose(a, b, rel_tol=rel, abs_tol=0.0)
    return a == b
