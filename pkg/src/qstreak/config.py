"""Run configuration: flat ``key = value`` text with ``[section]`` headers.

Physical inputs are given in lab units (nm, eV, W/cm^2, fs, as) and
converted to atomic units when the configuration is built.  Example::

    seed = 1

    [light]
    mode = macroscopic            # or: exact
    total_intensity = 1e12        # W/cm^2, with ratio = I_c / I_s
    ratio = 0.3333333333333333
    phi = 0.7853981633974483
    theta = 1.5707963267948966

    [ir]
    wavelength_nm = 800
    envelope = cos2
    cycles = 8

    [xuv]
    photon_energy_ev = 54
    intensity = 1e12
    duration_as = 250

    [tdse]
    n_points = 8192

    [scan]
    tau_count = 64
    nodes = 16

A macroscopic light block takes either ``total_intensity`` and ``ratio`` or
``coherent_intensity`` and ``squeezed_intensity``; an exact block takes
``alpha_mag``, ``r`` and ``e_vac`` (atomic units).
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .fields import Envelope, XuvPulse
from .lightmodel import LightState
from .tdse import SpatialGrid
from .units import as_to_au, ev_to_hartree, fs_to_au, intensity_to_field, wavelength_to_omega


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class LightConfig:
    mode: str = "macroscopic"
    total_intensity: float | None = 1e12
    ratio: float | None = 1.0 / 3.0
    coherent_intensity: float | None = None
    squeezed_intensity: float | None = None
    alpha_mag: float | None = None
    r: float | None = None
    e_vac: float | None = None
    phi: float = math.pi / 4
    theta: float = math.pi / 2

    def validate(self) -> None:
        total = self.total_intensity is not None or self.ratio is not None
        split = self.coherent_intensity is not None or self.squeezed_intensity is not None
        exact = any(v is not None for v in (self.alpha_mag, self.r, self.e_vac))
        if self.mode == "macroscopic":
            if exact:
                raise ConfigError("macroscopic light block must not set alpha_mag, r or e_vac")
            if total == split:
                raise ConfigError("give either total_intensity + ratio or coherent_intensity + squeezed_intensity")
            pair = (self.total_intensity, self.ratio) if total else (self.coherent_intensity, self.squeezed_intensity)
            if any(v is None for v in pair):
                raise ConfigError("incomplete intensity specification in [light]")
            if any(v < 0 for v in pair):
                raise ConfigError("intensities and ratio must be >= 0")
        elif self.mode == "exact":
            if total or split:
                raise ConfigError("exact light block must not set intensities")
            if any(v is None for v in (self.alpha_mag, self.r, self.e_vac)):
                raise ConfigError("exact light block needs alpha_mag, r and e_vac")
            if self.alpha_mag < 0 or self.r < 0 or self.e_vac < 0:
                raise ConfigError("alpha_mag, r and e_vac must be >= 0")
        else:
            raise ConfigError(f"unknown light mode {self.mode!r}; expected exact or macroscopic")

    def state(self, omega: float) -> LightState:
        if self.mode == "exact":
            return LightState(phi=self.phi, theta=self.theta, omega=omega, alpha_mag=self.alpha_mag,
                              r=self.r, e_vac=self.e_vac)
        if self.total_intensity is not None:
            return LightState.from_total_intensity(self.total_intensity, self.ratio, self.phi, self.theta, omega)
        return LightState.from_intensities(self.coherent_intensity, self.squeezed_intensity,
                                           self.phi, self.theta, omega)


@dataclass(frozen=True)
class IrConfig:
    wavelength_nm: float = 800.0
    envelope: str = "cos2"
    cycles: float | None = 8.0
    duration_fs: float | None = None

    def validate(self) -> None:
        if not self.wavelength_nm > 0:
            raise ConfigError("wavelength_nm must be positive")
        if (self.cycles is None) == (self.duration_fs is None):
            raise ConfigError("[ir] takes exactly one of cycles or duration_fs")
        if (self.cycles or self.duration_fs) <= 0:
            raise ConfigError("IR duration must be positive")

    @property
    def omega(self) -> float:
        return wavelength_to_omega(self.wavelength_nm)

    def duration(self) -> float:
        if self.cycles is not None:
            return self.cycles * 2 * math.pi / self.omega
        return fs_to_au(self.duration_fs)


@dataclass(frozen=True)
class XuvConfig:
    photon_energy_ev: float = 54.0
    intensity: float = 1e12
    duration_as: float = 250.0

    def validate(self) -> None:
        if not (self.photon_energy_ev > 0 and self.intensity > 0 and self.duration_as > 0):
            raise ConfigError("[xuv] photon_energy_ev, intensity and duration_as must be positive")

    def pulse(self) -> XuvPulse:
        return XuvPulse(ev_to_hartree(self.photon_energy_ev), intensity_to_field(self.intensity),
                        as_to_au(self.duration_as))


@dataclass(frozen=True)
class TdseConfig:
    x_min: float = -600.0
    x_max: float = 600.0
    n_points: int = 8192
    dt: float = 0.1
    absorber_width: float = 100.0
    softcore_a2: float = 2.0
    x_mask: float = 20.0
    split_interval: float = 0.5
    drift: float = 500.0
    scheme: str = "yoshida4"

    def grid(self) -> SpatialGrid:
        return SpatialGrid(self.x_min, self.x_max, self.n_points, self.dt, self.absorber_width,
                           self.softcore_a2, self.x_mask, self.split_interval, self.scheme)


@dataclass(frozen=True)
class ScanConfig:
    tau_start_cycles: float = -1.5
    tau_stop_cycles: float = 1.5
    tau_count: int = 64
    nodes: int = 16
    quadrature: str = "macroscopic"
    window_half_width: float = 0.5
    extraction_half_width: float = 0.7
    reference_phi: float = 0.0
    p0_reference: str = "xuv"
    chunk_size: int = 16

    def validate(self) -> None:
        if self.tau_count < 2 or self.nodes < 1 or self.chunk_size < 1:
            raise ConfigError("tau_count >= 2, nodes >= 1 and chunk_size >= 1 required")
        if not self.tau_stop_cycles > self.tau_start_cycles:
            raise ConfigError("tau_stop_cycles must exceed tau_start_cycles")
        if not 0 < self.window_half_width <= self.extraction_half_width:
            raise ConfigError("need 0 < window_half_width <= extraction_half_width")
        if self.quadrature not in ("exact", "macroscopic"):
            raise ConfigError("quadrature must be exact or macroscopic")
        if self.p0_reference not in ("xuv", "formula"):
            raise ConfigError("p0_reference must be xuv or formula")


SECTIONS = {"light": LightConfig, "ir": IrConfig, "xuv": XuvConfig, "tdse": TdseConfig, "scan": ScanConfig}


@dataclass(frozen=True)
class RunConfig:
    light: LightConfig = field(default_factory=LightConfig)
    ir: IrConfig = field(default_factory=IrConfig)
    xuv: XuvConfig = field(default_factory=XuvConfig)
    tdse: TdseConfig = field(default_factory=TdseConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    seed: int = 1
    out: str = "out"

    def __post_init__(self):
        for name in ("light", "ir", "xuv", "scan"):
            getattr(self, name).validate()
        try:
            self.tdse.grid()
        except ValueError as exc:
            raise ConfigError(f"[tdse] {exc}") from None

    # --- derived objects in atomic units
    @property
    def omega(self) -> float:
        return self.ir.omega

    def light_state(self) -> LightState:
        return self.light.state(self.omega)

    def ir_envelope(self) -> Envelope:
        return Envelope(self.ir.envelope, self.ir.duration(), 0.0)

    def xuv_pulse(self) -> XuvPulse:
        return self.xuv.pulse()

    def grid(self) -> SpatialGrid:
        return self.tdse.grid()

    def tau_grid(self) -> np.ndarray:
        period = 2 * math.pi / self.omega
        s = self.scan
        span = (s.tau_stop_cycles - s.tau_start_cycles) * period
        return s.tau_start_cycles * period + span * np.arange(s.tau_count) / s.tau_count

    def with_(self, **sections) -> RunConfig:
        """Copy with replaced fields, e.g. ``cfg.with_(scan={"nodes": 8}, seed=3)``."""
        changes = {}
        for key, value in sections.items():
            if key in SECTIONS and isinstance(value, dict):
                changes[key] = replace(getattr(self, key), **value)
            else:
                changes[key] = value
        return replace(self, **changes)

    # --- serialization
    def to_text(self) -> str:
        lines = [f"seed = {self.seed}", f"out = {self.out}"]
        for name in SECTIONS:
            lines.append("")
            lines.append(f"[{name}]")
            block = getattr(self, name)
            for f in fields(block):
                value = getattr(block, f.name)
                if value is not None:
                    lines.append(f"{f.name} = {_fmt(value)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> RunConfig:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",), default_section="__none__")
        parser.optionxform = str
        try:
            parser.read_string("[__top__]\n" + text)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse configuration: {exc}") from None
        top = dict(parser["__top__"])
        blocks = {}
        for name, kind in SECTIONS.items():
            raw = dict(parser[name]) if parser.has_section(name) else {}
            blocks[name] = _build(kind, raw, name)
        unknown = set(parser.sections()) - set(SECTIONS) - {"__top__"}
        if unknown:
            raise ConfigError(f"unknown section(s): {sorted(unknown)}")
        extra = set(top) - {"seed", "out"}
        if extra:
            raise ConfigError(f"unknown top-level key(s): {sorted(extra)}")
        try:
            seed = int(top.get("seed", 1))
        except ValueError:
            raise ConfigError("seed must be an integer") from None
        return cls(seed=seed, out=top.get("out", "out"), **blocks)

    @classmethod
    def load(cls, path) -> RunConfig:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_text(text)

    def header(self) -> dict:
        """Configuration snapshot for output headers: lab-unit inputs plus atomic-unit values."""
        meta = {"seed": self.seed, "out": self.out}
        for name in SECTIONS:
            block = getattr(self, name)
            for f in fields(block):
                value = getattr(block, f.name)
                if value is not None:
                    meta[f"{name}.{f.name}"] = value
        state = self.light_state()
        pulse = self.xuv_pulse()
        meta.update({
            "au.omega": self.omega,
            "au.e_coh": state.e_coh,
            "au.e_sq": state.e_sq,
            "au.ir_duration": self.ir.duration(),
            "au.xuv_photon_energy": pulse.photon_energy,
            "au.xuv_peak_field": pulse.peak_field,
            "au.xuv_duration_fwhm": pulse.duration_fwhm,
        })
        return meta


def config_from_header(meta: dict) -> RunConfig:
    """Rebuild the configuration recorded in an output file header."""
    blocks = {name: {} for name in SECTIONS}
    for key, value in meta.items():
        section, _, name = key.partition(".")
        if section in SECTIONS and name:
            blocks[section][name] = _fmt(value)
    built = {name: _build(kind, blocks[name], name) for name, kind in SECTIONS.items()}
    return RunConfig(seed=int(meta.get("seed", 1)), out=str(meta.get("out", "out")), **built)


def _build(kind, raw: dict, section: str):
    """Construct a section dataclass from strings.

    Keys absent from ``raw`` keep their defaults, except that light-state
    and IR-duration alternatives named in ``raw`` clear the competing
    defaults (so ``coherent_intensity`` replaces ``total_intensity``).
    """
    known = {f.name: f for f in fields(kind)}
    unknown = set(raw) - set(known)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {sorted(unknown)}")
    values = {}
    for key, text in raw.items():
        default = known[key].default
        try:
            if isinstance(default, bool):
                values[key] = text.strip().lower() in ("1", "true", "yes")
            elif isinstance(default, int) and not isinstance(default, bool):
                values[key] = int(text)
            elif isinstance(default, str):
                values[key] = text.strip()
            else:
                values[key] = float(text)
        except ValueError:
            raise ConfigError(f"[{section}] {key}: cannot parse {text!r}") from None
    if kind is LightConfig:
        mode = values.get("mode", "macroscopic")
        if mode == "exact" or {"coherent_intensity", "squeezed_intensity"} & set(values):
            values.setdefault("total_intensity", None)
            values.setdefault("ratio", None)
    if kind is IrConfig and "duration_fs" in values:
        values.setdefault("cycles", None)
    return kind(**values)
