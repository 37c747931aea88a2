"""Run configuration: strict YAML parsing into canonical internal units.

Every key is checked; unknown keys are rejected with their full dotted
path, and every accepted value is recorded with its origin ("user" or
"default") so runs can echo exactly what they used. Lab-unit spellings
(mm, nm) are converted here, once; everything downstream is um / 1/um.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

import yaml

from .detection import DetectionGeometry
from .hologram import PumpProfileParams
from .kernel import MultiPeakParams, TpaKernel, build_multipeak, default_grids
from .optics import (
    PhaseMatchConfig,
    PumpWidths,
    SellmeierAxis,
    SellmeierCoefficients,
    external_signal_angle,
    fwhm_to_sigma_k,
    noncollinear_offset,
    phase_matching_width,
    refractive_indices,
)

_MISSING = object()

MATCHING_WIDTH_MODES = ("derived", "equal")
INPUT_BEAMS = ("flat",)
# derived external angle may differ from a declared one by this relative much
ANGLE_CHECK_RTOL = 0.01


class ConfigError(Exception):
    """Anything wrong with a run configuration, reported with its key path."""


def _coerce(value, kind, path):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path} must be a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path} must be an integer, got {value!r}")
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path} must be true or false, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path} must be a string, got {value!r}")
        return value
    raise AssertionError(f"unhandled kind {kind}")


class _Section:
    """One mapping level of the config, consumed key by key."""

    def __init__(self, data, path: str, provenance: list):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path or 'top level'} must be a mapping, got {type(data).__name__}")
        self._data = dict(data)
        self._path = path
        self._prov = provenance

    def _child_path(self, key: str) -> str:
        return f"{self._path}.{key}" if self._path else key

    def has(self, key: str) -> bool:
        return key in self._data

    def take(self, key: str, default=_MISSING, kind=None):
        path = self._child_path(key)
        if key in self._data:
            value, source = self._data.pop(key), "user"
        elif default is _MISSING:
            raise ConfigError(f"missing required key: {path}")
        else:
            value, source = default, "default"
        if value is not None and kind is not None:
            value = _coerce(value, kind, path)
        self._prov.append((path, value, source))
        return value

    def section(self, key: str, required: bool = False) -> "_Section":
        path = self._child_path(key)
        if key in self._data:
            return _Section(self._data.pop(key), path, self._prov)
        if required:
            raise ConfigError(f"missing required section: {path}")
        return _Section({}, path, self._prov)

    def finish(self) -> None:
        if self._data:
            keys = ", ".join(self._child_path(k) for k in sorted(self._data))
            raise ConfigError(f"unknown keys: {keys}")


def _exclusive_length(sec: _Section, base: str, unit_scales: dict,
                      required: bool = True) -> Optional[float]:
    """One canonical value from alternative unit spellings of the same key."""
    present = [k for k in unit_scales if sec.has(k)]
    if len(present) > 1:
        raise ConfigError(
            f"give exactly one spelling of {base} "
            f"({' or '.join(sec._child_path(k) for k in unit_scales)}), not several"
        )
    if not present:
        if required:
            raise ConfigError(
                f"one of {' or '.join(sec._child_path(k) for k in unit_scales)} is required"
            )
        return None
    key = present[0]
    return sec.take(key, kind=float) * unit_scales[key]


def _parse_sellmeier_axis(sec: _Section) -> SellmeierAxis:
    axis = SellmeierAxis(
        a=sec.take("a", kind=float),
        b=sec.take("b", kind=float),
        c=sec.take("c", kind=float),
        d=sec.take("d", kind=float),
    )
    sec.finish()
    return axis


@dataclass(frozen=True)
class HologramSettings:
    width_px: int = 1920
    height_px: int = 1080
    pixel_pitch_um: float = 8.0
    grating_period_px: float = 6.0
    magnification: float = 20.0
    input_beam: str = "flat"

    def __post_init__(self):
        if self.width_px < 16 or self.height_px < 1:
            raise ConfigError(f"raster {self.width_px}x{self.height_px} is too small")
        if self.pixel_pitch_um <= 0:
            raise ConfigError(f"pixel pitch must be positive, got {self.pixel_pitch_um}")
        if self.magnification <= 0:
            raise ConfigError(f"magnification must be positive, got {self.magnification}")
        if self.input_beam not in INPUT_BEAMS:
            raise ConfigError(f"input_beam must be one of {INPUT_BEAMS}, got {self.input_beam!r}")


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Fully validated run parameters in canonical units."""

    phase_match: PhaseMatchConfig
    sellmeier: Optional[SellmeierCoefficients]
    cut_angle_rad: Optional[float]
    offset_override: Optional[float]
    n_peaks: int
    sigma_pump: float
    peak_spacing: float
    side_amplitude: Optional[float]
    matching_width_mode: Union[str, float]
    grid_points: int
    span_sigmas: float
    both_branches: bool
    geometry: DetectionGeometry
    hologram: HologramSettings
    output_dir: str
    provenance: Tuple[tuple, ...] = field(default_factory=tuple)

    # -- derived quantities ------------------------------------------------

    def branch(self) -> str:
        return "both" if self.both_branches else "+"

    def offset(self) -> float:
        if self.offset_override is not None:
            return self.offset_override
        if self.phase_match.regime == "collinear":
            return 0.0
        return noncollinear_offset(self.phase_match).offset_um_inv

    def matching_width(self) -> float:
        if self.matching_width_mode == "equal":
            return self.sigma_pump
        if self.matching_width_mode == "derived":
            return phase_matching_width(self.phase_match)
        return float(self.matching_width_mode)

    def widths(self) -> PumpWidths:
        return PumpWidths(self.sigma_pump, self.matching_width())

    def multipeak_params(self) -> MultiPeakParams:
        return MultiPeakParams(
            n_peaks=self.n_peaks,
            peak_spacing=self.peak_spacing,
            noncollinear_offset=self.offset(),
            widths=self.widths(),
            side_amplitude=self.side_amplitude,
        )

    def grids(self) -> tuple:
        return default_grids(self.multipeak_params(), self.grid_points,
                             self.span_sigmas, self.branch())

    def build_kernel(self) -> TpaKernel:
        grid_s, grid_i = self.grids()
        return build_multipeak(self.multipeak_params(), grid_s, grid_i, self.branch())

    def pump_profile_params(self) -> PumpProfileParams:
        return PumpProfileParams(
            n_peaks=self.n_peaks,
            peak_spacing=self.peak_spacing,
            sigma_pump=self.sigma_pump,
            side_amplitude=self.side_amplitude,
        )

    def index_model(self) -> Optional[Callable[[float], float]]:
        """Wavelength (um) to downconverted-wave index, when dispersion is known."""
        if self.sellmeier is None:
            return None
        ordinary = self.sellmeier.ordinary
        window = self.sellmeier

        def model(lam_um: float) -> float:
            window.check_wavelength(lam_um)
            return ordinary.index(lam_um)

        return model

    def normalized(self) -> dict:
        """Nested dict of every accepted key with its resolved value."""
        tree: dict = {}
        for path, value, _source in self.provenance:
            node = tree
            parts = path.split(".")
            for part in parts[:-1]:
                node = node.setdefault(part, {})
            node[parts[-1]] = value
        return tree

    def provenance_lines(self) -> List[str]:
        return [f"{path} = {value!r}  [{source}]" for path, value, source in self.provenance]


def parse_config(data: dict) -> RunConfig:
    """Validate a config mapping and resolve it to canonical units."""
    prov: list = []
    root = _Section(data, "", prov)

    pm = root.section("phase_match", required=True)
    crystal_um = _exclusive_length(
        pm, "crystal length", {"crystal_length_mm": 1e3, "crystal_length_um": 1.0})
    pump_um = _exclusive_length(
        pm, "pump wavelength", {"pump_wavelength_nm": 1e-3, "pump_wavelength_um": 1.0})
    regime = pm.take("regime", default="noncollinear", kind=str)
    offset_override = pm.take("offset_override_um_inv", default=None, kind=float)

    has_indices = pm.has("indices")
    has_sellmeier = pm.has("sellmeier")
    if has_indices == has_sellmeier:
        raise ConfigError(
            "phase_match needs exactly one of phase_match.indices or phase_match.sellmeier"
        )

    sellmeier = None
    cut_angle_rad = None
    declared_external = None
    if has_indices:
        idx = pm.section("indices", required=True)
        n_signal = idx.take("signal", kind=float)
        n_pump = idx.take("pump", kind=float)
        idx.finish()
    else:
        sm = pm.section("sellmeier", required=True)
        ordinary = _parse_sellmeier_axis(sm.section("ordinary", required=True))
        extraordinary = _parse_sellmeier_axis(sm.section("extraordinary", required=True))
        valid = sm.take("valid_range_um", default=[0.2, 1.1])
        if (not isinstance(valid, (list, tuple)) or len(valid) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in valid)):
            raise ConfigError("phase_match.sellmeier.valid_range_um must be [low, high]")
        sellmeier = SellmeierCoefficients(ordinary, extraordinary,
                                          (float(valid[0]), float(valid[1])))
        cut_angle_rad = math.radians(sm.take("cut_angle_deg", kind=float))
        declared_external = sm.take("external_signal_angle_deg", default=None, kind=float)
        sm.finish()
        signal_lam_nm = 2.0 * pump_um * 1e3
        n_signal, _ = refractive_indices(sellmeier, signal_lam_nm)
        _, n_pump = refractive_indices(sellmeier, pump_um * 1e3, cut_angle_rad)
    pm.finish()

    try:
        phase_match = PhaseMatchConfig(
            crystal_length_um=crystal_um,
            pump_wavelength_um=pump_um,
            n_signal=n_signal,
            n_pump=n_pump,
            regime=regime,
        )
    except ValueError as exc:
        raise ConfigError(f"phase_match: {exc}") from exc

    if declared_external is not None:
        derived = math.degrees(external_signal_angle(phase_match))
        if abs(derived - declared_external) > ANGLE_CHECK_RTOL * abs(declared_external):
            raise ConfigError(
                f"dispersion data yields an external emission angle of {derived:.3f} deg, "
                f"but the config declares {declared_external:.3f} deg; "
                "fix the cut angle or the declared angle"
            )

    pump_sec = root.section("pump", required=True)
    n_peaks = pump_sec.take("peaks", default=1, kind=int)
    present = [k for k in ("envelope_fwhm_um", "sigma_k_um_inv") if pump_sec.has(k)]
    if len(present) != 1:
        raise ConfigError(
            "pump needs exactly one of pump.envelope_fwhm_um or pump.sigma_k_um_inv"
        )
    if present[0] == "envelope_fwhm_um":
        fwhm = pump_sec.take("envelope_fwhm_um", kind=float)
        if fwhm <= 0:
            raise ConfigError(f"pump.envelope_fwhm_um must be positive, got {fwhm}")
        sigma_pump = fwhm_to_sigma_k(fwhm)
    else:
        sigma_pump = pump_sec.take("sigma_k_um_inv", kind=float)
        if sigma_pump <= 0:
            raise ConfigError(f"pump.sigma_k_um_inv must be positive, got {sigma_pump}")
    peak_spacing = pump_sec.take("peak_spacing_um_inv",
                                 default=None if n_peaks > 1 else 0.0, kind=float)
    if peak_spacing is None:
        raise ConfigError("pump.peak_spacing_um_inv is required when pump.peaks > 1")
    side_amplitude = pump_sec.take("side_amplitude", default=None, kind=float)
    matching = pump_sec.take("matching_width", default="derived")
    if isinstance(matching, str):
        if matching not in MATCHING_WIDTH_MODES:
            raise ConfigError(
                f"pump.matching_width must be one of {MATCHING_WIDTH_MODES} or a number, "
                f"got {matching!r}"
            )
    elif isinstance(matching, bool) or not isinstance(matching, (int, float)):
        raise ConfigError(f"pump.matching_width must be a mode name or a number, got {matching!r}")
    else:
        matching = float(matching)
        if matching <= 0:
            raise ConfigError(f"explicit pump.matching_width must be positive, got {matching}")
    pump_sec.finish()

    grid = root.section("grid")
    grid_points = grid.take("points", default=512, kind=int)
    span_sigmas = grid.take("span_sigmas", default=5.0, kind=float)
    both_branches = grid.take("both_branches", default=False, kind=bool)
    grid.finish()
    if grid_points < 16:
        raise ConfigError(f"grid.points must be at least 16, got {grid_points}")
    if span_sigmas <= 0:
        raise ConfigError(f"grid.span_sigmas must be positive, got {span_sigmas}")

    det = root.section("detection")
    try:
        geometry = DetectionGeometry(
            focal_length_mm=det.take("focal_length_mm", default=100.0, kind=float),
            slit_width_signal_mm=det.take("slit_width_signal_mm", default=0.2, kind=float),
            slit_width_idler_mm=det.take("slit_width_idler_mm", default=0.4, kind=float),
            central_wavelength_nm=det.take("central_wavelength_nm",
                                           default=2.0 * pump_um * 1e3, kind=float),
            filter_fwhm_nm=det.take("filter_fwhm_nm", default=10.0, kind=float),
            medium_index=det.take("medium_index", default=1.0, kind=float),
        )
    except ValueError as exc:
        raise ConfigError(f"detection: {exc}") from exc
    det.finish()

    holo_sec = root.section("hologram")
    hologram = HologramSettings(
        width_px=holo_sec.take("width_px", default=1920, kind=int),
        height_px=holo_sec.take("height_px", default=1080, kind=int),
        pixel_pitch_um=holo_sec.take("pixel_pitch_um", default=8.0, kind=float),
        grating_period_px=holo_sec.take("grating_period_px", default=6.0, kind=float),
        magnification=holo_sec.take("magnification", default=20.0, kind=float),
        input_beam=holo_sec.take("input_beam", default="flat", kind=str),
    )
    holo_sec.finish()

    out = root.section("output")
    output_dir = out.take("directory", default="out", kind=str)
    out.finish()

    root.finish()

    cfg = RunConfig(
        phase_match=phase_match,
        sellmeier=sellmeier,
        cut_angle_rad=cut_angle_rad,
        offset_override=offset_override,
        n_peaks=n_peaks,
        sigma_pump=sigma_pump,
        peak_spacing=peak_spacing,
        side_amplitude=side_amplitude,
        matching_width_mode=matching,
        grid_points=grid_points,
        span_sigmas=span_sigmas,
        both_branches=both_branches,
        geometry=geometry,
        hologram=hologram,
        output_dir=output_dir,
        provenance=tuple(prov),
    )
    # fail fast on parameter combinations the builders would reject anyway
    try:
        cfg.multipeak_params()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if data is None:
        raise ConfigError(f"config {path} is empty")
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a mapping at top level")
    return parse_config(data)
