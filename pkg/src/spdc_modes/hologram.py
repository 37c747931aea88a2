"""Phase-only holograms that carve a structured pump out of a flat beam.

The encoding writes a blazed grating whose local modulation depth sets the
diffracted amplitude and whose local offset sets the phase:

    phase(x) = depth(A) * mod(2 pi x / period + arg(E), 2 pi)
    depth(A) = 1 + asinc(A) / pi,   sinc(asinc(A)) = A,  asinc: [0,1] -> [-pi, 0]

First diffraction order of that profile carries amplitude A exactly (with a
known residual phase asinc(A), which is why round-trip fidelity below is an
amplitude metric). Rasters are 8-bit phase levels on a fixed pixel pitch.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .optics import GAUSSIAN_FWHM_FACTOR

PHASE_LEVELS = 256
MIN_GRATING_PERIOD_PX = 3

# dense inversion table for sinc on [-pi, 0], where it rises 0 -> 1
_ASINC_Y = np.linspace(-math.pi, 0.0, 8193)
_ASINC_A = np.sinc(_ASINC_Y / math.pi)


def inverse_sinc(a: np.ndarray) -> np.ndarray:
    """Solve sinc(y) = a for y in [-pi, 0], elementwise; a clipped to [0, 1]."""
    a = np.clip(np.asarray(a, dtype=float), 0.0, 1.0)
    return np.interp(a, _ASINC_A, _ASINC_Y)


@dataclass(frozen=True, eq=False)
class FieldProfile1D:
    """Complex field sampled on a transverse coordinate axis (um)."""

    coordinates_um: np.ndarray
    amplitude: np.ndarray

    def __post_init__(self):
        if self.coordinates_um.ndim != 1 or self.coordinates_um.shape != self.amplitude.shape:
            raise ValueError("coordinates and amplitude must be matching 1D arrays")

    def magnified(self, factor: float) -> "FieldProfile1D":
        """Same field imaged with transverse magnification ``factor``."""
        if factor <= 0:
            raise ValueError(f"magnification must be positive, got {factor}")
        return FieldProfile1D(self.coordinates_um * factor, self.amplitude)


@dataclass(frozen=True)
class PumpProfileParams:
    """Crystal-plane pump: Gaussian envelope times an equally spaced comb.

    ``peak_spacing`` is the far-field distance between adjacent signal
    peaks (1/um), matching the kernel builders; the field oscillates at
    the pump peak positions, twice that spacing. ``sigma_pump`` is the
    envelope's angular-spectrum width (1/um).
    """

    n_peaks: int
    peak_spacing: float
    sigma_pump: float
    side_amplitude: Optional[float] = None

    def __post_init__(self):
        if self.n_peaks < 1:
            raise ValueError(f"need at least one peak, got {self.n_peaks}")
        if self.n_peaks > 1 and self.peak_spacing <= 0:
            raise ValueError(f"peak spacing must be positive, got {self.peak_spacing}")
        if self.sigma_pump <= 0:
            raise ValueError(f"sigma_pump must be positive, got {self.sigma_pump}")
        if self.side_amplitude is not None:
            if self.n_peaks != 3:
                raise ValueError("side_amplitude only applies to 3-peak pumps")
            if not (0.0 < self.side_amplitude <= 1.0):
                raise ValueError(f"side_amplitude must be in (0, 1], got {self.side_amplitude}")

    def envelope_fwhm_um(self) -> float:
        return GAUSSIAN_FWHM_FACTOR / self.sigma_pump

    def weights_and_frequencies(self) -> tuple:
        """Field weights and spatial frequencies (1/um) of the comb terms."""
        m = np.arange(self.n_peaks)
        freqs = (self.n_peaks - 1 - 2 * m) * self.peak_spacing  # twice the mode offsets
        if self.side_amplitude is not None:
            a = self.side_amplitude / 2.0
            weights = np.array([a, 0.5, a])
        else:
            weights = np.ones(self.n_peaks)
        return weights, freqs


def pump_field(params: PumpProfileParams, x_um: np.ndarray) -> FieldProfile1D:
    """Crystal-plane pump field, peak-normalized to max |E| = 1."""
    x = np.asarray(x_um, dtype=float)
    weights, freqs = params.weights_and_frequencies()
    comb = np.zeros(x.shape, dtype=complex)
    for w, f in zip(weights, freqs):
        comb += w * np.exp(1j * f * x)
    field = comb * np.exp(-(x ** 2) * params.sigma_pump ** 2 / 2.0)
    peak = np.abs(field).max()
    if peak == 0:
        raise ValueError("pump field vanished; check the parameters")
    return FieldProfile1D(x, field / peak)


# ---------------------------------------------------------------------------
# encoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HologramImage:
    """8-bit phase raster plus the physical constants needed to replay it."""

    phase_levels: np.ndarray   # uint8, shape (height, width)
    pixel_pitch_um: float
    grating_period_px: float

    def __post_init__(self):
        if self.phase_levels.dtype != np.uint8 or self.phase_levels.ndim != 2:
            raise ValueError("phase_levels must be a 2D uint8 array")
        if self.pixel_pitch_um <= 0:
            raise ValueError(f"pixel pitch must be positive, got {self.pixel_pitch_um}")
        if self.grating_period_px < 2:
            raise ValueError(f"grating period must be >= 2 px, got {self.grating_period_px}")

    def pixel_coordinates(self) -> np.ndarray:
        """Centered x coordinate (um) of every column."""
        w = self.phase_levels.shape[1]
        return (np.arange(w) - (w - 1) / 2.0) * self.pixel_pitch_um


def raster_coordinates(width_px: int, pixel_pitch_um: float) -> np.ndarray:
    return (np.arange(width_px) - (width_px - 1) / 2.0) * pixel_pitch_um


def phase_map(target: FieldProfile1D, x_um: np.ndarray,
              pixel_pitch_um: float, grating_period_px: float) -> np.ndarray:
    """Continuous encoding phase (radians in [0, 2 pi)) at the given pixels.

    The target is resampled onto the pixel grid (complex-linear, zero
    outside its support) and peak-normalized before encoding.
    """
    if grating_period_px < MIN_GRATING_PERIOD_PX:
        raise ValueError(
            f"grating period {grating_period_px} px is below {MIN_GRATING_PERIOD_PX} px; "
            "the first order would alias into its neighbours"
        )
    xt = target.coordinates_um
    if np.any(np.diff(xt) <= 0):
        raise ValueError("target coordinates must be strictly increasing")
    re_part = np.interp(x_um, xt, target.amplitude.real, left=0.0, right=0.0)
    im_part = np.interp(x_um, xt, target.amplitude.imag, left=0.0, right=0.0)
    field = re_part + 1j * im_part
    mag = np.abs(field)
    peak = mag.max()
    if peak == 0:
        raise ValueError("target field is zero over the raster")
    amp = mag / peak
    depth = 1.0 + inverse_sinc(amp) / math.pi
    ramp = np.mod(2.0 * math.pi * x_um / (grating_period_px * pixel_pitch_um)
                  + np.angle(field), 2.0 * math.pi)
    return depth * ramp


def quantize_phase(phase: np.ndarray) -> np.ndarray:
    """Map radians to 8-bit levels, wrapping 2 pi back onto level 0."""
    levels = np.round(phase * (PHASE_LEVELS / (2.0 * math.pi)))
    return (levels.astype(np.int64) % PHASE_LEVELS).astype(np.uint8)


def encode_hologram(target: FieldProfile1D, shape: tuple = (1080, 1920),
                    pixel_pitch_um: float = 8.0,
                    grating_period_px: float = 6.0) -> HologramImage:
    """Raster a 1D target field into a full-frame phase hologram.

    The profile runs along the width; every row repeats it.
    """
    height, width = shape
    if height < 1 or width < MIN_GRATING_PERIOD_PX:
        raise ValueError(f"raster shape {shape} is too small")
    x = raster_coordinates(width, pixel_pitch_um)
    row = quantize_phase(phase_map(target, x, pixel_pitch_um, grating_period_px))
    levels = np.broadcast_to(row, (height, width)).copy()
    return HologramImage(levels, pixel_pitch_um, grating_period_px)


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------

def first_order(phase: np.ndarray, pixel_pitch_um: float, grating_period_px: float,
                input_beam: Optional[np.ndarray] = None,
                order_center: float = 1.0) -> FieldProfile1D:
    """Demodulated first diffraction order of a 1D phase profile (radians).

    The phase drives a unit (or supplied) input beam; the spectral window
    spans half a grating frequency either side of the carrier, and the
    carrier is divided out so the result sits at baseband, comparable to
    the encoding target. ``order_center`` picks a different diffraction
    order (0 gives the undiffracted light) for negative controls.
    """
    if grating_period_px < MIN_GRATING_PERIOD_PX:
        raise ValueError(
            f"grating period {grating_period_px} px is below {MIN_GRATING_PERIOD_PX} px; "
            "the first order aliases into its neighbours"
        )
    phase = np.asarray(phase, dtype=float)
    if phase.ndim != 1:
        raise ValueError("phase must be a 1D profile")
    n = phase.size
    x = (np.arange(n) - (n - 1) / 2.0) * pixel_pitch_um
    beam = np.ones(n) if input_beam is None else np.asarray(input_beam, dtype=complex)
    if beam.shape != (n,):
        raise ValueError(f"input beam must have shape ({n},), got {beam.shape}")

    spectrum = np.fft.fft(beam * np.exp(1j * phase))
    freqs = np.fft.fftfreq(n, d=pixel_pitch_um)
    grating_freq = 1.0 / (grating_period_px * pixel_pitch_um)
    center = order_center * grating_freq
    window = (freqs > center - 0.5 * grating_freq) & (freqs < center + 0.5 * grating_freq)
    field = np.fft.ifft(spectrum * window)
    return FieldProfile1D(x, field * np.exp(-2j * math.pi * center * x))


def simulate_first_order(holo: HologramImage, input_beam: Optional[np.ndarray] = None,
                         row: int = 0, order_center: float = 1.0) -> FieldProfile1D:
    """Field diffracted into the first order of one raster row."""
    phase = holo.phase_levels[row].astype(float) * (2.0 * math.pi / PHASE_LEVELS)
    return first_order(phase, holo.pixel_pitch_um, holo.grating_period_px,
                       input_beam, order_center)


def amplitude_overlap(a: FieldProfile1D, b: FieldProfile1D) -> float:
    """Normalized overlap of |E| profiles on a's coordinate grid, in [0, 1]."""
    xa = a.coordinates_um
    mb = np.interp(xa, b.coordinates_um, np.abs(b.amplitude), left=0.0, right=0.0)
    ma = np.abs(a.amplitude)
    na, nb = np.linalg.norm(ma), np.linalg.norm(mb)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.dot(ma, mb) / (na * nb))


def envelope_of(field: FieldProfile1D, split_frequency: float) -> FieldProfile1D:
    """Low-pass magnitude envelope: keep content strictly below split_frequency (1/um).

    ``split_frequency`` is in angular units (rad/um) to match wavevector
    conventions elsewhere; pass half the comb frequency to strip the
    multi-peak beating and keep the envelope.
    """
    x = field.coordinates_um
    n = x.size
    d = np.diff(x)
    if not np.allclose(d, d[0], rtol=1e-9, atol=0.0):
        raise ValueError("envelope extraction needs a uniform coordinate grid")
    # rectify before filtering: |E| is immune to any residual phase ripple,
    # and its beating harmonics stay at multiples of the comb frequency
    spectrum = np.fft.fft(np.abs(field.amplitude))
    freqs = np.fft.fftfreq(n, d=d[0]) * 2.0 * math.pi
    spectrum[np.abs(freqs) >= split_frequency] = 0.0
    return FieldProfile1D(x, np.fft.ifft(spectrum))


def envelope_fwhm(field: FieldProfile1D, split_frequency: Optional[float] = None) -> float:
    """FWHM (um) of the magnitude envelope of a (possibly modulated) field."""
    env = envelope_of(field, split_frequency) if split_frequency else field
    y = np.abs(env.amplitude)
    x = env.coordinates_um
    half = y.max() / 2.0
    if half <= 0:
        raise ValueError("field is empty")
    above = np.flatnonzero(y >= half)
    if above[0] == 0 or above[-1] == y.size - 1:
        raise ValueError("envelope is cut off by the coordinate range")
    i, j = above[0], above[-1]
    left = x[i - 1] + (half - y[i - 1]) / (y[i] - y[i - 1]) * (x[i] - x[i - 1])
    right = x[j] + (half - y[j]) / (y[j + 1] - y[j]) * (x[j + 1] - x[j])
    return right - left


# ---------------------------------------------------------------------------
# raster I/O
# ---------------------------------------------------------------------------

def pgm_bytes(holo: HologramImage) -> bytes:
    """Binary PGM (P5, maxval 255) encoding of the phase raster."""
    h, w = holo.phase_levels.shape
    header = f"P5 {w} {h} 255\n".encode("ascii")
    return header + holo.phase_levels.tobytes()


def export_pgm(holo: HologramImage, path: str) -> None:
    """Write the raster as binary PGM, atomically."""
    from .exports import atomic_write_bytes
    try:
        atomic_write_bytes(path, pgm_bytes(holo))
    except OSError as exc:
        raise OSError(f"writing hologram to {path}: {exc}") from exc


def load_pgm(path: str, pixel_pitch_um: float = 8.0,
             grating_period_px: float = 6.0) -> HologramImage:
    """Read a PGM raster back; physical constants are not stored in PGM."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise OSError(f"reading hologram from {path}: {exc}") from exc
    return HologramImage(parse_pgm(data), pixel_pitch_um, grating_period_px)


def parse_pgm(data: bytes) -> np.ndarray:
    """Levels array from a binary PGM produced by :func:`pgm_bytes`."""
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    if not m:
        raise ValueError("not a binary PGM header")
    w, h, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ValueError(f"expected maxval 255, got {maxval}")
    payload = data[m.end():]
    if len(payload) != w * h:
        raise ValueError(f"payload holds {len(payload)} bytes, expected {w * h}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w)
