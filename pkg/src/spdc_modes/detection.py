"""Slit-scan observables on joint intensities.

Scans emulate a far-field measurement: a slit of finite width selects a
window of transverse wavevector, and the count rate is the intensity
integrated over that window. Everything here works directly in
wavevector space (1/um); :class:`DetectionGeometry` owns the conversion
from bench units (mm at the Fourier plane of a lens) and the spectral
filter placed before the detectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.optimize import curve_fit
from scipy.special import logsumexp

from .kernel import JointIntensity, TpaKernel, marginal_intensity
from .optics import GAUSSIAN_FWHM_FACTOR, PhaseMatchConfig, WavevectorGrid, noncollinear_offset


@dataclass(frozen=True)
class DetectionGeometry:
    """Far-field detection bench: lens, slits, and spectral filter."""

    focal_length_mm: float = 100.0
    slit_width_signal_mm: float = 0.2
    slit_width_idler_mm: float = 0.4
    central_wavelength_nm: float = 810.0
    filter_fwhm_nm: float = 10.0
    medium_index: float = 1.0

    def __post_init__(self):
        for name in ("focal_length_mm", "slit_width_signal_mm", "slit_width_idler_mm",
                     "central_wavelength_nm", "filter_fwhm_nm"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.medium_index < 1.0:
            raise ValueError(f"medium index must be >= 1, got {self.medium_index}")

    def position_to_wavevector(self, x_mm: float,
                               wavelength_nm: Optional[float] = None) -> float:
        """Transverse wavevector (1/um) sampled at focal-plane position x."""
        lam_um = (wavelength_nm or self.central_wavelength_nm) * 1e-3
        return 2.0 * math.pi * self.medium_index / lam_um * (x_mm / self.focal_length_mm)

    def slit_acceptance(self, which: str = "signal",
                        wavelength_nm: Optional[float] = None) -> float:
        """Wavevector window (1/um) admitted by one slit."""
        if which == "signal":
            w = self.slit_width_signal_mm
        elif which == "idler":
            w = self.slit_width_idler_mm
        else:
            raise ValueError(f"which must be 'signal' or 'idler', got {which!r}")
        lam_um = (wavelength_nm or self.central_wavelength_nm) * 1e-3
        return 2.0 * math.pi * self.medium_index / lam_um * (w / self.focal_length_mm)


@dataclass(frozen=True, eq=False)
class ScanSpectrum:
    """Count rate versus slit-center wavevector."""

    positions: np.ndarray
    rates: np.ndarray
    kind: str = "singles"
    warnings: tuple = ()


def _as_intensity(obj: Union[TpaKernel, JointIntensity]) -> JointIntensity:
    if isinstance(obj, TpaKernel):
        return obj.intensity()
    if isinstance(obj, JointIntensity):
        return obj
    raise TypeError(f"expected TpaKernel or JointIntensity, got {type(obj)}")


def _box_integral(x: np.ndarray, y: np.ndarray, centers: np.ndarray,
                  width: float) -> np.ndarray:
    """Integral of y over [c - width/2, c + width/2] for each center.

    Cumulative trapezoid plus linear interpolation; the cumulative is
    clamped at the ends, so the profile counts as zero outside its grid.
    """
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))))
    upper = np.interp(centers + width / 2.0, x, cum)
    lower = np.interp(centers - width / 2.0, x, cum)
    return upper - lower


def _filter_positions(positions: np.ndarray, grid: WavevectorGrid, label: str):
    inside = (positions >= grid.k_min) & (positions <= grid.k_max)
    warns = []
    if not inside.all():
        warns.append(
            f"{int((~inside).sum())} {label} scan positions fall outside the grid "
            f"[{grid.k_min:.4g}, {grid.k_max:.4g}] and were dropped"
        )
    return positions[inside], warns


def singles_scan(source: Union[TpaKernel, JointIntensity], geom: DetectionGeometry,
                 which: str = "signal", positions: Optional[np.ndarray] = None,
                 zero_width: bool = False) -> ScanSpectrum:
    """Single-detector rate: partner integrated out, slit window applied."""
    inten = _as_intensity(source)
    if which == "signal":
        grid, axis = inten.grid_s, 1
        partner_spacing = inten.grid_i.spacing
    elif which == "idler":
        grid, axis = inten.grid_i, 0
        partner_spacing = inten.grid_s.spacing
    else:
        raise ValueError(f"which must be 'signal' or 'idler', got {which!r}")

    k = grid.points()
    marginal = inten.values.sum(axis=axis) * partner_spacing
    if positions is None:
        positions = k
    else:
        positions = np.asarray(positions, dtype=float)
    positions, warns = _filter_positions(positions, grid, which)
    if positions.size == 0:
        raise ValueError("no scan positions left inside the grid")

    if zero_width:
        rates = np.interp(positions, k, marginal)
    else:
        rates = _box_integral(k, marginal, positions, geom.slit_acceptance(which))
    return ScanSpectrum(positions, rates, "singles", tuple(inten.warnings) + tuple(warns))


def coincidence_scan(source: Union[TpaKernel, JointIntensity], geom: DetectionGeometry,
                     fixed_center: float, scan: str = "signal",
                     positions: Optional[np.ndarray] = None,
                     zero_width: bool = False) -> ScanSpectrum:
    """Two-detector rate with the partner slit parked at ``fixed_center``."""
    inten = _as_intensity(source)
    if scan == "signal":
        scan_grid, fixed_grid = inten.grid_s, inten.grid_i
        values = inten.values
        fixed_label = "idler"
    elif scan == "idler":
        scan_grid, fixed_grid = inten.grid_i, inten.grid_s
        values = inten.values.T
        fixed_label = "signal"
    else:
        raise ValueError(f"scan must be 'signal' or 'idler', got {scan!r}")

    kf = fixed_grid.points()
    if not (kf[0] <= fixed_center <= kf[-1]):
        raise ValueError(
            f"fixed {fixed_label} slit center {fixed_center:.4g} lies outside the grid "
            f"[{kf[0]:.4g}, {kf[-1]:.4g}]"
        )

    if zero_width:
        # exact slice: interpolate along the fixed axis
        j = np.searchsorted(kf, fixed_center)
        j = min(max(j, 1), kf.size - 1)
        t = (fixed_center - kf[j - 1]) / (kf[j] - kf[j - 1])
        conditional = (1.0 - t) * values[:, j - 1] + t * values[:, j]
    else:
        width = geom.slit_acceptance(fixed_label)
        seg = 0.5 * (values[:, 1:] + values[:, :-1]) * np.diff(kf)
        cum = np.concatenate((np.zeros((values.shape[0], 1)), np.cumsum(seg, axis=1)), axis=1)
        hi = np.interp(fixed_center + width / 2.0, kf, np.arange(kf.size, dtype=float))
        lo = np.interp(fixed_center - width / 2.0, kf, np.arange(kf.size, dtype=float))
        conditional = _row_interp(cum, hi) - _row_interp(cum, lo)

    ks = scan_grid.points()
    if positions is None:
        positions = ks
    else:
        positions = np.asarray(positions, dtype=float)
    positions, warns = _filter_positions(positions, scan_grid, scan)
    if positions.size == 0:
        raise ValueError("no scan positions left inside the grid")

    if zero_width:
        rates = np.interp(positions, ks, conditional)
    else:
        rates = _box_integral(ks, conditional, positions, geom.slit_acceptance(scan))
    return ScanSpectrum(positions, rates, "coincidence",
                        tuple(inten.warnings) + tuple(warns))


def _row_interp(arr: np.ndarray, frac_index: float) -> np.ndarray:
    """Linear interpolation of each row of arr at a fractional column index."""
    j = int(math.floor(frac_index))
    j = min(max(j, 0), arr.shape[1] - 2)
    t = frac_index - j
    return (1.0 - t) * arr[:, j] + t * arr[:, j + 1]


# ---------------------------------------------------------------------------
# peak and width extraction
# ---------------------------------------------------------------------------

def _parabolic_vertex(x: np.ndarray, y: np.ndarray, i: int) -> tuple:
    """Vertex of the parabola through points i-1, i, i+1 (uniform grids only)."""
    if i == 0 or i == y.size - 1:
        return x[i], y[i]
    denom = y[i - 1] - 2.0 * y[i] + y[i + 1]
    if denom >= 0:
        return x[i], y[i]
    shift = 0.5 * (y[i - 1] - y[i + 1]) / denom
    h = x[i + 1] - x[i]
    return x[i] + shift * h, y[i] - 0.25 * (y[i - 1] - y[i + 1]) * shift


def find_peaks(spectrum: ScanSpectrum, min_height_frac: float = 0.2) -> tuple:
    """(positions, heights) of local maxima, parabolic sub-grid refinement.

    Keeps maxima at least ``min_height_frac`` of the global maximum; plateau
    points count once at their left edge.
    """
    x, y = spectrum.positions, spectrum.rates
    if y.size < 3:
        raise ValueError("need at least 3 samples to locate peaks")
    threshold = min_height_frac * y.max()
    pos, height = [], []
    for i in range(1, y.size - 1):
        if y[i] >= threshold and y[i] > y[i - 1] and y[i] >= y[i + 1]:
            if y[i] == y[i + 1]:  # plateau: skip unless it ends downward
                j = i
                while j < y.size - 1 and y[j] == y[j + 1]:
                    j += 1
                if j == y.size - 1 or y[j + 1] > y[j]:
                    continue
            p, h = _parabolic_vertex(x, y, i)
            pos.append(p)
            height.append(h)
    return np.array(pos), np.array(height)


def fwhm_of(spectrum: ScanSpectrum, method: str = "interp",
            window: Optional[tuple] = None) -> float:
    """Full width at half maximum of a single-peaked scan.

    ``window=(lo, hi)`` restricts the analysis first. ``method='interp'``
    walks the half-max crossings with linear interpolation and insists the
    above-half region is contiguous; ``method='gauss_fit'`` fits a single
    Gaussian and converts its width.
    """
    x, y = spectrum.positions, spectrum.rates
    if window is not None:
        lo, hi = window
        sel = (x >= lo) & (x <= hi)
        if sel.sum() < 5:
            raise ValueError(f"window [{lo}, {hi}] keeps fewer than 5 samples")
        x, y = x[sel], y[sel]

    peak = y.max()
    if peak <= 0:
        raise ValueError("spectrum is empty; no width to measure")

    if method == "gauss_fit":
        i0 = int(np.argmax(y))
        mean = x[i0]
        sig0 = max((x[-1] - x[0]) / 10.0, np.sqrt(np.sum(y * (x - mean) ** 2) / np.sum(y)))

        def model(k, amp, c, s):
            return amp * np.exp(-((k - c) ** 2) / (2.0 * s * s))

        params, _ = curve_fit(model, x, y, p0=(peak, mean, sig0))
        return GAUSSIAN_FWHM_FACTOR * abs(params[2])

    if method != "interp":
        raise ValueError(f"method must be 'interp' or 'gauss_fit', got {method!r}")

    half = peak / 2.0
    above = y >= half
    idx = np.flatnonzero(above)
    if np.any(np.diff(idx) > 1):
        raise ValueError(
            "multiple disjoint regions sit above half maximum; pass a window "
            "around one peak to measure it alone"
        )
    i_lo, i_hi = idx[0], idx[-1]
    if i_lo == 0 or i_hi == y.size - 1:
        raise ValueError("peak is cut off by the scan range; widen the scan")
    # linear crossing on each flank
    left = x[i_lo - 1] + (half - y[i_lo - 1]) / (y[i_lo] - y[i_lo - 1]) * (x[i_lo] - x[i_lo - 1])
    right = x[i_hi] + (half - y[i_hi]) / (y[i_hi + 1] - y[i_hi]) * (x[i_hi + 1] - x[i_hi])
    return right - left


def fedorov_ratio(kernel: Union[TpaKernel, JointIntensity], geom: DetectionGeometry,
                  zero_width: bool = False) -> float:
    """Width of the signal singles peak over the conditional peak width.

    The partner slit parks on the idler marginal's maximum (ties broken
    toward smaller \\|k\\|). With zero-width slits on a double-Gaussian
    amplitude this ratio equals the Schmidt number.
    """
    inten = _as_intensity(kernel)
    ki, mi = marginal_kernel_axis(inten, "idler")
    top = np.flatnonzero(mi == mi.max())
    center = ki[top[np.argmin(np.abs(ki[top]))]]

    singles = singles_scan(inten, geom, "signal", zero_width=zero_width)
    coinc = coincidence_scan(inten, geom, center, "signal", zero_width=zero_width)
    return fwhm_of(singles) / fwhm_of(coinc)


def marginal_kernel_axis(inten: JointIntensity, which: str) -> tuple:
    """(k_points, marginal intensity) for one photon of a joint intensity."""
    if which == "signal":
        return inten.grid_s.points(), inten.values.sum(axis=1) * inten.grid_i.spacing
    if which == "idler":
        return inten.grid_i.points(), inten.values.sum(axis=0) * inten.grid_s.spacing
    raise ValueError(f"which must be 'signal' or 'idler', got {which!r}")


# ---------------------------------------------------------------------------
# finite filter bandwidth
# ---------------------------------------------------------------------------

def ring_wavevector(lambda_signal_um: float, config: PhaseMatchConfig,
                    index_model: Optional[Callable[[float], float]] = None) -> float:
    """Exact transverse ring wavevector (1/um) at a given signal wavelength.

    Energy conservation fixes the idler wavelength; equal-and-opposite
    transverse wavevectors plus longitudinal momentum conservation give
    K_ring^2 = k_i^2 - ((k_p^2 + k_i^2 - k_s^2) / (2 k_p))^2.
    ``index_model`` maps wavelength (um) to the index seen by the downconverted
    waves; by default both use the constant config.n_signal.
    """
    lam_p = config.pump_wavelength_um
    if lambda_signal_um <= lam_p:
        raise ValueError(
            f"signal wavelength {lambda_signal_um} um must exceed the pump's {lam_p} um"
        )
    lam_i = 1.0 / (1.0 / lam_p - 1.0 / lambda_signal_um)
    n = index_model or (lambda _lam: config.n_signal)
    k_s = 2.0 * math.pi * n(lambda_signal_um) / lambda_signal_um
    k_i = 2.0 * math.pi * n(lam_i) / lam_i
    k_p = config.pump_wavevector
    z_i = (k_p * k_p + k_i * k_i - k_s * k_s) / (2.0 * k_p)
    radicand = k_i * k_i - z_i * z_i
    if radicand < 0:
        raise ValueError(
            f"no transverse phase match at signal wavelength {lambda_signal_um:.4f} um "
            f"(radicand {radicand:.3e})"
        )
    return math.sqrt(radicand)


def effective_offset(lambda_signal_um: float, config: PhaseMatchConfig,
                     index_model: Optional[Callable[[float], float]] = None) -> float:
    """Apparent difference-coordinate offset for an off-degenerate signal photon.

    Detectors are parameterized in degenerate-wavelength wavevector units,
    so a photon at lambda_s appears at its true angle times 2 pi / lambda_deg:
    the offset picks up the factor (lambda_s / lambda_deg) and the ring's own
    dispersion enters as a ratio anchored at the design offset.
    """
    lam_deg = config.signal_wavelength_um
    anchor = noncollinear_offset(config).offset_um_inv
    ratio = (ring_wavevector(lambda_signal_um, config, index_model)
             / ring_wavevector(lam_deg, config, index_model))
    return anchor * (lambda_signal_um / lam_deg) * ratio


def wavelength_average(config: PhaseMatchConfig, geom: DetectionGeometry,
                       kernel_builder: Callable[[float], TpaKernel],
                       n_samples: int = 21,
                       index_model: Optional[Callable[[float], float]] = None,
                       span_fwhm: float = 1.5) -> JointIntensity:
    """Joint intensity averaged over the spectral filter's passband.

    ``kernel_builder`` maps an effective difference-coordinate offset to a
    kernel on fixed grids; the passband is Gaussian, centered on the
    geometry's filter, sampled uniformly over +-span_fwhm * FWHM, and the
    sampled intensities are weight-averaged (incoherent sum).
    """
    if n_samples < 3:
        raise ValueError(f"need at least 3 spectral samples, got {n_samples}")
    lam_c = geom.central_wavelength_nm * 1e-3
    fwhm = geom.filter_fwhm_nm * 1e-3
    sigma = fwhm / GAUSSIAN_FWHM_FACTOR
    lams = np.linspace(lam_c - span_fwhm * fwhm, lam_c + span_fwhm * fwhm, n_samples)
    weights = np.exp(-((lams - lam_c) ** 2) / (2.0 * sigma * sigma))
    weights /= weights.sum()

    total = None
    grids = None
    warns = []
    for lam, w in zip(lams, weights):
        kern = kernel_builder(effective_offset(lam, config, index_model))
        if grids is None:
            grids = (kern.grid_s, kern.grid_i)
            total = np.zeros_like(kern.amplitude, dtype=float)
            warns.extend(kern.warnings)
        elif (kern.grid_s, kern.grid_i) != grids:
            raise ValueError("kernel_builder must keep the grids fixed across wavelengths")
        total += w * np.abs(kern.amplitude) ** 2

    # renormalize like a kernel intensity: unit integral
    total /= total.sum() * grids[0].spacing * grids[1].spacing
    return JointIntensity(grids[0], grids[1], total, tuple(warns))


# ---------------------------------------------------------------------------
# mode crosstalk
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CrosstalkMatrix:
    """Pairwise intensity-overlap contrast between detection modes.

    ``values`` may underflow to zero for far-separated modes;
    ``log_values`` (natural log) stays exact arbitrarily far below that.
    """

    values: np.ndarray
    log_values: np.ndarray

    def log10(self) -> np.ndarray:
        return self.log_values / math.log(10.0)


def gaussian_mode_log_intensities(centers: Sequence[float], scale: float,
                                  grid: WavevectorGrid) -> np.ndarray:
    """Natural-log intensity profiles of unit-norm Gaussian modes.

    One row per center; amplitude scale follows the fundamental
    Hermite-Gauss convention exp(-(k-c)^2/(2 scale^2)).
    """
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    k = grid.points()[None, :]
    c = np.asarray(centers, dtype=float)[:, None]
    return -((k - c) ** 2) / (scale * scale) - 0.5 * math.log(math.pi * scale * scale)


def crosstalk_matrix(modes: np.ndarray, grid: Optional[WavevectorGrid] = None,
                     log_input: bool = False, amplitude: bool = False) -> CrosstalkMatrix:
    """Normalized squared intensity overlaps X_mn between mode profiles.

    X_mn = (integral I_m I_n)^2 / (integral I_m^2 * integral I_n^2), so
    X_mm = 1 and X is symmetric. ``log_input`` treats rows as natural-log
    intensities and works entirely in the log domain, which keeps
    vanishing overlaps meaningful far below float underflow.
    ``amplitude`` treats rows as (possibly complex) amplitudes and uses
    |integral u_m* u_n|^2 instead.
    """
    modes = np.asarray(modes)
    if modes.ndim != 2:
        raise ValueError(f"modes must be 2D (n_modes, n_k), got shape {modes.shape}")
    if log_input and amplitude:
        raise ValueError("log_input and amplitude are mutually exclusive")
    n, nk = modes.shape
    if grid is not None:
        if grid.n_points != nk:
            raise ValueError(f"grid has {grid.n_points} points but modes have {nk}")
        dx = grid.spacing
    else:
        dx = 1.0
    w = np.full(nk, dx)
    w[0] = w[-1] = dx / 2.0

    if log_input:
        logw = np.log(w)
        log_cross = np.empty((n, n))
        for m in range(n):
            for p in range(m, n):
                val = logsumexp(modes[m] + modes[p] + logw)
                log_cross[m, p] = log_cross[p, m] = val
        diag = np.diag(log_cross)
        log_x = 2.0 * log_cross - diag[:, None] - diag[None, :]
        with np.errstate(under="ignore"):
            values = np.exp(log_x)
        return CrosstalkMatrix(values, log_x)

    if amplitude:
        gram = (modes.conj() * w) @ modes.T
        overlap_sq = np.abs(gram) ** 2
        diag = np.real(np.diag(gram))
    else:
        if np.any(modes < 0):
            raise ValueError("intensity modes must be nonnegative (amplitude=False)")
        gram = (modes * w) @ modes.T
        overlap_sq = gram ** 2
        diag = np.diag(gram)
    if np.any(diag <= 0):
        raise ValueError("every mode needs positive norm")
    x = overlap_sq / (diag[:, None] * diag[None, :])
    with np.errstate(divide="ignore"):
        log_x = np.log(x, out=np.full_like(x, -np.inf), where=x > 0)
    return CrosstalkMatrix(x, log_x)
