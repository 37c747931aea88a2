"""Command-line front end: config-driven pipelines with CSV/PGM outputs.

Exit codes: 0 success, 2 configuration problem, 3 computation failure,
4 output I/O failure. Outputs are deterministic: identical config and
flags produce byte-identical files; run metadata (parameter provenance,
derived constants, summary numbers) goes to <out>/<subcommand>.log, never
into the data files.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
from typing import List, Optional

import numpy as np

from . import detection, exports, hologram, schmidt
from .config import ConfigError, RunConfig, load_config
from .kernel import TpaKernel, build_multipeak
from .optics import noncollinear_offset

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTE = 3
EXIT_IO = 4

_EPILOG = """\
exit codes:
  0  success
  2  configuration problem (bad file, unknown or invalid keys, inconsistent values)
  3  computation failure (parameters outside a model's reach)
  4  output I/O failure
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spdc-modes",
        description="Biphoton angular-spectrum toolkit: kernels, mode "
                    "decompositions, slit scans, and pump holograms.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    def common(p):
        p.add_argument("--config", required=True, metavar="PATH",
                       help="YAML run configuration")
        p.add_argument("--out", metavar="DIR", default=None,
                       help="output directory (overrides output.directory)")
        p.add_argument("--grid-points", type=int, default=None, metavar="N",
                       help="override grid.points")
        p.add_argument("--both-branches", action="store_true",
                       help="include both emission branches (overrides grid.both_branches)")

    p = sub.add_parser("tpa", help="build the joint amplitude and export it",
                       epilog=_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)

    p = sub.add_parser("schmidt", help="mode decomposition: coefficients and profiles",
                       epilog=_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)

    p = sub.add_parser("scan", help="slit-scanned singles and coincidence spectra",
                       epilog=_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)
    p.add_argument("--idler-center", type=float, default=None, metavar="K",
                   help="fixed idler slit center in 1/um (default: idler marginal peak)")
    p.add_argument("--wavelength-avg", action="store_true",
                   help="average the intensity over the spectral filter passband")
    p.add_argument("--zero-width-slits", action="store_true",
                   help="ideal zero-width slits (exact marginal / conditional slice)")

    p = sub.add_parser("fedorov", help="unconditional/conditional width ratio",
                       epilog=_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)
    p.add_argument("--zero-width-slits", action="store_true",
                   help="ideal zero-width slits (exact marginal / conditional slice)")

    p = sub.add_parser("crosstalk", help="pairwise mode intensity-overlap matrix",
                       epilog=_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)

    p = sub.add_parser("pump", help="crystal-plane structured pump field",
                       epilog=_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)

    p = sub.add_parser("hologram", help="encode the pump into an SLM phase raster",
                       epilog=_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)

    return parser


def _apply_overrides(cfg: RunConfig, args) -> tuple:
    notes = []
    changes = {}
    if args.grid_points is not None:
        if args.grid_points < 16:
            raise ConfigError(f"--grid-points must be at least 16, got {args.grid_points}")
        changes["grid_points"] = args.grid_points
        notes.append(f"cli override: grid.points = {args.grid_points}")
    if args.both_branches:
        changes["both_branches"] = True
        notes.append("cli override: grid.both_branches = true")
    if args.out is not None:
        changes["output_dir"] = args.out
        notes.append(f"cli override: output.directory = {args.out}")
    if changes:
        cfg = dataclasses.replace(cfg, **changes)
    return cfg, notes


def _constants_lines(cfg: RunConfig) -> List[str]:
    lines = [
        f"derived: pump angular-spectrum width sigma = {cfg.sigma_pump:.10g} 1/um",
        f"derived: phase-matching width sigma' = {cfg.matching_width():.10g} 1/um",
        f"derived: branch offset = {cfg.offset():.10g} 1/um",
    ]
    if cfg.phase_match.regime == "noncollinear" and cfg.offset_override is None:
        angle = noncollinear_offset(cfg.phase_match).signal_angle_rad
        lines.append(f"derived: internal emission angle = {math.degrees(angle):.6g} deg")
    return lines


def _cmd_tpa(cfg: RunConfig, args, out_dir: str) -> List[str]:
    kernel = cfg.build_kernel()
    path = os.path.join(out_dir, "kernel.csv")
    exports.write_kernel_csv(path, kernel)
    lines = _constants_lines(cfg)
    lines.append(f"signal grid: [{kernel.grid_s.k_min:.10g}, {kernel.grid_s.k_max:.10g}] "
                 f"x {kernel.grid_s.n_points}")
    lines.append(f"idler grid: [{kernel.grid_i.k_min:.10g}, {kernel.grid_i.k_max:.10g}] "
                 f"x {kernel.grid_i.n_points}")
    lines.append(f"norm check: {kernel.norm():.12f}")
    lines += [f"warning: {w}" for w in kernel.warnings]
    lines.append(f"wrote {path}")
    return lines


def _cmd_schmidt(cfg: RunConfig, args, out_dir: str) -> List[str]:
    kernel = cfg.build_kernel()
    dec = schmidt.schmidt_decompose(kernel)
    metrics = schmidt.schmidt_number(dec)
    coeff_path = os.path.join(out_dir, "schmidt_coefficients.csv")
    exports.write_coefficients_csv(coeff_path, dec)
    smodes_path = os.path.join(out_dir, "signal_modes.csv")
    imodes_path = os.path.join(out_dir, "idler_modes.csv")
    exports.write_modes_csv(smodes_path, dec.grid_s.points(), dec.signal_modes)
    exports.write_modes_csv(imodes_path, dec.grid_i.points(), dec.idler_modes)
    lines = _constants_lines(cfg)
    lines += [
        f"modes kept: {dec.n_modes}",
        f"leading coefficient c1 = {dec.coefficients[0]:.12f} (weight {dec.coefficients[0] ** 2:.12f})",
        f"mode count (participation) = {metrics.schmidt_number:.10f}",
        f"purity = {metrics.purity:.10f}",
        f"entropy = {metrics.entropy_bits:.10f} bits",
        f"discarded weight = {dec.discarded_weight:.3e}",
    ]
    lines += [f"warning: {w}" for w in dec.warnings]
    lines += [f"wrote {p}" for p in (coeff_path, smodes_path, imodes_path)]
    return lines


def _cmd_scan(cfg: RunConfig, args, out_dir: str) -> List[str]:
    geom = cfg.geometry
    zero = args.zero_width_slits
    lines = _constants_lines(cfg)

    if args.wavelength_avg:
        grid_s, grid_i = cfg.grids()
        params = cfg.multipeak_params()
        branch = cfg.branch()

        def builder(offset):
            p = dataclasses.replace(params, noncollinear_offset=offset)
            return build_multipeak(p, grid_s, grid_i, branch)

        source = detection.wavelength_average(cfg.phase_match, geom, builder,
                                              index_model=cfg.index_model())
        lines.append("intensity averaged over the spectral filter passband (21 samples)")
    else:
        source = cfg.build_kernel()

    singles_s = detection.singles_scan(source, geom, "signal", zero_width=zero)
    singles_i = detection.singles_scan(source, geom, "idler", zero_width=zero)
    if args.idler_center is not None:
        center = args.idler_center
    else:
        inten = source.intensity() if isinstance(source, TpaKernel) else source
        ki, mi = detection.marginal_kernel_axis(inten, "idler")
        top = np.flatnonzero(mi == mi.max())
        center = float(ki[top[np.argmin(np.abs(ki[top]))]])
    coinc = detection.coincidence_scan(source, geom, center, "signal", zero_width=zero)

    paths = []
    for name, spectrum in (("singles_signal", singles_s), ("singles_idler", singles_i),
                           ("coincidence_signal", coinc)):
        path = os.path.join(out_dir, f"{name}.csv")
        exports.write_scan_csv(path, spectrum)
        paths.append(path)

    lines.append(f"idler slit center = {center:.10g} 1/um")
    peaks, heights = detection.find_peaks(singles_s)
    lines.append("signal singles peaks (1/um): "
                 + ", ".join(f"{p:.6g}" for p in peaks))
    if peaks.size > 1:
        lines.append("peak spacings (1/um): "
                     + ", ".join(f"{d:.6g}" for d in np.diff(np.sort(peaks))))
        order = np.argsort(heights)[::-1]
        lines.append(f"height ratio brightest/second = {heights[order[0]] / heights[order[1]]:.6g}")
    else:
        try:
            lines.append(f"signal singles FWHM = {detection.fwhm_of(singles_s):.10g} 1/um")
            lines.append(f"coincidence FWHM = {detection.fwhm_of(coinc):.10g} 1/um")
        except ValueError as exc:
            lines.append(f"width extraction skipped: {exc}")
    for spectrum in (singles_s, singles_i, coinc):
        lines += [f"warning: {w}" for w in spectrum.warnings]
    lines += [f"wrote {p}" for p in paths]
    return lines


def _cmd_fedorov(cfg: RunConfig, args, out_dir: str) -> List[str]:
    kernel = cfg.build_kernel()
    ratio = detection.fedorov_ratio(kernel, cfg.geometry,
                                    zero_width=args.zero_width_slits)
    lines = _constants_lines(cfg)
    lines.append(f"width ratio (unconditional / conditional) = {ratio:.10f}")
    return lines


def _cmd_crosstalk(cfg: RunConfig, args, out_dir: str) -> List[str]:
    params = cfg.multipeak_params()
    if params.n_peaks < 2:
        raise ValueError("crosstalk needs at least 2 pump peaks; set pump.peaks >= 2")
    grid_s, _ = cfg.grids()
    widths = cfg.widths()
    scale = math.sqrt(widths.sigma_pump * widths.sigma_match / 2.0)
    centers = params.mode_offsets() + cfg.offset() / 2.0
    log_modes = detection.gaussian_mode_log_intensities(centers, scale, grid_s)
    matrix = detection.crosstalk_matrix(log_modes, grid_s, log_input=True)
    path = os.path.join(out_dir, "crosstalk.csv")
    exports.write_crosstalk_csv(path, matrix)
    off = ~np.eye(matrix.values.shape[0], dtype=bool)
    lines = _constants_lines(cfg)
    lines.append(f"mode centers (1/um): " + ", ".join(f"{c:.6g}" for c in centers))
    lines.append(f"fundamental mode scale = {scale:.10g} 1/um")
    lines.append(f"largest off-diagonal log10 = {matrix.log10()[off].max():.6g}")
    lines.append(f"wrote {path}")
    return lines


def _cmd_pump(cfg: RunConfig, args, out_dir: str) -> List[str]:
    params = cfg.pump_profile_params()
    span = 4.5 / params.sigma_pump
    x = np.linspace(-span, span, 4096)
    profile = hologram.pump_field(params, x)
    path = os.path.join(out_dir, "pump_field.csv")
    exports.write_field_csv(path, profile)
    lines = _constants_lines(cfg)
    split = params.peak_spacing if params.n_peaks > 1 else None
    lines.append(f"envelope FWHM = {hologram.envelope_fwhm(profile, split):.10g} um")
    lines.append(f"wrote {path}")
    return lines


def _cmd_hologram(cfg: RunConfig, args, out_dir: str) -> List[str]:
    params = cfg.pump_profile_params()
    hs = cfg.hologram
    x_slm = hologram.raster_coordinates(hs.width_px, hs.pixel_pitch_um)
    crystal = hologram.pump_field(params, x_slm / hs.magnification)
    target = hologram.FieldProfile1D(x_slm, crystal.amplitude)
    holo = hologram.encode_hologram(target, (hs.height_px, hs.width_px),
                                    hs.pixel_pitch_um, hs.grating_period_px)
    path = os.path.join(out_dir, "hologram.pgm")
    hologram.export_pgm(holo, path)

    recovered = hologram.simulate_first_order(holo)
    overlap = hologram.amplitude_overlap(target, recovered)
    # comb lines sit at multiples of 2*spacing in the crystal plane; demagnified
    # onto the SLM the first one lands at 2*spacing/mag, so split halfway below it
    split = params.peak_spacing / hs.magnification if params.n_peaks > 1 else None
    env_slm = hologram.envelope_fwhm(recovered, split)
    lines = _constants_lines(cfg)
    lines += [
        f"raster: {hs.width_px} x {hs.height_px} px at {hs.pixel_pitch_um} um pitch, "
        f"grating period {hs.grating_period_px} px",
        f"magnification crystal->SLM = {hs.magnification}",
        f"round-trip amplitude overlap = {overlap:.8f}",
        f"recovered envelope FWHM (SLM plane) = {env_slm:.10g} um",
        f"recovered envelope FWHM (crystal plane) = {env_slm / hs.magnification:.10g} um",
        f"target envelope FWHM (crystal plane) = {params.envelope_fwhm_um():.10g} um",
        f"wrote {path}",
    ]
    return lines


_HANDLERS = {
    "tpa": _cmd_tpa,
    "schmidt": _cmd_schmidt,
    "scan": _cmd_scan,
    "fedorov": _cmd_fedorov,
    "crosstalk": _cmd_crosstalk,
    "pump": _cmd_pump,
    "hologram": _cmd_hologram,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg, override_notes = _apply_overrides(cfg, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = cfg.output_dir
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        print(f"output error: cannot create {out_dir}: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        result_lines = _HANDLERS[args.command](cfg, args, out_dir)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_IO

    log_lines = [f"command: {args.command}", f"config: {args.config}"]
    log_lines += override_notes
    log_lines.append("-- parameters (provenance) --")
    log_lines += cfg.provenance_lines()
    log_lines.append("-- results --")
    log_lines += result_lines
    log_path = os.path.join(out_dir, f"{args.command}.log")
    try:
        exports.atomic_write_text(log_path, "\n".join(log_lines) + "\n")
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_IO

    for line in result_lines:
        print(line)
    print(f"log: {log_path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
