"""Command-line interface.

Subcommands:

* ``holo``     compile a hologram and export device bitmaps
* ``sim``      simulate one mode conversion and export images/efficiencies
* ``noise``    squeezing budget (optionally against measured values)
* ``pipeline`` full multi-mode reproduction run with report tables
* ``fit``      fit a theoretical profile to a recorded intensity image

Exit codes: 0 success, 2 configuration/usage error, 3 physics guard
(spectral aliasing), 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .analysis import extract_cross_section, fit_profile, radial_intensity_profile
from .config import (ConfigError, DEFAULT_PIPELINE_MODES, ExperimentConfig,
                     config_hash, parse_config_file, parse_mode_token,
                     serialize_config)
from .grids import GridSpec
from .hologram import export_pgm, export_png
from .pipeline import (build_hologram, load_measured_csv, predict_output,
                       run_pipeline, simulate_mode)
from .propagation import AliasingError
from .quantumnoise import SqueezingLevel, excess_noise_verdict

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3
EXIT_IO = 4


def _load_config(args) -> ExperimentConfig:
    cfg = parse_config_file(args.config) if args.config else ExperimentConfig()
    if getattr(args, "mode", None):
        cfg = cfg.with_mode(args.mode)
    if getattr(args, "out", None):
        from dataclasses import replace
        cfg = replace(cfg, output_directory=args.out)
    return cfg


def cmd_holo(args) -> int:
    cfg = _load_config(args)
    out = cfg.output_directory
    os.makedirs(out, exist_ok=True)
    spec = cfg.mode_spec()
    hologram = build_hologram(cfg, spec)
    pgm = os.path.join(out, "hologram.pgm")
    export_pgm(hologram, pgm)
    png = os.path.join(out, "hologram.png")
    export_png(hologram, png)
    manifest = {
        "mode": spec.label(),
        "target_plane": cfg.target_plane,
        "period_px": cfg.grating_period_px,
        "lens_focal_length_m": (None if math.isinf(cfg.lens_focal_length)
                                else cfg.lens_focal_length),
        "aperture_radius_px": cfg.aperture_radius_px,
        "phase_levels": cfg.phase_levels,
        "width_px": cfg.slm_width_px,
        "height_px": cfg.slm_height_px,
        "config_sha256": config_hash(cfg),
        "files": ["hologram.pgm", "hologram.png"],
    }
    mpath = os.path.join(out, "hologram_manifest.json")
    with open(mpath, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {pgm}, {png}, {mpath}")
    return EXIT_OK


def cmd_sim(args) -> int:
    from . import imageio

    cfg = _load_config(args)
    out = cfg.output_directory
    os.makedirs(out, exist_ok=True)
    spec = cfg.mode_spec()
    sim = simulate_mode(cfg, spec)
    base = os.path.join(out, spec.label())
    files = []
    imageio.write_pgm16(sim.detection_image, base + "_detection.pgm")
    files.append(base + "_detection.pgm")
    imageio.write_png16(sim.detection_image, base + "_detection.png")
    files.append(base + "_detection.png")
    imageio.write_pgm16(sim.camera_image, base + "_camera.pgm")
    files.append(base + "_camera.pgm")
    record = {
        "mode": spec.label(),
        "eta_with_iris": sim.eta_iris,
        "eta_without_iris": sim.eta_order,
        "first_order_displacement_m": sim.displacement,
        "iris_center_m": sim.iris_center,
        "config_sha256": config_hash(cfg),
        "files": [os.path.basename(f) for f in files],
    }
    rpath = base + "_efficiency.json"
    with open(rpath, "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")
    eta_iris = "n/a" if sim.eta_iris is None else f"{sim.eta_iris:.4f}"
    print(f"{spec.label()}: eta(with iris)={eta_iris} "
          f"eta(without iris)={sim.eta_order:.4f}")
    print(f"wrote {', '.join(files + [rpath])}")
    return EXIT_OK


def cmd_noise(args) -> int:
    cfg = _load_config(args)
    measured = load_measured_csv(args.measured) if args.measured else {}
    tokens = cfg.pipeline_modes
    lines = ["mode_id,eta,predicted_db,predicted_uncertainty_db,"
             "measured_db,measured_uncertainty_db,verdict"]
    for token in tokens:
        mode_cfg = cfg.with_mode(token)
        mode_id = mode_cfg.mode_spec().label()
        eta = None
        m_db = m_unc = None
        if mode_id in measured:
            m_db, m_unc, eta = measured[mode_id]
        if eta is None:
            eta = cfg.eta_d * cfg.eta_r
        nb = predict_output(cfg, eta)
        verdict = ""
        if m_db is not None:
            verdict = str(excess_noise_verdict(
                SqueezingLevel(m_db, m_unc), nb.predicted_output))
        pred = nb.predicted_output
        lines.append(
            f"{mode_id},{eta:.4f},{pred.variance_db:.3f},"
            f"{pred.uncertainty_db:.3f},"
            f"{'' if m_db is None else f'{m_db:.2f}'},"
            f"{'' if m_unc is None else f'{m_unc:.2f}'},{verdict}")
    text = "\n".join(lines) + "\n"
    if args.out_file:
        with open(args.out_file, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out_file}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    cfg = _load_config(args)
    measured = load_measured_csv(args.measured) if args.measured else None
    report = run_pipeline(cfg, measured=measured, out_dir=cfg.output_directory)
    failed = [r.mode_id for r in report.rows if r.error]
    print(f"pipeline: {len(report.rows)} rows, config {report.config_sha256}")
    for row in report.rows:
        if row.error:
            print(f"  {row.mode_id}: ERROR {row.error}")
        else:
            v = f" verdict={row.verdict}" if row.verdict else ""
            print(f"  {row.mode_id}: eta_order={row.eta_order:.4f} "
                  f"predicted={row.predicted_db:.3f} dB{v}")
    print(f"report: {os.path.join(cfg.output_directory, 'report.csv')}")
    return EXIT_OK if not failed else EXIT_PHYSICS


def cmd_fit(args) -> int:
    from . import imageio

    cfg = _load_config(args)
    image = imageio.read_intensity_image(args.image)
    pitch = args.pixel_pitch if args.pixel_pitch else cfg.pixel_pitch
    grid = GridSpec(nx=image.shape[1], ny=image.shape[0], dx=pitch, dy=pitch)
    spec = cfg.mode_spec()
    section = extract_cross_section(image, grid)
    fit = fit_profile(section, spec)
    fitted = fit.scale * radial_intensity_profile(
        spec, section.coordinates - fit.center, width=fit.width)
    print(f"fit {spec.label()}: width={fit.width:.6e} m scale={fit.scale:.4e} "
          f"center={fit.center:.3e} m residual={fit.residual:.4e} "
          f"converged={fit.converged}")
    if args.out_file:
        imageio.write_section_csv(args.out_file, section.coordinates,
                                  section.samples, fitted)
        print(f"wrote {args.out_file}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slmsqueeze",
        description="Squeezed-light spatial mode conversion simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_mode=True):
        p.add_argument("--config", help="INI config file (defaults otherwise)")
        p.add_argument("--out", help="output directory override")
        if with_mode:
            p.add_argument("--mode", help="mode override: gauss | lg:p,l | bg:n "
                                          "| arbitrary:IMAGE")

    p = sub.add_parser("holo", help="compile and export a hologram")
    common(p)
    p.set_defaults(func=cmd_holo)

    p = sub.add_parser("sim", help="simulate one mode conversion")
    common(p)
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("noise", help="squeezing budget per mode")
    common(p, with_mode=False)
    p.add_argument("--measured", help="measured-values CSV "
                                      "(mode_id, squeezing_db, uncertainty_db[, eta])")
    p.add_argument("--out-file", help="write the budget CSV here")
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("pipeline", help="full multi-mode reproduction run")
    common(p, with_mode=False)
    p.add_argument("--measured", help="measured-values CSV")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("fit", help="fit a mode profile to an intensity image")
    common(p)
    p.add_argument("--image", required=True, help="PGM/PNG intensity image")
    p.add_argument("--pixel-pitch", type=float,
                   help="image pixel pitch in metres (default: SLM pitch)")
    p.add_argument("--out-file", help="write section CSV here")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("config", help="print the effective canonical config")
    common(p, with_mode=False)
    p.set_defaults(func=cmd_config)
    return parser


def cmd_config(args) -> int:
    cfg = _load_config(args)
    sys.stdout.write(serialize_config(cfg))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AliasingError as exc:
        print(f"physics guard: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
