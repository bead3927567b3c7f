"""End-to-end experiment pipeline: source -> hologram -> SLM -> detection.

One run simulates a mode conversion and produces

* the compiled hologram,
* the detection-plane field at the configured distance, with the
  conversion efficiency measured two ways: through the first-order iris
  ("with iris") and as the power of the isolated first-order beam
  ("without iris", the power a detector sees once the other orders are
  blocked geometrically),
* a formed-mode camera image (focal view for LG and arbitrary patterns,
  which only develop their structure in the far field; detection-plane
  view for BG, whose rings live in the non-diffracting near zone),
* mode-quality figures: profile fit, Bhattacharyya fidelity against the
  width-fitted ideal intensity, ring count, central intensity,
* the squeezing budget from the measured efficiency.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .analysis import (FitResult, centroid, count_rings, extract_cross_section,
                       fit_profile, image_fidelity, radial_average,
                       radial_intensity_profile)
from .config import ExperimentConfig, config_hash, parse_mode_token
from .grids import ComplexField, GridSpec, intensity_image, power
from .hologram import (Hologram, blazed_grating, circular_aperture, compose,
                       export_pgm, export_png, lens_phase, mode_phase_pattern)
from .modes import ModeSpec, evaluate_mode
from .propagation import (PropagationPlan, SlmModel, angular_spectrum, apply_slm,
                          conversion_efficiency, extract_order,
                          far_field_intensity, first_order_center, select_order)
from .quantumnoise import (LossStage, NoiseBudget, SqueezingLevel, Verdict,
                           budget, excess_noise_verdict)

__all__ = ["SimResult", "PipelineRow", "PipelineReport", "build_hologram",
           "simulate_mode", "run_pipeline", "load_measured_csv",
           "write_report_csv", "write_report_markdown"]


@dataclass(frozen=True)
class SimResult:
    """Raw outcome of one mode-conversion simulation."""

    spec: ModeSpec
    hologram: Hologram
    eta_iris: float | None       # efficiency through the first-order iris
    eta_order: float             # power of the isolated first-order beam
    detection_image: np.ndarray  # intensity at the detection plane (full frame)
    detection_grid: GridSpec
    camera_image: np.ndarray     # formed-mode view (window around the order)
    camera_grid: GridSpec
    iris_center: tuple[float, float] | None
    displacement: float          # measured first-order centroid offset, metres


@dataclass(frozen=True)
class PipelineRow:
    """One mode's record in the report (mirrors the results tables)."""

    mode_id: str
    eta_iris: float | None
    eta_order: float
    predicted_db: float
    predicted_uncertainty_db: float
    measured_db: float | None = None
    measured_uncertainty_db: float | None = None
    verdict: str | None = None
    fidelity: float | None = None
    ring_count: int | None = None
    core_intensity: float | None = None
    fit_width: float | None = None
    fit_residual: float | None = None
    error: str | None = None
    artifacts: tuple[str, ...] = ()


@dataclass(frozen=True)
class PipelineReport:
    rows: tuple[PipelineRow, ...]
    config_sha256: str
    files: tuple[str, ...]       # every artifact written, repo of no orphans


def build_hologram(cfg: ExperimentConfig, spec: ModeSpec | None = None) -> Hologram:
    """Compile the four-layer hologram for ``spec`` (default: config's mode)."""
    geometry = cfg.slm_geometry()
    if spec is None:
        spec = cfg.mode_spec()
    if spec.kind == "gauss":
        mode_layer = mode_phase_pattern(spec, geometry, target_plane="direct")
    else:
        mode_layer = mode_phase_pattern(spec, geometry,
                                        target_plane=cfg.target_plane)
    grating = blazed_grating(cfg.grating_period_px, geometry)
    lens = lens_phase(cfg.lens_focal_length, geometry)
    mask = circular_aperture(cfg.aperture_radius_px, geometry)
    return compose(mode_layer, grating, lens, mask)


def simulate_mode(cfg: ExperimentConfig, spec: ModeSpec | None = None,
                  hologram: Hologram | None = None) -> SimResult:
    """Run source -> SLM -> propagation -> first-order selection."""
    geometry = cfg.slm_geometry()
    grid = geometry.grid()
    if spec is None:
        spec = cfg.mode_spec()
    if hologram is None:
        hologram = build_hologram(cfg, spec)

    source = evaluate_mode(ModeSpec.gauss(cfg.w0), grid, cfg.wavelength)
    slm = SlmModel(geometry=geometry, hologram=hologram,
                   eta_d=cfg.eta_d, eta_r=cfg.eta_r)
    reflected = apply_slm(source, slm)
    input_power = power(source)

    detection = angular_spectrum(reflected, cfg.propagation_plan())
    det_image = intensity_image(detection)

    period_m = cfg.grating_period_m()
    order_center = first_order_center(period_m, cfg.wavelength, cfg.distance)

    eta_iris = None
    iris_center = None
    if cfg.iris_enabled:
        cx = cfg.iris_center_x if cfg.iris_center_x is not None else order_center[0]
        iris_center = (cx, cfg.iris_center_y)
        selected = select_order(detection, iris_center, cfg.iris_radius)
        eta_iris = conversion_efficiency(power(selected), input_power)

    first_order = extract_order(reflected, period_m)
    eta_order = conversion_efficiency(power(first_order), input_power)

    # measured first-order displacement at the detection plane
    order_det = angular_spectrum(first_order,
                                 PropagationPlan(distance=cfg.distance,
                                                 wavelength=cfg.wavelength,
                                                 padding_factor=cfg.camera_near_padding))
    shifted = intensity_image(order_det)
    # the extracted beam is on-axis; the physical beam sits one grating
    # deflection angle away
    displacement = centroid(shifted, grid)[0] \
        + cfg.wavelength * cfg.distance / period_m

    if spec.kind == "bg":
        camera_image, camera_grid = shifted, grid
    else:
        camera_image, camera_grid = far_field_intensity(
            reflected, cfg.camera_focal_length,
            center=(cfg.wavelength * cfg.camera_focal_length / period_m, 0.0),
            half_width=cfg.camera_half_width,
            padding_factor=cfg.padding_factor)

    return SimResult(spec=spec, hologram=hologram, eta_iris=eta_iris,
                     eta_order=eta_order, detection_image=det_image,
                     detection_grid=grid, camera_image=camera_image,
                     camera_grid=camera_grid, iris_center=iris_center,
                     displacement=displacement)


def analyze_sim(sim: SimResult) -> tuple[FitResult | None, float | None,
                                         int, float]:
    """Fit, fidelity, ring count and core level of the camera image."""
    img, grid = sim.camera_image, sim.camera_grid
    rings = count_rings(img, grid)
    _, profile = radial_average(img, grid)
    core = float(profile[0] / profile.max()) if profile.max() > 0 else 0.0
    if sim.spec.kind == "arbitrary":
        return None, None, rings, core
    section = extract_cross_section(img, grid)
    fit = fit_profile(section, sim.spec)
    c = centroid(img, grid)
    xx, yy = grid.meshgrid()
    rr = np.hypot(xx - c[0], yy - c[1])
    ideal = radial_intensity_profile(sim.spec, rr, width=fit.width)
    fid = image_fidelity(img, ideal)
    return fit, fid, rings, core


def conversion_field_fidelity(cfg: ExperimentConfig, spec: ModeSpec,
                              reflected: ComplexField,
                              waist_scan=(0.6, 1.6, 26)) -> float:
    """Mode-decomposition fidelity of the first-order beam.

    |<u_ideal(w), beam>|^2 of the normalized isolated first order against
    the ideal mode, maximized over the ideal waist on a fixed scan grid
    (the target scale in the detection plane is a free parameter).  Field
    overlaps are invariant under propagation, so the SLM plane is used.
    """
    from .analysis import field_fidelity

    beam = extract_order(reflected, cfg.grating_period_m())
    lo, hi, n = waist_scan
    best = 0.0
    for w in np.linspace(lo * cfg.w0, hi * cfg.w0, int(n)):
        if spec.kind == "lg":
            ideal = evaluate_mode(ModeSpec.lg(spec.p, spec.l, w),
                                  beam.grid, beam.wavelength)
        elif spec.kind == "bg":
            ideal = evaluate_mode(ModeSpec.bg(spec.n, w, spec.k_r * spec.w0 / w),
                                  beam.grid, beam.wavelength)
        elif spec.kind == "gauss":
            ideal = evaluate_mode(ModeSpec.gauss(w), beam.grid, beam.wavelength)
        else:
            raise ValueError("field fidelity needs an analytic mode family")
        best = max(best, field_fidelity(beam, ideal))
    return best


def noise_stages(cfg: ExperimentConfig, eta_conversion: float,
                 label: str = "conversion") -> list[LossStage]:
    """The conversion efficiency as a single loss stage with the device
    efficiency uncertainties folded in relatively."""
    rel = 0.0
    if cfg.eta_d > 0:
        rel += (cfg.eta_d_uncertainty / cfg.eta_d) ** 2
    if cfg.eta_r > 0:
        rel += (cfg.eta_r_uncertainty / cfg.eta_r) ** 2
    return [LossStage(label=label, eta=eta_conversion,
                      eta_uncertainty=eta_conversion * math.sqrt(rel))]


def predict_output(cfg: ExperimentConfig, eta_conversion: float) -> NoiseBudget:
    level = SqueezingLevel(variance_db=cfg.input_db,
                           uncertainty_db=cfg.input_uncertainty_db)
    return budget(level, noise_stages(cfg, eta_conversion))


def load_measured_csv(path) -> dict[str, tuple[float, float, float | None]]:
    """Measured-values CSV: mode_id, squeezing_db, uncertainty_db [, eta].

    Returns {mode_id: (squeezing_db, uncertainty_db, eta_or_None)}.
    """
    out: dict[str, tuple[float, float, float | None]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"mode_id", "squeezing_db", "uncertainty_db"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise ValueError(
                "measured CSV needs columns mode_id, squeezing_db, uncertainty_db")
        for row in reader:
            eta = None
            if row.get("eta") not in (None, ""):
                eta = float(row["eta"])
            out[row["mode_id"].strip()] = (float(row["squeezing_db"]),
                                           float(row["uncertainty_db"]), eta)
    return out


def run_pipeline(cfg: ExperimentConfig, measured: dict | None = None,
                 out_dir: str | None = None) -> PipelineReport:
    """Run every configured mode; optionally write images and the report."""
    from . import imageio

    rows: list[PipelineRow] = []
    files: list[str] = []
    write = out_dir is not None
    if write:
        os.makedirs(out_dir, exist_ok=True)

    for token in cfg.pipeline_modes:
        mode_cfg = cfg.with_mode(token)
        spec = mode_cfg.mode_spec()
        mode_id = spec.label()
        try:
            sim = simulate_mode(mode_cfg, spec)
            fit, fid, rings, core = analyze_sim(sim)
            nb = predict_output(cfg, sim.eta_order)
            measured_db = measured_unc = None
            verdict_text = None
            if measured and mode_id in measured:
                m_db, m_unc, _ = measured[mode_id]
                measured_db, measured_unc = m_db, m_unc
                verdict = excess_noise_verdict(
                    SqueezingLevel(m_db, m_unc), nb.predicted_output)
                verdict_text = str(verdict)
            artifacts = []
            if write:
                base = os.path.join(out_dir, mode_id)
                imageio.write_pgm16(sim.detection_image, base + "_detection.pgm")
                artifacts.append(base + "_detection.pgm")
                imageio.write_pgm16(sim.camera_image, base + "_camera.pgm")
                artifacts.append(base + "_camera.pgm")
            rows.append(PipelineRow(
                mode_id=mode_id, eta_iris=sim.eta_iris, eta_order=sim.eta_order,
                predicted_db=nb.predicted_output.variance_db,
                predicted_uncertainty_db=nb.predicted_output.uncertainty_db,
                measured_db=measured_db, measured_uncertainty_db=measured_unc,
                verdict=verdict_text, fidelity=fid, ring_count=rings,
                core_intensity=core,
                fit_width=None if fit is None else fit.width,
                fit_residual=None if fit is None else fit.residual,
                artifacts=tuple(artifacts)))
            files.extend(artifacts)
        except Exception as exc:   # a failed row is recorded, not fatal
            rows.append(PipelineRow(
                mode_id=mode_id, eta_iris=None, eta_order=float("nan"),
                predicted_db=float("nan"), predicted_uncertainty_db=float("nan"),
                error=f"{type(exc).__name__}: {exc}"))

    report = PipelineReport(rows=tuple(rows), config_sha256=config_hash(cfg),
                            files=tuple(files))
    if write:
        csv_path = os.path.join(out_dir, "report.csv")
        write_report_csv(report, csv_path)
        md_path = os.path.join(out_dir, "report.md")
        write_report_markdown(report, md_path)
        manifest = os.path.join(out_dir, "manifest.txt")
        with open(manifest, "w", encoding="utf-8") as fh:
            fh.write(f"config_sha256={report.config_sha256}\n")
            for f in list(report.files) + [csv_path, md_path]:
                fh.write(os.path.relpath(f, out_dir) + "\n")
        report = PipelineReport(rows=report.rows,
                                config_sha256=report.config_sha256,
                                files=report.files + (csv_path, md_path, manifest))
    return report


_FMT = {
    "eta_iris": "{:.4f}", "eta_order": "{:.4f}", "predicted_db": "{:.3f}",
    "predicted_uncertainty_db": "{:.3f}", "measured_db": "{:.2f}",
    "measured_uncertainty_db": "{:.2f}", "fidelity": "{:.4f}",
    "core_intensity": "{:.5f}", "fit_width": "{:.6e}", "fit_residual": "{:.4e}",
}

_COLUMNS = ["mode_id", "eta_iris", "eta_order", "predicted_db",
            "predicted_uncertainty_db", "measured_db", "measured_uncertainty_db",
            "verdict", "fidelity", "ring_count", "core_intensity",
            "fit_width", "fit_residual", "error"]


def _cell(row: PipelineRow, col: str) -> str:
    value = getattr(row, col)
    if value is None:
        return ""
    if col in _FMT and isinstance(value, float):
        if math.isnan(value):
            return ""
        return _FMT[col].format(value)
    return str(value)


def write_report_csv(report: PipelineReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# config_sha256=" + report.config_sha256 + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_COLUMNS)
        for row in report.rows:
            writer.writerow([_cell(row, c) for c in _COLUMNS])


def write_report_markdown(report: PipelineReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"Config: `{report.config_sha256}`\n\n")
        fh.write("| " + " | ".join(_COLUMNS) + " |\n")
        fh.write("|" + "---|" * len(_COLUMNS) + "\n")
        for row in report.rows:
            fh.write("| " + " | ".join(_cell(row, c) for c in _COLUMNS) + " |\n")
