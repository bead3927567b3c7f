"""Phase-only hologram compilation for a reflective LCoS panel.

A device hologram is the mod-2pi sum of up to three phase layers (mode
phase, blazed grating, kinoform lens) gated by a binary circular aperture,
then quantized to the panel's discrete phase levels.  Grating-depth
amplitude encoding is available for targets that need amplitude control in
the first diffraction order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grids import ComplexField, GridSpec
from .modes import ModeSpec, evaluate_mode

__all__ = ["SlmGeometry", "PhaseMap", "Hologram", "mode_phase_pattern",
           "blazed_grating", "lens_phase", "circular_aperture", "compose",
           "amplitude_phase_encode", "export_pgm", "import_pgm", "export_png"]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SlmGeometry:
    """Panel geometry and quantization depth."""

    width_px: int = 1920
    height_px: int = 1080
    pixel_pitch: float = 8e-6          # metres per pixel
    phase_levels: int = 256
    design_wavelength: float = 1558e-9  # metres

    def __post_init__(self):
        if self.width_px <= 0 or self.height_px <= 0:
            raise ValueError("panel dimensions must be positive")
        if self.pixel_pitch <= 0:
            raise ValueError("pixel pitch must be positive")
        if self.phase_levels < 2:
            raise ValueError("need at least 2 phase levels")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height_px, self.width_px)

    def grid(self) -> GridSpec:
        """Sampling grid with the panel's pixel pitch, centered on the panel."""
        return GridSpec(nx=self.width_px, ny=self.height_px,
                        dx=self.pixel_pitch, dy=self.pixel_pitch)


@dataclass(frozen=True)
class PhaseMap:
    """Phase values in [0, 2pi) on the SLM pixel raster."""

    geometry: SlmGeometry
    phase: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.phase.shape != self.geometry.shape:
            raise ValueError(
                f"phase shape {self.phase.shape} != panel shape {self.geometry.shape}")

    @staticmethod
    def zeros(geometry: SlmGeometry) -> "PhaseMap":
        return PhaseMap(geometry, np.zeros(geometry.shape))

    @staticmethod
    def wrap(geometry: SlmGeometry, phase: np.ndarray) -> "PhaseMap":
        return PhaseMap(geometry, np.mod(phase, TWO_PI))


@dataclass(frozen=True)
class Hologram:
    """Composed and quantized device pattern plus its constituent layers."""

    layers: dict = field(repr=False)
    composed: PhaseMap = field(repr=False)
    quantized: np.ndarray = field(repr=False)

    @property
    def geometry(self) -> SlmGeometry:
        return self.composed.geometry


def mode_phase_pattern(spec: ModeSpec, geometry: SlmGeometry,
                       target_plane: str = "fourier") -> PhaseMap:
    """Phase layer encoding a target mode.

    ``target_plane="direct"`` returns arg(u) of the mode evaluated on the
    panel; ``"fourier"`` returns the phase of its centered discrete Fourier
    transform laid out on the panel raster (the kinoform convention, the
    optical transform being supplied by a lens).  Either way radial zeros
    of the defining polynomial appear as pi discontinuities and the helical
    index as repeated 0 to 2pi azimuthal ramps.
    """
    if target_plane not in ("direct", "fourier"):
        raise ValueError(f"unknown target plane {target_plane!r}")
    u = evaluate_mode(spec, geometry.grid(), geometry.design_wavelength)
    if target_plane == "direct":
        values = u.samples
    else:
        values = np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(u.samples)))
    return PhaseMap.wrap(geometry, np.angle(values))


def blazed_grating(period_px: int, geometry: SlmGeometry) -> PhaseMap:
    """Sawtooth phase 2pi (x mod period) / period along the x axis."""
    if period_px < 2:
        raise ValueError("grating period must be at least 2 px")
    x = np.arange(geometry.width_px)
    row = TWO_PI * (x % period_px) / period_px
    return PhaseMap(geometry, np.broadcast_to(row, geometry.shape).copy())


def lens_phase(focal_length: float, geometry: SlmGeometry) -> PhaseMap:
    """Kinoform lens: quadratic phase -pi r^2 / (lambda f) wrapped to [0, 2pi).

    ``focal_length=inf`` is the no-lens flag and yields an all-zero map.
    """
    if focal_length == 0:
        raise ValueError("focal length must be nonzero (use inf for no lens)")
    if math.isinf(focal_length):
        return PhaseMap.zeros(geometry)
    xx, yy = geometry.grid().meshgrid()
    r2 = xx**2 + yy**2
    return PhaseMap.wrap(
        geometry, -math.pi * r2 / (geometry.design_wavelength * focal_length))


def circular_aperture(radius_px: float, geometry: SlmGeometry,
                      center_px: tuple[float, float] | None = None) -> np.ndarray:
    """Binary mask: 1 inside the circle of ``radius_px`` pixels, else 0.

    ``center_px`` is (col, row) in pixel coordinates; default is the panel
    center.
    """
    if radius_px <= 0:
        raise ValueError("aperture radius must be positive")
    if center_px is None:
        center_px = (geometry.width_px // 2, geometry.height_px // 2)
    cols, rows = np.meshgrid(np.arange(geometry.width_px),
                             np.arange(geometry.height_px))
    r2 = (cols - center_px[0]) ** 2 + (rows - center_px[1]) ** 2
    return (r2 <= radius_px**2).astype(np.uint8)


def quantize_phase(phase: np.ndarray, levels: int) -> np.ndarray:
    """round(phase * levels / 2pi) mod levels as integers in [0, levels)."""
    return (np.round(phase * levels / TWO_PI).astype(np.int64)) % levels


def compose(mode: PhaseMap, grating: PhaseMap, lens: PhaseMap,
            mask: np.ndarray) -> Hologram:
    """Stack the three phase layers mod 2pi, gate by the aperture, quantize."""
    geometry = mode.geometry
    if grating.geometry != geometry or lens.geometry != geometry:
        raise ValueError("all layers must share one geometry")
    if mask.shape != geometry.shape:
        raise ValueError("aperture mask shape does not match the panel")
    total = np.mod(mode.phase + grating.phase + lens.phase, TWO_PI)
    total = np.where(mask > 0, total, 0.0)
    composed = PhaseMap(geometry, total)
    return Hologram(
        layers={"mode_phase": mode, "grating": grating, "lens": lens,
                "aperture_mask": mask},
        composed=composed,
        quantized=quantize_phase(total, geometry.phase_levels),
    )


def amplitude_phase_encode(target_amplitude: np.ndarray, target_phase: PhaseMap,
                           grating: PhaseMap) -> Hologram:
    """Encode amplitude and phase into one pattern by grating-depth modulation.

    The local sawtooth depth M in [0, 1] sets the first-order field
    amplitude to sinc(pi (M - 1)) while the first-order phase picks up an
    extra pi (M - 1), which is subtracted from the target phase up front.
    With ``target_amplitude`` identically 1 this reduces exactly to
    ``compose(target_phase, grating, 0, all-ones)``.
    """
    geometry = target_phase.geometry
    amp = np.asarray(target_amplitude, dtype=float)
    if amp.shape != geometry.shape:
        raise ValueError("amplitude map shape does not match the panel")
    if np.any(amp < 0) or np.any(amp > 1):
        raise ValueError("target amplitude must lie in [0, 1]")
    if grating.geometry != geometry:
        raise ValueError("grating geometry mismatch")

    depth = _invert_first_order_amplitude(amp)
    compensated = target_phase.phase - math.pi * (depth - 1.0)
    total = depth * np.mod(compensated + grating.phase, TWO_PI)
    composed = PhaseMap(geometry, total)
    return Hologram(
        layers={"mode_phase": target_phase, "grating": grating,
                "lens": PhaseMap.zeros(geometry),
                "aperture_mask": np.ones(geometry.shape, dtype=np.uint8),
                "depth": depth},
        composed=composed,
        quantized=quantize_phase(total, geometry.phase_levels),
    )


def _invert_first_order_amplitude(amplitude: np.ndarray) -> np.ndarray:
    # sinc(pi (M-1)) is monotone on M in [0, 1]; invert via a dense table
    m_table = np.linspace(0.0, 1.0, 4097)
    a_table = np.sinc(m_table - 1.0)  # numpy sinc is sin(pi x)/(pi x)
    return np.interp(amplitude, a_table, m_table)


# ---------------------------------------------------------------------------
# device bitmap I/O

def _gray_from_levels(quantized: np.ndarray, levels: int) -> np.ndarray:
    return np.round(quantized * 256.0 / levels).astype(np.uint8)


def _levels_from_gray(gray: np.ndarray, levels: int) -> np.ndarray:
    return np.round(gray.astype(float) * levels / 256.0).astype(np.int64) % levels


def export_pgm(hologram: Hologram, path) -> None:
    """Write the quantized pattern as a binary 8-bit PGM (maxval 255)."""
    gray = _gray_from_levels(hologram.quantized, hologram.geometry.phase_levels)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{gray.shape[1]} {gray.shape[0]}\n255\n".encode("ascii"))
        fh.write(gray.tobytes())


def import_pgm(path) -> np.ndarray:
    """Read a binary 8/16-bit PGM and return its raw gray values."""
    with open(path, "rb") as fh:
        data = fh.read()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise ValueError("only binary PGM (P5) is supported")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    pos += 1  # single whitespace after maxval
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height
    pixels = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
    return pixels.reshape(height, width).astype(np.int64)


def import_quantized(path, levels: int) -> np.ndarray:
    """Round-trip partner of :func:`export_pgm`: gray values back to levels."""
    return _levels_from_gray(import_pgm(path), levels)


def export_png(hologram: Hologram, path) -> None:
    """Write the quantized pattern as an 8-bit grayscale PNG."""
    from PIL import Image

    gray = _gray_from_levels(hologram.quantized, hologram.geometry.phase_levels)
    Image.fromarray(gray, mode="L").save(path)


def slm_field(hologram: Hologram, incident: ComplexField) -> np.ndarray:
    """Unit-efficiency modulated samples: incident * exp(i composed phase)."""
    if incident.samples.shape != hologram.composed.phase.shape:
        raise ValueError("incident field is not co-registered with the panel")
    return incident.samples * np.exp(1j * hologram.composed.phase)
