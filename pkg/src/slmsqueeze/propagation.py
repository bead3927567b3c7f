"""Scalar angular-spectrum diffraction and the SLM interaction model.

Propagation is the exact transfer-function method: each plane-wave
component is advanced by exp(i z sqrt(k^2 - kx^2 - ky^2)); evanescent
components decay.  Fields are zero-padded (default factor 2) to suppress
the periodic wrap-around inherent in spectral convolution, and a guard
flags spectra whose propagating content would walk beyond the padded
window ("aliased" power).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft

from .grids import ComplexField, GridSpec, bilinear_sample
from .hologram import Hologram, SlmGeometry

__all__ = ["PropagationPlan", "SlmModel", "AliasingError", "AliasingWarning",
           "angular_spectrum", "apply_slm", "select_order",
           "conversion_efficiency", "first_order_center",
           "grating_order_powers", "extract_order", "recenter_first_order",
           "far_field_intensity", "rayleigh_length", "gaussian_waist"]

# thresholds on the fraction of spectral power in walk-off bins
ALIASED_POWER_WARN = 1e-3
ALIASED_POWER_ERROR = 1e-2


class AliasingError(RuntimeError):
    """More than ALIASED_POWER_ERROR of the power would wrap around."""


class AliasingWarning(UserWarning):
    """Noticeable but sub-threshold aliased spectral power."""


@dataclass(frozen=True)
class PropagationPlan:
    """Parameters of one free-space propagation step."""

    distance: float
    wavelength: float | None = None     # None: take the field's wavelength
    method: str = "angular_spectrum"
    padding_factor: int = 2
    edge_taper: float = 0.05            # raised-cosine rim fraction of the padded frame

    def __post_init__(self):
        if self.distance < 0:
            raise ValueError("propagation distance must be >= 0")
        if self.method != "angular_spectrum":
            raise ValueError(f"unknown propagation method {self.method!r}")
        if self.padding_factor < 1:
            raise ValueError("padding factor must be >= 1")
        if not 0.0 <= self.edge_taper < 0.5:
            raise ValueError("edge taper must lie in [0, 0.5)")


@dataclass(frozen=True)
class SlmModel:
    """Device model: geometry, efficiencies and the programmed hologram."""

    geometry: SlmGeometry
    hologram: Hologram
    eta_d: float = 0.90      # diffraction efficiency: fraction actually modulated
    eta_r: float = 0.61      # reflectivity

    def __post_init__(self):
        if not 0.0 <= self.eta_d <= 1.0:
            raise ValueError("eta_d must lie in [0, 1]")
        if not 0.0 <= self.eta_r <= 1.0:
            raise ValueError("eta_r must lie in [0, 1]")
        if self.hologram.geometry != self.geometry:
            raise ValueError("hologram geometry does not match the SLM")


def angular_spectrum(f: ComplexField, plan: PropagationPlan) -> ComplexField:
    """Propagate ``f`` by ``plan.distance`` metres.

    Distance 0 returns the input unchanged.  Raises :class:`AliasingError`
    when more than 1% of the spectral power sits in bins whose transverse
    walk-off exceeds the padded window; warns above 0.1%.  The transfer
    function is memoized per (grid, distance, wavelength, padding), so
    repeated propagations through one geometry cost two FFTs each.
    """
    wavelength = plan.wavelength if plan.wavelength is not None else f.wavelength
    if abs(wavelength - f.wavelength) > 1e-15:
        raise ValueError("plan wavelength differs from the field wavelength")
    z = plan.distance
    if z == 0.0:
        return f

    grid = f.grid
    ny, nx = grid.shape
    pny, pnx = ny * plan.padding_factor, nx * plan.padding_factor
    oy, ox = (pny - ny) // 2, (pnx - nx) // 2

    padded = np.zeros((pny, pnx), dtype=complex)
    padded[oy:oy + ny, ox:ox + nx] = f.samples
    if plan.edge_taper > 0:
        padded *= _taper_window(pny, plan.edge_taper)[:, None]
        padded *= _taper_window(pnx, plan.edge_taper)[None, :]

    transfer, aliased = _transfer_function(pnx, pny, grid.dx, grid.dy,
                                           wavelength, z)
    spectrum = _fft.fft2(padded)
    _check_aliasing(spectrum, aliased)
    out = _fft.ifft2(spectrum * transfer)
    return f.with_samples(out[oy:oy + ny, ox:ox + nx])


_TRANSFER_CACHE: dict = {}
_TRANSFER_CACHE_MAX = 8


def _transfer_function(pnx, pny, dx, dy, wavelength, z):
    """Memoized propagator exp(i z kz) and the aliased-bin mask."""
    key = (pnx, pny, dx, dy, wavelength, z)
    hit = _TRANSFER_CACHE.get(key)
    if hit is not None:
        return hit
    k = 2.0 * math.pi / wavelength
    kx = 2.0 * math.pi * np.fft.fftfreq(pnx, d=dx)
    ky = 2.0 * math.pi * np.fft.fftfreq(pny, d=dy)
    kz2 = k**2 - kx[None, :] ** 2 - ky[:, None] ** 2
    propagating = kz2 > 0.0
    kz = np.sqrt(np.abs(kz2))
    phase = z * kz
    if propagating.all():
        transfer = np.cos(phase) + 1j * np.sin(phase)
    else:
        transfer = np.empty(phase.shape, dtype=complex)
        p = propagating
        transfer[p] = np.cos(phase[p]) + 1j * np.sin(phase[p])
        transfer[~p] = np.exp(-phase[~p])

    # bins whose transverse walk-off z tan(theta) leaves the padded window,
    # plus evanescent bins
    safe_kz = np.where(propagating, kz, np.inf)
    walk_x = z * np.abs(kx[None, :]) / safe_kz
    walk_y = z * np.abs(ky[:, None]) / safe_kz
    aliased = (walk_x > pnx * dx / 2) | (walk_y > pny * dy / 2) | ~propagating

    if len(_TRANSFER_CACHE) >= _TRANSFER_CACHE_MAX:
        _TRANSFER_CACHE.pop(next(iter(_TRANSFER_CACHE)))
    _TRANSFER_CACHE[key] = (transfer, aliased)
    return transfer, aliased


def _taper_window(n: int, fraction: float) -> np.ndarray:
    window = np.ones(n)
    m = int(round(n * fraction))
    if m > 0:
        ramp = 0.5 * (1.0 - np.cos(np.pi * np.arange(m) / m))
        window[:m] = ramp
        window[-m:] = ramp[::-1]
    return window


def _check_aliasing(spectrum: np.ndarray, aliased: np.ndarray) -> None:
    bad = np.sum(np.abs(spectrum[aliased]) ** 2)
    total = bad + np.sum(np.abs(spectrum[~aliased]) ** 2)
    if total == 0:
        return
    fraction = float(bad / total)
    if fraction > ALIASED_POWER_ERROR:
        raise AliasingError(
            f"{fraction:.1%} of spectral power would wrap around the window; "
            "refine sampling or enlarge the grid/padding")
    if fraction > ALIASED_POWER_WARN:
        warnings.warn(
            f"{fraction:.2e} of spectral power sits in aliased bins",
            AliasingWarning, stacklevel=3)


def apply_slm(incident: ComplexField, slm: SlmModel,
              allow_resample: bool = False) -> ComplexField:
    """Reflect ``incident`` off the programmed SLM.

    output = sqrt(eta_r) [ sqrt(eta_d) incident e^{i phase}
                           + sqrt(1 - eta_d) incident ]

    The unmodulated fraction keeps a flat phase and therefore stays in the
    zeroth diffraction order.  The incident grid must coincide with the
    panel raster unless ``allow_resample`` permits bilinear resampling of
    the hologram phase onto the field grid.
    """
    geometry = slm.geometry
    grid = incident.grid
    native = (grid.shape == geometry.shape
              and math.isclose(grid.dx, geometry.pixel_pitch)
              and math.isclose(grid.dy, geometry.pixel_pitch)
              and grid.center == (0.0, 0.0))
    if native:
        phase = slm.hologram.composed.phase
    elif allow_resample:
        phase = _resample_phase(slm.hologram, grid)
    else:
        raise ValueError(
            "incident grid is not co-registered with the SLM panel "
            "(pass allow_resample=True to interpolate the hologram)")

    modulated = np.exp(1j * phase) * incident.samples
    out = math.sqrt(slm.eta_r) * (math.sqrt(slm.eta_d) * modulated
                                  + math.sqrt(1.0 - slm.eta_d) * incident.samples)
    return incident.with_samples(out)


def _resample_phase(hologram: Hologram, grid: GridSpec) -> np.ndarray:
    # interpolate the complex exponential, not the wrapped phase, so that
    # 2pi seams do not leave interpolation scars
    panel = hologram.geometry.grid()
    xx, yy = grid.meshgrid()
    cols = (xx - panel.center[0]) / panel.dx + panel.nx // 2
    rows = (yy - panel.center[1]) / panel.dy + panel.ny // 2
    unit = np.exp(1j * hologram.composed.phase)
    inside = ((cols >= 0) & (cols <= panel.nx - 1)
              & (rows >= 0) & (rows <= panel.ny - 1))
    re = bilinear_sample(unit.real, rows, cols)
    im = bilinear_sample(unit.imag, rows, cols)
    phase = np.angle(re + 1j * im)
    return np.where(inside, np.mod(phase, 2.0 * math.pi), 0.0)


def select_order(f: ComplexField, center: tuple[float, float],
                 radius: float) -> ComplexField:
    """Hard circular mask of ``radius`` metres at physical ``center``."""
    if radius <= 0:
        raise ValueError("iris radius must be positive")
    xx, yy = f.grid.meshgrid()
    mask = (xx - center[0]) ** 2 + (yy - center[1]) ** 2 <= radius**2
    return f.with_samples(np.where(mask, f.samples, 0.0))


def conversion_efficiency(output_power: float, input_power: float) -> float:
    """Power ratio eta = output / input, guarded against nonphysical values."""
    if input_power <= 0:
        raise ValueError("input power must be positive")
    eta = output_power / input_power
    if eta < 0 or eta > 1.0 + 1e-9:
        raise ValueError(f"nonphysical efficiency {eta}")
    return eta


def first_order_center(grating_period: float, wavelength: float,
                       distance: float) -> tuple[float, float]:
    """Detection-plane displacement of the +1 grating order (small angle)."""
    return (wavelength * distance / grating_period, 0.0)


def rayleigh_length(w0: float, wavelength: float) -> float:
    """z_R = pi w0^2 / lambda."""
    return math.pi * w0**2 / wavelength


def gaussian_waist(w0: float, wavelength: float, z: float) -> float:
    """w(z) = w0 sqrt(1 + (z/z_R)^2)."""
    return w0 * math.sqrt(1.0 + (z / rayleigh_length(w0, wavelength)) ** 2)


def far_field_intensity(f: ComplexField, focal_length: float,
                        center: tuple[float, float] = (0.0, 0.0),
                        half_width: float = 1.2e-3,
                        padding_factor: int = 3):
    """Focal-plane intensity window of an ideal lens of ``focal_length``.

    A single padded FFT maps spatial frequency to focal position
    u = kx * lambda * f / (2 pi); the returned window of ``half_width``
    around ``center`` carries its own (finer) grid.  The focal-plane
    quadratic phase drops out of the intensity.

    Returns (image, window_grid).
    """
    grid = f.grid
    ny, nx = grid.shape
    pny, pnx = ny * padding_factor, nx * padding_factor
    buf = np.zeros((pny, pnx), dtype=complex)
    buf[(pny - ny) // 2:(pny + ny) // 2,
        (pnx - nx) // 2:(pnx + nx) // 2] = f.samples
    spectrum = _fft.fftshift(_fft.fft2(_fft.ifftshift(buf)))

    du = f.wavelength * focal_length / (pnx * grid.dx)
    dv = f.wavelength * focal_length / (pny * grid.dy)
    ic = pnx // 2 + int(round(center[0] / du))
    jc = pny // 2 + int(round(center[1] / dv))
    hi = max(int(round(half_width / du)), 4)
    hj = max(int(round(half_width / dv)), 4)
    if not (0 <= ic - hi and ic + hi <= pnx and 0 <= jc - hj and jc + hj <= pny):
        raise ValueError("focal window exceeds the computed focal field")
    window = np.abs(spectrum[jc - hj:jc + hj, ic - hi:ic + hi]) ** 2
    window_grid = GridSpec(nx=window.shape[1], ny=window.shape[0], dx=du, dy=dv)
    return window, window_grid


def extract_order(f: ComplexField, grating_period: float,
                  order: int = 1) -> ComplexField:
    """Isolate one grating order as an on-axis beam.

    Demodulates the order's carrier tilt and band-passes the spectrum to
    half the order spacing in kx, which is the spectral-domain equivalent
    of picking up the well-separated beam with a camera centered on it.
    """
    grid = f.grid
    xx, _ = grid.meshgrid()
    carrier = np.exp(-2j * math.pi * order * xx / grating_period)
    demodulated = f.samples * carrier
    spectrum = _fft.fft2(demodulated)
    kx = 2.0 * math.pi * np.fft.fftfreq(grid.nx, d=grid.dx)
    spacing = 2.0 * math.pi / grating_period
    spectrum[:, np.abs(kx) > spacing / 2] = 0.0
    return f.with_samples(_fft.ifft2(spectrum))


def recenter_first_order(f: ComplexField, grating_period: float,
                         center: tuple[float, float]) -> ComplexField:
    """Follow the +1-order beam axis: shift ``center`` to the origin and
    strip the grating's carrier tilt, so further propagation stays on-axis
    (the camera frame of a bench that tracks the diffracted beam).
    """
    grid = f.grid
    shift_x = int(round(center[0] / grid.dx))
    shift_y = int(round(center[1] / grid.dy))
    samples = np.roll(f.samples, (-shift_y, -shift_x), axis=(0, 1))
    xx, _ = grid.meshgrid()
    carrier = np.exp(-2j * math.pi * (xx + shift_x * grid.dx) / grating_period)
    return f.with_samples(samples * carrier)


def grating_order_powers(f: ComplexField, grating_period: float,
                         max_order: int = 3) -> dict[int, float]:
    """Far-field power fractions binned around each grating order.

    Bins are half the order spacing wide in kx around m 2pi / period and
    unbounded in ky; fractions are relative to the total field power.
    """
    spectrum = _fft.fft2(f.samples)
    pw = np.abs(spectrum) ** 2
    total = pw.sum()
    if total == 0:
        raise ValueError("field carries no power")
    kx = 2.0 * math.pi * np.fft.fftfreq(f.grid.nx, d=f.grid.dx)
    spacing = 2.0 * math.pi / grating_period
    fractions = {}
    for m in range(-max_order, max_order + 1):
        sel = np.abs(kx - m * spacing) <= spacing / 2
        fractions[m] = float(pw[:, sel].sum() / total)
    return fractions
