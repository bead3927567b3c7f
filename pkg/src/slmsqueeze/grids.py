"""Sampled-field containers: uniform 2-D grids and complex scalar fields.

Coordinate convention: sample (iy, ix) sits at physical position
``x = (ix - nx//2) * dx + cx``, ``y = (iy - ny//2) * dy + cy`` so that the
grid contains an exact origin sample and matches numpy's FFT frequency
layout after fftshift.  Fields are treated as immutable values; every
operation returns a new field.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

__all__ = ["GridSpec", "ComplexField", "GridMismatchError",
           "normalize", "power", "intensity_image", "mode_overlap"]


class GridMismatchError(ValueError):
    """Two fields were combined whose grids or wavelengths differ."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform sampling of a transverse plane.

    nx, ny   -- sample counts (>= 2)
    dx, dy   -- pixel spacing in metres (> 0)
    center   -- physical coordinates (metres) of the grid origin sample
    """

    nx: int
    ny: int
    dx: float
    dy: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least 2 samples per axis")
        if self.dx <= 0 or self.dy <= 0:
            raise ValueError("pixel spacing must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def extent_x(self) -> float:
        return self.nx * self.dx

    @property
    def extent_y(self) -> float:
        return self.ny * self.dy

    def x_coords(self) -> np.ndarray:
        return (np.arange(self.nx) - self.nx // 2) * self.dx + self.center[0]

    def y_coords(self) -> np.ndarray:
        return (np.arange(self.ny) - self.ny // 2) * self.dy + self.center[1]

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x_coords(), self.y_coords())

    @staticmethod
    def square(n: int, extent: float, center=(0.0, 0.0)) -> "GridSpec":
        """Square n x n grid spanning ``extent`` metres per side."""
        d = extent / n
        return GridSpec(nx=n, ny=n, dx=d, dy=d, center=center)


@dataclass(frozen=True)
class ComplexField:
    """Complex scalar field samples on a :class:`GridSpec`.

    ``samples`` has shape (ny, nx); ``wavelength`` is in metres.
    """

    grid: GridSpec
    samples: np.ndarray = field(repr=False)
    wavelength: float

    def __post_init__(self):
        if self.samples.shape != self.grid.shape:
            raise ValueError(
                f"sample shape {self.samples.shape} != grid shape {self.grid.shape}")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")

    def with_samples(self, samples: np.ndarray) -> "ComplexField":
        return replace(self, samples=samples)


def power(f: ComplexField) -> float:
    """Total power: sum |samples|^2 dx dy."""
    return float(np.sum(np.abs(f.samples) ** 2) * f.grid.dx * f.grid.dy)


def intensity_image(f: ComplexField, peak_normalized: bool = False) -> np.ndarray:
    """|samples|^2, optionally rescaled to peak 1 for image export."""
    img = np.abs(f.samples) ** 2
    if peak_normalized:
        peak = img.max()
        if peak > 0:
            img = img / peak
    return img


def normalize(f: ComplexField) -> ComplexField:
    """Rescale to unit discrete L2 norm.  Raises on an all-zero field."""
    p = power(f)
    if p <= 0.0:
        raise ValueError("cannot normalize a field with zero power")
    return f.with_samples(f.samples / np.sqrt(p))


def mode_overlap(a: ComplexField, b: ComplexField) -> complex:
    """Inner product sum conj(a) * b dx dy; grids must match exactly."""
    if a.grid != b.grid or a.wavelength != b.wavelength:
        raise GridMismatchError("overlap requires identical grids and wavelengths")
    return complex(np.sum(np.conj(a.samples) * b.samples) * a.grid.dx * a.grid.dy)


def bilinear_sample(array: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Sample a 2-D array at fractional (row, col) positions.

    Positions outside the array are clamped to the border value.
    """
    ny, nx = array.shape
    r = np.clip(rows, 0.0, ny - 1.0)
    c = np.clip(cols, 0.0, nx - 1.0)
    r0 = np.floor(r).astype(int)
    c0 = np.floor(c).astype(int)
    r1 = np.minimum(r0 + 1, ny - 1)
    c1 = np.minimum(c0 + 1, nx - 1)
    fr = r - r0
    fc = c - c0
    top = array[r0, c0] * (1 - fc) + array[r0, c1] * fc
    bot = array[r1, c0] * (1 - fc) + array[r1, c1] * fc
    return top * (1 - fr) + bot * fr
