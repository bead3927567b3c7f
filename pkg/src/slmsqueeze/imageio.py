"""Image and table I/O: 8/16-bit PGM and PNG, CSV cross-sections."""

from __future__ import annotations

import numpy as np

from .hologram import import_pgm

__all__ = ["write_pgm16", "write_png16", "read_intensity_image",
           "write_section_csv"]


def _to_uint16(image: np.ndarray) -> np.ndarray:
    peak = image.max()
    scaled = image / peak if peak > 0 else image
    return np.round(scaled * 65535.0).astype(np.uint16)


def write_pgm16(image: np.ndarray, path) -> None:
    """Write an intensity map as a peak-normalized 16-bit binary PGM."""
    data = _to_uint16(image)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{data.shape[1]} {data.shape[0]}\n65535\n".encode("ascii"))
        fh.write(data.astype(">u2").tobytes())


def write_png16(image: np.ndarray, path) -> None:
    """Write an intensity map as a peak-normalized 16-bit grayscale PNG."""
    from PIL import Image

    Image.fromarray(_to_uint16(image), mode="I;16").save(path)


def read_intensity_image(path) -> np.ndarray:
    """Read an 8/16-bit grayscale PGM or PNG as a float intensity map."""
    path = str(path)
    if path.lower().endswith(".pgm"):
        return import_pgm(path).astype(float)
    from PIL import Image

    with Image.open(path) as img:
        if img.mode not in ("L", "I", "I;16"):
            img = img.convert("L")
        return np.asarray(img, dtype=float)


def write_section_csv(path, coordinates, measured, fitted=None) -> None:
    """CSV cross-section: coordinate, measured and optional fitted column."""
    with open(path, "w", encoding="utf-8") as fh:
        if fitted is None:
            fh.write("coordinate_m,measured\n")
            for c, m in zip(coordinates, measured):
                fh.write(f"{c!r},{m!r}\n")
        else:
            fh.write("coordinate_m,measured,fitted\n")
            for c, m, f in zip(coordinates, measured, fitted):
                fh.write(f"{c!r},{m!r},{f!r}\n")
