"""Experiment configuration: INI text with explicit physical units.

Every length-valued key carries a unit suffix ("w0 = 1.32 mm",
"distance = 45 cm"); bare numbers are accepted only for dimensionless
quantities.  Missing keys fall back to the documented defaults, which
reproduce the reference bench: 35 px grating at 8 um pitch, 1558 nm,
1.32 mm waist, 45 cm detection distance, eta_d 0.90, eta_r 0.61, -3.0 dB
input squeezing.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import math
from dataclasses import dataclass, fields, replace

from .hologram import SlmGeometry
from .modes import ModeSpec
from .propagation import PropagationPlan

__all__ = ["ExperimentConfig", "ConfigError", "parse_config", "parse_config_file",
           "serialize_config", "config_hash", "parse_length", "format_length",
           "parse_mode_token", "DEFAULT_PIPELINE_MODES"]

_LENGTH_UNITS = {
    "m": 1.0,
    "cm": 1e-2,
    "mm": 1e-3,
    "um": 1e-6,
    "µm": 1e-6,
    "nm": 1e-9,
}

# the 9 LG + 3 BG modes of the reference experiment
DEFAULT_PIPELINE_MODES = tuple(
    [f"lg:{p},{l}" for p in (1, 2, 3) for l in (1, 2, 3)]
    + [f"bg:{n}" for n in (0, 1, 2)])


class ConfigError(ValueError):
    """Malformed configuration text or values."""


def parse_length(text: str) -> float:
    """Parse a number with a length unit suffix into metres.

    "inf" (optionally with a unit) is accepted as the no-lens flag.
    """
    parts = text.strip().split()
    if not parts or len(parts) > 2:
        raise ConfigError(f"cannot parse length {text!r}")
    try:
        value = float(parts[0])
    except ValueError as exc:
        raise ConfigError(f"cannot parse length {text!r}") from exc
    if math.isinf(value):
        return value
    if len(parts) == 1:
        raise ConfigError(f"length {text!r} is missing a unit (m, cm, mm, um, nm)")
    unit = parts[1]
    if unit not in _LENGTH_UNITS:
        raise ConfigError(f"unknown length unit {unit!r} in {text!r}")
    return value * _LENGTH_UNITS[unit]


def format_length(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return f"{value!r} m"


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat, serializable description of one simulated experiment."""

    # mode
    mode_kind: str = "lg"
    mode_p: int = 1
    mode_l: int = 1
    mode_n: int = 0
    w0: float = 1.32e-3
    k_r: float | None = None            # 1/m; None: first J_0 zero at w0/2
    image_path: str | None = None
    image_extent: float | None = None
    # slm
    slm_width_px: int = 1920
    slm_height_px: int = 1080
    pixel_pitch: float = 8e-6
    phase_levels: int = 256
    eta_d: float = 0.90
    eta_r: float = 0.61
    # hologram
    grating_period_px: int = 35
    lens_focal_length: float = math.inf
    aperture_radius_px: float = 540.0
    target_plane: str = "direct"
    # propagation
    wavelength: float = 1558e-9
    distance: float = 0.45
    padding_factor: int = 3
    # iris (first-order selection); radius calibrated to the reference
    # bench's measured grating efficiency
    iris_enabled: bool = True
    iris_radius: float = 1.45e-3
    iris_center_x: float | None = None   # None: analytic first-order position
    iris_center_y: float = 0.0
    # camera (formed-mode view)
    camera_focal_length: float = 0.45
    camera_half_width: float = 1.2e-3
    camera_near_padding: int = 2
    # squeezing
    input_db: float = -3.0
    input_uncertainty_db: float = 0.3
    eta_d_uncertainty: float = 0.03
    eta_r_uncertainty: float = 0.02
    # pipeline
    pipeline_modes: tuple[str, ...] = DEFAULT_PIPELINE_MODES
    # output
    output_directory: str = "out"

    def mode_spec(self) -> ModeSpec:
        return _build_mode_spec(self.mode_kind, self.mode_p, self.mode_l,
                                self.mode_n, self.w0, self.k_r,
                                self.image_path, self.image_extent)

    def slm_geometry(self) -> SlmGeometry:
        return SlmGeometry(width_px=self.slm_width_px,
                           height_px=self.slm_height_px,
                           pixel_pitch=self.pixel_pitch,
                           phase_levels=self.phase_levels,
                           design_wavelength=self.wavelength)

    def propagation_plan(self) -> PropagationPlan:
        return PropagationPlan(distance=self.distance,
                               wavelength=self.wavelength,
                               padding_factor=self.padding_factor)

    def grating_period_m(self) -> float:
        return self.grating_period_px * self.pixel_pitch

    def with_mode(self, token: str) -> "ExperimentConfig":
        """Copy of this config targeting the mode described by ``token``."""
        kind, p, l, n, image = parse_mode_token(token)
        return replace(self, mode_kind=kind, mode_p=p, mode_l=l, mode_n=n,
                       image_path=image if image is not None else self.image_path)


def parse_mode_token(token: str) -> tuple[str, int, int, int, str | None]:
    """Parse compact mode syntax: gauss | lg:p,l | bg:n | arbitrary:path."""
    token = token.strip()
    if token == "gauss":
        return ("gauss", 0, 0, 0, None)
    if token.startswith("lg:"):
        try:
            p_s, l_s = token[3:].split(",")
            return ("lg", int(p_s), int(l_s), 0, None)
        except ValueError as exc:
            raise ConfigError(f"bad LG mode token {token!r}; want lg:p,l") from exc
    if token.startswith("bg:"):
        try:
            return ("bg", 0, 0, int(token[3:]), None)
        except ValueError as exc:
            raise ConfigError(f"bad BG mode token {token!r}; want bg:n") from exc
    if token.startswith("arbitrary:"):
        return ("arbitrary", 0, 0, 0, token[len("arbitrary:"):])
    raise ConfigError(f"unknown mode token {token!r}")


def mode_token(cfg: ExperimentConfig) -> str:
    if cfg.mode_kind == "lg":
        return f"lg:{cfg.mode_p},{cfg.mode_l}"
    if cfg.mode_kind == "bg":
        return f"bg:{cfg.mode_n}"
    if cfg.mode_kind == "arbitrary":
        return f"arbitrary:{cfg.image_path}"
    return cfg.mode_kind


def _build_mode_spec(kind, p, l, n, w0, k_r, image_path, image_extent) -> ModeSpec:
    if kind == "gauss":
        return ModeSpec.gauss(w0)
    if kind == "lg":
        return ModeSpec.lg(p, l, w0)
    if kind == "bg":
        return ModeSpec.bg(n, w0, k_r)
    if kind == "arbitrary":
        if not image_path:
            raise ConfigError("arbitrary mode needs image_path")
        from .imageio import read_intensity_image
        return ModeSpec.arbitrary(read_intensity_image(image_path),
                                  image_extent=image_extent)
    raise ConfigError(f"unknown mode kind {kind!r}")


# ---------------------------------------------------------------------------
# INI parsing / canonical serialization

def parse_config_file(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    cfg = ExperimentConfig()
    known = {f.name for f in fields(ExperimentConfig)}
    updates: dict = {}

    def get(section, option, conv, target):
        if parser.has_option(section, option):
            raw = parser.get(section, option).strip()
            if raw != "":
                try:
                    updates[target] = conv(raw)
                except (ValueError, ConfigError) as exc:
                    raise ConfigError(
                        f"bad value for [{section}] {option}: {raw!r}") from exc

    as_bool = lambda s: s.lower() in ("1", "true", "yes", "on")

    get("mode", "kind", str, "mode_kind")
    get("mode", "p", int, "mode_p")
    get("mode", "l", int, "mode_l")
    get("mode", "n", int, "mode_n")
    get("mode", "w0", parse_length, "w0")
    get("mode", "k_r", float, "k_r")
    get("mode", "image", str, "image_path")
    get("mode", "image_extent", parse_length, "image_extent")

    get("slm", "width_px", int, "slm_width_px")
    get("slm", "height_px", int, "slm_height_px")
    get("slm", "pixel_pitch", parse_length, "pixel_pitch")
    get("slm", "phase_levels", int, "phase_levels")
    get("slm", "eta_d", float, "eta_d")
    get("slm", "eta_r", float, "eta_r")

    get("hologram", "grating_period_px", int, "grating_period_px")
    get("hologram", "lens_focal_length", parse_length, "lens_focal_length")
    get("hologram", "aperture_radius_px", float, "aperture_radius_px")
    get("hologram", "target_plane", str, "target_plane")

    get("propagation", "wavelength", parse_length, "wavelength")
    get("propagation", "distance", parse_length, "distance")
    get("propagation", "padding_factor", int, "padding_factor")

    get("iris", "enabled", as_bool, "iris_enabled")
    get("iris", "radius", parse_length, "iris_radius")
    get("iris", "center_x", parse_length, "iris_center_x")
    get("iris", "center_y", parse_length, "iris_center_y")

    get("camera", "focal_length", parse_length, "camera_focal_length")
    get("camera", "half_width", parse_length, "camera_half_width")
    get("camera", "near_padding_factor", int, "camera_near_padding")

    get("squeezing", "input_db", float, "input_db")
    get("squeezing", "input_uncertainty_db", float, "input_uncertainty_db")
    get("squeezing", "eta_d_uncertainty", float, "eta_d_uncertainty")
    get("squeezing", "eta_r_uncertainty", float, "eta_r_uncertainty")

    if parser.has_option("pipeline", "modes"):
        tokens = parser.get("pipeline", "modes").split()
        for t in tokens:
            parse_mode_token(t)   # validate early
        updates["pipeline_modes"] = tuple(tokens)

    get("output", "directory", str, "output_directory")

    assert set(updates) <= known
    cfg = replace(cfg, **updates)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.mode_kind not in ("gauss", "lg", "bg", "arbitrary"):
        raise ConfigError(f"unknown mode kind {cfg.mode_kind!r}")
    if cfg.target_plane not in ("direct", "fourier"):
        raise ConfigError(f"unknown target plane {cfg.target_plane!r}")
    if cfg.w0 <= 0 or cfg.pixel_pitch <= 0 or cfg.wavelength <= 0:
        raise ConfigError("w0, pixel_pitch and wavelength must be positive")
    if not (0 <= cfg.eta_d <= 1 and 0 <= cfg.eta_r <= 1):
        raise ConfigError("eta_d and eta_r must lie in [0, 1]")
    if cfg.distance < 0:
        raise ConfigError("propagation distance must be >= 0")
    if cfg.grating_period_px < 2:
        raise ConfigError("grating period must be at least 2 px")
    if cfg.iris_radius <= 0:
        raise ConfigError("iris radius must be positive")


def serialize_config(cfg: ExperimentConfig) -> str:
    """Canonical INI text; parse(serialize(c)) == c."""
    out = io.StringIO()

    def sec(name):
        out.write(f"[{name}]\n")

    def kv(key, value):
        if value is None:
            return
        out.write(f"{key} = {value}\n")

    sec("mode")
    kv("kind", cfg.mode_kind)
    kv("p", cfg.mode_p)
    kv("l", cfg.mode_l)
    kv("n", cfg.mode_n)
    kv("w0", format_length(cfg.w0))
    kv("k_r", None if cfg.k_r is None else repr(cfg.k_r))
    kv("image", cfg.image_path)
    kv("image_extent",
       None if cfg.image_extent is None else format_length(cfg.image_extent))
    out.write("\n")

    sec("slm")
    kv("width_px", cfg.slm_width_px)
    kv("height_px", cfg.slm_height_px)
    kv("pixel_pitch", format_length(cfg.pixel_pitch))
    kv("phase_levels", cfg.phase_levels)
    kv("eta_d", repr(cfg.eta_d))
    kv("eta_r", repr(cfg.eta_r))
    out.write("\n")

    sec("hologram")
    kv("grating_period_px", cfg.grating_period_px)
    kv("lens_focal_length", format_length(cfg.lens_focal_length))
    kv("aperture_radius_px", repr(cfg.aperture_radius_px))
    kv("target_plane", cfg.target_plane)
    out.write("\n")

    sec("propagation")
    kv("wavelength", format_length(cfg.wavelength))
    kv("distance", format_length(cfg.distance))
    kv("padding_factor", cfg.padding_factor)
    out.write("\n")

    sec("iris")
    kv("enabled", "true" if cfg.iris_enabled else "false")
    kv("radius", format_length(cfg.iris_radius))
    kv("center_x",
       None if cfg.iris_center_x is None else format_length(cfg.iris_center_x))
    kv("center_y", format_length(cfg.iris_center_y))
    out.write("\n")

    sec("camera")
    kv("focal_length", format_length(cfg.camera_focal_length))
    kv("half_width", format_length(cfg.camera_half_width))
    kv("near_padding_factor", cfg.camera_near_padding)
    out.write("\n")

    sec("squeezing")
    kv("input_db", repr(cfg.input_db))
    kv("input_uncertainty_db", repr(cfg.input_uncertainty_db))
    kv("eta_d_uncertainty", repr(cfg.eta_d_uncertainty))
    kv("eta_r_uncertainty", repr(cfg.eta_r_uncertainty))
    out.write("\n")

    sec("pipeline")
    kv("modes", " ".join(cfg.pipeline_modes))
    out.write("\n")

    sec("output")
    kv("directory", cfg.output_directory)
    return out.getvalue()


def config_hash(cfg: ExperimentConfig) -> str:
    """Provenance hash of the physical configuration.

    The output directory is environmental and excluded, so reruns into
    different directories share a hash.
    """
    normalized = replace(cfg, output_directory="out")
    return hashlib.sha256(
        serialize_config(normalized).encode("utf-8")).hexdigest()[:16]
