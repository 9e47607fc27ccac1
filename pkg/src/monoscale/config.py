"""Flat `key = value` configuration files for the CLI pipeline.

Unknown keys are an error (typos in experiment configs should fail loudly),
values are typed and validated at load, and every tunable has the published
default so an empty file is a valid config.
"""

from dataclasses import dataclass, fields

from .exceptions import ConfigError
from .geometry import CameraModel
from .synth import PathSegment


def _parse_bool(text):
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int_set(text):
    text = text.strip()
    if not text:
        return frozenset()
    return frozenset(int(part) for part in text.split(","))


def _parse_segments(text):
    """Segments like ``straight:80:1.0,arc:60:1.0:1.2,slope:60:1.0:5``.

    Fields are kind:n_steps:step_m[:extra] where extra is the per-step turn
    in degrees for arcs and the grade percentage for slopes.
    """
    segments = []
    for chunk in text.split(","):
        parts = chunk.strip().split(":")
        if len(parts) < 3:
            raise ValueError(f"segment needs kind:n_steps:step_m, got {chunk!r}")
        kind = parts[0]
        n_steps = int(parts[1])
        step_m = float(parts[2])
        extra = float(parts[3]) if len(parts) > 3 else 0.0
        if kind == "arc":
            segments.append(PathSegment(kind, n_steps, step_m, turn_deg=extra))
        elif kind == "slope":
            segments.append(PathSegment(kind, n_steps, step_m, grade_percent=extra))
        elif kind == "straight":
            segments.append(PathSegment(kind, n_steps, step_m))
        else:
            raise ValueError(f"unknown segment kind {kind!r}")
    return tuple(segments)


@dataclass(frozen=True)
class PipelineConfig:
    # camera
    fx: float = 700.0
    fy: float = 700.0
    cx: float = 640.0
    cy: float = 360.0
    image_width: int = 1280
    image_height: int = 720
    camera_height_m: float = 1.7
    # segmentation labels
    road_label: int = 1
    dynamic_labels: frozenset = frozenset({2})
    # selection / scale parameters
    theta0_deg: float = 5.0
    beta_a: int = 1
    window_q: int = 5
    filter_sigma: float = 5.0
    min_points: int = 12
    # randomized stages
    seed: int = 0
    essential_iters: int = 200
    sampson_px: float = 1.0
    min_disparity_px: float = 1.0
    essential_confidence: float = 0.999
    plane_iters: int = 200
    plane_dist_tol: float = 0.03
    plane_min_inliers: int = 6
    # synthetic scene (used by the `synth` command)
    synth_segments: tuple = (
        PathSegment("straight", 79),
        PathSegment("arc", 60, turn_deg=1.0),
        PathSegment("slope", 60, grade_percent=5.0),
    )
    synth_n_road: int = 100
    synth_n_clutter: int = 30
    synth_n_dynamic: int = 10
    synth_plane_extent_m: float = 8.0
    synth_pixel_noise_px: float = 0.5
    synth_dynamic_velocity_mps: float = 8.0
    synth_frame_dt_s: float = 0.1
    synth_global_scale: float = 2.0
    # optional default paths (CLI flags take precedence)
    input_dir: str = ""
    output_dir: str = ""

    def camera(self) -> CameraModel:
        return CameraModel(
            fx=self.fx,
            fy=self.fy,
            cx=self.cx,
            cy=self.cy,
            height_m=self.camera_height_m,
        )


_PARSERS = {
    float: float,
    int: int,
    str: str,
    bool: _parse_bool,
}


def _field_parser(f):
    if f.name == "dynamic_labels":
        return _parse_int_set
    if f.name == "synth_segments":
        return _parse_segments
    return _PARSERS[f.type]


def load_config(path) -> PipelineConfig:
    """Parse and validate a config file; unknown keys raise ConfigError."""
    known = {f.name: f for f in fields(PipelineConfig)}
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = _field_parser(known[key])(value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    config = PipelineConfig(**values)
    _validate(config)
    return config


def _validate(config: PipelineConfig):
    positive = (
        "fx",
        "fy",
        "camera_height_m",
        "theta0_deg",
        "filter_sigma",
        "sampson_px",
        "min_disparity_px",
        "plane_dist_tol",
        "synth_global_scale",
        "synth_frame_dt_s",
    )
    for name in positive:
        if not getattr(config, name) > 0:
            raise ConfigError(f"{name} must be positive")
    at_least_one = ("window_q", "essential_iters", "plane_iters", "image_width", "image_height")
    for name in at_least_one:
        if getattr(config, name) < 1:
            raise ConfigError(f"{name} must be >= 1")
    if config.min_points < 3:
        raise ConfigError("min_points must be >= 3")
    if not 0.0 < config.essential_confidence < 1.0:
        raise ConfigError("essential_confidence must be in (0, 1)")
    if config.road_label in config.dynamic_labels:
        raise ConfigError("road_label cannot also be a dynamic label")
