"""Engine configuration and the flat `key = value` config file format."""

from dataclasses import dataclass, fields, replace

from .errors import ConfigError
from .geo import GridSpec

TIE_BREAKS = ("geo_course", "geo_distance", "departure_freq", "type_freq")
ETA_DIMENSIONS = ("course", "speed", "departure")

DEFAULT_BBOX = (30.0, 46.0, -6.0, 36.5)


@dataclass(frozen=True, slots=True)
class EngineConfig:
    """Every tunable of the prediction engine, with the stock defaults.

    The default bounding box spans the Mediterranean use case; at the
    0.005 degree arrival-time granularity its derived capacity is about
    27.2 million cells, which is why cell storage is strictly lazy.
    """

    dest_granularity: float = 1.0
    eta_granularity: float = 0.005
    bbox: tuple[float, float, float, float] = DEFAULT_BBOX
    course_tolerance: float = 15.0
    speed_bucket: float = 0.5
    max_ring_radius: int = 10
    robustness_k: int = 1
    robustness_window: int = 64
    eta_dimension: str = "course"
    time_adjustment: bool = True
    semi_supervised: bool = False
    quiet_period: int = 1800
    tie_break_order: tuple[str, ...] = TIE_BREAKS

    def __post_init__(self):
        if self.dest_granularity <= 0 or self.eta_granularity <= 0:
            raise ConfigError("granularities must be > 0")
        if len(self.bbox) != 4 or not (self.bbox[0] < self.bbox[1] and self.bbox[2] < self.bbox[3]):
            raise ConfigError(f"bad bbox {self.bbox}")
        if not 0.0 <= self.course_tolerance <= 180.0:
            raise ConfigError("course_tolerance must be in [0, 180]")
        if self.speed_bucket <= 0:
            raise ConfigError("speed_bucket must be > 0")
        if self.max_ring_radius < 0:
            raise ConfigError("max_ring_radius must be >= 0")
        if self.robustness_k < 1 or self.robustness_window < 1:
            raise ConfigError("robustness_k and robustness_window must be >= 1")
        if self.eta_dimension not in ETA_DIMENSIONS:
            raise ConfigError(f"eta_dimension must be one of {ETA_DIMENSIONS}")
        if self.quiet_period < 0:
            raise ConfigError("quiet_period must be >= 0")
        if sorted(self.tie_break_order) != sorted(TIE_BREAKS):
            raise ConfigError(f"tie_break_order must be a permutation of {TIE_BREAKS}")

    def dest_grid(self) -> GridSpec:
        lat_min, lat_max, lon_min, lon_max = self.bbox
        return GridSpec(lat_min, lat_max, lon_min, lon_max, self.dest_granularity)

    def eta_grid(self) -> GridSpec:
        lat_min, lat_max, lon_min, lon_max = self.bbox
        return GridSpec(lat_min, lat_max, lon_min, lon_max, self.eta_granularity)

    def to_dict(self) -> dict:
        return {
            "dest_granularity": self.dest_granularity,
            "eta_granularity": self.eta_granularity,
            "bbox": list(self.bbox),
            "course_tolerance": self.course_tolerance,
            "speed_bucket": self.speed_bucket,
            "max_ring_radius": self.max_ring_radius,
            "robustness_k": self.robustness_k,
            "robustness_window": self.robustness_window,
            "eta_dimension": self.eta_dimension,
            "time_adjustment": self.time_adjustment,
            "semi_supervised": self.semi_supervised,
            "quiet_period": self.quiet_period,
            "tie_break_order": list(self.tie_break_order),
        }


_TRUE = ("true", "on", "yes", "1")
_FALSE = ("false", "off", "no", "0")


def _parse_bool(raw: str, key: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _parse_float(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def parse_key_values(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse a flat `key = value` file body; `#` starts a comment line."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected `key = value`, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value.strip()
    return values


def config_from_text(text: str, source: str = "<config>") -> EngineConfig:
    values = parse_key_values(text, source)
    cfg = EngineConfig()
    updates = {}
    for key, raw in values.items():
        if key == "dest_granularity":
            updates[key] = _parse_float(raw, key)
        elif key == "eta_granularity":
            updates[key] = _parse_float(raw, key)
        elif key == "bbox":
            parts = [p.strip() for p in raw.split(",")]
            if len(parts) != 4:
                raise ConfigError(f"bbox: expected lat_min,lat_max,lon_min,lon_max, got {raw!r}")
            updates[key] = tuple(_parse_float(p, "bbox") for p in parts)
        elif key == "course_tolerance":
            updates[key] = _parse_float(raw, key)
        elif key == "speed_bucket":
            updates[key] = _parse_float(raw, key)
        elif key == "max_ring_radius":
            updates[key] = _parse_int(raw, key)
        elif key == "robustness_k":
            updates[key] = _parse_int(raw, key)
        elif key == "robustness_window":
            updates[key] = _parse_int(raw, key)
        elif key == "eta_dimension":
            updates[key] = raw.strip().lower()
        elif key == "time_adjustment":
            updates[key] = _parse_bool(raw, key)
        elif key == "semi_supervised":
            updates[key] = _parse_bool(raw, key)
        elif key == "quiet_period":
            updates[key] = _parse_int(raw, key)
        elif key == "tie_break_order":
            updates[key] = tuple(p.strip() for p in raw.split(","))
        else:
            raise ConfigError(f"{source}: unknown key {key!r}")
    return replace(cfg, **updates)


def load_config(path) -> EngineConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_text(fh.read(), source=str(path))


def dump_config(cfg: EngineConfig) -> str:
    """Render a config as the flat file format (round-trips through load)."""
    lines = []
    for spec_field in fields(cfg):
        value = getattr(cfg, spec_field.name)
        if isinstance(value, tuple):
            rendered = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        elif isinstance(value, bool):
            rendered = "true" if value else "false"
        elif isinstance(value, float):
            rendered = repr(value)
        else:
            rendered = str(value)
        lines.append(f"{spec_field.name} = {rendered}")
    return "\n".join(lines) + "\n"
