"""Experiment configuration read from ``key = value`` files and flags, plus its report echo."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .ingestion import DEFAULT_SCALES, FORMATS, IOT_EVENTS
from .matrix import RatingScale
from .pipeline import SCHEMES, ModelParams

DEFAULT_FRACTIONS = (0.15, 0.30, 0.45, 0.60, 0.70, 0.75)

# settings that change how a run executes but not what it computes
_NOT_ECHOED = ("output_path", "output_format", "threads")


# config keys whose command-line flag is spelled differently
FLAG_NAMES = {"data_path": "--data", "data_format": "--format", "lam": "--lambda", "output_path": "--output"}


class ConfigError(ValueError):
    """A bad configuration value; ``key`` names the offending setting."""

    def __init__(self, key, message):
        self.key = key
        flag = FLAG_NAMES.get(key, "--" + key.replace("_", "-"))
        super().__init__(f"{flag}: {message}")


@dataclass(frozen=True)
class ExperimentConfig:
    data_path: str | None = None
    data_format: str = "tab-separated"
    scale: tuple[float, float] | None = None
    schemes: tuple[str, ...] = SCHEMES
    fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    folds: int = 1
    seed: int = 0
    m: int = 30
    k: int = 30
    clusters: int = 16
    min_overlap: int = 2
    lam: float = 0.75
    delta: float = 0.1
    significant_filter: bool = True
    smoothing: bool = True
    max_iters: int = 100
    timing: bool = False
    strict_parse: bool = True
    output_path: str | None = None
    output_format: str = "csv"
    threads: int = 1

    def validate(self) -> ExperimentConfig:
        if self.data_format not in FORMATS:
            raise ConfigError("data_format", f"expected one of {', '.join(FORMATS)}, got {self.data_format!r}")
        if self.data_format == IOT_EVENTS and self.scale is None:
            raise ConfigError("scale", "required for iot-events data")
        if self.scale is not None:
            lo, hi = self.scale
            if not lo < hi:
                raise ConfigError("scale", f"need min < max, got {lo},{hi}")
        if not self.schemes:
            raise ConfigError("schemes", "at least one scheme is required")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ConfigError("schemes", f"unknown scheme {s!r}; choose from {', '.join(SCHEMES)}")
        if not self.fractions:
            raise ConfigError("fractions", "at least one training fraction is required")
        for f in self.fractions:
            if not 0.0 < f < 1.0:
                raise ConfigError("fractions", f"training fraction {f} is outside (0, 1)")
        for key in ("folds", "m", "k", "clusters", "max_iters", "threads"):
            if getattr(self, key) < 1:
                raise ConfigError(key, f"must be a positive integer, got {getattr(self, key)}")
        if self.min_overlap < 2:
            raise ConfigError("min_overlap", f"must be at least 2, got {self.min_overlap}")
        for key in ("lam", "delta"):
            if not 0.0 <= getattr(self, key) <= 1.0:
                raise ConfigError(key, f"must lie in [0, 1], got {getattr(self, key)}")
        if self.output_format not in ("csv", "json"):
            raise ConfigError("output_format", f"expected csv or json, got {self.output_format!r}")
        return self

    @property
    def rating_scale(self) -> RatingScale:
        if self.scale is not None:
            return RatingScale(*self.scale)
        return DEFAULT_SCALES[self.data_format]

    def model_params(self) -> ModelParams:
        return ModelParams(
            m=self.m, k=self.k, clusters=self.clusters, min_overlap=self.min_overlap,
            lam=self.lam, delta=self.delta, significant_filter=self.significant_filter,
            smoothing=self.smoothing, max_iters=self.max_iters, seed=self.seed,
        )

    def echo(self) -> dict:
        """Fully resolved settings that determine the report contents."""
        out = asdict(self)
        for key in _NOT_ECHOED:
            out.pop(key)
        scale = self.rating_scale
        out["scale"] = [scale.min, scale.max]
        out["schemes"] = list(self.schemes)
        out["fractions"] = list(self.fractions)
        return out


_BOOL = {"true": True, "yes": True, "on": True, "1": True, "false": False, "no": False, "off": False, "0": False}


def _coerce(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in ("schemes",):
            return tuple(s.strip() for s in raw.split(",") if s.strip())
        if key == "fractions":
            return tuple(float(s) for s in raw.split(",") if s.strip())
        if key == "scale":
            lo, hi = (float(s) for s in raw.split(","))
            return (lo, hi)
        if key in ("folds", "seed", "m", "k", "clusters", "min_overlap", "max_iters", "threads"):
            return int(raw)
        if key in ("lam", "delta"):
            return float(raw)
        if key in ("significant_filter", "smoothing", "timing", "strict_parse"):
            return _BOOL[raw.lower()]
    except (ValueError, KeyError):
        raise ConfigError(key, f"cannot parse {raw!r}") from None
    return raw


_ALIASES = {"lambda": "lam"}
KEYS = tuple(f.name for f in fields(ExperimentConfig))


def coerce_setting(key: str, raw: str):
    """Normalise a user-facing key and parse its string value."""
    key = _ALIASES.get(key.replace("-", "_"), key.replace("-", "_"))
    if key not in KEYS:
        raise ConfigError(key, "unknown setting")
    return key, _coerce(key, raw)


def read_config_file(path) -> dict:
    """Parse a ``key = value`` file; ``#`` starts a comment."""
    values = {}
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"{path}:{line_no}: expected 'key = value', got {line!r}")
        key, raw = line.split("=", 1)
        key, value = coerce_setting(key.strip(), raw)
        values[key] = value
    return values


def resolve(file_values: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Defaults, then config-file values, then command-line overrides."""
    cfg = replace(ExperimentConfig(), **(file_values or {}))
    cfg = replace(cfg, **(overrides or {}))
    return cfg.validate()
