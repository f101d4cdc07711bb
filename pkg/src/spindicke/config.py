"""Run configuration: flat key=value documents, strictly validated.

Unknown keys are hard errors: a typo in a physics parameter must never be
silently ignored.  Axes are given either as comma lists ("1,2,3.5") or as
"linspace:start:stop:count".  Complex seeds use Python literal syntax
("0.5", "1+2j").
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams

__all__ = ["ConfigError", "RunConfig", "parse_config", "validate_for", "SUBCOMMANDS"]

SUBCOMMANDS = ("eigmap", "boundaries", "moments", "semiclassical", "phasemap")


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


def _parse_float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _parse_int(s):
    return int(s, 10)


def _parse_bool(s):
    low = s.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_complex(s):
    v = complex(s.replace(" ", ""))
    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
        raise ValueError("must be finite")
    return v


def _parse_axis(s):
    if s.startswith("linspace:"):
        parts = s.split(":")
        if len(parts) != 4:
            raise ValueError("linspace axis needs linspace:start:stop:count")
        lo, hi = float(parts[1]), float(parts[2])
        n = int(parts[3])
        if n < 1:
            raise ValueError("axis count must be >= 1")
        axis = np.linspace(lo, hi, n)
    else:
        axis = np.array([float(x) for x in s.split(",") if x.strip() != ""])
    if axis.size == 0:
        raise ValueError("axis is empty")
    if not np.all(np.isfinite(axis)):
        raise ValueError("axis values must be finite")
    if axis.size > 1 and not np.all(np.diff(axis) > 0):
        raise ValueError("axis must be strictly increasing")
    return axis


def _parse_choice(*choices):
    def parse(s):
        if s not in choices:
            raise ValueError(f"must be one of {', '.join(choices)}")
        return s
    return parse


_SCHEMA = {
    "model": _parse_choice("bec", "closed", "open", "adiabatic", "full"),
    "omega": _parse_float,
    "omega0": _parse_float,
    "q": _parse_float,
    "lambda_plus": _parse_float,
    "lambda_minus": _parse_float,
    "kappa": _parse_float,
    "q_axis": _parse_axis,
    "omega0_axis": _parse_axis,
    "lambda_plus_axis": _parse_axis,
    "lambda_minus_axis": _parse_axis,
    "dt": _parse_float,
    "t_end": _parse_float,
    "adaptive": _parse_bool,
    "halvings": _parse_int,
    "sample_every": _parse_int,
    "seed_alpha": _parse_complex,
    "seed_beta_plus": _parse_complex,
    "seed_beta_minus": _parse_complex,
    "seed_beta_zero": _parse_complex,
    "window_start": _parse_float,
    "window_end": _parse_float,
    "eps_mean": _parse_float,
    "eps_amp": _parse_float,
    "chaos_score": _parse_bool,
    "perturbation_size": _parse_float,
    "out": str,
    "format": _parse_choice("csv", "jsonl"),
}

# keys that must be present, per subcommand; swept quantities come from axes
_REQUIRED = {
    "eigmap": ("model", "omega", "lambda_plus", "lambda_minus", "kappa",
               "q_axis", "omega0_axis"),
    "boundaries": ("model", "omega", "lambda_plus", "lambda_minus", "kappa"),
    "moments": ("omega", "omega0", "q", "lambda_plus", "lambda_minus", "kappa",
                "dt", "t_end"),
    "semiclassical": ("model", "omega", "omega0", "q", "lambda_plus",
                      "lambda_minus", "kappa", "dt", "t_end"),
    "phasemap": ("omega", "omega0", "q", "kappa", "lambda_plus_axis",
                 "lambda_minus_axis", "dt", "window_start", "window_end"),
}

_MODEL_CHOICES = {
    "eigmap": ("bec", "closed", "open"),
    "boundaries": ("closed", "open"),
    "semiclassical": ("adiabatic", "full"),
}


@dataclass(frozen=True)
class RunConfig:
    """Parsed configuration plus the raw key=value pairs for metadata echo."""

    values: dict
    items: tuple = field(default=())   # ((key, raw_string), ...) in file order

    def get(self, key, default=None):
        return self.values.get(key, default)

    def __contains__(self, key):
        return key in self.values

    def params(self, **overrides) -> ModelParams:
        """ModelParams from the config, with optional field overrides."""
        fields = {}
        for name in ("omega", "omega0", "q", "lambda_plus", "lambda_minus", "kappa"):
            v = overrides.get(name, self.values.get(name))
            fields[name] = 0.0 if v is None else v
        try:
            return ModelParams(**fields)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def seed(self, system="full"):
        """Seed amplitudes (alpha first for the full system)."""
        from .semiclassical import DEFAULT_SEED
        defaults = dict(zip(
            ("seed_alpha", "seed_beta_plus", "seed_beta_minus", "seed_beta_zero"),
            DEFAULT_SEED))
        vals = tuple(self.values.get(k, defaults[k]) for k in defaults)
        return vals if system == "full" else vals[1:]


def parse_config(text: str) -> RunConfig:
    """Parse a flat key=value document ('#' starts a comment line).

    Unknown keys, duplicate keys, and unparseable values are errors carrying
    the offending line number.
    """
    values = {}
    items = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _SCHEMA[key](value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
        items.append((key, value))
    return RunConfig(values, tuple(items))


def validate_for(config: RunConfig, subcommand: str) -> None:
    """Check that every key the subcommand needs is present and consistent."""
    if subcommand not in _REQUIRED:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    missing = [k for k in _REQUIRED[subcommand] if k not in config]
    if missing:
        raise ConfigError(f"{subcommand}: missing required key(s) {', '.join(missing)}")
    if subcommand in _MODEL_CHOICES:
        model = config.get("model")
        if model not in _MODEL_CHOICES[subcommand]:
            raise ConfigError(
                f"{subcommand}: model must be one of "
                f"{', '.join(_MODEL_CHOICES[subcommand])}, got {model!r}")
    if subcommand == "boundaries" and "omega0" not in config and \
            "omega0_axis" not in config:
        raise ConfigError("boundaries: need omega0 or omega0_axis")
    if subcommand in ("moments", "semiclassical", "phasemap"):
        if config.get("dt", 1.0) <= 0:
            raise ConfigError(f"{subcommand}: dt must be > 0")
    if "t_end" in config and config.get("t_end") <= 0:
        raise ConfigError(f"{subcommand}: t_end must be > 0")
    if subcommand == "phasemap":
        if config.get("window_end") <= config.get("window_start"):
            raise ConfigError("phasemap: window_end must exceed window_start")
        if config.get("window_start") < 0:
            raise ConfigError("phasemap: window_start must be >= 0")
