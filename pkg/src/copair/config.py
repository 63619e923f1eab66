"""Run configuration and the flat ``key = value`` config-file format.

Grammar, one setting per line::

    # comment
    key = value

Blank lines and ``#`` comments are ignored, keys are the :class:`RunConfig`
field names, and list values (``families``) are comma separated.
"""

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .exceptions import ConfigError
from .market_data import DEFAULT_REFERENCE, FORMATION_HOURS, STEP_HOURS, TRADING_HOURS
from .strategy import FALLBACKS, Thresholds, normalize_test

TAKER_FEE = 0.0004
INITIAL_CAPITAL = 200_000.0


@dataclass(frozen=True)
class RunConfig:
    data_dir: str = "data"
    reference_symbol: str = DEFAULT_REFERENCE
    test: str = "eg"
    alpha1: float = 0.05
    alpha2: float = 0.10
    significance: float = 0.10
    capital: float = INITIAL_CAPITAL
    formation_hours: int = FORMATION_HOURS
    trading_hours: int = TRADING_HOURS
    step_hours: int = STEP_HOURS
    taker_fee: float = TAKER_FEE
    seed: int = 0
    fallback: str = "best-effort"
    output_dir: str = "out"
    max_lags: int = 12
    families: Optional[tuple] = field(default=None)
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "test", normalize_test(self.test).lower().replace("_adf", ""))
        Thresholds(self.alpha1, self.alpha2)
        if not 0.0 < self.significance < 1.0:
            raise ConfigError(f"significance must lie in (0, 1), got {self.significance}")
        if not self.capital > 0:
            raise ConfigError(f"capital must be positive, got {self.capital}")
        if self.taker_fee < 0:
            raise ConfigError(f"taker_fee must be non-negative, got {self.taker_fee}")
        for name in ("formation_hours", "trading_hours", "step_hours", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.step_hours < self.trading_hours:
            raise ConfigError("step_hours must be at least trading_hours so trading windows never overlap")
        if self.max_lags < 0:
            raise ConfigError("max_lags must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.fallback not in FALLBACKS:
            raise ConfigError(f"fallback must be one of {FALLBACKS}, got {self.fallback!r}")
        if self.families is not None:
            object.__setattr__(self, "families", tuple(self.families))

    @property
    def thresholds(self):
        return Thresholds(self.alpha1, self.alpha2)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def as_dict(self):
        out = dataclasses.asdict(self)
        if out["families"] is not None:
            out["families"] = list(out["families"])
        return out


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(name, raw):
    default = _FIELDS[name].default
    raw = raw.strip()
    try:
        if name == "families":
            return tuple(x.strip() for x in raw.split(",") if x.strip()) or None
        if isinstance(default, bool):
            return raw.lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None
    return raw


def parse_config_text(text, source="<config>"):
    """Parse config-file text into a ``{field: value}`` dict."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw)
    return values


def load_config(path=None, **overrides):
    """Config from an optional file, with non-None ``overrides`` applied on top."""
    values = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from None
        values.update(parse_config_text(text, str(path)))
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def dump_config(config):
    """Serialize a config in the file grammar (round-trips through load_config)."""
    lines = []
    for key, val in config.as_dict().items():
        if val is None:
            continue
        if isinstance(val, list):
            val = ",".join(val)
        lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"
