"""Run configuration: ``key = value`` files, presets and validation."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .graphs import BOUNDARY_MODES, DEFAULT_GHOST_INCREMENT
from .solver import CFL_POLICIES, SCHEMES, InitialCondition, SchemeConfig

REQUIRED = ("d", "m", "T", "N")
DEFAULT_INITIAL = "spline:1:1"

PRESETS: dict[str, dict] = {
    "gasket-paper": {"d": 3, "m": 6, "T": 1.0, "N": 200_000},
    "tetra-paper": {"d": 4, "m": 4, "T": 1.0, "N": 100_000},
}


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.replace(" ", "").split(",") if tok)


def _choice(options):
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return parse


def _positive_int(text) -> int:
    value = int(text)
    if value < 1:
        raise ValueError("must be a positive integer")
    return value


# key -> parser for values read from text
FIELDS = {
    "d": int,
    "m": int,
    "T": float,
    "N": _positive_int,
    "scheme": _choice(SCHEMES),
    "boundary": _choice(BOUNDARY_MODES),
    "cfl_policy": _choice(CFL_POLICIES),
    "snapshots": _int_list,
    "initial": str,
    "ghost_increment": float,
    "cg_tolerance": float,
    "cg_max_iterations": _positive_int,
}


@dataclass(frozen=True)
class RunConfig:
    d: int
    m: int
    T: float
    N: int
    scheme: str = "explicit"
    boundary: str = "dirichlet-ghost"
    cfl_policy: str = "enforce"
    snapshots: tuple[int, ...] | None = None
    initial: str = DEFAULT_INITIAL
    ghost_increment: float = DEFAULT_GHOST_INCREMENT
    cg_tolerance: float = 1e-10
    cg_max_iterations: int | None = None

    def __post_init__(self):
        if self.d < 2:
            raise ConfigError(f"d must be >= 2, got {self.d}")
        if self.m < 0:
            raise ConfigError(f"m must be >= 0, got {self.m}")
        try:
            self.scheme_config()
            if not self.initial.startswith("custom:"):
                InitialCondition.parse(self.initial)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def scheme_config(self) -> SchemeConfig:
        return SchemeConfig(
            T=self.T, N=self.N, scheme=self.scheme, boundary_mode=self.boundary,
            cfl_policy=self.cfl_policy, snapshot_steps=self.snapshots,
            cg_tolerance=self.cg_tolerance, cg_max_iterations=self.cg_max_iterations,
            ghost_increment=self.ghost_increment,
        )

    def initial_condition(self) -> InitialCondition:
        return InitialCondition.parse(self.initial)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["snapshots"] = list(self.scheme_config().snapshot_steps)
        return out

    @classmethod
    def from_dict(cls, values: dict) -> "RunConfig":
        unknown = set(values) - set(FIELDS)
        if unknown:
            raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
        missing = [k for k in REQUIRED if values.get(k) is None]
        if missing:
            raise ConfigError(f"missing required keys: {', '.join(missing)}")
        values = {k: v for k, v in values.items() if v is not None}
        if "snapshots" in values:
            values["snapshots"] = tuple(values["snapshots"])
        return cls(**values)


def parse_text(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        where = f"{source}:{lineno}: {raw.strip()!r}"
        if not sep or not key:
            raise ConfigError(f"{where}: expected 'key = value'")
        if key not in FIELDS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        try:
            values[key] = FIELDS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from exc
    return values


def load_file(path) -> dict:
    path = Path(path)
    return parse_text(path.read_text(), str(path))


def parse_config(path=None, preset: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Merge preset, file and flag values (later sources win) and validate."""
    values: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; available: {', '.join(PRESETS)}")
        values.update(PRESETS[preset])
    if path is not None:
        values.update(load_file(path))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return RunConfig.from_dict(values)


def config_text(cfg: RunConfig) -> str:
    """Inverse of :func:`parse_text` for a validated config."""
    lines = []
    for key, value in cfg.to_dict().items():
        if value is None:
            continue
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
    return "\n".join(lines) + "\n"
