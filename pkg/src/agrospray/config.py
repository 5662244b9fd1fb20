"""Flat key = value configuration files.

One assignment per line, ``#`` starts a comment, blank lines ignored.
Defaults are the reference parameter set with initial populations
(3.1, 3.7, 2.2), horizon T = 50 and dt = 0.01; file keys override them
and unknown keys are rejected.  A ``preset`` key applies a named
parameter overlay (for example ``preset = mintime-paper``) before the
remaining keys are merged.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .integrate import IntegratorConfig
from .model import ModelParams, PopulationState, ProblemKind, ProblemSpec
from .solver_fixed import FixedSolveConfig
from .solver_mintime import MinTimeConfig

__all__ = ["ConfigError", "LoadedConfig", "PARAMETER_PRESETS",
           "load_config", "parse_config"]


class ConfigError(ValueError):
    """Malformed configuration: syntax, unknown key or invalid value."""


# parameter overlays selectable with the `preset` key
PARAMETER_PRESETS = {
    # reference values
    "table1": {},
    # minimal-time instance as solved in the reference implementation
    # (c = 2, e = 0.3); satisfies the pest-free feasibility conditions
    "mintime-paper": {"c": 2.0, "e": 0.3},
    # minimal-time instance as described in prose (only e changes)
    "mintime-prose": {"e": 0.3},
}

_MODEL_KEYS = ("r", "e", "a", "b", "c", "h", "q", "k", "W", "V", "K", "xi")
_INIT_KEYS = {"f0": "f", "s0": "s", "v0": "v"}
_FLOAT_KEYS = set(_MODEL_KEYS) | set(_INIT_KEYS) | {
    "T", "t_lo", "t_hi", "dt", "tol", "relaxation", "t_tol"}
_INT_KEYS = {"max_iter"}
_STR_KEYS = {"preset", "problem"}
_ALL_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS


@dataclass(frozen=True)
class LoadedConfig:
    """Resolved problem plus solver settings from a config file."""

    spec: ProblemSpec
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    fixed: FixedSolveConfig = field(default_factory=FixedSolveConfig)
    mintime: MinTimeConfig = field(default_factory=MinTimeConfig)


def parse_config(text: str) -> dict:
    """Key/value pairs from flat config text; raises ConfigError with
    the offending line number on malformed input."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', "
                              f"got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in _STR_KEYS:
            out[key] = value
        elif key in _INT_KEYS:
            try:
                out[key] = int(value)
            except ValueError:
                raise ConfigError(
                    f"line {lineno}: key {key!r} needs an integer, "
                    f"got {value!r}") from None
        else:
            try:
                out[key] = float(value)
            except ValueError:
                raise ConfigError(
                    f"line {lineno}: key {key!r} needs a number, "
                    f"got {value!r}") from None
    return out


def resolve_config(entries: dict) -> LoadedConfig:
    """Merge defaults <- preset overlay <- explicit keys and validate."""
    merged: dict = {}
    preset = entries.get("preset", "table1")
    if preset not in PARAMETER_PRESETS:
        raise ConfigError(
            f"unknown preset {preset!r}; available: "
            + ", ".join(sorted(PARAMETER_PRESETS)))
    merged.update(PARAMETER_PRESETS[preset])
    merged.update({k: v for k, v in entries.items() if k != "preset"})

    model_kwargs = {k: merged[k] for k in _MODEL_KEYS if k in merged}
    init_kwargs = {_INIT_KEYS[k]: merged[k] for k in _INIT_KEYS
                   if k in merged}
    try:
        params = ModelParams(**model_kwargs)
        init = replace(PopulationState(3.1, 3.7, 2.2), **init_kwargs)
        kind = ProblemKind(merged.get("problem", "fixed-horizon"))
        spec = ProblemSpec(
            params, init, kind=kind,
            horizon=merged.get("T", 50.0),
            horizon_bracket=(merged.get("t_lo", 0.0),
                             merged.get("t_hi", 50.0)))
        integrator = IntegratorConfig(dt=merged.get("dt", 0.01))
        fixed = FixedSolveConfig(
            max_iter=merged.get("max_iter", 300),
            relaxation=merged.get("relaxation", 0.5),
            tol=merged.get("tol", 1e-6),
            integrator=integrator)
        mintime = MinTimeConfig(
            bracket=spec.horizon_bracket,
            t_tol=merged.get("t_tol", 1e-4),
            integrator=integrator)
    except ValueError as err:
        raise ConfigError(f"invalid configuration value: {err}") from err
    return LoadedConfig(spec=spec, integrator=integrator, fixed=fixed,
                        mintime=mintime)


def load_config(path: str | None) -> LoadedConfig:
    """Read and resolve a config file; None yields pure defaults."""
    if path is None:
        return resolve_config({})
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config {path!r}: {err}") from err
    return resolve_config(parse_config(text))
