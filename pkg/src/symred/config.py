"""Flat key-value scenario configuration (INI sections, no nesting).

A config file has up to three sections::

    [scenario]
    name = so2_planar
    seed = 1234

    [parameters]
    mu = 1.0
    k = 1.0

    [integration]
    t_final = 10.0
    step = 0.001

Vector-valued parameters are space-separated floats on one line.  Unknown
keys are rejected, and the momentum value is dimension-checked against the
scenario's group by the scenario factory itself.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from .scenarios import SCENARIOS, build_scenario


class ConfigError(ValueError):
    """Malformed or inconsistent scenario configuration."""


# parameter name -> parser, per scenario
_FLOAT = "float"
_INT = "int"
_VECTOR = "vector"

SCENARIO_PARAMETERS: dict[str, dict[str, str]] = {
    "translation_nbody": {"n": _INT, "masses": _VECTOR, "mu": _VECTOR, "k_pair": _FLOAT},
    "so2_planar": {"mu": _FLOAT, "k": _FLOAT},
    "so3_angular": {"k": _FLOAT, "shift": _VECTOR},
    "tstar_so3": {"inertia": _VECTOR, "mu": _VECTOR},
    "magnetic_r2": {"sigma12": _FLOAT, "mu": _VECTOR},
    "so2_singular": {"k": _FLOAT},
}

DEFAULT_T_FINAL = 10.0
DEFAULT_STEP = 1e-3


@dataclass
class ScenarioConfig:
    scenario: str
    seed: int = 0
    t_final: float = DEFAULT_T_FINAL
    step: float = DEFAULT_STEP
    parameters: dict = field(default_factory=dict)

    def build(self):
        try:
            return build_scenario(self.scenario, self.parameters)
        except (ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc


def _parse_value(kind: str, raw: str):
    try:
        if kind == _FLOAT:
            return float(raw)
        if kind == _INT:
            return int(raw)
        return np.array([float(tok) for tok in raw.split()])
    except ValueError as exc:
        raise ConfigError(f"cannot parse value {raw!r} as {kind}") from exc


def default_config(scenario: str) -> ScenarioConfig:
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; known: {sorted(SCENARIOS)}")
    return ScenarioConfig(scenario=scenario)


def load_config(path: str) -> ScenarioConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")

    known_sections = {"scenario", "parameters", "integration"}
    unknown = set(parser.sections()) - known_sections
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    if "scenario" not in parser or "name" not in parser["scenario"]:
        raise ConfigError("config must declare [scenario] name")
    name = parser["scenario"]["name"].strip()
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; known: {sorted(SCENARIOS)}")
    cfg = ScenarioConfig(scenario=name)

    for key, raw in parser["scenario"].items():
        if key == "name":
            continue
        if key == "seed":
            cfg.seed = int(raw)
        else:
            raise ConfigError(f"unknown key {key!r} in [scenario]")

    allowed = SCENARIO_PARAMETERS[name]
    if "parameters" in parser:
        for key, raw in parser["parameters"].items():
            if key not in allowed:
                raise ConfigError(f"unknown parameter {key!r} for scenario {name!r}")
            cfg.parameters[key] = _parse_value(allowed[key], raw)

    if "integration" in parser:
        for key, raw in parser["integration"].items():
            if key == "t_final":
                cfg.t_final = float(raw)
            elif key == "step":
                cfg.step = float(raw)
            else:
                raise ConfigError(f"unknown key {key!r} in [integration]")
    if cfg.step <= 0:
        raise ConfigError("step must be positive")
    return cfg
