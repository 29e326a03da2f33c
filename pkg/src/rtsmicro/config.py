"""Simulation constants, scenario geometry, and run configuration loading."""

# Needed so classes can make self references to their type
from __future__ import annotations

import dataclasses
import json
import math
from importlib import resources
from typing import Any, TypeVar

from .errors import ConfigError
from .logger import get_logger
from .units import UNIT_TYPES

logger = get_logger(__name__)

T = TypeVar("T")


def dataclass_fromdict(cls: type[T], input: dict[str, Any]) -> T:
    """
    Build a flat dataclass from a dictionary, checking keys and value types.

    Missing keys take the dataclass default. Integers are accepted where a
    float is expected.

    Args:
        cls: dataclass type to build.
        input (dict): dictionary representation of the object.

    Raises:
        ConfigError: on unknown keys, wrong value types, or values the
            dataclass itself rejects.
    """
    if not isinstance(input, dict):
        raise ConfigError(f"{cls.__name__}: expected a JSON object, got '{type(input).__name__}'")

    fields = {f.name: f for f in dataclasses.fields(cls)}  # type: ignore[arg-type]
    unknown = sorted(set(input) - set(fields))
    if unknown:
        raise ConfigError(f"{cls.__name__}: unknown keys {unknown}")

    kwargs: dict[str, Any] = {}
    for k, v in input.items():
        expected = fields[k].type
        if expected == "float":
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{cls.__name__}: value for '{k}' must be a number, but is '{type(v).__name__}'")
            v = float(v)
        elif expected == "int":
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"{cls.__name__}: value for '{k}' must be an integer, but is '{type(v).__name__}'")
        elif expected == "bool":
            if not isinstance(v, bool):
                raise ConfigError(f"{cls.__name__}: value for '{k}' must be a boolean, but is '{type(v).__name__}'")
        elif expected == "str":
            if not isinstance(v, str):
                raise ConfigError(f"{cls.__name__}: value for '{k}' must be a string, but is '{type(v).__name__}'")
        kwargs[k] = v

    try:
        return cls(**kwargs)
    except ValueError as e:
        raise ConfigError(str(e)) from e


@dataclasses.dataclass(frozen=True)
class SimConfig:
    """
    Physics and controller-cadence constants for the skirmish simulator.

    Args:
        dt (float): tick length in seconds.
        max_ticks (int): tick limit for one skirmish.
        max_turn_rate (float): radians per second, all unit types.
        accel_factor (float): acceleration bound as a multiple of max speed per second.
        climb_rate (float): climb rate constant.
        climb_reference_speed (float): vertical speed cap is climb_rate times this.
        min_altitude (float): lowest z a unit may occupy.
        max_altitude (float): highest z a unit may occupy.
        im_cell_size (float): influence map cell edge, world-units.
        im_interval (int): ticks between influence map recomputes.
        health_floor (float): floor on health and cooldown fractions inside potential fields.
        distance_floor (float): floor on distances inside potential fields.
    """

    dt: float = 0.05
    max_ticks: int = 2400
    max_turn_rate: float = math.pi
    accel_factor: float = 2.0
    climb_rate: float = 2.0
    climb_reference_speed: float = 20.0
    min_altitude: float = 0.0
    max_altitude: float = 1000.0
    im_cell_size: float = 64.0
    im_interval: int = 8
    health_floor: float = 1.0 / 256.0
    distance_floor: float = 1.0

    def __post_init__(self) -> None:
        """Run after instantiation of a dataclass object."""
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.max_ticks < 0:
            raise ValueError("max_ticks must not be negative")
        if not self.min_altitude < self.max_altitude:
            raise ValueError("min_altitude must be below max_altitude")
        if self.im_interval < 1:
            raise ValueError("im_interval must be at least 1")
        for name in ("max_turn_rate", "accel_factor", "climb_rate", "climb_reference_speed", "im_cell_size"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not (0 < self.health_floor <= 1):
            raise ValueError("health_floor must be in (0, 1]")
        if not self.distance_floor > 0:
            raise ValueError("distance_floor must be positive")

    @property
    def climb_speed_cap(self) -> float:
        """Largest vertical speed any unit may reach, world-units per second."""
        return self.climb_rate * self.climb_reference_speed


@dataclasses.dataclass(frozen=True)
class ScenarioConfig:
    """
    Squad composition and placement geometry for generated scenarios.

    With swap_roles the friend (evolving) side takes the enemy composition
    and the enemy side takes the friend composition; geometry follows the
    unit groups, so every map looks the same from above.
    """

    friend_type: str = "fvulture"
    enemy_type: str = "fzealot"
    friend_count: int = 3
    enemy_count: int = 30
    clump_radius: float = 400.0
    cloud_radius: float = 400.0
    cloud_thickness: float = 10.0
    separation: float = 1200.0
    center_altitude: float = 500.0
    random_radius: float = 500.0
    swap_roles: bool = False

    def __post_init__(self) -> None:
        """Run after instantiation of a dataclass object."""
        for name in (self.friend_type, self.enemy_type):
            if name not in UNIT_TYPES:
                raise ValueError(f"unknown unit type '{name}', expected one of {sorted(UNIT_TYPES)}")
        if self.friend_count < 1:
            raise ValueError("friend_count must be at least 1")
        if self.enemy_count < 0:
            raise ValueError("enemy_count must not be negative")
        if not self.cloud_radius > self.cloud_thickness:
            raise ValueError("cloud_radius must be larger than cloud_thickness")
        for name in ("clump_radius", "random_radius", "cloud_thickness"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclasses.dataclass(frozen=True)
class EAConfig:
    """
    Genetic algorithm settings.

    Args:
        pop_size (int): population size; even and at least 4.
        generations (int): generations after the initial population.
        p_crossover (float): probability a parent pair is recombined.
        p_mutation (float): per-bit flip probability.
        seed (int): seed of the operator stream when evolve gets no generator.
    """

    pop_size: int = 50
    generations: int = 75
    p_crossover: float = 0.9
    p_mutation: float = 0.05
    seed: int = 1

    def __post_init__(self) -> None:
        """Run after instantiation of a dataclass object."""
        if self.pop_size < 4 or self.pop_size % 2:
            raise ValueError(f"pop_size must be even and at least 4, got {self.pop_size}")
        if self.generations < 0:
            raise ValueError(f"generations must not be negative, got {self.generations}")
        for name in ("p_crossover", "p_mutation"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must be a probability in [0, 1], got {value}")
        if self.seed < 0:
            raise ValueError(f"seed must not be negative, got {self.seed}")


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Everything one experiment needs: EA, simulator, scenarios, seeds and sample sizes."""

    ea: EAConfig = dataclasses.field(default_factory=EAConfig)
    sim: SimConfig = dataclasses.field(default_factory=SimConfig)
    scenario: ScenarioConfig = dataclasses.field(default_factory=ScenarioConfig)
    seeds: tuple[int, ...] = (1,)
    montecarlo_count: int = 3750
    random_scenarios: int = 100

    def __post_init__(self) -> None:
        """Run after instantiation of a dataclass object."""
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if any(s < 0 for s in self.seeds):
            raise ValueError(f"seeds must not be negative, got {list(self.seeds)}")
        if self.montecarlo_count < 1:
            raise ValueError("montecarlo_count must be at least 1")
        if self.random_scenarios < 1:
            raise ValueError("random_scenarios must be at least 1")

    @classmethod
    def fromdict(cls, input: dict[str, Any]) -> RunConfig:
        """
        Create a RunConfig from a dictionary (the JSON config file layout).

        Raises:
            ConfigError: when the dictionary is not valid.
        """
        if not isinstance(input, dict):
            raise ConfigError(f"run config must be a JSON object, got '{type(input).__name__}'")
        unknown = sorted(set(input) - {"ea", "sim", "scenario", "seeds", "montecarlo_count", "random_scenarios"})
        if unknown:
            raise ConfigError(f"run config: unknown keys {unknown}")

        seeds = input.get("seeds", [1])
        if not isinstance(seeds, list) or not all(isinstance(s, int) and not isinstance(s, bool) for s in seeds):
            raise ConfigError("run config: 'seeds' must be a list of integers")

        for k in ["montecarlo_count", "random_scenarios"]:
            if k in input and (isinstance(input[k], bool) or not isinstance(input[k], int)):
                raise ConfigError(f"run config: value for '{k}' must be an integer")

        try:
            ea = dataclass_fromdict(EAConfig, input.get("ea", {}))
            return RunConfig(
                ea=ea,
                sim=dataclass_fromdict(SimConfig, input.get("sim", {})),
                scenario=dataclass_fromdict(ScenarioConfig, input.get("scenario", {})),
                seeds=tuple(seeds),
                montecarlo_count=input.get("montecarlo_count", 3750),
                random_scenarios=input.get("random_scenarios", 100),
            )
        except ValueError as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(str(e)) from e

    def asdict(self) -> dict[str, Any]:
        """
        Create a dictionary representation of the configuration.

        The result feeds back into fromdict unchanged and is what the run
        manifest hashes.

        Returns:
            dict[str, Any]: nested dictionary with the dataclass fields.
        """
        return {
            "ea": dataclasses.asdict(self.ea),
            "sim": dataclasses.asdict(self.sim),
            "scenario": dataclasses.asdict(self.scenario),
            "seeds": list(self.seeds),
            "montecarlo_count": self.montecarlo_count,
            "random_scenarios": self.random_scenarios,
        }


def _merge(base: dict[str, Any], extra: dict[str, Any]) -> dict[str, Any]:
    """Recursively merge two dictionaries; values from 'extra' win."""
    merged = dict(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(merged.get(k), dict):
            merged[k] = _merge(merged[k], v)
        else:
            merged[k] = v
    return merged


def profile_names() -> list[str]:
    """Names of the built-in experiment profiles."""
    return sorted(_profiles())


def _profiles() -> dict[str, Any]:
    text = resources.files("rtsmicro").joinpath("data/profiles.json").read_text(encoding="utf-8")
    profiles = json.loads(text)
    assert isinstance(profiles, dict)
    return profiles


def load_config(profile: str = "desk", config_text: str = "") -> RunConfig:
    """
    Build a run configuration from a named profile and an optional JSON override.

    Args:
        profile (str): built-in profile name ("paper" or "desk").
        config_text (str, optional): JSON text of a config file. Its keys
            override the profile's. Defaults to empty.

    Raises:
        ConfigError: on unknown profile names or malformed JSON.

    Returns:
        RunConfig: the merged configuration.
    """
    logger.debug(f"load_config(profile={profile}, config_text={len(config_text)} chars)")

    profiles = _profiles()
    if profile not in profiles:
        raise ConfigError(f"unknown profile '{profile}', expected one of {sorted(profiles)}")
    merged: dict[str, Any] = profiles[profile]

    if config_text:
        try:
            override = json.loads(config_text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file is not valid JSON: {e}") from e
        if not isinstance(override, dict):
            raise ConfigError("config file must contain a JSON object")
        merged = _merge(merged, override)

    return RunConfig.fromdict(merged)
