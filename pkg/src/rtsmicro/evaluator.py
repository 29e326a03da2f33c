"""Two-objective fitness of a genome over a fixed set of scenarios."""

# Needed so classes can make self references to their type
from __future__ import annotations

import dataclasses
import functools
import json
import math
from importlib import resources
from typing import Any

from .config import SimConfig, dataclass_fromdict
from .errors import ConfigError
from .fields import FieldController, MicroParams
from .genome import Genome, decode
from .logger import get_logger
from .nsga2 import ObjectiveVector
from .scenarios import Scenario
from .sim import SkirmishResult, run_skirmish
from .units import Side

logger = get_logger(__name__)


@dataclasses.dataclass(frozen=True)
class EvalConfig:
    """
    What a genome is evaluated against.

    Args:
        scenarios (tuple[Scenario, ...]): maps played, results averaged.
        opponent (MicroParams): controller of the enemy side.
        sim (SimConfig): physics constants, including max_ticks and dt.
    """

    scenarios: tuple[Scenario, ...]
    opponent: MicroParams
    sim: SimConfig = dataclasses.field(default_factory=SimConfig)

    def __post_init__(self) -> None:
        """Run after instantiation of a dataclass object."""
        if not self.scenarios:
            raise ValueError("at least one scenario is required")

    @property
    def max_ticks(self) -> int:
        return self.sim.max_ticks

    @property
    def dt(self) -> float:
        return self.sim.dt

    @classmethod
    def fromdict(cls, input: dict[str, Any]) -> EvalConfig:
        """
        Create an EvalConfig from a dictionary.

        Raises:
            ConfigError: when the dictionary is not valid.
        """
        for k in ["scenarios", "opponent"]:
            if k not in input:
                raise ConfigError(f"input dictionary is missing key {k}")
        if not isinstance(input["scenarios"], list):
            raise ConfigError("value associated with key 'scenarios' must be a list")
        try:
            return cls(
                scenarios=tuple(Scenario.fromdict(s) for s in input["scenarios"]),
                opponent=MicroParams.fromdict(input["opponent"]),
                sim=dataclass_fromdict(SimConfig, input.get("sim", {})),
            )
        except ValueError as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(str(e)) from e

    def asdict(self) -> dict[str, Any]:
        return {
            "scenarios": [s.asdict() for s in self.scenarios],
            "opponent": self.opponent.asdict(),
            "sim": dataclasses.asdict(self.sim),
        }


def objectives(result: SkirmishResult, scenario: Scenario) -> ObjectiveVector:
    """
    Normalized damage done and one minus normalized damage taken.

    Both are fractions of the side's starting hitpoints, clamped to [0, 1].
    A side with no starting hitpoints counts as untouched.
    """
    enemy_hp = scenario.starting_hitpoints(Side.ENEMY)
    friend_hp = scenario.starting_hitpoints(Side.FRIEND)
    if enemy_hp == 0:
        logger.warning(f"scenario '{scenario.label}' has no enemy units")
    done = result.damage_to_enemies / enemy_hp if enemy_hp > 0 else 0.0
    taken = result.damage_to_friends / friend_hp if friend_hp > 0 else 0.0
    return ObjectiveVector(o1=min(1.0, max(0.0, done)), o2=min(1.0, max(0.0, 1.0 - taken)))


def scenario_objectives(params: MicroParams, cfg: EvalConfig) -> list[ObjectiveVector]:
    """Objectives of a controller on every scenario of cfg, in order."""
    vectors = []
    for scenario in cfg.scenarios:
        friend = FieldController(params, Side.FRIEND, cfg.sim)
        enemy = FieldController(cfg.opponent, Side.ENEMY, cfg.sim)
        result = run_skirmish(scenario, friend, enemy, cfg.sim)
        vectors.append(objectives(result, scenario))
    return vectors


def evaluate_params(params: MicroParams, cfg: EvalConfig) -> ObjectiveVector:
    """Average objectives of a controller over cfg.scenarios against cfg.opponent."""
    vectors = scenario_objectives(params, cfg)
    n = len(vectors)
    # fsum: the mean is independent of scenario order
    return ObjectiveVector(
        o1=min(1.0, math.fsum(v.o1 for v in vectors) / n),
        o2=min(1.0, math.fsum(v.o2 for v in vectors) / n),
    )


def evaluate(genome: Genome, cfg: EvalConfig) -> ObjectiveVector:
    """
    Decode a genome and average its objectives over the scenarios.

    Raises:
        InvalidGenomeError: if the genome does not decode.
    """
    return evaluate_params(decode(genome), cfg)


def evaluate_each(genome: Genome, cfg: EvalConfig) -> list[ObjectiveVector]:
    """Per-scenario objectives of a genome, in scenario order."""
    return scenario_objectives(decode(genome), cfg)


@functools.cache
def baseline_opponent() -> MicroParams:
    """The hand-tuned opponent: pure attraction toward enemy units."""
    text = resources.files("rtsmicro").joinpath("data/baseline_opponent.json").read_text(encoding="utf-8")
    return MicroParams.fromdict(json.loads(text))


def scalar_fitness(vector: ObjectiveVector) -> float:
    """Damage done minus damage taken, both normalized: o1 + o2 - 1. Reporting only."""
    return vector.o1 + vector.o2 - 1.0
