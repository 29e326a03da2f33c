"""Evolve potential-field and influence-map micro for RTS skirmishes with a two-objective genetic algorithm."""

from rtsmicro.cli import app
from rtsmicro.config import EAConfig, RunConfig, ScenarioConfig, SimConfig, load_config
from rtsmicro.evaluator import EvalConfig, baseline_opponent, evaluate, scalar_fitness
from rtsmicro.fields import FieldController, MicroParams, PFTerm
from rtsmicro.genome import Genome, decode, encode, random_genome
from rtsmicro.influence import IMParams
from rtsmicro.nsga2 import ObjectiveVector, evolve
from rtsmicro.scenarios import Scenario, random_scenarios, training_scenarios
from rtsmicro.sim import World, run_skirmish

__version__ = "0.1.0"


__all__ = [
    "__version__",
    "EAConfig",
    "EvalConfig",
    "FieldController",
    "Genome",
    "IMParams",
    "MicroParams",
    "ObjectiveVector",
    "PFTerm",
    "RunConfig",
    "Scenario",
    "ScenarioConfig",
    "SimConfig",
    "World",
    "app",
    "baseline_opponent",
    "decode",
    "encode",
    "evaluate",
    "evolve",
    "load_config",
    "random_genome",
    "random_scenarios",
    "run_skirmish",
    "scalar_fitness",
    "training_scenarios",
]
