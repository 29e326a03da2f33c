#!/usr/bin/env python3
"""CLI using argparse to evolve squad micro and analyse the results."""

import argparse
import dataclasses
from pathlib import Path
from typing import Optional

from .artifacts import read_genome_arg
from .config import RunConfig, load_config, profile_names
from .errors import ArtifactError, ConfigError, InvalidGenomeError, InvalidParamsError
from .logger import get_logger, set_verbosity
from .runner import export_replay, run_evolution, run_generalization, run_monte_carlo, run_pareto

logger = get_logger(__name__)


def _seed_list(text: str) -> list[int]:
    """Parse '1,2,3' into a list of seeds."""
    try:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma separated integers, got '{text}'") from None
    if not seeds or any(s < 0 for s in seeds):
        raise argparse.ArgumentTypeError(f"seeds must be non-negative integers, got '{text}'")
    return seeds


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--profile",
        type=str,
        default="desk",
        choices=profile_names(),
        help="Built-in experiment profile (default: desk)",
    )
    parser.add_argument(
        "--config",
        type=str,
        default="",
        help="JSON file whose keys override the profile",
    )


def _create_parser() -> argparse.ArgumentParser:
    """
    Create the argument parser for the CLI.

    Returns:
        argparse.ArgumentParser: Configured argument parser
    """
    parser = argparse.ArgumentParser(
        prog="rtsmicro",
        description="Evolve potential-field and influence-map micro for a small squad in a 3D skirmish simulator.",
        epilog="""
Examples:
  rtsmicro evolve --seeds 1,2,3 --out runs/desk --plot   # Three desk-profile runs
  rtsmicro evolve --profile paper --workers 8            # Full-scale experiment
  rtsmicro montecarlo --count 1000 --out runs/mc         # Random-genome baseline
  rtsmicro pareto --run-dir runs/desk --generation 19    # Union and front of generation 19
  rtsmicro generalize --run-dir runs/desk --last 19      # Fronts on 100 random maps
  rtsmicro replay-export --genome best.txt --trace t.jsonl
        """,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--verbose", action="store_true", default=False, help="Show progress messages")
    sub = parser.add_subparsers(dest="command", required=True)

    # ------------------------------------------------------------
    evolve = sub.add_parser("evolve", help="Run the genetic algorithm once per seed")
    _add_config_arguments(evolve)
    seeds = evolve.add_mutually_exclusive_group()
    seeds.add_argument("--seed", type=int, default=None, help="Single run seed")
    seeds.add_argument("--seeds", type=_seed_list, default=None, help="Comma separated run seeds")
    evolve.add_argument("--out", type=str, default="runs", help="Output directory (default: runs)")
    evolve.add_argument("--workers", type=int, default=1, help="Evaluation processes (default: 1)")
    evolve.add_argument("--plot", action="store_true", default=False, help="Write front progress SVG plots")
    evolve.add_argument("--trace", action="store_true", default=False, help="Write a replay of the best genome")
    evolve.add_argument(
        "--opponent-genome",
        type=str,
        default="",
        help="Genome (bit string or file) driving the enemy side instead of the baseline",
    )

    # ------------------------------------------------------------
    montecarlo = sub.add_parser("montecarlo", help="Evaluate random genomes as a baseline")
    _add_config_arguments(montecarlo)
    montecarlo.add_argument("--seed", type=int, default=None, help="Seed for genomes and scenarios")
    montecarlo.add_argument("--count", type=int, default=None, help="Number of random genomes")
    montecarlo.add_argument("--random-scenarios", type=int, default=None, help="Size of the random test set")
    montecarlo.add_argument("--out", type=str, default="runs", help="Output directory (default: runs)")
    montecarlo.add_argument("--workers", type=int, default=1, help="Evaluation processes (default: 1)")
    montecarlo.add_argument("--plot", action="store_true", default=False, help="Write an error-bar SVG plot")

    # ------------------------------------------------------------
    generalize = sub.add_parser("generalize", help="Evaluate two generations' fronts on random scenarios")
    generalize.add_argument("--run-dir", type=str, required=True, help="Directory written by 'evolve'")
    generalize.add_argument("--first", type=int, default=0, help="Early generation (default: 0)")
    generalize.add_argument("--last", type=int, default=None, help="Late generation (default: final)")
    generalize.add_argument("--random-scenarios", type=int, default=None, help="Size of the random test set")
    generalize.add_argument("--seed", type=int, default=None, help="Seed of the random test set")
    generalize.add_argument("--workers", type=int, default=1, help="Evaluation processes (default: 1)")

    # ------------------------------------------------------------
    pareto = sub.add_parser("pareto", help="Union of all runs' fronts at a generation, and its pareto front")
    pareto.add_argument("--run-dir", type=str, required=True, help="Directory written by 'evolve'")
    pareto.add_argument("--generation", type=int, required=True, help="Generation to combine")

    # ------------------------------------------------------------
    replay = sub.add_parser("replay-export", help="Write a per-tick trace of one genome on a training scenario")
    replay.add_argument("--genome", type=str, required=True, help="Genome bit string, or a file holding one")
    replay.add_argument("--scenario", type=int, default=1, choices=[1, 2, 3], help="Training scenario (default: 1)")
    replay.add_argument(
        "--scenario-file", type=str, default=None, help="Scenario JSON to play instead (overrides --scenario)"
    )
    _add_config_arguments(replay)
    replay.add_argument("--seed", type=int, default=None, help="Seed the scenario is drawn from")
    replay.add_argument("--opponent-genome", type=str, default="", help="Genome driving the enemy side")
    replay.add_argument("--trace", type=str, required=True, help="Output JSON Lines file")

    return parser


def app(args: Optional[list[str]] = None) -> bool:
    """
    Main entry point for the argparse-based CLI.

    This function parses command line arguments, validates them,
    and calls the internal main function for the chosen command.

    Args:
        args: Command line arguments (if None, uses sys.argv)

    Returns:
        bool: True if the command runs without issues, False otherwise
    """
    parser = _create_parser()

    try:
        parsed_args = parser.parse_args(args)
    except SystemExit as e:
        # argparse calls sys.exit() on error, we catch it to return False
        return e.code == 0

    set_verbosity(parsed_args.verbose)

    # ------------------------------------------------------------
    # Input validation
    for name in ["workers", "count", "random_scenarios", "generation", "first", "last", "seed"]:
        value = getattr(parsed_args, name, None)
        if value is None:
            continue
        lower = 1 if name in ("workers", "count", "random_scenarios") else 0
        if value < lower:
            logger.error(f"{name.replace('_', '-')} must be an integer of at least {lower}")
            return False

    try:
        return _main(parsed_args)
    except FileNotFoundError as e:
        logger.error(f"file '{e.filename}' does not exist.")
    except PermissionError as e:
        logger.error(f"no permissions to access '{e.filename}'.")
    except OSError as e:
        logger.error(f"I/O error on '{e.filename}': {e.strerror}")
    except (ConfigError, ArtifactError, InvalidGenomeError, InvalidParamsError) as e:
        logger.error(str(e))
    except ValueError as e:
        logger.error(f"invalid value: {e}")
    return False


def _load(parsed_args: argparse.Namespace) -> RunConfig:
    config_text = ""
    if parsed_args.config:
        with open(parsed_args.config, mode="r", encoding="utf-8") as fp:
            config_text = fp.read()
    config = load_config(parsed_args.profile, config_text)

    seeds: list[int] | None = getattr(parsed_args, "seeds", None)
    seed: int | None = getattr(parsed_args, "seed", None)
    if seeds is not None:
        config = dataclasses.replace(config, seeds=tuple(seeds))
    elif seed is not None:
        config = dataclasses.replace(config, seeds=(seed,))
    return config


def _main(parsed_args: argparse.Namespace) -> bool:
    """
    Internal main function to run one command.

    It receives already validated arguments.

    Args:
        parsed_args (argparse.Namespace): parsed command line.

    Returns:
        bool: True if the command runs without issues.
    """
    command = parsed_args.command
    logger.debug(f"_main(command={command})")

    if command == "evolve":
        config = _load(parsed_args)
        opponent = read_genome_arg(parsed_args.opponent_genome) if parsed_args.opponent_genome else None
        manifest = run_evolution(
            config,
            parsed_args.out,
            workers=parsed_args.workers,
            plot=parsed_args.plot,
            trace=parsed_args.trace,
            opponent=opponent,
        )
        print(f"manifest {manifest.hash}: {len(manifest.seeds)} run(s) in {manifest.out_dir}")

    elif command == "montecarlo":
        config = _load(parsed_args)
        rows = run_monte_carlo(
            config,
            parsed_args.out,
            seed=parsed_args.seed,
            count=parsed_args.count,
            n_random_scenarios=parsed_args.random_scenarios,
            workers=parsed_args.workers,
            plot=parsed_args.plot,
        )
        for name, n, o1_mean, o1_std, o2_mean, o2_std, _ in rows:
            print(f"{name:<9} n={n:<5} o1 = {o1_mean:.3f} +- {o1_std:.3f}   o2 = {o2_mean:.3f} +- {o2_std:.3f}")

    elif command == "generalize":
        rows = run_generalization(
            parsed_args.run_dir,
            first=parsed_args.first,
            last=parsed_args.last,
            n_random_scenarios=parsed_args.random_scenarios,
            seed=parsed_args.seed,
            workers=parsed_args.workers,
        )
        for row_type, run, generation, _, n, o1_mean, _, o2_mean, _, _ in rows:
            if row_type == "aggregate":
                print(f"run {run:<4} gen {generation:<4} n={n:<6} o1 = {o1_mean:.3f}   o2 = {o2_mean:.3f}")

    elif command == "pareto":
        union, front = run_pareto(parsed_args.run_dir, parsed_args.generation)
        print(f"generation {parsed_args.generation}: |U| = {len(union)}, |P| = {len(front)}")
        for p in front:
            print(f"  ({p.o1:.3f}, {p.o2:.3f})  run {p.run}, individual {p.index}")

    elif command == "replay-export":
        config = _load(parsed_args)
        opponent = read_genome_arg(parsed_args.opponent_genome) if parsed_args.opponent_genome else None
        result = export_replay(
            read_genome_arg(parsed_args.genome),
            config,
            Path(parsed_args.trace),
            scenario_index=parsed_args.scenario,
            seed=parsed_args.seed,
            opponent=opponent,
            scenario_file=parsed_args.scenario_file,
        )
        print(
            f"{result.ticks_elapsed} ticks: {result.damage_to_enemies:g} damage done, "
            f"{result.damage_to_friends:g} taken, survivors {result.survivors_friend}/{result.survivors_enemy}"
        )

    else:
        logger.error(f"unknown command '{command}'")
        return False

    return True
