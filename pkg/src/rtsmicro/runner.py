"""Experiment orchestration: evolution runs, Monte Carlo baselines, generalization, pareto unions, replays."""

import contextlib
import dataclasses
import functools
import statistics
from collections.abc import Callable, Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any

from .artifacts import (
    FRONT_COLUMNS,
    POPULATION_COLUMNS,
    RunManifest,
    front_rows,
    read_front,
    read_manifest,
    read_scenario,
    write_csv,
    write_errorbar_svg,
    write_front_svg,
    write_genomes,
    write_manifest,
    write_scenario,
    write_trace,
)
from .config import RunConfig
from .evaluator import EvalConfig, baseline_opponent, evaluate, evaluate_each, scalar_fitness
from .fields import FieldController, MicroParams
from .genome import Genome, decode, random_genome
from .logger import get_logger
from .nsga2 import GenerationRecord, MapFn, ObjectiveVector, evolve
from .pareto import ParetoPoint, pareto_front, union_fronts
from .rng import stream
from .scenarios import Scenario, random_scenarios, training_scenarios
from .sim import SkirmishResult, run_skirmish
from .units import Side

logger = get_logger(__name__)

PLOT_INTERVAL = 5

SUMMARY_COLUMNS = ["n", "o1_mean", "o1_std", "o2_mean", "o2_std", "scalar_mean"]


@contextlib.contextmanager
def _mapper(workers: int) -> Iterator[MapFn]:
    """Order-preserving map: builtin for one worker, a process pool otherwise."""
    if workers <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield functools.partial(pool.map, chunksize=1)


def _opponent(manifest: RunManifest) -> MicroParams:
    if manifest.opponent == "baseline":
        return baseline_opponent()
    return decode(Genome.fromstring(manifest.opponent))


def _summary(vectors: Sequence[ObjectiveVector]) -> list[Any]:
    """n, per-objective mean and population standard deviation, mean scalar fitness."""
    o1 = [v.o1 for v in vectors]
    o2 = [v.o2 for v in vectors]
    return [
        len(vectors),
        statistics.fmean(o1),
        statistics.pstdev(o1),
        statistics.fmean(o2),
        statistics.pstdev(o2),
        statistics.fmean(scalar_fitness(v) for v in vectors),
    ]


def _write_plot(run_dir: Path, manifest: RunManifest, history: Sequence[GenerationRecord]) -> None:
    series = {
        f"gen {rec.generation}": [ind.objectives.astuple() for ind in rec.front if ind.objectives is not None]
        for rec in history
        if rec.generation % PLOT_INTERVAL == 0 or rec.generation == history[-1].generation
    }
    write_front_svg(run_dir / "front_progress.svg", manifest.hash, "Front progress", series)


# ------------------------------------------------------------
# Evolution
# ------------------------------------------------------------


def run_evolution(
    config: RunConfig,
    out_dir: str | Path,
    *,
    workers: int = 1,
    plot: bool = False,
    trace: bool = False,
    opponent: Genome | None = None,
) -> RunManifest:
    """
    Evolve one population per configured seed and write every artifact.

    Args:
        config (RunConfig): experiment configuration.
        out_dir (str | Path): output directory, created if missing.
        workers (int, optional): evaluation processes. Defaults to 1.
        plot (bool, optional): write front_progress.svg per run.
        trace (bool, optional): write a replay of the best-o1 final genome on scenario 1.
        opponent (Genome, optional): genome driving the enemy side instead of the baseline.

    Returns:
        RunManifest: the manifest every artifact refers to.
    """
    logger.debug(f"run_evolution(seeds={config.seeds}, out_dir={out_dir}, workers={workers})")
    out = Path(out_dir)
    manifest = RunManifest.create(config, out, "baseline" if opponent is None else str(opponent))
    write_manifest(manifest)
    opponent_params = _opponent(manifest)

    for seed in config.seeds:
        run_dir = out / f"run{seed}"
        scenarios = training_scenarios(seed, config.scenario)
        for s in scenarios:
            write_scenario(out / "scenarios" / f"run{seed}_{s.label}.json", s)

        eval_cfg = EvalConfig(scenarios=tuple(scenarios), opponent=opponent_params, sim=config.sim)
        eval_fn: Callable[[Genome], ObjectiveVector] = functools.partial(evaluate, cfg=eval_cfg)
        hv_rows: list[list[Any]] = []

        def on_generation(rec: GenerationRecord, run_dir: Path = run_dir, hv_rows: list[list[Any]] = hv_rows) -> None:
            write_csv(run_dir / f"gen{rec.generation}_front.csv", manifest.hash, FRONT_COLUMNS, front_rows(rec))
            write_csv(
                run_dir / f"gen{rec.generation}_population.csv",
                manifest.hash,
                POPULATION_COLUMNS,
                front_rows(rec, population=True),
            )
            hv_rows.append([rec.generation, len(rec.front), rec.hypervolume])

        logger.info(f"run {seed}: evolving {config.ea.pop_size} individuals for {config.ea.generations} generations")
        with _mapper(workers) as map_fn:
            history = evolve(
                dataclasses.replace(config.ea, seed=seed),
                eval_fn,
                rng=stream(seed, "operators"),
                map_fn=map_fn,
                on_generation=on_generation,
            )

        final_front = history[-1].front
        write_csv(run_dir / "hypervolume.csv", manifest.hash, ["generation", "front_size", "hypervolume"], hv_rows)
        write_genomes(run_dir / "final_front.txt", (ind.genome for ind in final_front))
        if plot:
            _write_plot(run_dir, manifest, history)
        if trace:
            best = max(final_front, key=lambda ind: ind.objectives.o1 if ind.objectives else 0.0)
            result = replay(decode(best.genome), opponent_params, scenarios[0], config)
            write_trace(run_dir / "trace.jsonl", manifest.hash, scenarios[0].label, config.sim.dt, result.trace or [])

        logger.info(f"run {seed}: final front has {len(final_front)} individuals")

    return manifest


# ------------------------------------------------------------
# Monte Carlo baseline
# ------------------------------------------------------------


def run_monte_carlo(
    config: RunConfig,
    out_dir: str | Path,
    *,
    seed: int | None = None,
    count: int | None = None,
    n_random_scenarios: int | None = None,
    workers: int = 1,
    plot: bool = False,
) -> list[list[Any]]:
    """
    Evaluate random genomes on the training maps and on the random test maps.

    Every genome's objectives are averaged over a scenario set; the summary
    reports mean and standard deviation across genomes.

    Returns:
        list[list[Any]]: one summary row per scenario set ("training", "random").
    """
    seed = config.seeds[0] if seed is None else seed
    count = config.montecarlo_count if count is None else count
    n_random = config.random_scenarios if n_random_scenarios is None else n_random_scenarios
    logger.debug(f"run_monte_carlo(seed={seed}, count={count}, n_random={n_random}, workers={workers})")

    out = Path(out_dir)
    manifest = RunManifest.create(config, out)
    write_manifest(manifest)

    rng = stream(seed, "montecarlo")
    genomes = [random_genome(rng) for _ in range(count)]
    scenario_sets = {
        "training": training_scenarios(seed, config.scenario),
        "random": random_scenarios(seed, n_random, config.scenario),
    }

    rows: list[list[Any]] = []
    crosses: dict[str, tuple[float, float, float, float]] = {}
    with _mapper(workers) as map_fn:
        for name, scenarios in scenario_sets.items():
            eval_cfg = EvalConfig(scenarios=tuple(scenarios), opponent=baseline_opponent(), sim=config.sim)
            vectors = list(map_fn(functools.partial(evaluate, cfg=eval_cfg), genomes))
            summary = _summary(vectors)
            rows.append([name, *summary])
            crosses[name] = (summary[1], summary[2], summary[3], summary[4])
            logger.info(
                f"monte carlo '{name}': o1 {summary[1]:.3f}+-{summary[2]:.3f}, o2 {summary[3]:.3f}+-{summary[4]:.3f}"
            )

    write_csv(out / "montecarlo.csv", manifest.hash, ["scenario_set", *SUMMARY_COLUMNS], rows)
    if plot:
        write_errorbar_svg(out / "montecarlo.svg", manifest.hash, "Random genomes", crosses)
    return rows


# ------------------------------------------------------------
# Generalization
# ------------------------------------------------------------


def run_generalization(
    run_dir: str | Path,
    *,
    first: int = 0,
    last: int | None = None,
    n_random_scenarios: int | None = None,
    seed: int | None = None,
    workers: int = 1,
) -> list[list[Any]]:
    """
    Play the fronts of two generations of every run on a shared random test set.

    Writes generalization.csv into run_dir: one "genome" row per front
    member and one "aggregate" row per (run, generation), each with mean
    and standard deviation over the genome-scenario results.

    Raises:
        ArtifactError: if a run lacks one of the requested generations.
    """
    out = Path(run_dir)
    manifest = read_manifest(out)
    config = manifest.config
    last = config.ea.generations if last is None else last
    seed = config.seeds[0] if seed is None else seed
    n_random = config.random_scenarios if n_random_scenarios is None else n_random_scenarios
    logger.debug(f"run_generalization(run_dir={out}, first={first}, last={last}, n_random={n_random}, seed={seed})")

    eval_cfg = EvalConfig(
        scenarios=tuple(random_scenarios(seed, n_random, config.scenario)),
        opponent=_opponent(manifest),
        sim=config.sim,
    )

    rows: list[list[Any]] = []
    with _mapper(workers) as map_fn:
        for generation in dict.fromkeys((first, last)):
            for run in config.seeds:
                points = read_front(out, run, generation)
                genomes = [Genome.fromstring(p.genome) for p in points]
                results = list(map_fn(functools.partial(evaluate_each, cfg=eval_cfg), genomes))
                pooled: list[ObjectiveVector] = []
                for p, vectors in zip(points, results, strict=True):
                    rows.append(["genome", run, generation, p.index, *_summary(vectors)])
                    pooled.extend(vectors)
                if pooled:
                    rows.append(["aggregate", run, generation, "", *_summary(pooled)])
                logger.info(f"generalization: run {run}, generation {generation}, {len(points)} genomes")

    write_csv(
        out / "generalization.csv",
        manifest.hash,
        ["row_type", "run", "generation", "genome_index", *SUMMARY_COLUMNS],
        rows,
    )
    return rows


# ------------------------------------------------------------
# Pareto union
# ------------------------------------------------------------


def run_pareto(run_dir: str | Path, generation: int) -> tuple[list[ParetoPoint], list[ParetoPoint]]:
    """
    Union U of every run's front at a generation, and its pareto front P.

    Writes pareto_gen{generation}.csv into run_dir.

    Raises:
        ArtifactError: if a run lacks the generation.
    """
    out = Path(run_dir)
    manifest = read_manifest(out)
    runs = {seed: {generation: read_front(out, seed, generation)} for seed in manifest.seeds}

    union = union_fronts(runs, generation)
    front = pareto_front(union.points)
    logger.info(f"generation {generation}: union has {len(union)} points, pareto front {len(front)}")

    rows = [["U", p.run, p.generation, p.index, p.o1, p.o2, p.genome] for p in union.points]
    rows += [["P", p.run, p.generation, p.index, p.o1, p.o2, p.genome] for p in front.points]
    write_csv(
        out / f"pareto_gen{generation}.csv",
        manifest.hash,
        ["set", "run", "generation", "individual_index", "o1", "o2", "genome_bits"],
        rows,
    )
    return list(union.points), list(front.points)


# ------------------------------------------------------------
# Replay
# ------------------------------------------------------------


def replay(params: MicroParams, opponent: MicroParams, scenario: Scenario, config: RunConfig) -> SkirmishResult:
    """Play one scenario with tracing on."""
    friend = FieldController(params, Side.FRIEND, config.sim)
    enemy = FieldController(opponent, Side.ENEMY, config.sim)
    return run_skirmish(scenario, friend, enemy, config.sim, trace=True)


def export_replay(
    genome: Genome,
    config: RunConfig,
    trace_path: str | Path,
    *,
    scenario_index: int = 1,
    seed: int | None = None,
    opponent: Genome | None = None,
    scenario_file: str | Path | None = None,
) -> SkirmishResult:
    """
    Write the trace of one genome playing one training scenario, or a scenario file.

    Args:
        genome (Genome): controller of the friend side.
        config (RunConfig): experiment configuration.
        trace_path (str | Path): JSON Lines output file.
        scenario_index (int, optional): training scenario 1, 2 or 3.
        seed (int, optional): run seed the scenario is drawn from. Defaults to the first configured seed.
        opponent (Genome, optional): enemy genome instead of the baseline.
        scenario_file (str | Path, optional): scenario JSON written by 'evolve' or by hand. Replaces
            the training scenario.

    Raises:
        ArtifactError: if the scenario file does not parse.
    """
    if scenario_index not in (1, 2, 3):
        raise ValueError(f"scenario must be 1, 2 or 3, got {scenario_index}")
    seed = config.seeds[0] if seed is None else seed
    logger.debug(f"export_replay(scenario={scenario_index}, seed={seed}, trace_path={trace_path})")

    path = Path(trace_path)
    manifest = RunManifest.create(config, path.parent, "baseline" if opponent is None else str(opponent))
    if scenario_file is not None:
        scenario = read_scenario(Path(scenario_file))
    else:
        scenario = training_scenarios(seed, config.scenario)[scenario_index - 1]
    result = replay(decode(genome), _opponent(manifest), scenario, config)
    write_trace(path, manifest.hash, scenario.label, config.sim.dt, result.trace or [])
    return result
