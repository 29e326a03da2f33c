"""Elitist two-objective genetic algorithm over 226-bit genomes."""

# Needed so classes can make self references to their type
from __future__ import annotations

import dataclasses
import math
from collections.abc import Callable, Iterable, Sequence

import numpy as np

from .config import EAConfig
from .genome import Genome, random_genome
from .logger import get_logger
from .pareto import hypervolume
from .rng import stream

logger = get_logger(__name__)


@dataclasses.dataclass(frozen=True)
class ObjectiveVector:
    """
    Two maximized objectives.

    Args:
        o1 (float): fraction of enemy hitpoints destroyed, [0, 1].
        o2 (float): one minus the fraction of friend hitpoints lost, [0, 1].
    """

    o1: float
    o2: float

    def __post_init__(self) -> None:
        """Run after instantiation of a dataclass object."""
        for name in ("o1", "o2"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"objective {name} must be in [0, 1], got {value}")

    def astuple(self) -> tuple[float, float]:
        return (self.o1, self.o2)


EvalFn = Callable[[Genome], ObjectiveVector]
MapFn = Callable[[EvalFn, list[Genome]], Iterable[ObjectiveVector]]


def dominates(a: ObjectiveVector, b: ObjectiveVector) -> bool:
    """True if a is at least as good as b in both objectives and strictly better in one."""
    return a.o1 >= b.o1 and a.o2 >= b.o2 and (a.o1 > b.o1 or a.o2 > b.o2)


@dataclasses.dataclass(eq=False)
class Individual:
    """A genome with its fitness and its place in the current population ordering."""

    genome: Genome
    objectives: ObjectiveVector | None = None
    rank: int = -1
    crowding: float = 0.0

    def __repr__(self) -> str:
        return f"Individual(objectives={self.objectives}, rank={self.rank}, crowding={self.crowding:g})"


@dataclasses.dataclass
class GenerationRecord:
    """The full, ranked population of one generation (index 0 is the initial population)."""

    generation: int
    population: list[Individual]
    hypervolume: float = 0.0

    @property
    def front(self) -> list[Individual]:
        """Non-dominated individuals of the generation."""
        return [ind for ind in self.population if ind.rank == 0]


def fast_nondominated_sort(pop: Sequence[Individual]) -> list[list[Individual]]:
    """
    Partition a population into non-domination fronts and set every rank.

    Raises:
        ValueError: if an individual has not been evaluated.
    """
    objs: list[ObjectiveVector] = []
    for ind in pop:
        if ind.objectives is None:
            raise ValueError("cannot sort an unevaluated individual")
        objs.append(ind.objectives)

    n = len(pop)
    dominated_by: list[list[int]] = [[] for _ in range(n)]
    counts = [0] * n
    current: list[int] = []
    for p in range(n):
        for q in range(n):
            if dominates(objs[p], objs[q]):
                dominated_by[p].append(q)
            elif dominates(objs[q], objs[p]):
                counts[p] += 1
        if counts[p] == 0:
            current.append(p)

    fronts: list[list[Individual]] = []
    rank = 0
    while current:
        following: list[int] = []
        for p in current:
            pop[p].rank = rank
            for q in dominated_by[p]:
                counts[q] -= 1
                if counts[q] == 0:
                    following.append(q)
        fronts.append([pop[p] for p in current])
        current = sorted(following)
        rank += 1

    return fronts


def crowding_distance(front: Sequence[Individual]) -> list[float]:
    """
    Crowding distance of every member of one front; also stored on the individuals.

    Boundary members get +inf. Interior members sum, per objective, the
    gap between their neighbours divided by the objective's range on the
    front. A zero range adds nothing.
    """
    n = len(front)
    assert n > 0, "front must not be empty"
    distance = [0.0] * n

    objs = [ind.objectives for ind in front]
    if any(o is None for o in objs):
        raise ValueError("cannot crowd an unevaluated individual")

    for m in range(2):
        values = [o.astuple()[m] for o in objs if o is not None]
        order = sorted(range(n), key=values.__getitem__)
        distance[order[0]] = distance[order[-1]] = math.inf
        span = values[order[-1]] - values[order[0]]
        if span == 0:
            continue
        for k in range(1, n - 1):
            distance[order[k]] += (values[order[k + 1]] - values[order[k - 1]]) / span

    for ind, d in zip(front, distance, strict=True):
        ind.crowding = d
    return distance


def crowded_tournament(a: Individual, b: Individual, rng: np.random.Generator) -> Individual:
    """Lower rank wins, then larger crowding distance; a full tie is a coin flip."""
    if a.rank != b.rank:
        return a if a.rank < b.rank else b
    if a.crowding != b.crowding:
        return a if a.crowding > b.crowding else b
    return a if rng.random() < 0.5 else b


def two_point_crossover(
    a: Genome, b: Genome, rng: np.random.Generator, p_crossover: float = 0.9
) -> tuple[Genome, Genome]:
    """
    Swap the segment [i, j) between two parents with probability p_crossover.

    Cut points satisfy 0 <= i < j <= length; otherwise the children are
    copies of the parents.
    """
    if len(a) != len(b):
        raise ValueError("parents must have equal lengths")
    if rng.random() >= p_crossover:
        return a, b

    i, j = sorted(int(c) for c in rng.choice(len(a) + 1, size=2, replace=False))
    return _swap_segment(a, b, i, j)


def _swap_segment(a: Genome, b: Genome, i: int, j: int) -> tuple[Genome, Genome]:
    child1, child2 = a.bits.copy(), b.bits.copy()
    child1[i:j], child2[i:j] = b.bits[i:j], a.bits[i:j]
    return Genome(child1), Genome(child2)


def bit_flip_mutation(g: Genome, rng: np.random.Generator, p_mutation: float = 0.05) -> Genome:
    """Flip every bit independently with probability p_mutation."""
    flips = rng.random(len(g)) < p_mutation
    if not flips.any():
        return g
    return Genome(g.bits ^ flips.astype(np.uint8))


def _rank_and_crowd(pop: Sequence[Individual]) -> list[list[Individual]]:
    fronts = fast_nondominated_sort(pop)
    for front in fronts:
        crowding_distance(front)
    return fronts


def _max_hypervolume_subset(points: Sequence[tuple[float, float]], k: int) -> list[int]:
    """
    Indices of k mutually non-dominated points whose hypervolume, reference (0, 0), is largest.

    points must be distinct and mutually non-dominated, and 0 < k <= len(points).
    Sorted by o1 ascending the points descend in o2, so a subset i_1 < ... < i_k
    dominates sum_j (x[i_j] - x[i_(j-1)]) * y[i_j] with x[i_0] = 0. The table
    best[j, i] holds the largest such sum over j points ending at point i.
    """
    n = len(points)
    assert 0 < k <= n, "subset size out of range"
    order = sorted(range(n), key=lambda i: points[i])
    x = np.array([points[i][0] for i in order], dtype=np.float64)
    y = np.array([points[i][1] for i in order], dtype=np.float64)

    earlier = np.tril(np.ones((n, n), dtype=bool), k=-1)
    best = np.full((k, n), -np.inf)
    parent = np.zeros((k, n), dtype=np.intp)
    best[0] = x * y
    for j in range(1, k):
        # gain[i, l]: best[j - 1, l] extended by point i after point l
        gain = np.where(earlier, best[j - 1][None, :] + (x[:, None] - x[None, :]) * y[:, None], -np.inf)
        parent[j] = np.argmax(gain, axis=1)
        best[j] = gain[np.arange(n), parent[j]]

    chosen = [int(np.argmax(best[k - 1]))]
    for j in range(k - 1, 0, -1):
        chosen.append(int(parent[j, chosen[-1]]))
    return sorted(order[i] for i in chosen)


def _truncate_first_front(front: Sequence[Individual], size: int) -> list[Individual]:
    """
    size members of an overflowing non-dominated front, chosen to keep its hypervolume.

    Distinct objective vectors are kept by exact hypervolume subset selection;
    spare slots go to duplicates, most crowded last.
    """
    distinct: dict[tuple[float, float], Individual] = {}
    for ind in front:
        assert ind.objectives is not None
        distinct.setdefault(ind.objectives.astuple(), ind)
    candidates = list(distinct.values())
    if len(candidates) > size:
        keep = _max_hypervolume_subset(list(distinct), size)
        return [candidates[i] for i in keep]
    kept = {id(ind) for ind in candidates}
    spare = sorted((ind for ind in front if id(ind) not in kept), key=lambda ind: -ind.crowding)
    return candidates + spare[: size - len(candidates)]


def _select_survivors(pool: Sequence[Individual], size: int) -> list[Individual]:
    """
    (mu + lambda) truncation: whole fronts while they fit, then part of the next one.

    An overflowing first front is cut by hypervolume, so the front's
    hypervolume never decreases; later fronts are cut by crowding distance.
    """
    survivors: list[Individual] = []
    for front in _rank_and_crowd(pool):
        if len(survivors) + len(front) <= size:
            survivors.extend(front)
            continue
        if not survivors:
            survivors.extend(_truncate_first_front(front, size))
            break
        ranked = sorted(front, key=lambda ind: -ind.crowding)
        survivors.extend(ranked[: size - len(survivors)])
        break
    # ranks are unchanged; crowding now reflects the survivors only
    _rank_and_crowd(survivors)
    return survivors


def _evaluate(
    pop: list[Individual], eval_fn: EvalFn, map_fn: MapFn, cache: dict[Genome, ObjectiveVector]
) -> None:
    pending = list(dict.fromkeys(ind.genome for ind in pop if ind.genome not in cache))
    if pending:
        for genome, objectives in zip(pending, map_fn(eval_fn, pending), strict=True):
            cache[genome] = objectives
    for ind in pop:
        ind.objectives = cache[ind.genome]


def _offspring(pop: list[Individual], config: EAConfig, rng: np.random.Generator) -> list[Individual]:
    children: list[Individual] = []
    n = len(pop)
    while len(children) < n:
        a, b = (pop[int(k)] for k in rng.integers(n, size=2))
        mother = crowded_tournament(a, b, rng)
        a, b = (pop[int(k)] for k in rng.integers(n, size=2))
        father = crowded_tournament(a, b, rng)
        for child in two_point_crossover(mother.genome, father.genome, rng, config.p_crossover):
            children.append(Individual(genome=bit_flip_mutation(child, rng, config.p_mutation)))
    return children


def evolve(
    config: EAConfig,
    eval_fn: EvalFn,
    *,
    rng: np.random.Generator | None = None,
    map_fn: MapFn | None = None,
    on_generation: Callable[[GenerationRecord], None] | None = None,
) -> list[GenerationRecord]:
    """
    Run NSGA-II.

    Args:
        config (EAConfig): population size, generation count and operator rates.
        eval_fn: maps a genome to its objectives; must be deterministic.
        rng (np.random.Generator, optional): operator stream. Defaults to
            the "operators" stream of config.seed.
        map_fn (optional): map-like callable used to evaluate a batch of
            genomes, e.g. a process pool's map. Must preserve order.
        on_generation (optional): called with each record as soon as it exists.

    Returns:
        list[GenerationRecord]: generations 0..config.generations.
    """
    logger.debug(f"evolve(config={config})")
    rng = rng if rng is not None else stream(config.seed, "operators")
    mapper: MapFn = map_fn if map_fn is not None else map
    cache: dict[Genome, ObjectiveVector] = {}
    history: list[GenerationRecord] = []

    def record(generation: int, pop: list[Individual]) -> None:
        snapshot = [dataclasses.replace(ind) for ind in pop]
        front = [ind for ind in snapshot if ind.rank == 0]
        hv = hypervolume([ind.objectives.astuple() for ind in front if ind.objectives is not None])
        rec = GenerationRecord(generation=generation, population=snapshot, hypervolume=hv)
        history.append(rec)
        logger.info(f"generation {generation}: front size {len(front)}, hypervolume {hv:.6f}")
        if on_generation is not None:
            on_generation(rec)

    # ------------------------------------------------------------
    # Initial population
    # ------------------------------------------------------------
    pop = [Individual(genome=random_genome(rng)) for _ in range(config.pop_size)]
    _evaluate(pop, eval_fn, mapper, cache)
    _rank_and_crowd(pop)
    record(0, pop)

    # ------------------------------------------------------------
    # Generational loop
    # ------------------------------------------------------------
    for generation in range(1, config.generations + 1):
        children = _offspring(pop, config, rng)
        _evaluate(children, eval_fn, mapper, cache)
        pop = _select_survivors(pop + children, config.pop_size)
        record(generation, pop)

    return history

