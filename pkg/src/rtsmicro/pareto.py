"""Pareto-set algebra over run artifacts, and the hypervolume progress measure."""

# Needed so classes can make self references to their type
from __future__ import annotations

import dataclasses
from collections.abc import Iterable, Mapping, Sequence

import numpy as np
import numpy.typing as npt
from pymoo.indicators.hv import HV

from .errors import ArtifactError


@dataclasses.dataclass(frozen=True)
class ParetoPoint:
    """
    One objective vector and where it came from.

    Args:
        o1 (float): damage-done fraction.
        o2 (float): one minus damage-taken fraction.
        genome (str): 226-character bit string.
        run (int): run seed.
        generation (int): generation index.
        index (int): position of the individual in its generation's listing.
    """

    o1: float
    o2: float
    genome: str = ""
    run: int = 0
    generation: int = 0
    index: int = 0


@dataclasses.dataclass(frozen=True)
class ParetoSet:
    """An ordered collection of points; a front holds only mutually non-dominated ones."""

    points: tuple[ParetoPoint, ...] = ()

    def __len__(self) -> int:
        return len(self.points)

    def objectives(self) -> list[tuple[float, float]]:
        return [(p.o1, p.o2) for p in self.points]


def _objective_array(points: Sequence[ParetoPoint]) -> npt.NDArray[np.float64]:
    return np.array([(p.o1, p.o2) for p in points], dtype=np.float64).reshape(-1, 2)


def pareto_front(points: Iterable[ParetoPoint]) -> ParetoSet:
    """
    Maximal non-dominated subset, both objectives maximized.

    Points with identical objectives collapse to the first one seen.
    Input order is preserved.
    """
    unique: dict[tuple[float, float], ParetoPoint] = {}
    for p in points:
        unique.setdefault((p.o1, p.o2), p)
    candidates = list(unique.values())
    if not candidates:
        return ParetoSet()

    f = _objective_array(candidates)
    ge = (f[:, None, :] >= f[None, :, :]).all(axis=2)
    gt = (f[:, None, :] > f[None, :, :]).any(axis=2)
    dominated = (ge & gt).any(axis=0)
    return ParetoSet(points=tuple(p for p, d in zip(candidates, dominated, strict=True) if not d))


def union_fronts(runs: Mapping[int, Mapping[int, Sequence[ParetoPoint]]], generation: int) -> ParetoSet:
    """
    Concatenate every run's front at one generation, without filtering.

    Args:
        runs: run seed -> generation -> that generation's front points.
        generation (int): generation to collect.

    Raises:
        ArtifactError: if a run has no front for the generation.
    """
    collected: list[ParetoPoint] = []
    for run in sorted(runs):
        fronts = runs[run]
        if generation not in fronts:
            raise ArtifactError(f"run {run} has no front for generation {generation}")
        collected.extend(fronts[generation])
    return ParetoSet(points=tuple(collected))


def hypervolume(objectives: Iterable[tuple[float, float]]) -> float:
    """
    Area dominated by a set of maximized objective vectors, reference point (0, 0).

    Computed with pymoo on the negated (minimization) vectors. Points on an
    axis add no area and are dropped first.
    """
    f = np.array([o for o in objectives if o[0] > 0 and o[1] > 0], dtype=np.float64).reshape(-1, 2)
    if len(f) == 0:
        return 0.0
    indicator = HV(ref_point=np.zeros(2))
    return float(indicator(-f))
