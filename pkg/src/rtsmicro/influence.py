"""3D influence map used to pick the squad's attack-target location."""

# Needed so classes can make self references to their type
from __future__ import annotations

import dataclasses
import math
from collections.abc import Iterable, Iterator, Sequence

import numpy as np
import numpy.typing as npt

from .errors import InvalidParamsError
from .units import UnitState, Vector


@dataclasses.dataclass(frozen=True)
class IMParams:
    """
    Influence map function parameters.

    Args:
        r (int): range of a unit's influence, in cells, [0, 8].
        i_f (float): influence lost per cell of distance, as a fraction of I_s, [0, 1].
        w1 (float): health weight, [0, 1].
        w2 (float): cooldown weight, [0, 1].
        w3 (float): constant bias, [0, 8].
    """

    r: int
    i_f: float
    w1: float
    w2: float
    w3: float

    def __post_init__(self) -> None:
        """Run after instantiation of a dataclass object."""
        if isinstance(self.r, bool) or not isinstance(self.r, int) or not (0 <= self.r <= 8):
            raise InvalidParamsError(f"r must be an integer in [0, 8], got {self.r!r}")
        for name, upper in (("i_f", 1.0), ("w1", 1.0), ("w2", 1.0), ("w3", 8.0)):
            value = getattr(self, name)
            if not (0.0 <= value <= upper):
                raise InvalidParamsError(f"{name} must be in [0, {upper:g}], got {value!r}")


@dataclasses.dataclass(frozen=True)
class GridSpec:
    """Geometry of an influence grid: cell counts, cell edge, and world position of cell (0, 0, 0)'s corner."""

    dims: tuple[int, int, int]
    cell_size: float
    origin: tuple[float, float, float]

    def __post_init__(self) -> None:
        """Run after instantiation of a dataclass object."""
        if len(self.dims) != 3 or any(n < 1 for n in self.dims):
            raise ValueError(f"grid dims must be three positive counts, got {self.dims}")
        if not self.cell_size > 0:
            raise ValueError(f"cell_size must be positive, got {self.cell_size}")

    def cell_of(self, position: Vector) -> tuple[int, int, int]:
        """Index of the cell containing 'position'. It may lie outside the grid."""
        ix, iy, iz = (math.floor((position[k] - self.origin[k]) / self.cell_size) for k in range(3))
        return ix, iy, iz

    def cell_center(self, index: tuple[int, int, int]) -> Vector:
        """World position of the center of a cell."""
        return np.array([self.origin[k] + (index[k] + 0.5) * self.cell_size for k in range(3)], dtype=np.float64)


@dataclasses.dataclass
class IMGrid:
    """
    An influence grid and its geometry.

    values covers the box of cells starting at 'offset' (spec.dims when the
    whole grid is stored); every cell outside that box holds 0.
    """

    spec: GridSpec
    values: npt.NDArray[np.float64]
    offset: tuple[int, int, int] = (0, 0, 0)

    def dense(self) -> npt.NDArray[np.float64]:
        """Values of every cell of the grid."""
        if self.values.shape == self.spec.dims:
            return self.values
        full = np.zeros(self.spec.dims, dtype=np.float64)
        lo = self.offset
        hi = [lo[k] + self.values.shape[k] for k in range(3)]
        full[lo[0] : hi[0], lo[1] : hi[1], lo[2] : hi[2]] = self.values
        return full


def starting_influence(unit: UnitState, p: IMParams) -> float:
    """
    Influence a unit exerts on the cell it occupies.

    I_s = w1 * R_h + w2 * R_c + w3, with R_h the health fraction and R_c
    the fraction of the weapon cooldown still to run.
    """
    return p.w1 * unit.health_fraction + p.w2 * unit.cooldown_fraction + p.w3


def grid_spec_for(positions: npt.NDArray[np.float64], r: int, cell_size: float) -> GridSpec:
    """
    Grid covering every position, padded by r + 1 cells on each side.

    Cell boundaries are snapped to multiples of cell_size so the grid only
    changes when units cross a cell boundary of the bounding box.

    Args:
        positions: (n, 3) world positions; may be empty.
        r (int): influence range in cells.
        cell_size (float): cell edge in world-units.
    """
    if len(positions) == 0:
        return GridSpec(dims=(1, 1, 1), cell_size=cell_size, origin=(0.0, 0.0, 0.0))

    pad = r + 1
    lo = np.floor(positions.min(axis=0) / cell_size).astype(np.int64) - pad
    hi = np.floor(positions.max(axis=0) / cell_size).astype(np.int64) + pad
    dims = hi - lo + 1
    return GridSpec(
        dims=(int(dims[0]), int(dims[1]), int(dims[2])),
        cell_size=cell_size,
        origin=(float(lo[0] * cell_size), float(lo[1] * cell_size), float(lo[2] * cell_size)),
    )


def compute_im(enemy_units: Iterable[UnitState], p: IMParams, spec: GridSpec, *, crop: bool = False) -> IMGrid:
    """
    Sum every unit's influence over the grid.

    A cell at Chebyshev cell distance d <= r from a unit's cell receives
    I_s - d * I_d from it, with I_d = I_s * i_f. Negative contributions are
    kept. Dead units contribute nothing.

    Args:
        crop (bool, optional): store only the box of cells the units reach.
            The grid's values are the same either way.
    """
    dims = spec.dims
    r = p.r
    stamps = [(starting_influence(u, p), spec.cell_of(u.position)) for u in enemy_units if u.alive]

    if crop:
        if not stamps:
            return IMGrid(spec=spec, values=np.zeros((0, 0, 0)), offset=(0, 0, 0))
        cells = np.array([center for _, center in stamps], dtype=np.int64)
        box_lo = [max(int(cells[:, k].min()) - r, 0) for k in range(3)]
        box_hi = [max(min(int(cells[:, k].max()) + r + 1, dims[k]), box_lo[k]) for k in range(3)]
    else:
        box_lo, box_hi = [0, 0, 0], list(dims)

    values = np.zeros([box_hi[k] - box_lo[k] for k in range(3)], dtype=np.float64)
    for i_s, center in stamps:
        i_d = i_s * p.i_f
        lo = [max(center[k] - r, box_lo[k]) for k in range(3)]
        hi = [min(center[k] + r + 1, box_hi[k]) for k in range(3)]
        if any(lo[k] >= hi[k] for k in range(3)):
            continue

        dx = np.abs(np.arange(lo[0], hi[0]) - center[0])[:, None, None]
        dy = np.abs(np.arange(lo[1], hi[1]) - center[1])[None, :, None]
        dz = np.abs(np.arange(lo[2], hi[2]) - center[2])[None, None, :]
        d = np.maximum(np.maximum(dx, dy), dz)
        a, b, c = (lo[k] - box_lo[k] for k in range(3))
        values[a : a + d.shape[0], b : b + d.shape[1], c : c + d.shape[2]] += i_s - d * i_d

    return IMGrid(spec=spec, values=values, offset=(box_lo[0], box_lo[1], box_lo[2]))


Box = list[tuple[int, int]]


def _outside_boxes(lo: Sequence[int], hi: Sequence[int], dims: Sequence[int]) -> Iterator[Box]:
    """Disjoint boxes covering every cell of the grid outside [lo, hi)."""
    for k in range(3):
        for a, b in ((0, lo[k]), (hi[k], dims[k])):
            box = [(lo[j], hi[j]) if j < k else (0, dims[j]) for j in range(3)]
            box[k] = (a, b)
            if all(x < y for x, y in box):
                yield box


def select_target_cell(grid: IMGrid, squad_centroid: Vector) -> Vector:
    """
    World-space center of the minimum-valued cell.

    Ties go to the cell nearest the squad centroid, then to the lowest
    linear (C order) cell index. Squared distances to cell centers are
    separable per axis, so cells outside the stored box are searched
    per axis instead of one by one.
    """
    spec = grid.spec
    centroid = np.asarray(squad_centroid, dtype=np.float64)
    axes = [
        (spec.origin[k] + (np.arange(spec.dims[k]) + 0.5) * spec.cell_size - centroid[k]) ** 2 for k in range(3)
    ]

    stored = grid.values
    lo = grid.offset
    hi = [lo[k] + stored.shape[k] for k in range(3)]
    whole = stored.shape == spec.dims
    lowest = float(stored.min()) if stored.size else math.inf
    if not whole:
        lowest = min(lowest, 0.0)

    candidates: list[tuple[int, int, int]] = []
    if stored.size:
        d2 = (
            axes[0][lo[0] : hi[0], None, None]
            + axes[1][None, lo[1] : hi[1], None]
            + axes[2][None, None, lo[2] : hi[2]]
        )
        masked = np.where(stored == lowest, d2, np.inf)
        k = int(np.argmin(masked))
        if np.isfinite(masked.flat[k]):
            i, j, m = np.unravel_index(k, stored.shape)
            candidates.append((lo[0] + int(i), lo[1] + int(j), lo[2] + int(m)))
    if lowest == 0.0 and not whole:
        for box in _outside_boxes(lo, hi, spec.dims):
            i, j, m = (a + int(np.argmin(axes[n][a:b])) for n, (a, b) in enumerate(box))
            candidates.append((i, j, m))

    best = min(candidates, key=lambda c: (axes[0][c[0]] + axes[1][c[1]] + axes[2][c[2]], c))
    return spec.cell_center(best)
