"""Potential-field steering driven by an influence-map target."""

# Needed so classes can make self references to their type
from __future__ import annotations

import dataclasses
from typing import Any

import numpy as np
import numpy.typing as npt

from .config import SimConfig
from .errors import InvalidParamsError
from .influence import IMParams, compute_im, grid_spec_for, select_target_cell
from .sim import SteeringCommand
from .units import Side, Snapshot, Vector

PF_TERMS = 13

# Term indices (0-based) of each field's four-term group:
# friend attraction, friend repulsion, enemy attraction, enemy repulsion.
DISTANCE_TERMS = (0, 1, 2, 3)
HEALTH_TERMS = (4, 5, 6, 7)
WEAPON_TERMS = (8, 9, 10, 11)
TARGET_TERM = 12

_ZERO_EPSILON = 1e-9


@dataclasses.dataclass(frozen=True)
class PFTerm:
    """
    One potential-field term, strength c * x**e.

    Args:
        c (float): coefficient, [-10000, 10000].
        e (int): exponent, [-7, 8].
    """

    c: float
    e: int

    def __post_init__(self) -> None:
        """Run after instantiation of a dataclass object."""
        if not (-10000.0 <= self.c <= 10000.0):
            raise InvalidParamsError(f"coefficient c must be in [-10000, 10000], got {self.c!r}")
        if isinstance(self.e, bool) or not isinstance(self.e, int) or not (-7 <= self.e <= 8):
            raise InvalidParamsError(f"exponent e must be an integer in [-7, 8], got {self.e!r}")


@dataclasses.dataclass(frozen=True)
class MicroParams:
    """
    A complete squad controller: 13 potential-field terms and the influence-map parameters.

    Terms are in subscript order: c1..c4 distance, c5..c8 health,
    c9..c12 weapon cooldown (each as friend-attract, friend-repel,
    enemy-attract, enemy-repel), then c13 target attraction.
    """

    pf: tuple[PFTerm, ...]
    im: IMParams

    def __post_init__(self) -> None:
        """Run after instantiation of a dataclass object."""
        if len(self.pf) != PF_TERMS:
            raise InvalidParamsError(f"expected {PF_TERMS} potential-field terms, got {len(self.pf)}")

    def term(self, k: int) -> PFTerm:
        """Term by its 1-based subscript."""
        return self.pf[k - 1]

    @classmethod
    def fromdict(cls, input: dict[str, Any]) -> MicroParams:
        """
        Create MicroParams from a flat dictionary.

        Keys are c1..c13, e1..e13, r, i_f, w1, w2, w3.

        Raises:
            InvalidParamsError: when a key is missing, has the wrong type,
                or holds an out-of-range value.
        """
        if not isinstance(input, dict):
            raise InvalidParamsError("micro parameters must be a JSON object")
        keys = [f"{p}{k}" for k in range(1, PF_TERMS + 1) for p in ("c", "e")] + ["r", "i_f", "w1", "w2", "w3"]
        for k in keys:
            if k not in input:
                raise InvalidParamsError(f"input dictionary is missing key {k}")
        unknown = sorted(set(input) - set(keys))
        if unknown:
            raise InvalidParamsError(f"unknown keys {unknown}")
        for k in keys:
            v = input[k]
            if k.startswith("e") or k == "r":
                if isinstance(v, bool) or not isinstance(v, int):
                    raise InvalidParamsError(f"value associated with key '{k}' must be an integer")
            elif isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InvalidParamsError(f"value associated with key '{k}' must be a number")

        pf = tuple(PFTerm(c=float(input[f"c{k}"]), e=input[f"e{k}"]) for k in range(1, PF_TERMS + 1))
        im = IMParams(
            r=input["r"],
            i_f=float(input["i_f"]),
            w1=float(input["w1"]),
            w2=float(input["w2"]),
            w3=float(input["w3"]),
        )
        return cls(pf=pf, im=im)

    def asdict(self) -> dict[str, Any]:
        """
        Create a flat dictionary representation of the parameters.

        Returns:
            dict[str, Any]: c1..c13 and e1..e13 in order, followed by the
                influence-map parameters.
        """
        out: dict[str, Any] = {}
        for k, t in enumerate(self.pf, start=1):
            out[f"c{k}"] = t.c
            out[f"e{k}"] = t.e
        out.update(dataclasses.asdict(self.im))
        return out


def pf_magnitude(term: PFTerm, d: float, floor: float = 1.0) -> float:
    """Field strength c * max(d, floor)**e."""
    assert d >= 0, "distance must not be negative"
    return term.c * max(d, floor) ** term.e


def direction(p: Vector, u: Vector) -> Vector:
    """Unit vector from p toward u; zero when the points coincide."""
    diff = np.asarray(u, dtype=np.float64) - np.asarray(p, dtype=np.float64)
    norm = float(np.linalg.norm(diff))
    if norm < _ZERO_EPSILON:
        return np.zeros(3)
    return np.asarray(diff / norm, dtype=np.float64)


@dataclasses.dataclass(frozen=True)
class PairGeometry:
    """
    Distances and unit vectors between every pair of units of one snapshot.

    normals[i, j] points from unit i toward unit j and is zero when the two coincide.
    """

    distances: npt.NDArray[np.float64]
    normals: npt.NDArray[np.float64]

    @classmethod
    def of(cls, snapshot: Snapshot) -> PairGeometry:
        diff = snapshot.positions[None, :, :] - snapshot.positions[:, None, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        coincident = dist < _ZERO_EPSILON
        normals = diff / np.where(coincident, 1.0, dist)[..., None]
        normals[coincident] = 0.0
        return cls(distances=dist, normals=normals)


def _pair_fields(
    snapshot: Snapshot,
    rows: npt.NDArray[np.intp],
    magnitudes: npt.NDArray[np.float64],
    terms: tuple[PFTerm, PFTerm, PFTerm, PFTerm],
    floor: float,
    geometry: PairGeometry,
) -> npt.NDArray[np.float64]:
    """
    Per acting unit in rows, the sum of n_i * (attract(m_i) - repel(m_i)) over every other living unit.

    magnitudes has one row per acting unit and one column per unit.
    Units on the acting unit's side use the first two terms, units on the
    other side the last two. n_i points from the acting unit to unit i.
    """
    others = np.tile(snapshot.alive, (len(rows), 1))
    others[np.arange(len(rows)), rows] = False

    m = np.maximum(magnitudes, floor)
    friend_attract, friend_repel, enemy_attract, enemy_repel = terms
    same_side = snapshot.friend[rows][:, None] == snapshot.friend[None, :]
    strength = np.where(
        same_side,
        friend_attract.c * m**friend_attract.e - friend_repel.c * m**friend_repel.e,
        enemy_attract.c * m**enemy_attract.e - enemy_repel.c * m**enemy_repel.e,
    )
    strength = np.where(others, strength, 0.0)
    return np.asarray(np.einsum("ijk,ij->ik", geometry.normals[rows], strength), dtype=np.float64)


def _group(params: MicroParams, idx: tuple[int, int, int, int]) -> tuple[PFTerm, PFTerm, PFTerm, PFTerm]:
    return params.pf[idx[0]], params.pf[idx[1]], params.pf[idx[2]], params.pf[idx[3]]


def _per_unit(values: npt.NDArray[np.float64], count: int) -> npt.NDArray[np.float64]:
    return np.broadcast_to(values, (count, len(values)))


def _distance_fields(
    snapshot: Snapshot, rows: npt.NDArray[np.intp], params: MicroParams, cfg: SimConfig, geometry: PairGeometry
) -> npt.NDArray[np.float64]:
    terms = _group(params, DISTANCE_TERMS)
    return _pair_fields(snapshot, rows, geometry.distances[rows], terms, cfg.distance_floor, geometry)


def _health_fields(
    snapshot: Snapshot, rows: npt.NDArray[np.intp], params: MicroParams, cfg: SimConfig, geometry: PairGeometry
) -> npt.NDArray[np.float64]:
    magnitudes = _per_unit(snapshot.health, len(rows))
    return _pair_fields(snapshot, rows, magnitudes, _group(params, HEALTH_TERMS), cfg.health_floor, geometry)


def _weapon_fields(
    snapshot: Snapshot, rows: npt.NDArray[np.intp], params: MicroParams, cfg: SimConfig, geometry: PairGeometry
) -> npt.NDArray[np.float64]:
    magnitudes = _per_unit(snapshot.cooldown, len(rows))
    return _pair_fields(snapshot, rows, magnitudes, _group(params, WEAPON_TERMS), cfg.health_floor, geometry)


def _target_fields(
    positions: npt.NDArray[np.float64], target: Vector | None, params: MicroParams, cfg: SimConfig
) -> npt.NDArray[np.float64]:
    if target is None:
        return np.zeros_like(positions)
    diff = np.asarray(target, dtype=np.float64) - positions
    d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    coincident = d < _ZERO_EPSILON
    m = diff / np.where(coincident, 1.0, d)[:, None]
    m[coincident] = 0.0
    term = params.pf[TARGET_TERM]
    return np.asarray(m * (term.c * np.maximum(d, cfg.distance_floor) ** term.e)[:, None], dtype=np.float64)


def distance_field(
    snapshot: Snapshot,
    unit_id: int,
    params: MicroParams,
    cfg: SimConfig | None = None,
    geometry: PairGeometry | None = None,
) -> Vector:
    """Distance-driven field D; magnitudes are 3D world distances floored at cfg.distance_floor."""
    rows = np.array([unit_id], dtype=np.intp)
    geometry = geometry or PairGeometry.of(snapshot)
    return _distance_fields(snapshot, rows, params, cfg or SimConfig(), geometry)[0]


def health_field(
    snapshot: Snapshot,
    unit_id: int,
    params: MicroParams,
    cfg: SimConfig | None = None,
    geometry: PairGeometry | None = None,
) -> Vector:
    """Health-driven field H; magnitudes are health fractions floored at cfg.health_floor."""
    rows = np.array([unit_id], dtype=np.intp)
    geometry = geometry or PairGeometry.of(snapshot)
    return _health_fields(snapshot, rows, params, cfg or SimConfig(), geometry)[0]


def weapon_field(
    snapshot: Snapshot,
    unit_id: int,
    params: MicroParams,
    cfg: SimConfig | None = None,
    geometry: PairGeometry | None = None,
) -> Vector:
    """Cooldown-driven field W; magnitudes are remaining-cooldown fractions floored at cfg.health_floor."""
    rows = np.array([unit_id], dtype=np.intp)
    geometry = geometry or PairGeometry.of(snapshot)
    return _weapon_fields(snapshot, rows, params, cfg or SimConfig(), geometry)[0]


def target_field(position: Vector, target: Vector | None, params: MicroParams, cfg: SimConfig | None = None) -> Vector:
    """Target field T = m * c13 * d**e13, m pointing at the target. Zero without a target."""
    positions = np.asarray(position, dtype=np.float64).reshape(1, 3)
    return _target_fields(positions, target, params, cfg or SimConfig())[0]


def squad_commands(
    snapshot: Snapshot,
    rows: npt.NDArray[np.intp],
    target: Vector | None,
    params: MicroParams,
    cfg: SimConfig | None = None,
    geometry: PairGeometry | None = None,
) -> dict[int, SteeringCommand]:
    """
    Steering commands from F = T + D + H + W for every unit id in rows.

    The desired heading is F normalized (zero when |F| is negligible) and
    the desired speed is the unit type's maximum speed; alignment scaling
    happens in the physics step.
    """
    cfg = cfg or SimConfig()
    assert snapshot.alive[rows].all(), "dead units have no field"
    geometry = geometry or PairGeometry.of(snapshot)

    f = (
        _target_fields(snapshot.positions[rows], target, params, cfg)
        + _distance_fields(snapshot, rows, params, cfg, geometry)
        + _health_fields(snapshot, rows, params, cfg, geometry)
        + _weapon_fields(snapshot, rows, params, cfg, geometry)
    )
    norms = np.sqrt(np.einsum("ij,ij->i", f, f))
    still = norms < _ZERO_EPSILON
    headings = f / np.where(still, 1.0, norms)[:, None]
    headings[still] = 0.0

    return {
        int(i): SteeringCommand(desired_heading=headings[k].copy(), desired_speed=snapshot.units[i].type.max_speed)
        for k, i in enumerate(rows)
    }


def total_field(
    snapshot: Snapshot,
    unit_id: int,
    target: Vector | None,
    params: MicroParams,
    cfg: SimConfig | None = None,
    geometry: PairGeometry | None = None,
) -> SteeringCommand:
    """Steering command of one unit from F = T + D + H + W; see squad_commands."""
    return squad_commands(snapshot, np.array([unit_id], dtype=np.intp), target, params, cfg, geometry)[unit_id]


class FieldController:
    """
    Steers every unit of one side from a MicroParams set.

    The influence-map target is shared by the squad and recomputed every
    cfg.im_interval ticks from the enemy units' influence. Commands for
    the whole squad are computed together on the first request for a snapshot.
    """

    params: MicroParams
    side: Side
    cfg: SimConfig

    def __init__(self, params: MicroParams, side: Side, cfg: SimConfig | None = None) -> None:
        self.params = params
        self.side = side
        self.cfg = cfg or SimConfig()
        self._target: Vector | None = None
        self._target_tick: int | None = None
        self._commands: dict[int, SteeringCommand] = {}
        self._commands_for: Snapshot | None = None

    def _mine(self, snapshot: Snapshot) -> npt.NDArray[np.bool_]:
        return snapshot.friend if self.side is Side.FRIEND else ~snapshot.friend

    def target(self, snapshot: Snapshot, tick: int) -> Vector | None:
        """Current attack-target location, or None when no enemy is alive."""
        last = self._target_tick
        if last is None or tick < last or tick - last >= self.cfg.im_interval:
            self._target = self._compute_target(snapshot)
            self._target_tick = tick
        return self._target

    def _compute_target(self, snapshot: Snapshot) -> Vector | None:
        mine = self._mine(snapshot)
        enemies = snapshot.alive & ~mine
        squad = snapshot.alive & mine
        if not enemies.any():
            return None

        im = self.params.im
        spec = grid_spec_for(snapshot.positions[snapshot.alive], im.r, self.cfg.im_cell_size)
        grid = compute_im((snapshot.units[i] for i in np.flatnonzero(enemies)), im, spec, crop=True)
        centroid = snapshot.positions[squad].mean(axis=0) if squad.any() else snapshot.positions[enemies].mean(axis=0)
        return select_target_cell(grid, centroid)

    def command(self, snapshot: Snapshot, unit_id: int, tick: int) -> SteeringCommand:
        """Steering command for one of this side's living units."""
        if self._commands_for is not snapshot:
            target = self.target(snapshot, tick)
            rows = np.flatnonzero(snapshot.alive & self._mine(snapshot))
            self._commands = squad_commands(snapshot, rows, target, self.params, self.cfg)
            self._commands_for = snapshot
        if unit_id not in self._commands:
            raise ValueError(f"unit {unit_id} is not a living unit of side {self.side}")
        return self._commands[unit_id]

    def __repr__(self) -> str:
        return f"FieldController(side={self.side}, im_interval={self.cfg.im_interval})"
