"""Unit types and per-entity state."""

# Needed so classes can make self references to their type
from __future__ import annotations

import dataclasses
import enum
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

Vector = npt.NDArray[np.float64]


class Side(enum.StrEnum):
    """Which squad a unit belongs to. The evolving controller always drives FRIEND."""

    FRIEND = "friend"
    ENEMY = "enemy"

    def opponent(self) -> Side:
        return Side.ENEMY if self is Side.FRIEND else Side.FRIEND


@dataclasses.dataclass(frozen=True)
class UnitTypeSpec:
    """
    Immutable combat and movement stats shared by every unit of a type.

    Args:
        name (str): type identifier.
        max_hitpoints (float): health points of a fresh unit.
        max_speed (float): world-units per second.
        max_damage_per_shot (float): health points removed per shot.
        shots_per_attack (int): shots delivered in one fire event.
        weapon_range (float): world-units, measured center to center in 3D.
        weapon_cooldown (float): seconds between fire events.
    """

    name: str
    max_hitpoints: float
    max_speed: float
    max_damage_per_shot: float
    shots_per_attack: int
    weapon_range: float
    weapon_cooldown: float

    def __post_init__(self) -> None:
        """Run after instantiation of a dataclass object."""
        for field in dataclasses.fields(self):
            if field.name == "name":
                continue
            value = getattr(self, field.name)
            if not value > 0:
                raise ValueError(f"unit type '{self.name}': '{field.name}' must be strictly positive, got {value}")

    @property
    def damage_per_attack(self) -> float:
        """Damage delivered by one fire event (all shots land together)."""
        return self.max_damage_per_shot * self.shots_per_attack


FVULTURE = UnitTypeSpec(
    name="fvulture",
    max_hitpoints=80,
    max_speed=64,
    max_damage_per_shot=20,
    shots_per_attack=1,
    weapon_range=256,
    weapon_cooldown=1.1,
)

FZEALOT = UnitTypeSpec(
    name="fzealot",
    max_hitpoints=160,
    max_speed=40,
    max_damage_per_shot=16,
    shots_per_attack=2,
    weapon_range=224,
    weapon_cooldown=1.24,
)

UNIT_TYPES: dict[str, UnitTypeSpec] = {spec.name: spec for spec in (FVULTURE, FZEALOT)}


def unit_type(name: str) -> UnitTypeSpec:
    """
    Look up a built-in unit type by name.

    Raises:
        ValueError: if there is no type with that name.
    """
    try:
        return UNIT_TYPES[name]
    except KeyError:
        raise ValueError(f"unknown unit type '{name}', expected one of {sorted(UNIT_TYPES)}") from None


@dataclasses.dataclass(eq=False)
class UnitState:
    """
    Mutable kinematic and combat state of one entity during a skirmish.

    Positions and headings are float64 arrays of shape (3,); z is altitude.
    """

    id: int
    type: UnitTypeSpec
    side: Side
    position: Vector
    heading: Vector
    speed: float = 0.0
    hitpoints: float = -1.0  # (set to max_hitpoints if negative)
    cooldown_remaining: float = 0.0

    def __post_init__(self) -> None:
        """Run after instantiation of a dataclass object."""
        self.position = np.asarray(self.position, dtype=np.float64).copy()
        self.heading = np.asarray(self.heading, dtype=np.float64).copy()
        if self.hitpoints < 0:
            self.hitpoints = float(self.type.max_hitpoints)

    @property
    def alive(self) -> bool:
        return self.hitpoints > 0

    @property
    def health_fraction(self) -> float:
        return self.hitpoints / self.type.max_hitpoints

    @property
    def cooldown_fraction(self) -> float:
        return self.cooldown_remaining / self.type.weapon_cooldown

    def __repr__(self) -> str:
        x, y, z = self.position
        return (
            f"UnitState(id={self.id}, {self.type.name}/{self.side}, pos=({x:.1f}, {y:.1f}, {z:.1f}), "
            f"speed={self.speed:.1f}, hp={self.hitpoints:g})"
        )


@dataclasses.dataclass(frozen=True)
class Snapshot:
    """
    Pre-tick view of the world that every controller reads.

    Arrays are copies taken before any unit moves, indexed by unit id
    (ids are the row numbers 0..N-1). 'units' refers to the live objects
    and is only valid while no unit has moved in the current tick.
    """

    units: tuple[UnitState, ...]
    positions: npt.NDArray[np.float64]
    friend: npt.NDArray[np.bool_]
    alive: npt.NDArray[np.bool_]
    health: npt.NDArray[np.float64]
    cooldown: npt.NDArray[np.float64]

    @classmethod
    def capture(cls, units: Sequence[UnitState]) -> Snapshot:
        """Copy the state of 'units' into arrays."""
        n = len(units)
        positions = np.empty((n, 3), dtype=np.float64)
        for i, u in enumerate(units):
            positions[i] = u.position
        return cls(
            units=tuple(units),
            positions=positions,
            friend=np.fromiter((u.side is Side.FRIEND for u in units), dtype=np.bool_, count=n),
            alive=np.fromiter((u.hitpoints > 0 for u in units), dtype=np.bool_, count=n),
            health=np.fromiter((u.health_fraction for u in units), dtype=np.float64, count=n),
            cooldown=np.fromiter((u.cooldown_fraction for u in units), dtype=np.float64, count=n),
        )
