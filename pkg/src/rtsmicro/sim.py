"""Deterministic fixed-timestep 3D skirmish simulation."""

# Needed so classes can make self references to their type
from __future__ import annotations

import dataclasses
import math
from collections.abc import Mapping, Sequence
from typing import TYPE_CHECKING, Protocol

import numpy as np

from .config import SimConfig
from .logger import get_logger
from .units import Side, Snapshot, UnitState, Vector

if TYPE_CHECKING:
    from .scenarios import Scenario

logger = get_logger(__name__)

# Remaining cooldown below this is treated as elapsed; 22 ticks of 0.05 s
# do not sum to exactly 1.1 in binary floating point.
_COOLDOWN_EPSILON = 1e-9
_HEADING_EPSILON = 1e-9


@dataclasses.dataclass(frozen=True)
class SteeringCommand:
    """Desired heading (unit vector, or zero for "no preference") and desired speed."""

    desired_heading: Vector
    desired_speed: float


@dataclasses.dataclass(frozen=True)
class DamageEvent:
    """One fire event. damage is already clamped to the target's remaining hitpoints."""

    attacker: int
    target: int
    damage: float
    killed: bool


@dataclasses.dataclass(frozen=True)
class TraceRecord:
    """State of one unit at the end of one tick."""

    tick: int
    id: int
    side: str
    x: float
    y: float
    z: float
    hp: float
    cooldown: float


@dataclasses.dataclass
class SkirmishResult:
    """
    Outcome of one skirmish.

    Args:
        damage_to_enemies (float): hitpoints removed from the enemy side.
        damage_to_friends (float): hitpoints removed from the friend side.
        ticks_elapsed (int): ticks simulated.
        survivors_friend (int): living friend units at the end.
        survivors_enemy (int): living enemy units at the end.
        trace (list[TraceRecord], optional): per-tick unit states when requested.
    """

    damage_to_enemies: float
    damage_to_friends: float
    ticks_elapsed: int
    survivors_friend: int
    survivors_enemy: int
    trace: list[TraceRecord] | None = None


class Controller(Protocol):
    """Anything that can steer the units of one side."""

    def command(self, snapshot: Snapshot, unit_id: int, tick: int) -> SteeringCommand: ...


class World:
    """
    All units of a skirmish and the tick counter.

    Unit ids are their index in 'units'; that index is also the global
    processing order within a tick.
    """

    units: list[UnitState]
    tick: int

    def __init__(self, units: Sequence[UnitState]) -> None:
        for i, u in enumerate(units):
            if u.id != i:
                raise ValueError(f"unit ids must be 0..n-1 in order, found id {u.id} at position {i}")
        self.units = list(units)
        self.tick = 0

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> World:
        """Create fresh units (full health, zero speed, weapons ready) from a scenario's placements."""
        units = [
            UnitState(id=i, type=p.unit_type, side=p.side, position=p.position, heading=p.heading)
            for i, p in enumerate(scenario.placements)
        ]
        return cls(units)

    def living(self, side: Side) -> int:
        """Number of living units on a side."""
        return sum(1 for u in self.units if u.side is side and u.alive)

    def __repr__(self) -> str:
        return (
            f"World(tick={self.tick}, friends={self.living(Side.FRIEND)}, "
            f"enemies={self.living(Side.ENEMY)}, units={len(self.units)})"
        )


def acquire_target(unit: UnitState, units: Sequence[UnitState]) -> int | None:
    """
    Id of the nearest living enemy within weapon range, or None.

    Distance is the 3D Euclidean distance; firing is omnidirectional.
    Ties go to the lowest id.
    """
    best_id: int | None = None
    best_d2 = unit.type.weapon_range**2
    px, py, pz = unit.position
    for other in units:
        if other.side is unit.side or other.hitpoints <= 0:
            continue
        ox, oy, oz = other.position
        d2 = (ox - px) ** 2 + (oy - py) ** 2 + (oz - pz) ** 2
        if d2 < best_d2 or (d2 == best_d2 and (best_id is None or other.id < best_id)):
            best_id, best_d2 = other.id, d2
    return best_id


def fire(attacker: UnitState, target: UnitState) -> DamageEvent:
    """
    Deliver one attack: every shot of the attack lands together, no misses, no armor.

    The caller guarantees the attacker is alive, its weapon is ready, and
    the target is a living unit within range.
    """
    assert attacker.alive, "dead units cannot fire"
    assert attacker.cooldown_remaining == 0, "weapon is still cooling down"
    assert target.alive, "target is already dead"
    assert float(np.linalg.norm(target.position - attacker.position)) <= attacker.type.weapon_range + 1e-9

    damage = min(attacker.type.damage_per_attack, target.hitpoints)
    target.hitpoints -= damage
    if target.hitpoints <= 0:
        target.hitpoints = 0.0
    attacker.cooldown_remaining = attacker.type.weapon_cooldown

    return DamageEvent(attacker=attacker.id, target=target.id, damage=damage, killed=not target.alive)


def _any_perpendicular(v: Vector) -> Vector:
    """A unit vector perpendicular to unit vector v, chosen deterministically."""
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(v)))] = 1.0
    p = np.cross(v, axis)
    return np.asarray(p / np.linalg.norm(p), dtype=np.float64)


def _rotate_toward(current: Vector, desired: Vector, max_angle: float) -> Vector:
    """Rotate unit vector 'current' toward unit vector 'desired' by at most max_angle radians."""
    cos_theta = max(-1.0, min(1.0, float(current @ desired)))
    theta = math.acos(cos_theta)
    if theta <= max_angle:
        return desired.copy()

    # Component of 'desired' orthogonal to 'current' gives the rotation plane
    ortho = desired - cos_theta * current
    norm = float(np.linalg.norm(ortho))
    ortho = ortho / norm if norm > _HEADING_EPSILON else _any_perpendicular(current)

    rotated = math.cos(max_angle) * current + math.sin(max_angle) * ortho
    return np.asarray(rotated / np.linalg.norm(rotated), dtype=np.float64)


def apply_steering(unit: UnitState, cmd: SteeringCommand, cfg: SimConfig) -> None:
    """
    Move a unit for one tick toward a steering command, updating it in place.

    The heading turns toward the desired heading at no more than
    cfg.max_turn_rate. Speed approaches desired_speed * max(0, cos theta),
    theta being the angle between current and desired heading, within the
    acceleration bound. Vertical speed is capped at cfg.climb_speed_cap
    and altitude is clamped into [min_altitude, max_altitude]. A zero
    desired heading keeps the current heading and slows the unit down.
    """
    assert unit.alive, "cannot steer a dead unit"
    dt = cfg.dt
    max_speed = unit.type.max_speed

    desired = np.asarray(cmd.desired_heading, dtype=np.float64)
    norm = float(np.linalg.norm(desired))
    if norm < _HEADING_EPSILON:
        target_speed = 0.0
    else:
        desired = desired / norm
        cos_theta = max(-1.0, min(1.0, float(unit.heading @ desired)))
        target_speed = min(max(cmd.desired_speed, 0.0), max_speed) * max(0.0, cos_theta)
        unit.heading = _rotate_toward(unit.heading, desired, cfg.max_turn_rate * dt)

    max_dv = cfg.accel_factor * max_speed * dt
    dv = max(-max_dv, min(max_dv, target_speed - unit.speed))
    unit.speed = max(0.0, min(max_speed, unit.speed + dv))

    velocity = unit.heading * unit.speed
    cap = cfg.climb_speed_cap
    velocity[2] = max(-cap, min(cap, float(velocity[2])))

    unit.position += velocity * dt
    unit.position[2] = max(cfg.min_altitude, min(cfg.max_altitude, float(unit.position[2])))


def step(world: World, controllers: Mapping[Side, Controller], cfg: SimConfig) -> list[DamageEvent]:
    """
    Advance the world by one tick.

    Every living unit's steering command is computed from the pre-tick
    snapshot before anything moves. Then, in ascending id order, each unit
    still alive steers, its cooldown runs down, and it fires at the nearest
    enemy in range if its weapon is ready. Damage lands immediately, so a
    unit killed earlier in the tick neither moves nor fires.

    Returns:
        list[DamageEvent]: fire events in the order they happened.
    """
    snapshot = Snapshot.capture(world.units)
    commands = {
        u.id: controllers[u.side].command(snapshot, u.id, world.tick) for u in world.units if u.hitpoints > 0
    }

    events: list[DamageEvent] = []
    for unit in world.units:
        if unit.hitpoints <= 0:
            continue
        apply_steering(unit, commands[unit.id], cfg)

        remaining = unit.cooldown_remaining - cfg.dt
        unit.cooldown_remaining = 0.0 if remaining < _COOLDOWN_EPSILON else remaining

        if unit.cooldown_remaining == 0.0:
            target_id = acquire_target(unit, world.units)
            if target_id is not None:
                events.append(fire(unit, world.units[target_id]))

    world.tick += 1
    return events


def _trace_rows(world: World) -> list[TraceRecord]:
    rows = []
    for u in world.units:
        x, y, z = (round(float(v), 6) for v in u.position)
        rows.append(
            TraceRecord(
                tick=world.tick,
                id=u.id,
                side=str(u.side),
                x=x,
                y=y,
                z=z,
                hp=round(u.hitpoints, 6),
                cooldown=round(u.cooldown_remaining, 6),
            )
        )
    return rows


def run_skirmish(
    scenario: Scenario,
    friend_controller: Controller,
    enemy_controller: Controller,
    cfg: SimConfig,
    *,
    max_ticks: int | None = None,
    trace: bool = False,
) -> SkirmishResult:
    """
    Play a scenario until one side has no living units or the tick limit is reached.

    Args:
        scenario (Scenario): initial placements.
        friend_controller (Controller): steers the friend side.
        enemy_controller (Controller): steers the enemy side.
        cfg (SimConfig): physics constants.
        max_ticks (int, optional): tick limit. Defaults to cfg.max_ticks.
        trace (bool, optional): record every unit's state at tick 0 and after every tick.

    Returns:
        SkirmishResult: damage tallies, survivors, and the trace if requested.
    """
    limit = cfg.max_ticks if max_ticks is None else max_ticks
    world = World.from_scenario(scenario)
    controllers: dict[Side, Controller] = {Side.FRIEND: friend_controller, Side.ENEMY: enemy_controller}

    damage = {Side.FRIEND: 0.0, Side.ENEMY: 0.0}
    rows: list[TraceRecord] | None = _trace_rows(world) if trace else None

    for _ in range(limit):
        if world.living(Side.FRIEND) == 0 or world.living(Side.ENEMY) == 0:
            break
        for event in step(world, controllers, cfg):
            damage[world.units[event.target].side] += event.damage
        if rows is not None:
            rows.extend(_trace_rows(world))

    return SkirmishResult(
        damage_to_enemies=damage[Side.ENEMY],
        damage_to_friends=damage[Side.FRIEND],
        ticks_elapsed=world.tick,
        survivors_friend=world.living(Side.FRIEND),
        survivors_enemy=world.living(Side.ENEMY),
        trace=rows,
    )
