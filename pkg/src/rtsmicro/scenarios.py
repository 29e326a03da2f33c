"""Initial unit placements: clumps, clouds, the training trio and random test maps."""

# Needed so classes can make self references to their type
from __future__ import annotations

import dataclasses
from typing import Any

import numpy as np
import numpy.typing as npt

from .config import ScenarioConfig, SimConfig
from .logger import get_logger
from .rng import stream
from .units import Side, UnitTypeSpec, Vector, unit_type

logger = get_logger(__name__)

_DEFAULT_SIM = SimConfig()


@dataclasses.dataclass(frozen=True)
class Placement:
    """Where one unit starts, which way it faces, and who it fights for."""

    unit_type: UnitTypeSpec
    side: Side
    position: Vector
    heading: Vector

    def asdict(self) -> dict[str, Any]:
        return {
            "type": self.unit_type.name,
            "side": str(self.side),
            "x": float(self.position[0]),
            "y": float(self.position[1]),
            "z": float(self.position[2]),
            "heading": [float(v) for v in self.heading],
        }

    @classmethod
    def fromdict(cls, input: dict[str, Any]) -> Placement:
        """
        Create a Placement from a dictionary.

        Raises:
            ValueError: when the input dictionary is not valid.
        """
        for k in ["type", "side", "x", "y", "z", "heading"]:
            if k not in input:
                raise ValueError(f"placement is missing key '{k}'")
        for k in ["x", "y", "z"]:
            if isinstance(input[k], bool) or not isinstance(input[k], (int, float)):
                raise ValueError(f"value associated with key '{k}' must be a number")
        heading = input["heading"]
        if not isinstance(heading, list) or len(heading) != 3:
            raise ValueError("value associated with key 'heading' must be a list of 3 numbers")
        if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in heading):
            raise ValueError("value associated with key 'heading' must be a list of 3 numbers")
        direction = np.asarray(heading, dtype=np.float64)
        length = float(np.linalg.norm(direction))
        if not np.isfinite(length) or length == 0.0:
            raise ValueError(f"heading {heading} has no direction")
        # Unit headings load bit for bit
        if abs(length - 1.0) > 1e-12:
            direction = direction / length

        return cls(
            unit_type=unit_type(input["type"]),
            side=Side(input["side"]),
            position=np.array([input["x"], input["y"], input["z"]], dtype=np.float64),
            heading=direction,
        )


@dataclasses.dataclass(frozen=True)
class Scenario:
    """
    A complete starting map.

    Args:
        placements (tuple[Placement, ...]): units in id order.
        seed (int): run seed the placements were drawn from.
        label (str): identifier used in artifacts ("scenario1", "random17", ...).
    """

    placements: tuple[Placement, ...]
    seed: int
    label: str

    def __post_init__(self) -> None:
        """Run after instantiation of a dataclass object."""
        if not any(p.side is Side.FRIEND for p in self.placements):
            raise ValueError(f"scenario '{self.label}' has no friend units")
        for p in self.placements:
            if not (_DEFAULT_SIM.min_altitude <= p.position[2] <= _DEFAULT_SIM.max_altitude):
                raise ValueError(f"scenario '{self.label}': altitude {p.position[2]} out of bounds")

    def count(self, side: Side) -> int:
        return sum(1 for p in self.placements if p.side is side)

    def starting_hitpoints(self, side: Side) -> float:
        """Total hitpoints a side starts with."""
        return float(sum(p.unit_type.max_hitpoints for p in self.placements if p.side is side))

    def asdict(self) -> dict[str, Any]:
        return {"label": self.label, "seed": self.seed, "placements": [p.asdict() for p in self.placements]}

    @classmethod
    def fromdict(cls, input: dict[str, Any]) -> Scenario:
        """
        Create a Scenario from a dictionary.

        Raises:
            ValueError: when the input dictionary is not valid.
        """
        for k in ["label", "seed", "placements"]:
            if k not in input:
                raise ValueError(f"scenario is missing key '{k}'")
        if not isinstance(input["label"], str):
            raise ValueError("value associated with key 'label' must be a string")
        if isinstance(input["seed"], bool) or not isinstance(input["seed"], int):
            raise ValueError("value associated with key 'seed' must be an integer")
        if not isinstance(input["placements"], list):
            raise ValueError("value associated with key 'placements' must be a list")

        placements = tuple(Placement.fromdict(p) for p in input["placements"])
        return cls(placements=placements, seed=input["seed"], label=input["label"])

    def __repr__(self) -> str:
        return (
            f"Scenario(label={self.label}, seed={self.seed}, "
            f"friends={self.count(Side.FRIEND)}, enemies={self.count(Side.ENEMY)})"
        )


def _unit_vectors(rng: np.random.Generator, n: int) -> npt.NDArray[np.float64]:
    """n directions uniform on the unit sphere."""
    v = rng.standard_normal((n, 3))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    # zero-length draws map to +x
    v[norms[:, 0] == 0] = (1.0, 0.0, 0.0)
    norms[norms == 0] = 1.0
    return np.asarray(v / norms, dtype=np.float64)


def _placements(
    positions: npt.NDArray[np.float64], headings: npt.NDArray[np.float64], utype: UnitTypeSpec, side: Side
) -> list[Placement]:
    positions = positions.copy()
    positions[:, 2] = np.clip(positions[:, 2], _DEFAULT_SIM.min_altitude, _DEFAULT_SIM.max_altitude)
    return [
        Placement(unit_type=utype, side=side, position=positions[i], heading=headings[i]) for i in range(len(positions))
    ]


def clump(
    center: Vector, radius: float, n: int, utype: UnitTypeSpec, side: Side, rng: np.random.Generator
) -> list[Placement]:
    """
    n units uniform inside a sphere.

    Positions come from rejection sampling in the bounding cube; headings
    are uniform on the unit sphere. Altitudes are clamped into the legal
    band afterwards.
    """
    if not radius > 0:
        raise ValueError(f"clump radius must be positive, got {radius}")
    if n <= 0:
        return []

    center = np.asarray(center, dtype=np.float64)
    accepted: list[npt.NDArray[np.float64]] = []
    found = 0
    while found < n:
        batch = rng.uniform(-radius, radius, size=(2 * (n - found), 3))
        inside = batch[np.einsum("ij,ij->i", batch, batch) <= radius * radius]
        accepted.append(inside)
        found += len(inside)
    offsets = np.concatenate(accepted)[:n]

    return _placements(center + offsets, _unit_vectors(rng, n), utype, side)


def cloud(
    center: Vector,
    radius: float,
    n: int,
    utype: UnitTypeSpec,
    side: Side,
    rng: np.random.Generator,
    thickness: float = 10.0,
) -> list[Placement]:
    """n units on a spherical shell, radial coordinate uniform in [radius - thickness, radius + thickness]."""
    if not radius > thickness:
        raise ValueError(f"cloud radius must exceed the shell thickness {thickness}, got {radius}")
    if n <= 0:
        return []

    center = np.asarray(center, dtype=np.float64)
    directions = _unit_vectors(rng, n)
    radii = rng.uniform(radius - thickness, radius + thickness, size=(n, 1))
    return _placements(center + directions * radii, _unit_vectors(rng, n), utype, side)


def _groups(cfg: ScenarioConfig) -> tuple[tuple[UnitTypeSpec, int, Side], tuple[UnitTypeSpec, int, Side]]:
    """
    The small and the large unit group, each with the side it plays.

    The small group is the configured friend composition; swap_roles hands
    it to the enemy side.
    """
    small_side, large_side = (Side.ENEMY, Side.FRIEND) if cfg.swap_roles else (Side.FRIEND, Side.ENEMY)
    return (
        (unit_type(cfg.friend_type), cfg.friend_count, small_side),
        (unit_type(cfg.enemy_type), cfg.enemy_count, large_side),
    )


def training_scenarios(seed: int, cfg: ScenarioConfig | None = None) -> list[Scenario]:
    """
    The three training maps for a run seed.

    1. small clump and large clump, centers 'separation' apart along x;
    2. small clump at the center, large group on a cloud around it;
    3. large clump at the center, small group on a cloud around it.

    Args:
        seed (int): run seed; placements come from its "scenarios" stream.
        cfg (ScenarioConfig, optional): squad and geometry settings.

    Returns:
        list[Scenario]: labelled "scenario1", "scenario2", "scenario3".
    """
    cfg = cfg or ScenarioConfig()
    logger.debug(f"training_scenarios(seed={seed})")
    rng = stream(seed, "scenarios")
    (s_type, s_n, s_side), (l_type, l_n, l_side) = _groups(cfg)

    z = cfg.center_altitude
    center = np.array([0.0, 0.0, z])
    half = cfg.separation / 2.0
    left, right = np.array([-half, 0.0, z]), np.array([half, 0.0, z])

    scenario1 = clump(left, cfg.clump_radius, s_n, s_type, s_side, rng) + clump(
        right, cfg.clump_radius, l_n, l_type, l_side, rng
    )
    scenario2 = clump(center, cfg.clump_radius, s_n, s_type, s_side, rng) + cloud(
        center, cfg.cloud_radius, l_n, l_type, l_side, rng, cfg.cloud_thickness
    )
    scenario3 = clump(center, cfg.clump_radius, l_n, l_type, l_side, rng) + cloud(
        center, cfg.cloud_radius, s_n, s_type, s_side, rng, cfg.cloud_thickness
    )

    return [
        Scenario(placements=tuple(placements), seed=seed, label=f"scenario{i}")
        for i, placements in enumerate([scenario1, scenario2, scenario3], start=1)
    ]


def random_scenario(
    rng: np.random.Generator, cfg: ScenarioConfig | None = None, *, seed: int = 0, label: str = "random"
) -> Scenario:
    """Both squads mixed inside one sphere of radius cfg.random_radius."""
    cfg = cfg or ScenarioConfig()
    (s_type, s_n, s_side), (l_type, l_n, l_side) = _groups(cfg)
    center = np.array([0.0, 0.0, cfg.center_altitude])

    placements = clump(center, cfg.random_radius, s_n, s_type, s_side, rng) + clump(
        center, cfg.random_radius, l_n, l_type, l_side, rng
    )
    return Scenario(placements=tuple(placements), seed=seed, label=label)


def random_scenarios(seed: int, n: int, cfg: ScenarioConfig | None = None) -> list[Scenario]:
    """The generalization test set: n random maps from the seed's "random_scenarios" stream."""
    logger.debug(f"random_scenarios(seed={seed}, n={n})")
    rng = stream(seed, "random_scenarios")
    return [random_scenario(rng, cfg, seed=seed, label=f"random{i}") for i in range(n)]
