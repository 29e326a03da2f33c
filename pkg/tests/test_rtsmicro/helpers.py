"""Small builders shared by the tests."""

from collections.abc import Sequence

import numpy as np

from rtsmicro.fields import PF_TERMS, MicroParams, PFTerm
from rtsmicro.influence import IMParams
from rtsmicro.scenarios import Placement, Scenario
from rtsmicro.sim import SteeringCommand
from rtsmicro.units import FVULTURE, Side, Snapshot, UnitState, UnitTypeSpec

NO_IM = IMParams(r=0, i_f=0.0, w1=0.0, w2=0.0, w3=0.0)


def make_unit(
    uid: int,
    utype: UnitTypeSpec = FVULTURE,
    side: Side = Side.FRIEND,
    position: Sequence[float] = (0.0, 0.0, 500.0),
    heading: Sequence[float] = (1.0, 0.0, 0.0),
    hitpoints: float = -1.0,
    cooldown: float = 0.0,
    speed: float = 0.0,
) -> UnitState:
    return UnitState(
        id=uid,
        type=utype,
        side=side,
        position=np.array(position, dtype=np.float64),
        heading=np.array(heading, dtype=np.float64),
        speed=speed,
        hitpoints=hitpoints,
        cooldown_remaining=cooldown,
    )


def params_with(terms: dict[int, tuple[float, int]] | None = None, im: IMParams = NO_IM) -> MicroParams:
    """MicroParams with every c at zero except the given 1-based terms."""
    terms = terms or {}
    pf = tuple(PFTerm(*terms.get(k, (0.0, 0))) for k in range(1, PF_TERMS + 1))
    return MicroParams(pf=pf, im=im)


def snapshot_of(*units: UnitState) -> Snapshot:
    return Snapshot.capture(list(units))


def scenario_of(
    placements: Sequence[tuple[UnitTypeSpec, Side, Sequence[float], Sequence[float]]], label: str = "test"
) -> Scenario:
    return Scenario(
        placements=tuple(
            Placement(unit_type=t, side=s, position=np.asarray(p, dtype=np.float64), heading=np.asarray(h, dtype=float))
            for t, s, p, h in placements
        ),
        seed=0,
        label=label,
    )


class StillController:
    """Asks every unit to stop."""

    def command(self, snapshot: Snapshot, unit_id: int, tick: int) -> SteeringCommand:
        return SteeringCommand(desired_heading=np.zeros(3), desired_speed=0.0)


class FixedController:
    """Steers every unit along one heading at full speed."""

    def __init__(self, heading: Sequence[float]) -> None:
        self.heading = np.array(heading, dtype=np.float64)

    def command(self, snapshot: Snapshot, unit_id: int, tick: int) -> SteeringCommand:
        return SteeringCommand(desired_heading=self.heading, desired_speed=snapshot.units[unit_id].type.max_speed)
