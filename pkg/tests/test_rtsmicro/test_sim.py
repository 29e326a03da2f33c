import math
import unittest

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from rtsmicro.config import ScenarioConfig, SimConfig
from rtsmicro.evaluator import baseline_opponent
from rtsmicro.fields import FieldController
from rtsmicro.scenarios import Scenario, training_scenarios
from rtsmicro.sim import (
    SkirmishResult,
    SteeringCommand,
    World,
    acquire_target,
    apply_steering,
    fire,
    run_skirmish,
    step,
)
from rtsmicro.units import FVULTURE, FZEALOT, Side, Snapshot

from .helpers import FixedController, StillController, make_unit, scenario_of

CFG = SimConfig()


def _angle(a: np.ndarray, b: np.ndarray) -> float:
    return math.acos(max(-1.0, min(1.0, float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b))))))


class TestTargeting(unittest.TestCase):
    def test_nearest_enemy_in_range(self) -> None:
        shooter = make_unit(0, FVULTURE, Side.FRIEND, position=(0, 0, 500))
        units = [
            shooter,
            make_unit(1, FZEALOT, Side.ENEMY, position=(200, 0, 500)),
            make_unit(2, FZEALOT, Side.ENEMY, position=(0, 100, 500)),
            make_unit(3, FVULTURE, Side.FRIEND, position=(10, 0, 500)),
        ]
        self.assertEqual(acquire_target(shooter, units), 2)

    def test_range_is_measured_in_3d(self) -> None:
        shooter = make_unit(0, FVULTURE, Side.FRIEND, position=(0, 0, 500))
        # Within range horizontally, out of range once altitude counts
        units = [shooter, make_unit(1, FZEALOT, Side.ENEMY, position=(200, 0, 300))]
        self.assertIsNone(acquire_target(shooter, units))

    def test_dead_enemies_are_ignored(self) -> None:
        shooter = make_unit(0, FVULTURE, Side.FRIEND)
        units = [shooter, make_unit(1, FZEALOT, Side.ENEMY, position=(50, 0, 500), hitpoints=0)]
        self.assertIsNone(acquire_target(shooter, units))

    def test_ties_go_to_lowest_id(self) -> None:
        shooter = make_unit(0, FVULTURE, Side.FRIEND, position=(0, 0, 500))
        units = [
            shooter,
            make_unit(1, FZEALOT, Side.ENEMY, position=(0, 100, 500)),
            make_unit(2, FZEALOT, Side.ENEMY, position=(100, 0, 500)),
        ]
        self.assertEqual(acquire_target(shooter, list(reversed(units))), 1)


class TestFire(unittest.TestCase):
    def test_fire_applies_damage_and_cooldown(self) -> None:
        a = make_unit(0, FZEALOT, Side.ENEMY, position=(0, 0, 0))
        t = make_unit(1, FVULTURE, Side.FRIEND, position=(100, 0, 0))
        event = fire(a, t)
        self.assertEqual(event.damage, 32)
        self.assertFalse(event.killed)
        self.assertEqual(t.hitpoints, 48)
        self.assertAlmostEqual(a.cooldown_remaining, 1.24)

    def test_damage_is_clamped_to_remaining_hitpoints(self) -> None:
        a = make_unit(0, FZEALOT, Side.ENEMY, position=(0, 0, 0))
        t = make_unit(1, FVULTURE, Side.FRIEND, position=(100, 0, 0), hitpoints=10)
        event = fire(a, t)
        self.assertEqual(event.damage, 10)
        self.assertTrue(event.killed)
        self.assertEqual(t.hitpoints, 0)
        self.assertFalse(t.alive)


class TestSteering(unittest.TestCase):
    def test_turn_rate_is_bounded(self) -> None:
        u = make_unit(0, heading=(1, 0, 0))
        apply_steering(u, SteeringCommand(np.array([0.0, 1.0, 0.0]), 64.0), CFG)
        self.assertAlmostEqual(_angle(u.heading, np.array([1.0, 0.0, 0.0])), math.pi * CFG.dt, places=9)
        self.assertAlmostEqual(float(np.linalg.norm(u.heading)), 1.0, places=12)
        # Perpendicular desired heading gives no forward speed
        self.assertAlmostEqual(u.speed, 0.0, places=9)

    def test_opposite_heading_turns_without_accelerating(self) -> None:
        u = make_unit(0, heading=(1, 0, 0))
        apply_steering(u, SteeringCommand(np.array([-1.0, 0.0, 0.0]), 64.0), CFG)
        self.assertAlmostEqual(_angle(u.heading, np.array([1.0, 0.0, 0.0])), math.pi * CFG.dt, places=9)
        self.assertEqual(u.speed, 0.0)

    def test_acceleration_is_bounded(self) -> None:
        u = make_unit(0, FVULTURE, heading=(1, 0, 0), position=(0, 0, 500))
        apply_steering(u, SteeringCommand(np.array([1.0, 0.0, 0.0]), 64.0), CFG)
        self.assertAlmostEqual(u.speed, 2 * 64 * 0.05)
        self.assertAlmostEqual(u.position[0], 6.4 * 0.05)

    def test_speed_never_exceeds_max(self) -> None:
        u = make_unit(0, FZEALOT, Side.ENEMY, heading=(1, 0, 0))
        for _ in range(100):
            apply_steering(u, SteeringCommand(np.array([1.0, 0.0, 0.0]), 1000.0), CFG)
            self.assertLessEqual(u.speed, FZEALOT.max_speed)
        self.assertEqual(u.speed, FZEALOT.max_speed)

    def test_zero_heading_slows_down(self) -> None:
        u = make_unit(0, FVULTURE, heading=(0, 1, 0), speed=64.0)
        apply_steering(u, SteeringCommand(np.zeros(3), 64.0), CFG)
        self.assertAlmostEqual(u.speed, 64.0 - 6.4)
        self.assertTrue(np.array_equal(u.heading, np.array([0.0, 1.0, 0.0])))

    def test_vertical_speed_is_capped(self) -> None:
        u = make_unit(0, FVULTURE, heading=(0, 0, 1), position=(0, 0, 500), speed=64.0)
        apply_steering(u, SteeringCommand(np.array([0.0, 0.0, 1.0]), 64.0), CFG)
        self.assertAlmostEqual(u.position[2], 500 + CFG.climb_speed_cap * CFG.dt)

    def test_altitude_is_clamped(self) -> None:
        u = make_unit(0, FVULTURE, heading=(0, 0, 1), position=(0, 0, 999.5), speed=64.0)
        apply_steering(u, SteeringCommand(np.array([0.0, 0.0, 1.0]), 64.0), CFG)
        self.assertEqual(u.position[2], CFG.max_altitude)
        u = make_unit(0, FVULTURE, heading=(0, 0, -1), position=(0, 0, 0.5), speed=64.0)
        apply_steering(u, SteeringCommand(np.array([0.0, 0.0, -1.0]), 64.0), CFG)
        self.assertEqual(u.position[2], CFG.min_altitude)

    @given(
        hst.tuples(hst.floats(-1, 1), hst.floats(-1, 1), hst.floats(-1, 1)),
        hst.floats(0, 64),
    )
    def test_heading_stays_unit_length(self, desired: tuple[float, float, float], speed: float) -> None:
        u = make_unit(0, FVULTURE, heading=(0, 1, 0), speed=speed)
        apply_steering(u, SteeringCommand(np.array(desired), 64.0), CFG)
        self.assertAlmostEqual(float(np.linalg.norm(u.heading)), 1.0, places=9)
        self.assertTrue(0.0 <= u.speed <= 64.0)
        self.assertTrue(CFG.min_altitude <= u.position[2] <= CFG.max_altitude)


class RecordingController:
    """Remembers every snapshot it was asked about."""

    def __init__(self) -> None:
        self.seen: list[tuple[int, np.ndarray]] = []

    def command(self, snapshot: Snapshot, unit_id: int, tick: int) -> SteeringCommand:
        self.seen.append((unit_id, snapshot.positions.copy()))
        return SteeringCommand(desired_heading=np.array([1.0, 0.0, 0.0]), desired_speed=64.0)


class TestStep(unittest.TestCase):
    def test_commands_read_the_pre_tick_snapshot(self) -> None:
        units = [
            make_unit(0, FVULTURE, Side.FRIEND, position=(0, 0, 500), speed=64.0),
            make_unit(1, FVULTURE, Side.FRIEND, position=(0, 500, 500), speed=64.0),
            make_unit(2, FZEALOT, Side.ENEMY, position=(5000, 0, 500)),
        ]
        before = np.array([u.position for u in units])
        recorder = RecordingController()
        world = World(units)
        step(world, {Side.FRIEND: recorder, Side.ENEMY: StillController()}, CFG)

        self.assertEqual([uid for uid, _ in recorder.seen], [0, 1])
        for _, positions in recorder.seen:
            self.assertTrue(np.array_equal(positions, before))
        self.assertEqual(world.tick, 1)

    def test_unit_killed_earlier_in_tick_does_not_fire(self) -> None:
        units = [
            make_unit(0, FVULTURE, Side.FRIEND, position=(0, 0, 500)),
            make_unit(1, FZEALOT, Side.ENEMY, position=(100, 0, 500), hitpoints=20),
        ]
        world = World(units)
        events = step(world, {Side.FRIEND: StillController(), Side.ENEMY: StillController()}, CFG)
        self.assertEqual(len(events), 1)
        self.assertEqual((events[0].attacker, events[0].target), (0, 1))
        self.assertTrue(events[0].killed)
        self.assertEqual(units[0].hitpoints, 80)

    def test_cooldown_gates_fire_rate(self) -> None:
        # In fvulture range, out of fzealot range
        units = [
            make_unit(0, FVULTURE, Side.FRIEND, position=(0, 0, 500)),
            make_unit(1, FZEALOT, Side.ENEMY, position=(240, 0, 500)),
        ]
        world = World(units)
        controllers = {Side.FRIEND: StillController(), Side.ENEMY: StillController()}
        fired_at = [t for t in range(1, 60) if step(world, controllers, CFG)]
        # 1.1 s at 0.05 s per tick is 22 ticks
        self.assertEqual(fired_at, [1, 23, 45])
        self.assertEqual(units[1].hitpoints, 160 - 3 * 20)

    def test_ids_must_match_positions(self) -> None:
        with self.assertRaises(ValueError):
            World([make_unit(1), make_unit(0)])

    def test_world_repr(self) -> None:
        world = World([make_unit(0), make_unit(1, FZEALOT, Side.ENEMY)])
        self.assertEqual(repr(world), "World(tick=0, friends=1, enemies=1, units=2)")


def _duel_scenario(distance: float) -> Scenario:
    return scenario_of(
        [
            (FVULTURE, Side.FRIEND, (0, 0, 500), (1, 0, 0)),
            (FVULTURE, Side.FRIEND, (0, 40, 500), (1, 0, 0)),
            (FZEALOT, Side.ENEMY, (distance, 0, 500), (-1, 0, 0)),
            (FZEALOT, Side.ENEMY, (distance, 40, 500), (-1, 0, 0)),
            (FZEALOT, Side.ENEMY, (distance, -40, 500), (-1, 0, 0)),
        ]
    )


class TestRunSkirmish(unittest.TestCase):
    def test_zero_ticks_changes_nothing(self) -> None:
        result = run_skirmish(_duel_scenario(100), StillController(), StillController(), CFG, max_ticks=0)
        self.assertEqual(result.ticks_elapsed, 0)
        self.assertEqual(result.damage_to_enemies, 0)
        self.assertEqual(result.damage_to_friends, 0)
        self.assertEqual((result.survivors_friend, result.survivors_enemy), (2, 3))

    def test_stops_when_one_side_is_gone(self) -> None:
        result = run_skirmish(_duel_scenario(200), StillController(), StillController(), CFG)
        self.assertLess(result.ticks_elapsed, CFG.max_ticks)
        self.assertTrue(result.survivors_friend == 0 or result.survivors_enemy == 0)

    def test_damage_matches_hitpoints_lost(self) -> None:
        result = run_skirmish(_duel_scenario(200), StillController(), StillController(), CFG, trace=True)
        assert result.trace is not None
        last_tick = result.ticks_elapsed
        final = {r.id: r.hp for r in result.trace if r.tick == last_tick}
        self.assertAlmostEqual(result.damage_to_friends, 2 * 80 - final[0] - final[1], places=6)
        self.assertAlmostEqual(result.damage_to_enemies, 3 * 160 - final[2] - final[3] - final[4], places=6)
        self.assertLessEqual(result.damage_to_friends, 2 * 80)

    def test_trace_has_every_unit_every_tick(self) -> None:
        result = run_skirmish(_duel_scenario(2000), StillController(), StillController(), CFG, max_ticks=7, trace=True)
        assert result.trace is not None
        self.assertEqual(result.ticks_elapsed, 7)
        self.assertEqual(len(result.trace), 8 * 5)
        self.assertEqual(result.trace[0].tick, 0)
        self.assertEqual(result.trace[-1].tick, 7)

    @settings(max_examples=10, deadline=None)
    @given(hst.floats(150, 900))
    def test_deterministic(self, distance: float) -> None:
        def play() -> SkirmishResult:
            friend, enemy = FixedController((1, 0, 0)), FixedController((-1, 0, 0))
            return run_skirmish(_duel_scenario(distance), friend, enemy, CFG, max_ticks=300, trace=True)

        self.assertEqual(play(), play())


def _attraction_skirmish(scenario: Scenario) -> SkirmishResult:
    friend = FieldController(baseline_opponent(), Side.FRIEND, CFG)
    enemy = FieldController(baseline_opponent(), Side.ENEMY, CFG)
    return run_skirmish(scenario, friend, enemy, CFG, trace=True)


class TestReferenceSkirmishes(unittest.TestCase):
    def test_duel_at_distance_100(self) -> None:
        # Three 32-damage attacks kill the fvulture before eight 20-damage shots kill the fzealot
        scenario = scenario_of(
            [
                (FVULTURE, Side.FRIEND, (0, 0, 500), (1, 0, 0)),
                (FZEALOT, Side.ENEMY, (100, 0, 500), (-1, 0, 0)),
            ]
        )
        result = _attraction_skirmish(scenario)
        self.assertEqual(result.ticks_elapsed, 51)
        self.assertEqual((result.survivors_friend, result.survivors_enemy), (0, 1))
        self.assertEqual(result.damage_to_friends, 80.0)
        self.assertEqual(result.damage_to_enemies, 60.0)

        assert result.trace is not None
        hp = {(r.tick, r.id): r.hp for r in result.trace}
        # Trace tick t holds the state after t steps; fvulture fires every 22 steps, fzealot every 25
        self.assertEqual((hp[(1, 0)], hp[(1, 1)]), (48.0, 140.0))
        self.assertEqual((hp[(22, 1)], hp[(23, 1)]), (140.0, 120.0))
        self.assertEqual((hp[(25, 0)], hp[(26, 0)]), (48.0, 16.0))
        self.assertEqual(hp[(45, 1)], 100.0)
        self.assertEqual((hp[(50, 0)], hp[(51, 0)]), (16.0, 0.0))

        self.assertEqual(_attraction_skirmish(scenario), result)

    @pytest.mark.slow
    def test_fvultures_lose_to_the_fzealot_mass(self) -> None:
        scenario = training_scenarios(42, ScenarioConfig(friend_count=3, enemy_count=30))[0]
        result = _attraction_skirmish(scenario)
        self.assertEqual(result.survivors_friend, 0)
        self.assertEqual(result.damage_to_friends, 3 * 80.0)
        self.assertGreater(result.survivors_enemy, 0)
        self.assertLess(result.damage_to_enemies, 30 * 160.0)
        self.assertEqual(_attraction_skirmish(scenario), result)
