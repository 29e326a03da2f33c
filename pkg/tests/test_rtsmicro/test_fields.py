import unittest

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from rtsmicro.config import SimConfig
from rtsmicro.errors import InvalidParamsError
from rtsmicro.fields import (
    PF_TERMS,
    FieldController,
    MicroParams,
    PairGeometry,
    PFTerm,
    direction,
    distance_field,
    health_field,
    pf_magnitude,
    squad_commands,
    target_field,
    total_field,
    weapon_field,
)
from rtsmicro.influence import IMParams
from rtsmicro.units import FVULTURE, FZEALOT, Side, UnitState

from .helpers import make_unit, params_with, snapshot_of

ORIGIN = (0.0, 0.0, 500.0)


def _friend(uid: int, x: float = 0.0, y: float = 0.0, hitpoints: float = -1.0, cooldown: float = 0.0) -> UnitState:
    return make_unit(uid, FVULTURE, Side.FRIEND, (x, y, 500.0), hitpoints=hitpoints, cooldown=cooldown)


def _enemy(uid: int, x: float = 0.0, y: float = 0.0, hitpoints: float = -1.0, cooldown: float = 0.0) -> UnitState:
    return make_unit(uid, FZEALOT, Side.ENEMY, (x, y, 500.0), hitpoints=hitpoints, cooldown=cooldown)


class TestPFTerm(unittest.TestCase):
    def test_magnitude(self) -> None:
        self.assertEqual(pf_magnitude(PFTerm(2.0, 3), 2.0), 16.0)
        self.assertEqual(pf_magnitude(PFTerm(5.0, 0), 7.0), 5.0)
        # d is clamped to the floor
        self.assertEqual(pf_magnitude(PFTerm(1.0, -1), 0.0), 1.0)

    def test_ranges(self) -> None:
        for c, e in [(10000.5, 0), (-10001.0, 0), (1.0, 9), (1.0, -8), (1.0, 1.5)]:
            with self.assertRaises(InvalidParamsError):
                PFTerm(c, e)

    def test_params_need_thirteen_terms(self) -> None:
        im = IMParams(r=0, i_f=0.0, w1=0.0, w2=0.0, w3=0.0)
        with self.assertRaises(InvalidParamsError):
            MicroParams(pf=(PFTerm(0.0, 0),) * 12, im=im)

    def test_flat_dict_round_trip(self) -> None:
        p = params_with({1: (4.0, 1), 13: (-2.5, -3)}, IMParams(r=3, i_f=0.5, w1=0.25, w2=0.0, w3=7.0))
        d = p.asdict()
        self.assertEqual(list(d)[:4], ["c1", "e1", "c2", "e2"])
        self.assertEqual(len(d), 2 * PF_TERMS + 5)
        self.assertEqual(MicroParams.fromdict(d), p)
        self.assertEqual(p.term(13), PFTerm(-2.5, -3))

    def test_fromdict_errors(self) -> None:
        d = params_with().asdict()
        for mutate in (
            lambda x: x.pop("c7"),
            lambda x: x.update(e3=1.5),
            lambda x: x.update(c2="big"),
            lambda x: x.update(zeta=1),
            lambda x: x.update(r=12),
        ):
            bad = dict(d)
            mutate(bad)
            with self.assertRaises(InvalidParamsError):
                MicroParams.fromdict(bad)


class TestDirection(unittest.TestCase):
    def test_examples(self) -> None:
        self.assertTrue(np.allclose(direction(np.zeros(3), np.array([1.0, 0.0, 0.0])), [1.0, 0.0, 0.0]))
        self.assertTrue(np.allclose(direction(np.zeros(3), np.array([0.0, 3.0, 4.0])), [0.0, 0.6, 0.8]))
        self.assertTrue(np.array_equal(direction(np.ones(3), np.ones(3)), np.zeros(3)))


class TestComponentFields(unittest.TestCase):
    def test_lonely_unit_feels_nothing(self) -> None:
        snap = snapshot_of(_friend(0), _enemy(1, x=100, hitpoints=0))
        p = params_with({k: (1.0, 1) for k in range(1, 13)})
        for field in (distance_field, health_field, weapon_field):
            self.assertTrue(np.array_equal(field(snap, 0, p), np.zeros(3)))

    def test_distance_field_from_one_friend(self) -> None:
        snap = snapshot_of(_friend(0), _friend(1, x=2))
        p = params_with({1: (4.0, 1), 2: (2.0, 1)})
        self.assertTrue(np.allclose(distance_field(snap, 0, p), [4.0, 0.0, 0.0]))

    def test_symmetric_enemies_cancel(self) -> None:
        snap = snapshot_of(_friend(0), _enemy(1, x=50), _enemy(2, x=-50))
        p = params_with({3: (7.0, 1), 4: (1.0, -2)})
        self.assertAlmostEqual(float(distance_field(snap, 0, p)[0]), 0.0)

    def test_health_field(self) -> None:
        snap = snapshot_of(_friend(0), _friend(1, x=10), _friend(2, y=10))
        p = params_with({5: (1.0, 2)})
        self.assertTrue(np.allclose(health_field(snap, 0, p), [1.0, 1.0, 0.0]))

        snap = snapshot_of(_friend(0), _enemy(1, x=-30, hitpoints=80))
        p = params_with({7: (8.0, 1)})
        self.assertTrue(np.allclose(health_field(snap, 0, p), [-4.0, 0.0, 0.0]))

    def test_weapon_field(self) -> None:
        snap = snapshot_of(_friend(0), _enemy(1, y=40, cooldown=FZEALOT.weapon_cooldown))
        p = params_with({11: (3.0, 1)})
        self.assertTrue(np.allclose(weapon_field(snap, 0, p), [0.0, 3.0, 0.0]))

        snap = snapshot_of(_friend(0), _enemy(1, y=40))
        p = params_with({11: (1.0, 2)})
        self.assertAlmostEqual(float(weapon_field(snap, 0, p)[1]), (1.0 / 256.0) ** 2)

    def test_self_and_dead_units_are_excluded(self) -> None:
        live = snapshot_of(_friend(0), _enemy(1, x=100))
        with_dead = snapshot_of(_friend(0), _enemy(1, x=100), _enemy(2, x=-100, hitpoints=0))
        p = params_with({3: (2.0, 0), 7: (3.0, 1), 11: (5.0, 0)})
        for field in (distance_field, health_field, weapon_field):
            self.assertTrue(np.allclose(field(live, 0, p), field(with_dead, 0, p)))

    def test_coincident_units_give_no_direction(self) -> None:
        snap = snapshot_of(_friend(0), _enemy(1))
        p = params_with({3: (10000.0, -7)})
        self.assertTrue(np.array_equal(distance_field(snap, 0, p), np.zeros(3)))

    def test_target_field(self) -> None:
        p = params_with({13: (1.0, 0)})
        origin = np.zeros(3)
        self.assertTrue(np.allclose(target_field(origin, np.array([100.0, 0.0, 0.0]), p), [1.0, 0.0, 0.0]))
        self.assertTrue(np.array_equal(target_field(origin, origin.copy(), p), np.zeros(3)))
        self.assertTrue(np.array_equal(target_field(origin, None, p), np.zeros(3)))


class TestTotalField(unittest.TestCase):
    def test_heading_is_normalized_field(self) -> None:
        snap = snapshot_of(_friend(0))
        p = params_with({13: (5.0, 0)})
        cmd = total_field(snap, 0, np.array([3.0, 4.0, 500.0]), p)
        self.assertTrue(np.allclose(cmd.desired_heading, [0.6, 0.8, 0.0]))
        self.assertEqual(cmd.desired_speed, FVULTURE.max_speed)

    def test_zero_field_gives_zero_heading(self) -> None:
        snap = snapshot_of(_friend(0), _enemy(1, x=300))
        cmd = total_field(snap, 0, None, params_with())
        self.assertTrue(np.array_equal(cmd.desired_heading, np.zeros(3)))
        self.assertEqual(cmd.desired_speed, FVULTURE.max_speed)

    def test_single_attraction_points_at_enemy(self) -> None:
        snap = snapshot_of(_friend(0), _enemy(1, x=-300, y=300))
        cmd = total_field(snap, 0, None, params_with({3: (1.0, 0)}))
        self.assertTrue(np.allclose(cmd.desired_heading, [-(0.5**0.5), 0.5**0.5, 0.0]))

    @settings(max_examples=50)
    @given(
        hst.lists(hst.floats(-2500, 2500), min_size=13, max_size=13),
        hst.lists(hst.integers(-7, 8), min_size=13, max_size=13),
        hst.sampled_from([0.25, 0.5, 2.0, 4.0]),
    )
    def test_heading_is_invariant_to_scaling_c(self, cs: list[float], es: list[int], k: float) -> None:
        snap = snapshot_of(_friend(0), _friend(1, x=30, y=5, hitpoints=40), _enemy(2, x=-200, y=90, cooldown=0.3))
        target = np.array([150.0, -40.0, 520.0])
        p = params_with({i + 1: (c, e) for i, (c, e) in enumerate(zip(cs, es, strict=True))})
        q = params_with({i + 1: (c * k, e) for i, (c, e) in enumerate(zip(cs, es, strict=True))})

        def field(params: MicroParams) -> np.ndarray:
            return (
                distance_field(snap, 0, params)
                + health_field(snap, 0, params)
                + weapon_field(snap, 0, params)
                + target_field(snap.positions[0], target, params)
            )

        f_p = field(p)
        np.testing.assert_allclose(field(q), k * f_p, rtol=1e-9, atol=1e-9)
        if np.linalg.norm(f_p) > 1e-6:
            heading_p = total_field(snap, 0, target, p).desired_heading
            heading_q = total_field(snap, 0, target, q).desired_heading
            np.testing.assert_allclose(heading_q, heading_p, atol=1e-9)

    @settings(max_examples=50)
    @given(
        hst.lists(hst.floats(-10000, 10000), min_size=13, max_size=13),
        hst.lists(hst.integers(-7, 8), min_size=13, max_size=13),
        hst.lists(
            hst.tuples(hst.floats(-1500, 1500), hst.floats(-1500, 1500), hst.floats(0, 80), hst.floats(0, 1.1)),
            min_size=1,
            max_size=8,
        ),
    )
    def test_fields_are_finite(
        self, cs: list[float], es: list[int], others: list[tuple[float, float, float, float]]
    ) -> None:
        units = [_friend(0)] + [
            make_unit(i + 1, FVULTURE, Side.FRIEND if i % 2 else Side.ENEMY, (x, y, 500.0), hitpoints=hp, cooldown=cd)
            for i, (x, y, hp, cd) in enumerate(others)
        ]
        snap = snapshot_of(*units)
        p = params_with({i + 1: (c, e) for i, (c, e) in enumerate(zip(cs, es, strict=True))})
        cmd = total_field(snap, 0, np.array(ORIGIN), p)
        self.assertTrue(np.all(np.isfinite(cmd.desired_heading)))
        for f in (distance_field, health_field, weapon_field):
            self.assertTrue(np.all(np.isfinite(f(snap, 0, p))))


class TestFieldController(unittest.TestCase):
    def setUp(self) -> None:
        self.cfg = SimConfig(im_interval=4)
        # Influence 1 on the enemy's cell, 0 one cell out, -1 two cells out
        im = IMParams(r=2, i_f=1.0, w1=0.0, w2=0.0, w3=1.0)
        self.controller = FieldController(params_with({13: (1.0, 0)}, im), Side.FRIEND, self.cfg)

    def test_no_target_without_enemies(self) -> None:
        snap = snapshot_of(_friend(0), _enemy(1, x=200, hitpoints=0))
        self.assertIsNone(self.controller.target(snap, 0))

    def test_target_is_the_minimum_cell_nearest_the_squad(self) -> None:
        snap = snapshot_of(_friend(0), _enemy(1, x=640))
        target = self.controller.target(snap, 0)
        assert target is not None
        # Enemy cell center is (672, 32, 480); the -1 ring sits two cells away
        self.assertEqual(target[0], 544.0)
        self.assertEqual(abs(target[1]), 32.0)
        self.assertEqual(target[2], 480.0)

    def test_target_is_recomputed_on_schedule(self) -> None:
        first = snapshot_of(_friend(0), _enemy(1, x=640))
        moved = snapshot_of(_friend(0), _enemy(1, x=-640))
        t0 = self.controller.target(first, 0)
        assert t0 is not None
        for tick in (1, 2, 3):
            self.assertTrue(np.array_equal(self.controller.target(moved, tick), t0))
        t4 = self.controller.target(moved, 4)
        assert t4 is not None
        self.assertLess(t4[0], 0.0)

    def test_earlier_tick_forces_a_recompute(self) -> None:
        self.controller.target(snapshot_of(_friend(0), _enemy(1, x=640)), 10)
        t = self.controller.target(snapshot_of(_friend(0), _enemy(1, x=-640)), 0)
        assert t is not None
        self.assertLess(t[0], 0.0)

    def test_enemy_side_controller_targets_friends(self) -> None:
        controller = FieldController(self.controller.params, Side.ENEMY, self.cfg)
        snap = snapshot_of(_friend(0, x=640), _enemy(1))
        target = controller.target(snap, 0)
        assert target is not None
        self.assertEqual(target[0], 544.0)

    def test_command_steers_toward_the_target(self) -> None:
        snap = snapshot_of(_friend(0), _enemy(1, x=640))
        cmd = self.controller.command(snap, 0, 0)
        self.assertEqual(cmd.desired_speed, FVULTURE.max_speed)
        self.assertAlmostEqual(float(np.linalg.norm(cmd.desired_heading)), 1.0)
        self.assertGreater(cmd.desired_heading[0], 0.9)

    def test_command_for_a_unit_it_does_not_steer(self) -> None:
        snap = snapshot_of(_friend(0), _enemy(1, x=640), _friend(2, x=50, hitpoints=0))
        for uid in (1, 2):
            with self.assertRaises(ValueError):
                self.controller.command(snap, uid, 0)

    def test_commands_are_computed_once_per_snapshot(self) -> None:
        snap = snapshot_of(_friend(0), _friend(1, y=100), _enemy(2, x=640))
        first = self.controller.command(snap, 0, 0)
        self.assertIs(self.controller.command(snap, 0, 0), first)
        other = snapshot_of(_friend(0), _friend(1, y=100), _enemy(2, x=-640))
        self.assertLess(self.controller.command(other, 0, 4).desired_heading[0], 0.0)


class TestSquadCommands(unittest.TestCase):
    def test_squad_commands_match_single_unit_commands(self) -> None:
        snap = snapshot_of(
            _friend(0), _friend(1, x=30, y=5, hitpoints=40), _enemy(2, x=-200, y=90, cooldown=0.3), _enemy(3, x=90)
        )
        p = params_with({1: (3.0, 1), 4: (2.0, -1), 6: (-5.0, 2), 10: (7.0, 0), 13: (1.0, 1)})
        target = np.array([150.0, -40.0, 520.0])
        batch = squad_commands(snap, np.array([0, 1]), target, p, geometry=PairGeometry.of(snap))
        self.assertEqual(sorted(batch), [0, 1])
        for uid in (0, 1):
            single = total_field(snap, uid, target, p)
            np.testing.assert_allclose(batch[uid].desired_heading, single.desired_heading, atol=1e-12)

    def test_geometry(self) -> None:
        geometry = PairGeometry.of(snapshot_of(_friend(0), _enemy(1, x=3, y=4), _enemy(2)))
        self.assertEqual(geometry.distances[0, 1], 5.0)
        self.assertTrue(np.allclose(geometry.normals[1, 0], [-0.6, -0.8, 0.0]))
        self.assertTrue(np.array_equal(geometry.normals[0, 2], np.zeros(3)))
        self.assertTrue(np.array_equal(geometry.normals[1, 1], np.zeros(3)))

    @pytest.mark.slow
    def test_a_million_unit_fields_are_finite(self) -> None:
        rng = np.random.default_rng(20)
        rows = np.arange(10)
        for _ in range(500):
            positions = rng.uniform(-4000.0, 4000.0, size=(20, 3))
            positions[:, 2] = rng.uniform(0.0, 1000.0, size=20)
            # Coincident units give d = 0
            positions[1] = positions[0]
            positions[12] = positions[3]
            units = [
                make_unit(
                    i,
                    FVULTURE if i < 10 else FZEALOT,
                    Side.FRIEND if i < 10 else Side.ENEMY,
                    positions[i],
                    # Barely alive units give h near 0; ready weapons give w = 0
                    hitpoints=float(rng.choice([1e-9, 1.0, 40.0, 80.0])),
                    cooldown=float(rng.choice([0.0, 0.5, 1.1])),
                )
                for i in range(20)
            ]
            snap = snapshot_of(*units)
            geometry = PairGeometry.of(snap)
            for _ in range(100):
                cs = rng.uniform(-10000.0, 10000.0, size=PF_TERMS)
                es = rng.integers(-7, 9, size=PF_TERMS)
                p = params_with({k + 1: (float(cs[k]), int(es[k])) for k in range(PF_TERMS)})
                target = positions[int(rng.integers(0, 20))] if rng.random() < 0.2 else rng.uniform(0.0, 1000.0, 3)
                commands = squad_commands(snap, rows, target, p, geometry=geometry)
                for cmd in commands.values():
                    self.assertTrue(np.all(np.isfinite(cmd.desired_heading)))

    def test_coincident_unit_and_target_stay_finite(self) -> None:
        snap = snapshot_of(_friend(0), _friend(1), _enemy(2), _enemy(3, x=1e-12, hitpoints=1e-9))
        p = params_with({k: (-10000.0, -7) for k in range(1, 14)})
        cmd = total_field(snap, 0, snap.positions[0].copy(), p)
        self.assertTrue(np.all(np.isfinite(cmd.desired_heading)))
        for f in (distance_field, health_field, weapon_field):
            self.assertTrue(np.all(np.isfinite(f(snap, 0, p))))
