import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sddpg.errors import WorldConfigError
from sddpg.simworld import (
    KinematicsConfig, ObservationConfig, Obstacle, RobotState, WorldSpec, bundled_world,
    check_collision, make_observation, point_in_polygon, raycast, sample_episode, step_kinematics,
    wrap_angle,
)

from oracles import euler_oracle, march_oracle, random_scene

KIN = KinematicsConfig()
BUNDLED = ["desk_env1", "desk_env2", "desk_test", "paper_env1", "paper_env2", "paper_env3",
           "paper_env4", "paper_test"]


def dense_boundary_distance(p, world, spacing=5e-4):
    best = math.inf
    for x0, y0, x1, y1 in world.segments:
        n = max(2, int(math.hypot(x1 - x0, y1 - y0) / spacing) + 1)
        s = np.linspace(0, 1, n)
        pts = np.stack([x0 + s * (x1 - x0), y0 + s * (y1 - y0)], axis=1)
        best = min(best, float(np.min(np.hypot(pts[:, 0] - p[0], pts[:, 1] - p[1]))))
    return best


def empty_world(size=20.0):
    return WorldSpec("empty", (0.0, 0.0, size, size))


class TestKinematics:
    def test_straight(self):
        x, y, theta, v, w = step_kinematics(1.0, 2.0, 0.0, 0.5, 0.5, KIN)
        assert (x, y, theta, v, w) == (pytest.approx(1.05), 2.0, 0.0, 0.5, 0.0)

    def test_spin_in_place(self):
        x, y, theta, v, w = step_kinematics(1.0, 2.0, 0.3, -0.2, 0.2, KIN)
        assert v == 0.0
        assert (x, y) == (pytest.approx(1.0), pytest.approx(2.0))
        assert theta == pytest.approx(0.3 + 0.4 / 0.23 * 0.1)

    def test_angular_rate(self):
        *_, w = step_kinematics(0.0, 0.0, 0.0, 0.1, 0.3, KIN)
        assert w == pytest.approx(0.869565, abs=1e-6)

    def test_matches_fine_euler(self, rng):
        for _ in range(200):
            x, y, th = rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-np.pi, np.pi)
            vl, vr = rng.uniform(0.05, 0.5, size=2)
            got = step_kinematics(x, y, th, vl, vr, KIN)
            ref = euler_oracle(x, y, th, vl, vr, KIN.wheel_separation, KIN.dt)
            assert math.hypot(got[0] - ref[0], got[1] - ref[1]) < 1e-6
            assert abs(wrap_angle(got[2] - ref[2])) < 1e-9

    @given(st.floats(0.05, 0.5), st.floats(0.05, 0.5), st.floats(-np.pi, np.pi))
    def test_displacement_bounded(self, vl, vr, th):
        x, y, *_ = step_kinematics(0.0, 0.0, th, vl, vr, KIN)
        assert math.hypot(x, y) <= KIN.v_max * KIN.dt + 1e-12

    def test_w_max(self):
        assert KIN.w_max == pytest.approx(0.45 / 0.23)


class TestRaycast:
    def test_beam_layout(self):
        a = np.degrees(KIN.beam_angles())
        assert len(a) == 18
        np.testing.assert_allclose(a, np.arange(-85, 90, 10))

    def test_empty_world_from_centre(self):
        r = raycast(10.0, 10.0, 0.0, empty_world(), KIN)
        # every beam of the frontal fan ends on the x=20 wall or a side wall
        expected = [min(10 / abs(math.cos(b)) if math.cos(b) > 0 else math.inf,
                        10 / abs(math.sin(b)) if math.sin(b) != 0 else math.inf)
                    for b in KIN.beam_angles()]
        np.testing.assert_allclose(r, expected, rtol=1e-12)

    def test_wall_ahead(self):
        world = WorldSpec("w", (0.0, 0.0, 20.0, 20.0),
                          [Obstacle("wall", np.array([[6.0, 5.0], [6.0, 15.0]]))])
        r = raycast(5.0, 10.0, 0.0, world, KIN)
        # the two central beams sit 5 degrees either side of the heading
        assert r[8] == pytest.approx(1.0 / math.cos(math.radians(5)))
        assert r[9] == pytest.approx(1.0 / math.cos(math.radians(5)))

    def test_clamped_to_sensor_range(self, rng):
        huge = WorldSpec("big", (0.0, 0.0, 200.0, 200.0))
        assert np.all(raycast(100.0, 100.0, 0.3, huge, KIN) == 40.0)
        box = WorldSpec("b", (0.0, 0.0, 20.0, 20.0), [Obstacle.box(5.1, 4.0, 6.0, 6.0)])
        assert raycast(5.0, 5.0, 0.0, box, KIN).min() == 0.2

    def test_mirror_symmetry(self):
        world = WorldSpec("m", (0.0, 0.0, 20.0, 20.0),
                          [Obstacle.box(14.0, 8.0, 15.0, 12.0), Obstacle.box(12.0, 4.0, 13.0, 5.0),
                           Obstacle.box(12.0, 15.0, 13.0, 16.0)])
        r = raycast(10.0, 10.0, 0.0, world, KIN)
        np.testing.assert_allclose(r, r[::-1], rtol=1e-12)

    def test_matches_march_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            world, p = random_scene(rng)
            theta = rng.uniform(-np.pi, np.pi)
            got = raycast(p[0], p[1], theta, world, KIN)
            for b, r in zip(theta + KIN.beam_angles(), got):
                ref = min(max(march_oracle(p, b, world), KIN.range_min), KIN.range_max)
                assert abs(r - ref) < 1e-3

    def test_noise_is_seeded(self):
        kin = KinematicsConfig(scan_noise_std=0.05)
        a = raycast(10.0, 10.0, 0.0, empty_world(), kin, np.random.default_rng(1))
        b = raycast(10.0, 10.0, 0.0, empty_world(), kin, np.random.default_rng(1))
        assert np.array_equal(a, b)
        assert not np.allclose(a, raycast(10.0, 10.0, 0.0, empty_world(), KIN))


class TestCollision:
    def test_far_from_everything(self):
        hit, d = check_collision(10.0, 10.0, empty_world(), 0.35)
        assert not hit and d == 10.0

    def test_near_wall(self):
        hit, d = check_collision(0.30, 10.0, empty_world(), 0.35)
        assert hit and d == pytest.approx(0.30)

    def test_inside_obstacle(self):
        world = WorldSpec("b", (0.0, 0.0, 20.0, 20.0), [Obstacle.box(4.0, 4.0, 6.0, 6.0)])
        assert check_collision(5.0, 5.0, world, 0.35) == (True, 0.0)

    def test_matches_dense_sampling(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            world, p = random_scene(rng)
            _, d = check_collision(p[0], p[1], world, 0.35)
            assert abs(d - dense_boundary_distance(p, world)) < 1e-3

    def test_point_in_triangle(self):
        tri = [(0, 0), (2, 0), (1, 2)]
        assert point_in_polygon((1, 0.5), tri)
        assert not point_in_polygon((2, 2), tri)


class TestObservation:
    def state(self, **kw):
        base = dict(x=0.0, y=0.0, theta=0.0, v=0.05, w=0.0, g_dis=6.0, g_dir=0.0,
                    scan=np.full(18, 40.0), o_dis=5.0)
        base.update(kw)
        return RobotState(**base)

    def test_goal_distance_cap(self):
        obs, _ = make_observation(self.state(), KIN, ObservationConfig(g_dis_cap=20.0), 99.0)
        assert obs[0] == pytest.approx(0.3)

    def test_zero_direction_splits_to_zero(self):
        obs, _ = make_observation(self.state(), KIN, ObservationConfig(), 20.0)
        assert obs[1] == obs[2] == 0.0

    def test_sign_split(self):
        obs, _ = make_observation(self.state(g_dir=-math.pi / 2, w=KIN.w_max), KIN, ObservationConfig(), 20.0)
        assert (obs[1], obs[2]) == (0.0, 0.5)
        assert (obs[4], obs[5]) == (1.0, 0.0)

    def test_scan_endpoints(self):
        scan = np.full(18, 0.2)
        scan[3] = 40.0
        obs, _ = make_observation(self.state(scan=scan), KIN, ObservationConfig(), 20.0)
        assert obs[6 + 3] == 1.0 and obs[6] == 0.0

    def test_scan_cap(self):
        scan = np.full(18, 2.6)
        obs, clipped = make_observation(self.state(scan=scan), KIN, ObservationConfig(scan_cap=5.0), 20.0)
        assert obs[6] == pytest.approx(0.5) and not clipped

    def test_clamp_flagged(self):
        obs, clipped = make_observation(self.state(g_dis=30.0), KIN, ObservationConfig(), 20.0)
        assert obs[0] == 1.0 and clipped

    @given(st.floats(0, 50), st.floats(-np.pi, np.pi), st.floats(0, 1), st.floats(-3, 3))
    def test_channels_in_unit_interval(self, g_dis, g_dir, v, w):
        obs, _ = make_observation(self.state(g_dis=g_dis, g_dir=g_dir, v=v, w=w), KIN, ObservationConfig(), 14.0)
        assert obs.shape == (24,) and np.all((obs >= 0) & (obs <= 1))


class TestSampling:
    def test_degenerate_regions(self, rng):
        world = WorldSpec("p", (0.0, 0.0, 20.0, 20.0), start_regions=[(3.0, 3.0, 3.0, 3.0)],
                          goal_regions=[(10.0, 3.0, 10.0, 3.0)], min_separation=6.0)
        start, goal = sample_episode(world, rng)
        assert start[:2] == (3.0, 3.0) and goal == (10.0, 3.0)

    def test_separation_sweep(self):
        world = bundled_world("paper_test")
        world = WorldSpec.from_dict({**world.to_dict(), "min_separation": 6.0})
        rng = np.random.default_rng(0)
        for _ in range(10_000):
            s, g = sample_episode(world, rng)
            assert math.dist(s[:2], g) >= 6.0

    def test_rejects_obstacle_interior(self, rng):
        world = WorldSpec("o", (0.0, 0.0, 10.0, 10.0), [Obstacle.box(0.0, 0.0, 5.0, 10.0)])
        for _ in range(200):
            s, g = sample_episode(world, rng)
            assert s[0] > 5.0 and g[0] > 5.0

    def test_impossible_raises(self, rng):
        world = WorldSpec("tiny", (0.0, 0.0, 2.0, 2.0), min_separation=5.0)
        with pytest.raises(WorldConfigError):
            sample_episode(world, rng, max_attempts=100)

    def test_seeded(self):
        world = bundled_world("desk_env1")
        a = [sample_episode(world, np.random.default_rng(4)) for _ in range(3)]
        assert a[0] == a[1] == a[2]


class TestWorldFiles:
    @pytest.mark.parametrize("name", BUNDLED)
    def test_round_trip(self, name, tmp_path):
        w = bundled_world(name)
        w.save(tmp_path / "w.json")
        assert WorldSpec.load(tmp_path / "w.json").to_dict() == w.to_dict()

    def test_obstacle_shapes_in_test_worlds(self):
        kinds = {len(o.points) for o in bundled_world("paper_test").obstacles if o.kind == "polygon"}
        assert 3 in kinds and 6 in kinds

    @pytest.mark.parametrize("bad", [
        {"format": "other"},
        {"format": "sddpg-world/1", "bounds": [0, 0, -1, 5]},
        {"format": "sddpg-world/1", "bounds": [0, 0, 5, 5], "obstacles": [{"type": "blob"}]},
        {"format": "sddpg-world/1", "bounds": [0, 0, 5, 5],
         "obstacles": [{"type": "box", "min": [4, 4], "max": [6, 6]}]},
        {"format": "sddpg-world/1"},
    ])
    def test_malformed(self, bad):
        with pytest.raises(WorldConfigError):
            WorldSpec.from_dict(bad)

    def test_unknown_bundled(self):
        with pytest.raises(WorldConfigError):
            bundled_world("nowhere")
