"""Tests for shipped scenario presets, spawning, and JSON persistence."""

import dataclasses
import json
import math

import numpy as np
import pytest

from vgswarm.scenarios import (
    PRESET_NAMES,
    SIM_MAX_SPEED,
    build_preset,
    load_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    spawn_ring,
)
from vgswarm.sim import (
    EvadePolicy,
    ScenarioError,
    StaticPolicy,
    WaypointsPolicy,
    validate_scenario,
)


def test_spawn_ring_exact_distance_and_spacing():
    rng = np.random.default_rng(11)
    for _ in range(25):
        n = int(rng.integers(3, 9))
        d = float(rng.uniform(6.0, 12.0))
        poses = spawn_ring(rng, n, d, target_xy=(2.0, -1.0))
        assert len(poses) == n
        for p in poses:
            r = math.hypot(p.position[0] - 2.0, p.position[1] + 1.0)
            assert abs(r - d) < 1e-9
        for i in range(n):
            for j in range(i + 1, n):
                gap = math.hypot(
                    poses[i].position[0] - poses[j].position[0],
                    poses[i].position[1] - poses[j].position[1],
                )
                assert gap >= 2.0


def test_spawn_ring_faces_target():
    rng = np.random.default_rng(4)
    for p in spawn_ring(rng, 5, 8.0, target_xy=(1.0, 3.0)):
        want = math.atan2(1.0 - p.position[0], 3.0 - p.position[1])
        assert abs(p.heading - want) < 1e-12


def test_spawn_ring_fan_stays_in_sector():
    rng = np.random.default_rng(9)
    for _ in range(10):
        poses = spawn_ring(rng, 4, 10.0, bearing_center=math.pi, bearing_spread=0.45)
        for p in poses:
            # bearing measured from the target back to the captor
            b = math.atan2(p.position[0], p.position[1])
            off = abs((b - math.pi + math.pi) % (2.0 * math.pi) - math.pi)
            assert off <= 0.45 + 1e-12


def test_spawn_ring_respects_keep_clear():
    rng = np.random.default_rng(2)
    clear = [(10.0, 0.0, 3.0), (-10.0, 0.0, 3.0)]
    for _ in range(10):
        for p in spawn_ring(rng, 6, 10.0, keep_clear=clear):
            for cx, cy, cr in clear:
                assert math.hypot(p.position[0] - cx, p.position[1] - cy) >= cr


def test_spawn_ring_impossible_raises():
    rng = np.random.default_rng(0)
    # 30 bodies 2 m apart do not fit on a 3 m radius circle
    with pytest.raises(ScenarioError):
        spawn_ring(rng, 30, 3.0)


def test_all_presets_validate():
    for name in PRESET_NAMES:
        for seed in (0, 3, 17):
            validate_scenario(build_preset(name, seed))


def test_unknown_preset_rejected():
    with pytest.raises(ScenarioError, match="unknown preset"):
        build_preset("open-99v1")


def test_distance_override():
    sc = build_preset("open-4v1", 5, distance=14.0)
    for p in sc.captors:
        assert abs(math.hypot(p.position[0], p.position[1]) - 14.0) < 1e-9


def test_profiles_set_speed_cap():
    assert build_preset("open-4v1", 0, profile="sim").captor_max_speed == SIM_MAX_SPEED
    assert build_preset("open-4v1", 0, profile="real").captor_max_speed == 1.0
    with pytest.raises(ScenarioError):
        build_preset("open-4v1", 0, profile="hover")


def test_preset_spawns_vary_with_seed():
    a = build_preset("open-4v1", 0).captors
    b = build_preset("open-4v1", 1).captors
    assert any(
        np.any(pa.position != pb.position) for pa, pb in zip(a, b)
    )


def test_wide_standoff_preset_upgrades_field():
    sc = build_preset("open-10v1", 0)
    assert sc.grn.safe_distance == 3.5
    assert sc.grn.grid_n == 161
    assert len(sc.captors) == 10


def test_failure_preset_grounds_three():
    sc = build_preset("failure-injection", 0)
    assert sc.failures == ((120, 0), (150, 1), (180, 2))
    assert all(cid < len(sc.captors) for _, cid in sc.failures)


def test_obstacle_presets_keep_target_clearance():
    # pillars closer than 7 m would swallow the standoff disc
    for name in ("narrow-parallel", "narrow-conical", "random-obstacles"):
        for seed in range(6):
            sc = build_preset(name, seed)
            tx, ty = sc.targets[0].pose.position[:2]
            for o in sc.obstacles:
                assert math.hypot(o.center[0] - tx, o.center[1] - ty) >= 7.0 - 1e-9


def test_escape_preset_scripts_a_dash():
    sc = build_preset("open-4v1-escape", 0)
    pol = sc.targets[0].policy
    assert isinstance(pol, WaypointsPolicy)
    assert pol.start_tick > 0
    assert pol.speed > 1.0
    assert sc.max_ticks > pol.start_tick + 300  # room for recapture


def test_round_trip_every_preset():
    for name in PRESET_NAMES:
        sc = build_preset(name, 7)
        wire = json.dumps(scenario_to_dict(sc))
        back = scenario_from_dict(json.loads(wire))
        assert scenario_to_dict(back) == scenario_to_dict(sc)


def test_round_trip_each_policy_kind():
    for pol in (
        StaticPolicy(),
        WaypointsPolicy(waypoints=((1.0, 2.0, -2.0), (3.0, 4.0, -2.0)), speed=0.8, start_tick=5),
        EvadePolicy(gain=0.7, trigger_radius=4.0),
    ):
        sc = build_preset("open-4v1", 0)
        sc = dataclasses.replace(
            sc, targets=(dataclasses.replace(sc.targets[0], policy=pol, max_speed=3.0),)
        )
        back = scenario_from_dict(scenario_to_dict(sc))
        assert back.targets[0].policy == pol


def test_from_dict_fills_defaults():
    sc = build_preset("open-4v1", 0)
    d = scenario_to_dict(sc)
    for key in ("noise", "grn", "scheme", "planner", "behavior", "rig",
                "obstacles", "failures", "seed", "dt"):
        d.pop(key)
    back = scenario_from_dict(d)
    assert back.dt == 0.05
    assert back.obstacles == ()
    assert back.grn.safe_distance == sc.grn.safe_distance
    validate_scenario(back)


def test_save_load_file(tmp_path):
    path = str(tmp_path / "sc.json")
    sc = build_preset("narrow-conical", 3)
    save_scenario(sc, path)
    assert scenario_to_dict(load_scenario(path)) == scenario_to_dict(sc)
    with pytest.raises(FileExistsError):
        save_scenario(sc, path)
    save_scenario(build_preset("open-4v1", 0), path, force=True)
    assert load_scenario(path).name == "open-4v1"
