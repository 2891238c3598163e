"""Behavior machine tests."""

import itertools
import math

import numpy as np
import pytest

from vgswarm import world
from vgswarm.fsm import AgentBehavior, BehaviorParams, BehaviorState, act, transition
from vgswarm.grn import (
    FieldGrid,
    GrnParams,
    concentration_at,
    extract_pattern,
    fuse,
    solve_source_field,
)
from vgswarm.planner import PlannerParams, SamplingScheme

EPS = 0.02
BOUNDS = ((-20.0, 20.0), (-20.0, 20.0))


def pose_at(x, y, z=-2.0, heading=0.0):
    return world.Pose3(position=np.array([x, y, z]), heading=heading)


def bowl_grid(cx=0.0, cy=0.0):
    grid = FieldGrid.centered(121, 0.25)
    xs = grid.origin[0] + np.arange(121) * 0.25
    x, y = np.meshgrid(xs, xs, indexing="ij")
    return grid.with_values(0.01 * ((x - cx) ** 2 + (y - cy) ** 2))


class TestTransition:
    def test_table_is_total_and_exact(self):
        non_init = [
            BehaviorState.SEARCHING,
            BehaviorState.APPROACHING,
            BehaviorState.DEPARTING,
            BehaviorState.KEEPING,
        ]
        cases = {
            1.0: BehaviorState.APPROACHING,  # C_C well above C_P
            -1.0: BehaviorState.DEPARTING,
            0.0: BehaviorState.KEEPING,
        }
        for state in non_init:
            for has_target, (diff, want) in itertools.product(
                (True, False), cases.items()
            ):
                got = transition(state, has_target, 0.5 + diff, 0.5, EPS)
                expected = want if has_target else BehaviorState.SEARCHING
                assert got is expected, (state, has_target, diff)

    def test_init_always_goes_searching(self):
        for has_target in (True, False):
            got = transition(BehaviorState.INIT, has_target, 9.0, 0.0, EPS)
            assert got is BehaviorState.SEARCHING

    def test_band_edges_inclusive(self):
        s = BehaviorState.APPROACHING
        assert transition(s, True, 0.5 + EPS, 0.5, EPS) is BehaviorState.KEEPING
        assert transition(s, True, 0.5 - EPS, 0.5, EPS) is BehaviorState.KEEPING
        just_out = math.nextafter(0.5 + EPS, 1.0)
        assert transition(s, True, just_out, 0.5, EPS) is BehaviorState.APPROACHING

    def test_advance_mutates_state(self):
        b = AgentBehavior()
        assert b.advance(False, 0.0, 0.0) is BehaviorState.SEARCHING
        assert b.advance(True, 1.0, 0.5) is BehaviorState.APPROACHING
        assert b.state is BehaviorState.APPROACHING


class TestAct:
    def test_act_from_init_raises(self):
        b = AgentBehavior()
        with pytest.raises(RuntimeError):
            act(
                b, pose_at(0, 0), None, 0.0, 0.0, None,
                SamplingScheme(), PlannerParams(), BOUNDS, 0.05, 5.0,
                np.random.default_rng(0),
            )

    def test_search_straight_with_zero_turn_noise(self):
        b = AgentBehavior(params=BehaviorParams(turn_sigma=0.0))
        b.advance(False, 0.0, 0.0)
        rng = np.random.default_rng(4)
        v1, cmd = act(b, pose_at(0, 0), None, 0.0, 0.0, None,
                      SamplingScheme(), PlannerParams(), BOUNDS, 0.05, 5.0, rng)
        v2, _ = act(b, pose_at(0.1, 0.1), None, 0.0, 0.0, None,
                    SamplingScheme(), PlannerParams(), BOUNDS, 0.05, 5.0, rng)
        assert cmd is None
        assert np.allclose(v1[:2], v2[:2])
        assert np.hypot(v1[0], v1[1]) > 4.0  # near full speed planar

    def test_search_reflects_at_bounds(self):
        b = AgentBehavior(params=BehaviorParams(turn_sigma=0.0))
        b.advance(False, 0.0, 0.0)
        b.search_heading = math.pi / 2.0  # due +x, straight at the east wall
        rng = np.random.default_rng(0)
        v, _ = act(b, pose_at(19.9, 0.0), None, 0.0, 0.0, None,
                   SamplingScheme(), PlannerParams(), BOUNDS, 0.05, 5.0, rng)
        assert v[0] < 0.0  # bounced back west

    def test_search_stays_in_bounds_long_run(self):
        b = AgentBehavior()
        b.advance(False, 0.0, 0.0)
        rng = np.random.default_rng(11)
        pose = pose_at(15.0, -12.0)
        for _ in range(3000):
            v, _ = act(b, pose, None, 0.0, 0.0, None,
                       SamplingScheme(), PlannerParams(), BOUNDS, 0.05, 5.0, rng)
            pose = world.Pose3(position=pose.position + v * 0.05, heading=pose.heading)
        margin = 1.0
        assert -20.0 - margin < pose.position[0] < 20.0 + margin
        assert -20.0 - margin < pose.position[1] < 20.0 + margin

    def test_search_holds_cruise_altitude(self):
        b = AgentBehavior()
        b.advance(False, 0.0, 0.0)
        rng = np.random.default_rng(2)
        low = pose_at(0, 0, z=-0.5)  # 0.5 m up, below the 2 m cruise height
        v, _ = act(b, low, None, 0.0, 0.0, None,
                   SamplingScheme(), PlannerParams(), BOUNDS, 0.05, 5.0, rng)
        assert v[2] < 0.0  # world z down, so climbing is negative

    def test_approach_runs_downhill_in_world_frame(self):
        # Bowl minimum 5 m to the local +x of the agent; agent heading
        # pi/2 means local +x is world -y... check the full rotation.
        b = AgentBehavior()
        b.advance(False, 0.0, 0.0)
        b.advance(True, 1.0, 0.02)
        assert b.state is BehaviorState.APPROACHING
        grid = bowl_grid(cx=5.0)
        pose = pose_at(0.0, 0.0, heading=math.pi / 2.0)
        v, cmd = act(b, pose, grid, 1.0, 0.02, 0.0,
                     SamplingScheme(), PlannerParams(), BOUNDS, 0.05, 5.0,
                     np.random.default_rng(0))
        assert cmd.theta_dir == pytest.approx(math.pi / 2.0)
        # local +x with heading pi/2 is world +... rotate (1,0) by -pi/2
        assert v[0] == pytest.approx(0.0, abs=1e-9)
        assert v[1] < 0.0

    def test_departing_negates_the_field(self):
        b = AgentBehavior()
        b.advance(False, 0.0, 0.0)
        b.advance(True, 0.0, 0.5)
        assert b.state is BehaviorState.DEPARTING
        grid = bowl_grid(cx=5.0)
        v, cmd = act(b, pose_at(0, 0), grid, 0.0, 0.5, 0.0,
                     SamplingScheme(), PlannerParams(), BOUNDS, 0.05, 5.0,
                     np.random.default_rng(0))
        # Within a couple of 2-degree rays of straight away from the bowl;
        # bilinear sampling noise legitimately wobbles the exact argmax.
        assert abs(cmd.theta_dir - 1.5 * math.pi) < 0.08
        assert v[0] < 0.0

    def test_keeping_crawls(self):
        b = AgentBehavior()
        b.advance(False, 0.0, 0.0)
        b.advance(True, 0.51, 0.5)
        assert b.state is BehaviorState.KEEPING
        v, _ = act(b, pose_at(0, 0), bowl_grid(), 0.51, 0.5, 0.0,
                   SamplingScheme(), PlannerParams(), BOUNDS, 0.05, 5.0,
                   np.random.default_rng(0))
        assert np.hypot(v[0], v[1]) <= 0.1 * 5.0 + 1e-9

    def test_altitude_servo_toward_target(self):
        b = AgentBehavior()
        b.advance(False, 0.0, 0.0)
        b.advance(True, 1.0, 0.02)
        v, cmd = act(b, pose_at(0, 0), bowl_grid(cx=5.0), 1.0, 0.02, -1.5,
                     SamplingScheme(), PlannerParams(), BOUNDS, 0.05, 5.0,
                     np.random.default_rng(0))
        assert cmd.delta_h == -1.5
        assert v[2] > 0.0  # target below, so descend (world z down)


class TestSingleAgentConvergence:
    def test_approach_settles_on_the_ring(self):
        # One static target, agent 8 m out: re-center the field each
        # tick, run transition + act, and require monotone descent of
        # C_C toward C_P after a short burn-in, ending inside the band.
        params = GrnParams()
        behavior = AgentBehavior()
        planner_params = PlannerParams()
        scheme = SamplingScheme()
        rng = np.random.default_rng(9)
        target_world = np.array([0.0, 0.0])
        pos = np.array([0.0, -8.0, -2.0])
        heading = 0.0
        dt, vmax = 0.05, 5.0
        history = []
        for _ in range(200):
            pose = world.Pose3(position=pos, heading=heading)
            rel = world.world_to_local(pose, np.array([0.0, 0.0, -2.0]))
            grid = FieldGrid.centered(params.grid_n, params.grid_h)
            t = solve_source_field([rel[:2]], grid, params)
            zero = grid.with_values(np.zeros_like(grid.values))
            m = fuse(t, zero, zero, params)
            pat = extract_pattern(m, rel[:2], params)
            c_c = concentration_at(m, (0.0, 0.0))
            c_p = pat.level
            history.append((c_c, c_p))
            behavior.advance(True, c_c, c_p)
            v, _ = act(behavior, pose, m, c_c, c_p, rel[2],
                       scheme, planner_params, BOUNDS, dt, vmax, rng)
            pos = pos + v * dt
            if behavior.state is BehaviorState.KEEPING:
                break
        assert behavior.state is BehaviorState.KEEPING
        cs = [c for c, _ in history]
        for earlier, later in zip(cs[5:], cs[6:]):
            assert later <= earlier + 1e-9
        dist = np.hypot(pos[0], pos[1])
        assert abs(dist - 4.0) < 0.5
