"""Per-agent behavior machine.

States: Init, Searching, Approaching, Departing, Keeping.  Transitions
compare the concentration at the agent's position (C_C) against the
pattern level (C_P): too high means the agent is outside the contour
and should move down the field, too low means it is inside the safety
region and should back out, and a small band around C_P means hold.
Losing every target record drops the agent back to Searching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import world
from .grn import FieldGrid
from .planner import (
    MotionCommand,
    PlannerParams,
    SamplingScheme,
    clamp_velocity,
    dynamic_step,
    make_command,
    select_direction,
)


class BehaviorState(Enum):
    INIT = "init"
    SEARCHING = "searching"
    APPROACHING = "approaching"
    DEPARTING = "departing"
    KEEPING = "keeping"


@dataclass(frozen=True)
class BehaviorParams:
    epsilon_c: float = 0.02
    turn_sigma: float = math.radians(15.0)
    cruise_alt: float = 2.0  # meters above ground


def transition(
    state: BehaviorState,
    has_target: bool,
    c_current: float,
    c_pattern: float,
    epsilon: float,
) -> BehaviorState:
    """Next state; total over all inputs, no hysteresis."""
    if state is BehaviorState.INIT:
        return BehaviorState.SEARCHING
    if not has_target:
        return BehaviorState.SEARCHING
    if c_current > c_pattern + epsilon:
        return BehaviorState.APPROACHING
    if c_current < c_pattern - epsilon:
        return BehaviorState.DEPARTING
    return BehaviorState.KEEPING


@dataclass
class AgentBehavior:
    params: BehaviorParams = BehaviorParams()
    state: BehaviorState = BehaviorState.INIT
    search_heading: float | None = None

    def advance(self, has_target: bool, c_current: float, c_pattern: float) -> BehaviorState:
        self.state = transition(
            self.state, has_target, c_current, c_pattern, self.params.epsilon_c
        )
        return self.state


def _search_velocity(
    behavior: AgentBehavior,
    pose: world.Pose3,
    bounds,
    max_speed: float,
    planner_params: PlannerParams,
    dt: float,
    rng: np.random.Generator,
) -> np.ndarray:
    if behavior.search_heading is None:
        behavior.search_heading = float(rng.uniform(0.0, 2.0 * math.pi))
    heading = behavior.search_heading + float(rng.normal(0.0, behavior.params.turn_sigma))

    (xmin, xmax), (ymin, ymax) = bounds
    lookahead = max(1.0, max_speed * dt * 4.0)
    for _ in range(2):  # a corner can need both reflections
        nx = pose.position[0] + lookahead * math.sin(heading)
        ny = pose.position[1] + lookahead * math.cos(heading)
        if nx < xmin or nx > xmax:
            heading = -heading
        elif ny < ymin or ny > ymax:
            heading = math.pi - heading
        else:
            break
    heading = world.normalize_angle(heading)
    behavior.search_heading = heading

    altitude = -pose.position[2]
    climb = np.clip(
        planner_params.k_scale * (behavior.params.cruise_alt - altitude) / dt,
        -planner_params.max_climb,
        planner_params.max_climb,
    )
    v = np.array(
        [max_speed * math.sin(heading), max_speed * math.cos(heading), -float(climb)]
    )
    return clamp_velocity(v, max_speed)


def act(
    behavior: AgentBehavior,
    pose: world.Pose3,
    m_field: FieldGrid | None,
    c_current: float,
    c_pattern: float,
    target_rel_z: float | None,
    scheme: SamplingScheme,
    planner_params: PlannerParams,
    bounds,
    dt: float,
    max_speed: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, MotionCommand | None]:
    """World-frame velocity for the current state.

    Searching ignores the field and random-walks inside the bounds; the
    other states run the sampling planner on the agent-centered field.
    Returns (world velocity, MotionCommand or None for search moves).
    """
    state = behavior.state
    if state is BehaviorState.INIT:
        raise RuntimeError("act called before the first transition")

    if state is BehaviorState.SEARCHING:
        v = _search_velocity(behavior, pose, bounds, max_speed, planner_params, dt, rng)
        return v, None

    theta = select_direction(
        m_field, scheme, negate=(state is BehaviorState.DEPARTING)
    )
    s_max = max_speed * dt
    step = dynamic_step(c_current, c_pattern, s_max, planner_params.delta_ref)
    if target_rel_z is not None:
        delta_h = target_rel_z
    else:
        delta_h = behavior.params.cruise_alt - (-pose.position[2])
    cmd = make_command(theta, step, delta_h, dt, max_speed, planner_params)
    v_world = world.local_dir_to_world(pose.heading, cmd.velocity)
    return v_world, cmd
