"""Deterministic swarm-entrapment simulation.

The engine owns the world: ground-truth bodies, camera sensing, target
escape policies, failure injection and kinematics.  Each captor is a
sealed AgentRuntime that receives nothing but its own pose and its own
camera detections; everything else it knows (tracked objects, morphogen
fields, the behavior state) lives inside the runtime.  That one-way
interface is the whole point of the control scheme: captors coordinate
through what they see, never through shared state.

A tick runs sense -> decide -> log -> integrate -> collide.  Decisions
for different captors are independent, so they may be computed in a
thread pool; the engine feeds per-captor RNG streams and gathers results
by index, which keeps single-threaded and parallel runs byte-identical.
"""

from __future__ import annotations

import csv
import math
import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .calibration import analytic_distance_model
from .camera import CameraRig, Detection, NoiseModel, sense
from .estimation import PowerLawFit, decompose
from .fsm import AgentBehavior, BehaviorParams, BehaviorState, act
from .grn import (
    FieldGrid,
    GrnParams,
    PatternUnavailableError,
    ambient_level,
    concentration_at,
    extract_pattern,
    fallback_circle_pattern,
    fuse,
    solve_source_field,
)
from .localmap import LocalMap, associate, ego_shift, snapshot
from .planner import PlannerParams, SamplingScheme
from .world import (
    Body,
    BodyKind,
    Pose3,
    WorldState,
    check_collisions,
    step_kinematics,
)

LANDING_SPEED = 1.0  # m/s descent of a failed captor


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class StaticPolicy:
    """Target never moves."""


@dataclass(frozen=True)
class WaypointsPolicy:
    """Scripted dash through waypoints, e.g. a staged escape attempt."""

    waypoints: tuple[tuple[float, float, float], ...]
    speed: float
    start_tick: int = 0


@dataclass(frozen=True)
class EvadePolicy:
    """Flee along the summed repulsion from nearby captors.

    gain is the escape speed in m/s; captors beyond trigger_radius are
    ignored, and a balanced encirclement cancels itself out.  The target
    holds still until start_tick, so a run can open against a static
    target and turn reactive once the swarm has had time to close in.
    """

    gain: float = 1.0
    trigger_radius: float = 5.0
    start_tick: int = 0


TargetPolicy = StaticPolicy | WaypointsPolicy | EvadePolicy


@dataclass(frozen=True)
class TargetSpec:
    pose: Pose3
    policy: TargetPolicy = StaticPolicy()
    max_speed: float = 1.0
    radius: float = 0.35


@dataclass(frozen=True)
class ObstacleSpec:
    center: tuple[float, float]
    radius: float = 0.4
    height: float = 4.0


@dataclass(frozen=True)
class Scenario:
    """Everything a run needs; JSON-serializable via the scenarios module."""

    name: str
    bounds: tuple[tuple[float, float], tuple[float, float]]
    captors: tuple[Pose3, ...]
    targets: tuple[TargetSpec, ...]
    obstacles: tuple[ObstacleSpec, ...] = ()
    noise: NoiseModel = NoiseModel()
    grn: GrnParams = GrnParams()
    scheme: SamplingScheme = SamplingScheme()
    planner: PlannerParams = PlannerParams()
    behavior: BehaviorParams = BehaviorParams()
    rig: CameraRig = CameraRig()
    dt: float = 0.05
    max_ticks: int = 400
    seed: int = 0
    failures: tuple[tuple[int, int], ...] = ()  # (tick, captor_id)
    captor_max_speed: float = 5.0
    captor_radius: float = 0.35
    latency_ticks: int = 0


@dataclass
class RunLog:
    """Everything recorded from one run, CSV-writable and replayable."""

    scenario: Scenario
    # (tick, body_id, kind, state, x, y, z, vx, vy, vz, c_current, c_pattern)
    rows: list[tuple]
    # (tick, id_a, id_b, kind_a, kind_b, distance); all touching pairs,
    # captor-target contact included, so consumers filter by kind
    collisions: list[tuple]
    # (tick, observer_id, camera_index, cx, cy, w_px, h_px, kind)
    detections: list[tuple]
    # (tick, captor_id, mean_radius, level, fallback, ext_x, ext_y, off_x, off_y)
    patterns: list[tuple]
    # (tick, t_grid, o_grid, n_grid, m_grid) for the recorded captor
    fields: list[tuple] = field(default_factory=list)


def validate_scenario(sc: Scenario) -> None:
    (xmin, xmax), (ymin, ymax) = sc.bounds
    if not (xmin < xmax and ymin < ymax):
        raise ScenarioError("bounds must span a nonempty rectangle")
    if not sc.targets:
        raise ScenarioError("at least one target is required")
    if sc.dt <= 0 or sc.max_ticks < 1:
        raise ScenarioError("dt must be positive and max_ticks at least 1")
    if sc.latency_ticks < 0:
        raise ScenarioError("latency_ticks cannot be negative")
    if sc.captor_max_speed <= 0:
        raise ScenarioError("captor max speed must be positive")

    def inside(p) -> bool:
        return xmin <= p[0] <= xmax and ymin <= p[1] <= ymax

    for i, pose in enumerate(sc.captors):
        if not inside(pose.position):
            raise ScenarioError(f"captor {i} starts outside the bounds")
    for i, ts in enumerate(sc.targets):
        if not inside(ts.pose.position):
            raise ScenarioError(f"target {i} starts outside the bounds")
        if isinstance(ts.policy, WaypointsPolicy):
            if ts.policy.speed > ts.max_speed + 1e-9:
                raise ScenarioError(f"target {i} waypoint speed exceeds its max speed")
            if not ts.policy.waypoints:
                raise ScenarioError(f"target {i} waypoint list is empty")
        if isinstance(ts.policy, EvadePolicy) and ts.policy.gain > ts.max_speed + 1e-9:
            raise ScenarioError(f"target {i} evade gain exceeds its max speed")
    for i, ob in enumerate(sc.obstacles):
        if not inside(ob.center):
            raise ScenarioError(f"obstacle {i} sits outside the bounds")
        if ob.radius <= 0 or ob.height <= 0:
            raise ScenarioError(f"obstacle {i} needs positive radius and height")

    seen = set()
    for tick, cid in sc.failures:
        if not 0 <= cid < len(sc.captors):
            raise ScenarioError(f"failure references unknown captor {cid}")
        if not 0 <= tick < sc.max_ticks:
            raise ScenarioError(f"failure tick {tick} outside the run")
        if cid in seen:
            raise ScenarioError(f"captor {cid} fails more than once")
        seen.add(cid)

    world0 = WorldState(bodies=tuple(_initial_bodies(sc)), tick=0, dt=sc.dt)
    hits = check_collisions(world0)
    if hits:
        raise ScenarioError(f"initial layout collides: bodies {hits[0][0]} and {hits[0][1]}")


def _initial_bodies(sc: Scenario) -> list[Body]:
    bodies: list[Body] = []
    for i, pose in enumerate(sc.captors):
        bodies.append(
            Body(
                id=i,
                kind=BodyKind.CAPTOR,
                pose=pose,
                radius=sc.captor_radius,
                max_speed=sc.captor_max_speed,
            )
        )
    base = len(sc.captors)
    for j, ts in enumerate(sc.targets):
        bodies.append(
            Body(
                id=base + j,
                kind=BodyKind.TARGET,
                pose=ts.pose,
                radius=ts.radius,
                max_speed=ts.max_speed,
            )
        )
    base += len(sc.targets)
    for k, ob in enumerate(sc.obstacles):
        bodies.append(
            Body(
                id=base + k,
                kind=BodyKind.OBSTACLE,
                pose=Pose3(np.array([ob.center[0], ob.center[1], 0.0])),
                radius=ob.radius,
                height=ob.height,
            )
        )
    return bodies


def build_distance_models(sc: Scenario) -> dict[BodyKind, PowerLawFit]:
    """Per-kind power laws from noiseless probes of the scenario's bodies."""
    models: dict[BodyKind, PowerLawFit] = {}
    captor_probe = Body(
        id=1,
        kind=BodyKind.CAPTOR,
        pose=Pose3(np.array([0.0, 0.0, -2.0])),
        radius=sc.captor_radius,
    )
    models[BodyKind.CAPTOR] = analytic_distance_model(sc.rig, captor_probe)
    target_probe = Body(
        id=1,
        kind=BodyKind.TARGET,
        pose=Pose3(np.array([0.0, 0.0, -2.0])),
        radius=sc.targets[0].radius,
    )
    models[BodyKind.TARGET] = analytic_distance_model(sc.rig, target_probe)
    if sc.obstacles:
        ob = sc.obstacles[0]
        pillar_probe = Body(
            id=1,
            kind=BodyKind.OBSTACLE,
            pose=Pose3(np.array([0.0, 0.0, 0.0])),
            radius=ob.radius,
            height=ob.height,
        )
        models[BodyKind.OBSTACLE] = analytic_distance_model(sc.rig, pillar_probe)
    return models


@dataclass
class AgentDecision:
    velocity: np.ndarray
    state: BehaviorState
    c_current: float
    c_pattern: float
    pattern_radius: float
    pattern_fallback: bool
    # World-frame footprint of the extracted contour: x/y extents and the
    # offset of its vertex centroid from the target.  nan when no pattern.
    pattern_ext: tuple[float, float] = (float("nan"), float("nan"))
    pattern_offset: tuple[float, float] = (float("nan"), float("nan"))


class AgentRuntime:
    """One captor's sealed perception-to-command pipeline.

    step() is the only entry point and takes the captor's own pose plus
    its camera detections, nothing else.
    """

    def __init__(
        self,
        captor_id: int,
        scenario: Scenario,
        models: dict[BodyKind, PowerLawFit],
        rng: np.random.Generator,
        record_fields: bool = False,
    ):
        self.captor_id = captor_id
        self.scenario = scenario
        self.models = models
        self.rng = rng
        self.behavior = AgentBehavior(params=scenario.behavior)
        self.lmap = LocalMap(dt=scenario.dt)
        self.failed = False
        self.record_fields = record_fields
        self.last_fields: tuple | None = None
        self._prev_pose: Pose3 | None = None
        self._pending: deque[tuple[Pose3, list[Detection]]] = deque()
        self._grid = FieldGrid.centered(scenario.grn.grid_n, scenario.grn.grid_h)
        self._zero = self._grid.with_values(np.zeros_like(self._grid.values))
        self._ambient = ambient_level(scenario.grn)

    def _localize(self, detections: list[Detection]):
        dets, rels = [], []
        for det in detections:
            model = self.models.get(det.kind)
            if model is None:
                continue
            # Pillar boxes are clipped vertically at close range, so their
            # distance comes from the width alone; everything else keeps
            # the full box area as the cue.
            if det.kind is BodyKind.OBSTACLE:
                measure = det.w_px * det.w_px
            else:
                measure = det.area
            rels.append(decompose(det, model.predict(measure), self.scenario.rig))
            dets.append(det)
        return dets, rels

    def step(self, pose: Pose3, detections: list[Detection]) -> AgentDecision:
        sc = self.scenario
        if sc.latency_ticks > 0:
            # Process the frame the link just delivered: detections AND the
            # pose they were captured from, so the map stays self-consistent.
            self._pending.append((pose, detections))
            if len(self._pending) > sc.latency_ticks:
                pose, detections = self._pending.popleft()
            else:
                detections = []

        if self._prev_pose is not None:
            ego_shift(self.lmap, self._prev_pose, pose, sc.rig)
        self._prev_pose = pose

        dets, rels = self._localize(detections)
        associate(self.lmap, dets, rels)
        targets, obstacles, neighbors = snapshot(self.lmap)

        m_field = None
        if targets or obstacles or neighbors or self.record_fields:
            f_t = (
                solve_source_field([t[:2] for t in targets], self._grid, sc.grn)
                if targets
                else self._zero
            )
            f_o = (
                solve_source_field([o[:2] for o in obstacles], self._grid, sc.grn)
                if obstacles
                else self._zero
            )
            f_n = (
                solve_source_field(
                    [nb[:2] for nb in neighbors],
                    self._grid,
                    sc.grn,
                    amplitude=sc.grn.neighbor_amplitude,
                )
                if neighbors
                else self._zero
            )
            m_field = fuse(f_t, f_o, f_n, sc.grn)
            c_current = float(concentration_at(m_field, (0.0, 0.0)))
            if self.record_fields:
                self.last_fields = (f_t, f_o, f_n, m_field)
        else:
            c_current = self._ambient

        pattern = None
        nearest = None
        if targets:
            nearest = min(targets, key=lambda t: float(np.hypot(t[0], t[1])))
            try:
                pattern = extract_pattern(m_field, nearest[:2], sc.grn)
            except PatternUnavailableError:
                pattern = fallback_circle_pattern(m_field, nearest[:2], sc.grn)

        c_pattern = pattern.level if pattern is not None else float("nan")
        nan2 = (float("nan"), float("nan"))
        ext, off = nan2, nan2
        if pattern is not None:
            # Rotate the local-frame contour into world axes so the log
            # carries orientation-free shape measurements.
            c, s = math.cos(pose.heading), math.sin(pose.heading)
            rot = np.array([[c, -s], [s, c]])  # row-vector local -> world
            verts = pattern.contour @ rot
            ext = (
                float(verts[:, 0].max() - verts[:, 0].min()),
                float(verts[:, 1].max() - verts[:, 1].min()),
            )
            centroid = verts.mean(axis=0) - np.asarray(nearest[:2], dtype=float) @ rot
            off = (float(centroid[0]), float(centroid[1]))
        self.behavior.advance(pattern is not None, c_current, c_pattern)

        velocity, _ = act(
            self.behavior,
            pose,
            m_field,
            c_current,
            c_pattern,
            float(nearest[2]) if nearest is not None else None,
            sc.scheme,
            sc.planner,
            sc.bounds,
            sc.dt,
            sc.captor_max_speed,
            self.rng,
        )
        return AgentDecision(
            velocity=velocity,
            state=self.behavior.state,
            c_current=c_current,
            c_pattern=c_pattern,
            pattern_radius=pattern.mean_radius if pattern is not None else float("nan"),
            pattern_fallback=pattern.fallback if pattern is not None else False,
            pattern_ext=ext,
            pattern_offset=off,
        )


def evade_velocity(
    policy: EvadePolicy, target_pos: np.ndarray, captor_positions, max_speed: float
) -> np.ndarray:
    """Planar repulsion sum, normalized and scaled to the escape speed."""
    total = np.zeros(2)
    for cp in captor_positions:
        away = target_pos[:2] - cp[:2]
        if float(np.hypot(away[0], away[1])) <= policy.trigger_radius:
            total += away
    norm = float(np.hypot(total[0], total[1]))
    if norm < 1e-12:
        return np.zeros(3)
    speed = min(policy.gain, max_speed)
    return np.array([total[0] / norm * speed, total[1] / norm * speed, 0.0])


def _waypoint_velocity(
    policy: WaypointsPolicy,
    body: Body,
    wp_index: int,
    tick: int,
    dt: float,
) -> tuple[np.ndarray, int]:
    if tick < policy.start_tick or wp_index >= len(policy.waypoints):
        return np.zeros(3), wp_index
    goal = np.asarray(policy.waypoints[wp_index], dtype=float)
    offset = goal - body.pose.position
    dist = float(np.linalg.norm(offset))
    speed = min(policy.speed, body.max_speed)
    if dist <= speed * dt:
        # Arrive this tick and move on to the next waypoint.
        return offset / dt, wp_index + 1
    return offset / dist * speed, wp_index


def _pair_distance(a: Body, b: Body) -> float:
    """Distance relevant to the pair: planar against a pillar, else 3D."""
    if a.kind is BodyKind.OBSTACLE or b.kind is BodyKind.OBSTACLE:
        return float(
            np.hypot(
                a.pose.position[0] - b.pose.position[0],
                a.pose.position[1] - b.pose.position[1],
            )
        )
    return float(np.linalg.norm(a.pose.position - b.pose.position))


def _policy_name(policy: TargetPolicy) -> str:
    if isinstance(policy, EvadePolicy):
        return "evade"
    if isinstance(policy, WaypointsPolicy):
        return "waypoints"
    return "static"


def run(
    scenario: Scenario,
    *,
    parallel: bool = False,
    record_fields_for: int | None = None,
) -> RunLog:
    """Execute the scenario and return the full log.

    parallel moves captor decisions into a thread pool; the output is
    identical to the single-threaded run because every captor has its
    own RNG stream and results are gathered by captor index.
    """
    validate_scenario(scenario)
    sc = scenario
    nc = len(sc.captors)
    nt = len(sc.targets)

    streams = np.random.SeedSequence(sc.seed).spawn(2 * nc)
    sense_rngs = [np.random.default_rng(s) for s in streams[:nc]]
    behavior_rngs = [np.random.default_rng(s) for s in streams[nc:]]

    models = build_distance_models(sc) if nc else {}
    runtimes = [
        AgentRuntime(i, sc, models, behavior_rngs[i], record_fields=(i == record_fields_for))
        for i in range(nc)
    ]

    bodies = _initial_bodies(sc)
    failures_at: dict[int, list[int]] = {}
    for tick, cid in sc.failures:
        failures_at.setdefault(tick, []).append(cid)
    wp_index = [0] * nt

    (xmin, xmax), (ymin, ymax) = sc.bounds
    rows: list[tuple] = []
    collisions: list[tuple] = []
    detections_log: list[tuple] = []
    patterns: list[tuple] = []
    fields: list[tuple] = []

    pool = ThreadPoolExecutor(max_workers=min(4, nc)) if parallel and nc else None
    try:
        for tick in range(sc.max_ticks):
            for cid in failures_at.get(tick, ()):
                runtimes[cid].failed = True

            world = WorldState(bodies=tuple(bodies), tick=tick, dt=sc.dt)
            batches: list[list[Detection] | None] = []
            for i in range(nc):
                if runtimes[i].failed:
                    batches.append(None)
                    continue
                batch = sense(sc.rig, i, world, sc.noise, sense_rngs[i])
                batches.append(batch)
                for det in batch:
                    detections_log.append(
                        (tick, i, det.camera_index, det.cx, det.cy, det.w_px, det.h_px, det.kind.value)
                    )

            def decide(i: int) -> AgentDecision | None:
                if runtimes[i].failed:
                    return None
                return runtimes[i].step(bodies[i].pose, batches[i])

            if pool is not None:
                decisions = list(pool.map(decide, range(nc)))
            else:
                decisions = [decide(i) for i in range(nc)]

            velocities: list[np.ndarray] = []
            for i in range(nc):
                dec = decisions[i]
                if dec is None:
                    # A failed captor descends at the landing speed until it
                    # reaches the ground, where the body itself is marked
                    # failed and step_kinematics holds it forever after.
                    z = bodies[i].pose.position[2]
                    if z < 0.0:
                        vz = min(LANDING_SPEED, -z / sc.dt)
                        velocities.append(np.array([0.0, 0.0, vz]))
                    else:
                        velocities.append(np.zeros(3))
                        if not bodies[i].failed:
                            bodies[i] = replace(bodies[i], failed=True, velocity=np.zeros(3))
                else:
                    velocities.append(dec.velocity)

            captor_positions = [bodies[i].pose.position for i in range(nc)]
            for j in range(nt):
                body = bodies[nc + j]
                policy = sc.targets[j].policy
                if isinstance(policy, EvadePolicy):
                    if tick < policy.start_tick:
                        v = np.zeros(3)
                    else:
                        v = evade_velocity(
                            policy, body.pose.position, captor_positions, body.max_speed
                        )
                elif isinstance(policy, WaypointsPolicy):
                    v, wp_index[j] = _waypoint_velocity(policy, body, wp_index[j], tick, sc.dt)
                else:
                    v = np.zeros(3)
                velocities.append(v)

            for i in range(nc):
                dec = decisions[i]
                p, v = bodies[i].pose.position, velocities[i]
                if dec is None:
                    state, cc, cp = "failed", float("nan"), float("nan")
                else:
                    state, cc, cp = dec.state.value, dec.c_current, dec.c_pattern
                    if not math.isnan(dec.pattern_radius):
                        patterns.append(
                            (
                                tick,
                                i,
                                dec.pattern_radius,
                                dec.c_pattern,
                                int(dec.pattern_fallback),
                                dec.pattern_ext[0],
                                dec.pattern_ext[1],
                                dec.pattern_offset[0],
                                dec.pattern_offset[1],
                            )
                        )
                rows.append(
                    (tick, i, "captor", state, p[0], p[1], p[2], v[0], v[1], v[2], cc, cp)
                )
                if dec is not None and runtimes[i].record_fields and runtimes[i].last_fields:
                    fields.append((tick, *runtimes[i].last_fields))
            for j in range(nt):
                body = bodies[nc + j]
                p, v = body.pose.position, velocities[nc + j]
                rows.append(
                    (
                        tick,
                        body.id,
                        "target",
                        _policy_name(sc.targets[j].policy),
                        p[0],
                        p[1],
                        p[2],
                        v[0],
                        v[1],
                        v[2],
                        float("nan"),
                        float("nan"),
                    )
                )

            commands = {
                idx: velocities[idx] for idx in range(nc + nt) if not bodies[idx].failed
            }
            stepped = step_kinematics(
                WorldState(bodies=tuple(bodies), tick=tick, dt=sc.dt), commands
            )
            # step_kinematics knows nothing about the arena; clamp to the
            # bounds and the ground here and face each mover along its track.
            bodies = []
            for b in stepped.bodies:
                if b.kind is BodyKind.OBSTACLE:
                    bodies.append(b)
                    continue
                pos = b.pose.position.copy()
                pos[0] = min(max(pos[0], xmin), xmax)
                pos[1] = min(max(pos[1], ymin), ymax)
                pos[2] = min(pos[2], 0.0)  # never below ground
                heading = b.pose.heading
                if float(np.hypot(b.velocity[0], b.velocity[1])) > 1e-9:
                    heading = math.atan2(b.velocity[0], b.velocity[1])
                bodies.append(replace(b, pose=Pose3(position=pos, heading=heading)))

            hits = check_collisions(WorldState(bodies=tuple(bodies), tick=tick + 1, dt=sc.dt))
            for id_a, id_b in hits:
                a, b = bodies[id_a], bodies[id_b]
                collisions.append(
                    (tick, id_a, id_b, a.kind.value, b.kind.value, _pair_distance(a, b))
                )
    finally:
        if pool is not None:
            pool.shutdown()

    return RunLog(
        scenario=sc,
        rows=rows,
        collisions=collisions,
        detections=detections_log,
        patterns=patterns,
        fields=fields,
    )


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def _write_csv(path: str, header: list[str], rows, force: bool) -> None:
    if os.path.exists(path) and not force:
        raise FileExistsError(f"{path} exists; pass force to overwrite")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_runlog(log: RunLog, out_dir: str, force: bool = False) -> list[str]:
    """Write run/collisions/detections/patterns CSVs; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    plan = [
        (
            "run.csv",
            ["tick", "body_id", "kind", "state", "x", "y", "z", "vx", "vy", "vz", "C_C", "C_P"],
            log.rows,
        ),
        (
            "collisions.csv",
            ["tick", "id_a", "id_b", "kind_a", "kind_b", "distance"],
            log.collisions,
        ),
        (
            "detections.csv",
            ["tick", "observer_id", "camera_index", "cx", "cy", "w_px", "h_px", "kind"],
            log.detections,
        ),
        (
            "patterns.csv",
            [
                "tick",
                "captor_id",
                "mean_radius",
                "level",
                "fallback",
                "ext_x",
                "ext_y",
                "off_x",
                "off_y",
            ],
            log.patterns,
        ),
    ]
    for name, header, rows in plan:
        path = os.path.join(out_dir, name)
        _write_csv(path, header, rows, force)
        written.append(path)
    return written


def write_field_dumps(log: RunLog, out_dir: str, force: bool = False) -> list[str]:
    """Flat per-tick CSVs of the recorded captor's four field grids."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for tick, f_t, f_o, f_n, f_m in log.fields:
        path = os.path.join(out_dir, f"fields_{tick:05d}.csv")
        n = f_t.n
        rows = []
        for i in range(n):
            for j in range(n):
                rows.append(
                    (
                        i,
                        j,
                        f_t.values[i, j],
                        f_o.values[i, j],
                        f_n.values[i, j],
                        f_m.values[i, j],
                    )
                )
        _write_csv(path, ["row", "col", "T", "O", "N", "M"], rows, force)
        written.append(path)
    return written
