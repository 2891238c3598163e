"""Shared world state: poses, bodies, kinematics and collision checks.

The world frame is a fixed NED-style frame: x/y horizontal in meters, z
positive downward (altitude 2 m is z = -2).  Heading is a yaw angle in
radians; heading 0 points the nose along world +y and heading pi/2 points
it along world +x.

Each body carries a local frame used by the cameras and the field planner:
y along the nose, x to the right of the nose, z up-positive.  At heading 0
the local x/y axes coincide with the world x/y axes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

TWO_PI = 2.0 * math.pi


def normalize_angle(a: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    return (a + math.pi) % TWO_PI - math.pi


class BodyKind(enum.Enum):
    CAPTOR = "captor"
    TARGET = "target"
    OBSTACLE = "obstacle"


@dataclass(frozen=True)
class Pose3:
    """Position (world frame, meters) plus heading (radians)."""

    position: np.ndarray
    heading: float = 0.0

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        if pos.shape != (3,):
            raise ValueError(f"position must be a 3-vector, got shape {pos.shape}")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "heading", normalize_angle(float(self.heading)))


@dataclass(frozen=True)
class Body:
    """A physical body: captor, target or obstacle pillar.

    radius is the bounding-sphere radius used for projection and for
    captor/target collision tests.  Obstacles are vertical cylinders with
    the circular footprint of the same radius and a height above ground.
    """

    id: int
    kind: BodyKind
    pose: Pose3
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    radius: float = 0.35
    max_speed: float = 5.0
    height: float = 0.0  # cylinder height, obstacles only
    failed: bool = False

    def __post_init__(self):
        vel = np.asarray(self.velocity, dtype=float)
        if vel.shape != (3,):
            raise ValueError("velocity must be a 3-vector")
        object.__setattr__(self, "velocity", vel)
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.kind is BodyKind.OBSTACLE and np.any(vel != 0.0):
            raise ValueError("obstacles must have zero velocity")


@dataclass(frozen=True)
class WorldState:
    """Immutable snapshot of every body at one tick."""

    bodies: tuple[Body, ...]
    tick: int = 0
    dt: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "bodies", tuple(self.bodies))
        ids = [b.id for b in self.bodies]
        if len(set(ids)) != len(ids):
            raise ValueError("body ids must be unique")

    def body(self, body_id: int) -> Body:
        for b in self.bodies:
            if b.id == body_id:
                return b
        raise KeyError(f"no body with id {body_id}")


def _rot_world_to_local(heading: float) -> np.ndarray:
    """2x2 rotation taking world xy offsets into the local right/nose axes."""
    c, s = math.cos(heading), math.sin(heading)
    return np.array([[c, -s], [s, c]])


def world_to_local(observer: Pose3, point: np.ndarray) -> np.ndarray:
    """Express a world point in the observer's local frame.

    Local axes: x to the right of the nose, y along the nose, z up.
    """
    point = np.asarray(point, dtype=float)
    d = point - observer.position
    xy = _rot_world_to_local(observer.heading) @ d[:2]
    return np.array([xy[0], xy[1], -d[2]])


def local_to_world(observer: Pose3, point: np.ndarray) -> np.ndarray:
    """Inverse of world_to_local."""
    point = np.asarray(point, dtype=float)
    xy = _rot_world_to_local(observer.heading).T @ point[:2]
    return np.array(
        [
            observer.position[0] + xy[0],
            observer.position[1] + xy[1],
            observer.position[2] - point[2],
        ]
    )


def local_dir_to_world(heading: float, v: np.ndarray) -> np.ndarray:
    """Rotate a local-frame direction/velocity into the world frame."""
    v = np.asarray(v, dtype=float)
    xy = _rot_world_to_local(heading).T @ v[:2]
    return np.array([xy[0], xy[1], -v[2]])


def step_kinematics(world: WorldState, commands: dict[int, np.ndarray]) -> WorldState:
    """Advance one tick: clamp speeds, integrate positions.

    commands maps body id to a commanded world-frame velocity.  Obstacles
    may not be commanded.  Failed bodies ignore commands and hold position.
    """
    known = {b.id for b in world.bodies}
    for body_id in commands:
        if body_id not in known:
            raise KeyError(f"command for unknown body id {body_id}")
        if world.body(body_id).kind is BodyKind.OBSTACLE:
            raise ValueError(f"obstacle {body_id} cannot be commanded")

    new_bodies = []
    for b in world.bodies:
        if b.failed or b.kind is BodyKind.OBSTACLE:
            new_bodies.append(replace(b, velocity=np.zeros(3)))
            continue
        v = np.asarray(commands.get(b.id, b.velocity), dtype=float)
        speed = float(np.linalg.norm(v))
        if speed > b.max_speed and speed > 0.0:
            v = v * (b.max_speed / speed)
        new_bodies.append(
            replace(b, pose=replace(b.pose, position=b.pose.position + v * world.dt), velocity=v)
        )
    return WorldState(bodies=tuple(new_bodies), tick=world.tick + 1, dt=world.dt)


def _cylinder_hit(body: Body, pillar: Body) -> bool:
    """Sphere-vs-vertical-cylinder overlap test."""
    dxy = body.pose.position[:2] - pillar.pose.position[:2]
    if float(np.hypot(dxy[0], dxy[1])) >= body.radius + pillar.radius:
        return False
    alt = -body.pose.position[2]
    return -body.radius <= alt <= pillar.height + body.radius


def check_collisions(world: WorldState) -> list[tuple[int, int]]:
    """Return colliding body pairs, each ordered (low id, high id).

    Captors and targets collide as bounding spheres.  Obstacle pillars are
    treated as vertical cylinders so that a body at flight altitude still
    registers a hit when it flies into one.  Obstacle/obstacle pairs are
    ignored (static scenery).
    """
    hits = []
    bodies = sorted(world.bodies, key=lambda b: b.id)
    for i, a in enumerate(bodies):
        for b in bodies[i + 1 :]:
            if a.kind is BodyKind.OBSTACLE and b.kind is BodyKind.OBSTACLE:
                continue
            if b.kind is BodyKind.OBSTACLE:
                hit = _cylinder_hit(a, b)
            elif a.kind is BodyKind.OBSTACLE:
                hit = _cylinder_hit(b, a)
            else:
                d = float(np.linalg.norm(a.pose.position - b.pose.position))
                hit = d < a.radius + b.radius
            if hit:
                hits.append((a.id, b.id))
    return hits
