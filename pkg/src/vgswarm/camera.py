"""Four-camera omnidirectional detection model.

Each captor carries four fixed cameras whose optical axes point at yaw
0, 90, 180 and 270 degrees from the nose, together covering the full
horizontal circle.  A detector is simulated per camera: every body that
is in front of the lens, inside the field of view, inside detection
range and not hidden behind an obstacle pillar yields one bounding box.

The projection maps the direction sine to pixels: a body whose lateral
offset in the camera frame is X at straight-line distance D lands at
pixel offset

    cx = X * width / (2 * D * sin(fov_h / 2))

and likewise for the vertical offset.  Inverting that mapping with the
known distance recovers the camera-frame offsets exactly, which is what
the position decomposition downstream relies on.  Box extents follow the
same scale, so box area falls off as 1 / D**2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .world import Body, BodyKind, Pose3, WorldState, world_to_local


@dataclass(frozen=True)
class CameraRig:
    """Geometry of the four-camera rig."""

    mount_yaws: tuple[float, ...] = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)
    fov_h: float = 2 * math.pi / 3
    fov_v: float = math.pi / 2
    width: int = 640
    height: int = 480
    rate_hz: float = 20.0

    @property
    def sin_half_h(self) -> float:
        return math.sin(self.fov_h / 2)

    @property
    def sin_half_v(self) -> float:
        return math.sin(self.fov_v / 2)


@dataclass(frozen=True)
class NoiseModel:
    """Detector imperfections applied to every emitted box."""

    sigma_px: float = 2.0
    p_miss: float = 0.05
    p_false: float = 0.0
    range_m: float = 10.0


QUIET_NOISE = NoiseModel(sigma_px=0.0, p_miss=0.0, p_false=0.0)


@dataclass(frozen=True)
class Detection:
    """One bounding box in one camera, offsets from the image center.

    cy grows upward: a body above the boresight has positive cy.
    """

    camera_index: int
    cx: float
    cy: float
    w_px: float
    h_px: float
    kind: BodyKind
    tick: int

    @property
    def area(self) -> float:
        return self.w_px * self.h_px


def _to_camera_frame(local_xy: np.ndarray, mount_yaw: float) -> tuple[float, float]:
    c, s = math.cos(mount_yaw), math.sin(mount_yaw)
    x, y = float(local_xy[0]), float(local_xy[1])
    return c * x - s * y, s * x + c * y


def segment_blocked_by_pillar(
    p0: np.ndarray, p1: np.ndarray, pillar: Body
) -> bool:
    """True when the segment p0 -> p1 (world frame) passes through the pillar.

    The pillar is a vertical cylinder standing on the ground (world z = 0)
    with the body's footprint radius and height.
    """
    c = pillar.pose.position[:2]
    d = p1[:2] - p0[:2]
    f = p0[:2] - c
    a = float(d @ d)
    r2 = pillar.radius * pillar.radius
    if a < 1e-12:
        if float(f @ f) >= r2:
            return False
        t0, t1 = 0.0, 1.0
    else:
        b = float(f @ d)
        cterm = float(f @ f) - r2
        disc = b * b - a * cterm
        if disc <= 0.0:
            return False
        sq = math.sqrt(disc)
        t0 = max((-b - sq) / a, 0.0)
        t1 = min((-b + sq) / a, 1.0)
        if t0 >= t1:
            return False
    alt0 = -(p0[2] + t0 * (p1[2] - p0[2]))
    alt1 = -(p0[2] + t1 * (p1[2] - p0[2]))
    lo, hi = min(alt0, alt1), max(alt0, alt1)
    return hi >= 0.0 and lo <= pillar.height


def _is_occluded(observer: Pose3, body: Body, world: WorldState) -> bool:
    for other in world.bodies:
        if other.kind is not BodyKind.OBSTACLE or other.id == body.id:
            continue
        if segment_blocked_by_pillar(observer.position, body.pose.position, other):
            return True
    return False


def project(
    rig: CameraRig,
    camera_index: int,
    observer: Pose3,
    body: Body,
    noise: NoiseModel,
    rng: np.random.Generator | None = None,
    world: WorldState | None = None,
    tick: int = 0,
) -> Detection | None:
    """Project one body into one camera; None when not detected.

    With rng omitted (or sigma_px = 0 and p_miss = 0) the output is the
    exact noise-free projection.  A body whose box would poke past a
    vertical frame edge is not reported by this camera at all: box size
    is the range cue, and a clipped box reads as a body much farther
    away.  The seams overlap by thirty degrees, so a body near a seam
    still fits whole in the adjacent camera down to roughly arm's
    length.  Obstacles are the exception vertically: a pillar fills the
    frame top to bottom at close range no matter what, so its box is
    clipped vertically and only its width is trusted for distance.
    """
    mount = rig.mount_yaws[camera_index]
    if body.kind is BodyKind.OBSTACLE:
        base = world_to_local(observer, body.pose.position)
        top_off = np.array([0.0, 0.0, -body.height])
        top = world_to_local(observer, body.pose.position + top_off)
        x_cam, y_cam = _to_camera_frame(base[:2], mount)
        z_mid = 0.5 * (base[2] + top[2])
        dist = math.sqrt(x_cam * x_cam + y_cam * y_cam + z_mid * z_mid)
        if dist < 1e-9 or y_cam <= 0.0 or dist > noise.range_m:
            return None
        cx = (x_cam / dist) * rig.width / (2 * rig.sin_half_h)
        cy = (z_mid / dist) * rig.height / (2 * rig.sin_half_v)
        w = body.radius * rig.width / (dist * rig.sin_half_h)
        h = abs(top[2] - base[2]) / dist * rig.height / (2 * rig.sin_half_v)
    else:
        local = world_to_local(observer, body.pose.position)
        x_cam, y_cam = _to_camera_frame(local[:2], mount)
        z_cam = float(local[2])
        dist = math.sqrt(x_cam * x_cam + y_cam * y_cam + z_cam * z_cam)
        if dist < 1e-9 or y_cam <= 0.0 or dist > noise.range_m:
            return None
        cx = (x_cam / dist) * rig.width / (2 * rig.sin_half_h)
        cy = (z_cam / dist) * rig.height / (2 * rig.sin_half_v)
        w = body.radius * rig.width / (dist * rig.sin_half_h)
        h = body.radius * rig.height / (dist * rig.sin_half_v)

    if abs(cx) + w / 2 > rig.width / 2:
        return None
    if body.kind is not BodyKind.OBSTACLE and abs(cy) + h / 2 > rig.height / 2:
        return None
    if world is not None and _is_occluded(observer, body, world):
        return None

    if rng is not None:
        if noise.p_miss > 0.0 and rng.random() < noise.p_miss:
            return None
        if noise.sigma_px > 0.0:
            jitter = rng.normal(0.0, noise.sigma_px, size=4)
            cx += jitter[0]
            cy += jitter[1]
            w = max(w + jitter[2], 1.0)
            h = max(h + jitter[3], 1.0)

    # Pixel jitter may push the box a hair past the edge; trim it back.
    left = max(cx - w / 2, -rig.width / 2)
    right = min(cx + w / 2, rig.width / 2)
    bottom = max(cy - h / 2, -rig.height / 2)
    top_edge = min(cy + h / 2, rig.height / 2)
    if right - left < 1e-9 or top_edge - bottom < 1e-9:
        return None
    return Detection(
        camera_index=camera_index,
        cx=(left + right) / 2,
        cy=(bottom + top_edge) / 2,
        w_px=right - left,
        h_px=top_edge - bottom,
        kind=body.kind,
        tick=tick,
    )


def predict_box(
    rig: CameraRig,
    local_pos: np.ndarray,
    w_px: float,
    h_px: float,
    old_dist: float,
    prefer_camera: int | None = None,
    fit_height: bool = True,
) -> tuple[int, float, float, float, float] | None:
    """Expected (camera_index, cx, cy, w, h) for a tracked local position.

    Used to carry a stored box across the observer's own motion: the
    center is re-projected from the transformed position and the extents
    are scaled by the distance ratio.  Returns None when the point falls
    outside every camera.

    Adjacent fields of view overlap near the seams, so a point is often
    visible to two cameras at once.  prefer_camera keeps the box on the
    camera that has been tracking it; without that stickiness a record
    would hop to whichever camera enumerates first and stop matching the
    detections of the camera it actually came from.

    fit_height mirrors the detector's edge rule: with it set (the
    default, for bodies reported whole) a camera whose frame the box
    would overflow is skipped; without it (obstacles) the predicted box
    is clipped vertically just as the detector clips theirs.
    """
    p = np.asarray(local_pos, dtype=float)
    dist = float(np.linalg.norm(p))
    if dist < 1e-9 or old_dist <= 0.0:
        return None
    order = list(range(len(rig.mount_yaws)))
    if prefer_camera is not None and 0 <= prefer_camera < len(order):
        order.remove(prefer_camera)
        order.insert(0, prefer_camera)
    for cam in order:
        x_cam, y_cam = _to_camera_frame(p[:2], rig.mount_yaws[cam])
        if y_cam <= 0.0:
            continue
        cx = (x_cam / dist) * rig.width / (2 * rig.sin_half_h)
        cy = (float(p[2]) / dist) * rig.height / (2 * rig.sin_half_v)
        scale = old_dist / dist
        w, h = w_px * scale, h_px * scale
        # Same edge rule as the detector: the record must live on a
        # camera that can actually report this body.
        if abs(cx) + w / 2 > rig.width / 2:
            continue
        if fit_height and abs(cy) + h / 2 > rig.height / 2:
            continue
        if not fit_height:
            bottom = max(cy - h / 2, -rig.height / 2)
            top = min(cy + h / 2, rig.height / 2)
            if top - bottom < 1e-9:
                continue
            cy, h = (bottom + top) / 2, top - bottom
        return cam, cx, cy, w, h
    return None


def sense(
    rig: CameraRig,
    observer_id: int,
    world: WorldState,
    noise: NoiseModel,
    rng: np.random.Generator | None = None,
) -> list[Detection]:
    """All detections for one observer at the current tick.

    Ordered by (camera index, body id); a body sitting on the seam
    between adjacent cameras may appear once in each.
    """
    observer = world.body(observer_id)
    others = sorted((b for b in world.bodies if b.id != observer_id), key=lambda b: b.id)
    out: list[Detection] = []
    for cam in range(len(rig.mount_yaws)):
        for body in others:
            det = project(
                rig, cam, observer.pose, body, noise, rng, world=world, tick=world.tick
            )
            if det is not None:
                out.append(det)
        if rng is not None and noise.p_false > 0.0 and rng.random() < noise.p_false:
            kinds = (BodyKind.TARGET, BodyKind.CAPTOR, BodyKind.OBSTACLE)
            out.append(
                Detection(
                    camera_index=cam,
                    cx=rng.uniform(-rig.width / 2, rig.width / 2),
                    cy=rng.uniform(-rig.height / 2, rig.height / 2),
                    w_px=rng.uniform(4.0, 60.0),
                    h_px=rng.uniform(4.0, 60.0),
                    kind=kinds[rng.integers(0, 3)],
                    tick=world.tick,
                )
            )
    return out
