"""Per-agent local object map.

Detections are associated to existing records greedily by bounding-box
overlap, gated to the same object kind seen by the same camera.  Each
record keeps the last box, a Kalman-smoothed distance and the resulting
local-frame position.  Records missed for more than n_max consecutive
updates are dropped, which is what eventually tells the behavior logic
that a target is lost.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .camera import CameraRig, Detection, predict_box
from .estimation import DepthFilter, RelPosition, kalman_predict_shift, kalman_update
from .world import BodyKind, Pose3, local_to_world, world_to_local


@dataclass
class ObjectRecord:
    """One tracked object in the observer's local frame."""

    record_id: int
    kind: BodyKind
    camera_index: int
    cx: float
    cy: float
    w_px: float
    h_px: float
    position: np.ndarray
    filter: DepthFilter
    missed: int = 0
    last_tick: int = 0

    @property
    def box(self) -> tuple[float, float, float, float]:
        return (self.cx, self.cy, self.w_px, self.h_px)


@dataclass
class LocalMap:
    """All records of one agent plus bookkeeping."""

    n_max: int = 10
    dt: float = 0.05
    records: list[ObjectRecord] = field(default_factory=list)
    next_id: int = 0
    tick: int = 0

    def live_of_kind(self, kind: BodyKind) -> list[ObjectRecord]:
        return [r for r in self.records if r.kind is kind]

    @property
    def has_target(self) -> bool:
        return any(r.kind is BodyKind.TARGET for r in self.records)


def iou(box_a: tuple[float, float, float, float], box_b: tuple[float, float, float, float]) -> float:
    """Intersection over union of two center/size boxes."""
    ax, ay, aw, ah = box_a
    bx, by, bw, bh = box_b
    ix = min(ax + aw / 2, bx + bw / 2) - max(ax - aw / 2, bx - bw / 2)
    iy = min(ay + ah / 2, by + bh / 2) - max(ay - ah / 2, by - bh / 2)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    union = aw * ah + bw * bh - inter
    return inter / union if union > 0 else 0.0


def _update_record(rec: ObjectRecord, det: Detection, rel: RelPosition, dt: float, tick: int) -> None:
    elapsed = (rec.missed + 1) * dt
    f = DepthFilter(
        state=rec.filter.state,
        variance=rec.filter.variance,
        q=rec.filter.q,
        r=(0.08 * rel.D) ** 2,
    )
    f = kalman_update(f, rel.D, elapsed)
    scale = f.state / rel.D if rel.D > 0 else 1.0
    rec.position = np.array([rel.X, rel.Y, rel.Z]) * scale
    rec.filter = f
    rec.cx, rec.cy, rec.w_px, rec.h_px = det.cx, det.cy, det.w_px, det.h_px
    rec.camera_index = det.camera_index
    rec.missed = 0
    rec.last_tick = tick


def _new_record(record_id: int, det: Detection, rel: RelPosition, tick: int) -> ObjectRecord:
    return ObjectRecord(
        record_id=record_id,
        kind=det.kind,
        camera_index=det.camera_index,
        cx=det.cx,
        cy=det.cy,
        w_px=det.w_px,
        h_px=det.h_px,
        position=np.array([rel.X, rel.Y, rel.Z]),
        filter=DepthFilter(state=rel.D, variance=(0.25 * rel.D) ** 2, r=(0.08 * rel.D) ** 2),
        last_tick=tick,
    )


def ego_shift(lmap: LocalMap, prev_pose: Pose3, pose: Pose3, rig: CameraRig) -> LocalMap:
    """Carry every record across the observer's own motion.

    Record positions live in the observer's body frame, so they are stale
    the moment the observer moves or turns.  Assuming a static world, each
    stored point is re-expressed in the new frame, the filtered distance
    is shifted by the geometric change, and the stored box is re-projected
    so that overlap association keeps matching across frames.  Objects
    that moved themselves get corrected by their next matched detection.
    """
    for rec in lmap.records:
        world_pt = local_to_world(prev_pose, rec.position)
        new_local = world_to_local(pose, world_pt)
        old_d = float(np.linalg.norm(rec.position))
        new_d = float(np.linalg.norm(new_local))
        rec.filter = kalman_predict_shift(rec.filter, new_d - old_d, lmap.dt)
        rec.position = new_local
        box = predict_box(
            rig,
            new_local,
            rec.w_px,
            rec.h_px,
            old_d,
            prefer_camera=rec.camera_index,
            fit_height=rec.kind is not BodyKind.OBSTACLE,
        )
        if box is not None:
            rec.camera_index, rec.cx, rec.cy, rec.w_px, rec.h_px = box
    return lmap


def associate(lmap: LocalMap, detections: list[Detection], positions: list[RelPosition]) -> LocalMap:
    """One association round; mutates and returns the map.

    Greedy on descending IoU over (detection, record) pairs of the same
    kind in the same camera; IoU ties prefer the lower record id, then
    the lower detection index.  Unmatched detections open new records;
    records unmatched for more than n_max rounds in a row are dropped.
    """
    if len(detections) != len(positions):
        raise ValueError("detections and positions must align")
    lmap.tick += 1

    candidates = []
    for di, det in enumerate(detections):
        for rec in lmap.records:
            if rec.kind is not det.kind or rec.camera_index != det.camera_index:
                continue
            overlap = iou(det_box(det), rec.box)
            if overlap > 0.0:
                candidates.append((-overlap, rec.record_id, di, rec))
    candidates.sort(key=lambda c: (c[0], c[1], c[2]))

    matched_recs: set[int] = set()
    matched_dets: set[int] = set()
    for neg, rec_id, di, rec in candidates:
        if rec_id in matched_recs or di in matched_dets:
            continue
        matched_recs.add(rec_id)
        matched_dets.add(di)
        _update_record(rec, detections[di], positions[di], lmap.dt, lmap.tick)

    for di, det in enumerate(detections):
        if di in matched_dets:
            continue
        lmap.records.append(_new_record(lmap.next_id, det, positions[di], lmap.tick))
        lmap.next_id += 1

    survivors = []
    for rec in lmap.records:
        if rec.record_id not in matched_recs and rec.last_tick != lmap.tick:
            rec.missed += 1
        if rec.missed <= lmap.n_max:
            survivors.append(rec)
    lmap.records = survivors
    return lmap


def det_box(det: Detection) -> tuple[float, float, float, float]:
    return (det.cx, det.cy, det.w_px, det.h_px)


def snapshot(
    lmap: LocalMap, merge_radius: float = 0.6
) -> tuple[list[np.ndarray], list[np.ndarray], list[np.ndarray]]:
    """Positions of live records split into (targets, obstacles, neighbors).

    Adjacent camera views overlap, so one physical body routinely holds
    a record on each of two cameras, plus the odd stale copy that an
    association hiccup left behind.  Anything built from raw record
    positions would count such a body two or three times over.  Records
    of a kind closer than merge_radius to a fresher record are treated
    as copies of it and dropped; pass zero to disable merging.  Distinct
    bodies never merge because they cannot fly that close without
    colliding, while copies of one body scatter only by estimation
    noise, well inside the radius at the ranges where it matters.
    """
    targets: list[np.ndarray] = []
    obstacles: list[np.ndarray] = []
    neighbors: list[np.ndarray] = []
    ordered = sorted(lmap.records, key=lambda r: (r.missed, -r.last_tick, r.record_id))
    for rec in ordered:
        if rec.kind is BodyKind.TARGET:
            group = targets
        elif rec.kind is BodyKind.OBSTACLE:
            group = obstacles
        else:
            group = neighbors
        if merge_radius > 0.0 and any(
            float(np.hypot(rec.position[0] - q[0], rec.position[1] - q[1])) < merge_radius
            for q in group
        ):
            continue
        group.append(rec.position)
    return targets, obstacles, neighbors
