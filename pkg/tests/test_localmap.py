import math

import numpy as np
import pytest

from vgswarm.camera import CameraRig, Detection
from vgswarm.estimation import RelPosition
from vgswarm.localmap import LocalMap, associate, ego_shift, iou, snapshot
from vgswarm.world import BodyKind, Pose3, local_to_world


def det(cx=0.0, cy=0.0, w=20.0, h=20.0, cam=0, kind=BodyKind.TARGET):
    return Detection(camera_index=cam, cx=cx, cy=cy, w_px=w, h_px=h, kind=kind, tick=0)


def rel(x=0.0, y=5.0, z=0.0):
    d = float(np.sqrt(x * x + y * y))
    return RelPosition(X=x, Y=y, Z=z, D=d)


def test_iou_offset_unit_squares():
    assert iou((0.0, 0.0, 1.0, 1.0), (0.5, 0.0, 1.0, 1.0)) == pytest.approx(1.0 / 3.0)


def test_iou_identity_and_disjoint():
    assert iou((0, 0, 2, 2), (0, 0, 2, 2)) == 1.0
    assert iou((0, 0, 1, 1), (5, 5, 1, 1)) == 0.0


def test_new_records_from_unmatched():
    m = LocalMap()
    associate(m, [det(cx=0), det(cx=100, kind=BodyKind.OBSTACLE)], [rel(), rel(x=2)])
    assert len(m.records) == 2
    assert [r.record_id for r in m.records] == [0, 1]


def test_greedy_prefers_best_overlap():
    m = LocalMap()
    associate(m, [det(cx=0.0), det(cx=12.0)], [rel(), rel(x=1)])
    r_left, r_right = m.records
    # Both detections overlap both records; the stronger pairs must win.
    associate(m, [det(cx=1.0), det(cx=13.0)], [rel(), rel(x=1)])
    assert r_left.cx == 1.0 and r_left.missed == 0
    assert r_right.cx == 13.0 and r_right.missed == 0
    assert len(m.records) == 2


def test_tie_breaks_by_lower_record_id():
    m = LocalMap()
    associate(m, [det(), det()], [rel(), rel()])  # two identical records 0, 1
    associate(m, [det()], [rel()])
    by_id = {r.record_id: r for r in m.records}
    assert by_id[0].missed == 0
    assert by_id[1].missed == 1


def test_kind_and_camera_gating():
    m = LocalMap()
    associate(m, [det(kind=BodyKind.TARGET)], [rel()])
    associate(m, [det(kind=BodyKind.CAPTOR)], [rel()])  # same box, other kind
    assert len(m.records) == 2
    associate(m, [det(cam=1)], [rel()])  # same box/kind, other camera
    assert len(m.records) == 3


def test_lost_counter_prunes_after_n_max_plus_one():
    m = LocalMap(n_max=10)
    associate(m, [det()], [rel()])
    for k in range(10):
        associate(m, [], [])
        assert len(m.records) == 1, f"gone after {k + 1} misses"
    assert m.records[0].missed == 10
    associate(m, [], [])
    assert m.records == []


def test_idempotent_on_repeated_detections():
    m = LocalMap()
    ds, ps = [det(cx=3.0)], [rel(x=0.5)]
    associate(m, ds, ps)
    ids_before = [r.record_id for r in m.records]
    associate(m, ds, ps)
    assert [r.record_id for r in m.records] == ids_before
    assert m.records[0].missed == 0


def test_match_resets_lost_counter():
    m = LocalMap()
    associate(m, [det()], [rel()])
    associate(m, [], [])
    associate(m, [], [])
    assert m.records[0].missed == 2
    associate(m, [det()], [rel()])
    assert m.records[0].missed == 0


def test_position_tracks_smoothed_distance():
    m = LocalMap()
    for _ in range(60):
        associate(m, [det()], [rel(y=5.0)])
    r = m.records[0]
    assert r.filter.state == pytest.approx(5.0, rel=1e-6)
    np.testing.assert_allclose(r.position, [0.0, 5.0, 0.0], atol=1e-6)
    assert 0.0 <= r.missed <= m.n_max


def test_position_scales_with_filtered_distance():
    m = LocalMap()
    associate(m, [det()], [rel(y=5.0)])
    # One noisy long measurement: position direction kept, range smoothed.
    associate(m, [det()], [rel(y=8.0)])
    r = m.records[0]
    assert 5.0 < r.position[1] < 8.0
    assert abs(r.position[0]) < 1e-12


def test_snapshot_partition():
    m = LocalMap()
    associate(
        m,
        [det(kind=BodyKind.TARGET), det(cx=50, kind=BodyKind.OBSTACLE), det(cx=-50, kind=BodyKind.CAPTOR)],
        [rel(), rel(x=1), rel(x=-1)],
    )
    targets, obstacles, neighbors = snapshot(m)
    assert len(targets) == 1 and len(obstacles) == 1 and len(neighbors) == 1
    assert m.has_target


def test_mismatched_lengths_rejected():
    with pytest.raises(ValueError):
        associate(LocalMap(), [det()], [])


def test_ego_shift_keeps_world_position_fixed():
    m = LocalMap()
    associate(m, [det()], [rel(y=5.0)])
    prev = Pose3(np.zeros(3), heading=0.0)
    world_before = local_to_world(prev, m.records[0].position)

    cur = Pose3(np.array([0.0, 1.0, 0.0]), heading=0.0)
    ego_shift(m, prev, cur, CameraRig())
    r = m.records[0]
    np.testing.assert_allclose(r.position, [0.0, 4.0, 0.0], atol=1e-9)
    np.testing.assert_allclose(local_to_world(cur, r.position), world_before, atol=1e-9)
    # The filtered range moved with the geometry: 5 m became 4 m.
    assert r.filter.state == pytest.approx(4.0, abs=1e-6)


def test_ego_shift_rotation_relabels_camera():
    m = LocalMap()
    associate(m, [det()], [rel(y=5.0)])  # dead ahead on camera 0
    prev = Pose3(np.zeros(3), heading=0.0)
    cur = Pose3(np.zeros(3), heading=math.pi / 2)  # nose now along world +x
    ego_shift(m, prev, cur, CameraRig())
    r = m.records[0]
    np.testing.assert_allclose(r.position, [-5.0, 0.0, 0.0], atol=1e-9)
    assert r.camera_index == 3  # the point sits on the left-side camera
    assert r.filter.state == pytest.approx(5.0, abs=1e-6)  # range unchanged


def test_ego_shift_overlap_zone_keeps_tracking_camera():
    # Bearing 45 degrees is visible to camera 0 and camera 1 at once; a
    # record tracked by camera 1 must stay there, not hop to camera 0.
    m = LocalMap()
    associate(m, [det(cam=1, cx=-260.0)], [rel(x=3.5, y=3.5)])
    assert m.records[0].camera_index == 1
    prev = Pose3(np.zeros(3), heading=0.0)
    cur = Pose3(np.array([0.0, 0.1, 0.0]), heading=0.0)
    ego_shift(m, prev, cur, CameraRig())
    assert m.records[0].camera_index == 1


def test_snapshot_merges_copies_of_one_body():
    m = LocalMap()
    associate(
        m,
        [det(cx=10.0, kind=BodyKind.CAPTOR), det(cam=1, cx=-200.0, kind=BodyKind.CAPTOR)],
        [rel(x=3.0, y=3.0), rel(x=3.2, y=3.1)],
    )
    assert len(m.records) == 2
    _, _, neighbors = snapshot(m)
    assert len(neighbors) == 1
    _, _, unmerged = snapshot(m, merge_radius=0.0)
    assert len(unmerged) == 2


def test_snapshot_keeps_distinct_bodies():
    m = LocalMap()
    associate(
        m,
        [det(cx=10.0, kind=BodyKind.CAPTOR), det(cx=120.0, kind=BodyKind.CAPTOR)],
        [rel(x=3.0, y=3.0), rel(x=4.5, y=3.0)],
    )
    _, _, neighbors = snapshot(m)
    assert len(neighbors) == 2


def test_snapshot_prefers_freshest_copy():
    m = LocalMap()
    associate(m, [det(cx=10.0, kind=BodyKind.CAPTOR)], [rel(x=3.0, y=3.0)])
    # Second round: the old record misses while a new one lands 0.3 m away.
    associate(m, [det(cx=40.0, kind=BodyKind.CAPTOR)], [rel(x=3.3, y=3.0)])
    assert len(m.records) == 2
    _, _, neighbors = snapshot(m)
    assert len(neighbors) == 1
    np.testing.assert_allclose(neighbors[0][:2], [3.3, 3.0], atol=1e-9)
