import math

import numpy as np
import pytest

from vgswarm.camera import CameraRig, Detection, NoiseModel, project
from vgswarm.estimation import (
    DepthFilter,
    FitError,
    RejectedSampleError,
    UndefinedExpansionError,
    decompose,
    depth_from_expansion,
    fit_power_law,
    kalman_update,
)
from vgswarm.world import Body, BodyKind, Pose3

RIG = CameraRig()


def det(cx=0.0, cy=0.0, w=20.0, h=20.0, cam=0):
    return Detection(camera_index=cam, cx=cx, cy=cy, w_px=w, h_px=h, kind=BodyKind.TARGET, tick=0)


# --- optical expansion ---------------------------------------------------


def test_expansion_depth_value():
    # Approach trajectory oracle: depth 2 m, one meter closing motion,
    # area grows 4x (area ~ 1/depth**2) so the earlier depth is 2 m.
    assert depth_from_expansion(100.0, 400.0, 1.0) == pytest.approx(2.0, abs=1e-12)


def test_expansion_depth_matches_synthetic_track():
    rng = np.random.default_rng(2)
    for _ in range(50):
        d_i = rng.uniform(2.0, 9.0)
        move = rng.uniform(0.2, d_i - 1.0)
        c = rng.uniform(1e4, 1e6)
        s_i = c / d_i**2
        s_j = c / (d_i - move) ** 2
        assert depth_from_expansion(s_i, s_j, move) == pytest.approx(d_i, rel=1e-9)


def test_expansion_scale_invariance():
    a = depth_from_expansion(50.0, 200.0, 1.0)
    b = depth_from_expansion(5000.0, 20000.0, 1.0)
    assert a == pytest.approx(b, rel=1e-12)


def test_expansion_equal_areas_rejected():
    with pytest.raises(UndefinedExpansionError):
        depth_from_expansion(250.0, 250.0, 1.0)


def test_expansion_inconsistent_sign_rejected():
    # Box grew while moving away: geometrically impossible, reject.
    with pytest.raises(RejectedSampleError):
        depth_from_expansion(100.0, 400.0, -1.0)
    with pytest.raises(RejectedSampleError):
        depth_from_expansion(400.0, 100.0, 1.0)


def test_expansion_through_camera_model_zero_noise():
    # Fly straight at a sphere and apply the expansion formula to the
    # rendered boxes; the recovered depth must match ground truth.
    quiet = NoiseModel(sigma_px=0.0, p_miss=0.0)
    tgt = Body(id=1, kind=BodyKind.TARGET, pose=Pose3(np.array([0.0, 9.0, -2.0])))
    areas = {}
    for step, y in enumerate(np.arange(0.0, 6.0, 0.5)):
        obs = Pose3(np.array([0.0, y, -2.0]))
        d = project(RIG, 0, obs, tgt, quiet)
        areas[step] = (d.area, 9.0 - y)
    for step in range(4, len(areas)):
        s_i, depth_i = areas[step - 4]
        s_j, _ = areas[step]
        est = depth_from_expansion(s_i, s_j, 2.0)
        assert abs(est - depth_i) / depth_i < 0.02


# --- power law fit -------------------------------------------------------


def test_fit_exact_recovery():
    dists = np.linspace(1.5, 9.0, 12)  # 6x span, 12 samples
    areas = (5.0 / dists) ** 2  # D = 5 * A**-0.5 exactly
    fit = fit_power_law(areas, dists)
    assert fit.alpha == pytest.approx(5.0, abs=1e-9)
    assert fit.beta == pytest.approx(-0.5, abs=1e-9)
    assert fit.rmse < 1e-9


def test_fit_noisy_area_keeps_error_under_bound():
    rng = np.random.default_rng(17)
    dists = np.linspace(1.0, 10.0, 200)
    areas = (4.2 / dists) ** 2
    noisy = areas * (1.0 + 0.05 * rng.standard_normal(200))
    fit = fit_power_law(noisy, dists)
    rel = np.abs(fit.predict(areas) - dists) / dists
    assert np.mean(rel) < 0.11
    assert np.max(rel) < 0.11


def test_fit_degenerate_rejected():
    with pytest.raises(FitError):
        fit_power_law(np.full(10, 100.0), np.linspace(1, 5, 10))
    with pytest.raises(FitError):
        fit_power_law(np.array([100.0]), np.array([5.0]))


# --- decomposition -------------------------------------------------------


def test_decompose_frame_edge_geometry():
    r = decompose(det(cx=RIG.width / 2), 5.0, RIG)
    assert r.X == pytest.approx(5.0 * math.sin(math.radians(60)), abs=1e-9)
    assert r.Y == pytest.approx(2.5, abs=1e-9)
    assert r.Z == pytest.approx(0.0, abs=1e-12)


def test_decompose_rear_camera_negates_planar():
    front = decompose(det(cx=100.0, cy=30.0, cam=0), 6.0, RIG)
    rear = decompose(det(cx=100.0, cy=30.0, cam=2), 6.0, RIG)
    assert rear.X == pytest.approx(-front.X, abs=1e-12)
    assert rear.Y == pytest.approx(-front.Y, abs=1e-12)
    assert rear.Z == pytest.approx(front.Z, abs=1e-12)


def test_decompose_planar_norm_invariant():
    rng = np.random.default_rng(23)
    for _ in range(200):
        d = det(
            cx=rng.uniform(-RIG.width / 2, RIG.width / 2),
            cy=rng.uniform(-RIG.height / 2, RIG.height / 2),
            cam=int(rng.integers(0, 4)),
        )
        dist = rng.uniform(0.5, 10.0)
        r = decompose(d, dist, RIG)
        if not r.clamped:
            assert r.X**2 + r.Y**2 == pytest.approx(dist**2, abs=1e-9)


def test_decompose_clamps_when_distance_too_small():
    r = decompose(det(cx=400.0), 1.0, RIG)
    assert r.clamped and r.Y == 0.0


def test_decompose_corrected_mode_removes_vertical():
    d = det(cx=50.0, cy=100.0)
    plain = decompose(d, 5.0, RIG)
    corr = decompose(d, 5.0, RIG, corrected_y=True)
    assert corr.Y < plain.Y
    assert corr.X**2 + corr.Y**2 + corr.Z**2 == pytest.approx(25.0, abs=1e-9)


def test_decompose_round_trip_with_camera():
    # project -> decompose (corrected mode) with the true distance must
    # recover the full local point; the default mode recovers X and Z and
    # folds the vertical offset into Y.
    quiet = NoiseModel(sigma_px=0.0, p_miss=0.0)
    rng = np.random.default_rng(31)
    hits = 0
    while hits < 60:
        p_local = rng.uniform([-7.0, -7.0, -1.5], [7.0, 7.0, 1.5])
        obs = Pose3(np.array([0.0, 0.0, -2.0]))
        world_p = np.array([p_local[0], p_local[1], -2.0 - p_local[2]])
        body = Body(id=1, kind=BodyKind.TARGET, pose=Pose3(world_p))
        dist = float(np.linalg.norm(p_local))
        if dist < 1.0 or dist > 9.5:
            continue
        for cam in range(4):
            d = project(RIG, cam, obs, body, quiet)
            if d is None:
                continue
            if abs(d.cx) + d.w_px / 2 > RIG.width / 2 - 1 or abs(d.cy) + d.h_px / 2 > RIG.height / 2 - 1:
                continue
            r = decompose(d, dist, RIG, corrected_y=True)
            assert abs(r.X - p_local[0]) < 1e-6 * max(1.0, dist)
            assert abs(r.Y - p_local[1]) < 1e-6 * max(1.0, dist)
            assert abs(r.Z - p_local[2]) < 1e-6 * max(1.0, dist)
            hits += 1


# --- Kalman --------------------------------------------------------------


def test_kalman_zero_r_tracks_measurement():
    f = DepthFilter(state=3.0, variance=1.0, q=0.5, r=0.0)
    f = kalman_update(f, 7.0, 0.05)
    assert f.state == pytest.approx(7.0, abs=1e-12)


def test_kalman_converges_monotonically_without_process_noise():
    f = DepthFilter(state=0.0, variance=1.0, q=0.0, r=0.5)
    errs = []
    for _ in range(30):
        f = kalman_update(f, 4.0, 0.05)
        errs.append(abs(f.state - 4.0))
    assert all(a >= b for a, b in zip(errs, errs[1:]))
    # With q = 0 the gain decays harmonically: err_n = err_0 / (2n + 1).
    assert errs[-1] == pytest.approx(4.0 / 61.0, rel=1e-6)


def test_kalman_noise_suppression_steady_state():
    rng = np.random.default_rng(8)
    f = DepthFilter(state=5.0, variance=1.0, q=0.5, r=(0.08 * 5.0) ** 2)
    errors = []
    for k in range(400):
        meas = 5.0 + rng.normal(0.0, 0.5)
        f = kalman_update(f, meas, 0.05)
        if k >= 40:
            errors.append(f.state - 5.0)
    assert np.std(errors) < 0.25
