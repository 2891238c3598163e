"""Distance-model calibration.

Box area alone cannot give metric distance without a scale: the power
law D = alpha * area**beta has to be fit once per object kind.  The
calibration flight supplies the scale from the observer's own motion:
fly straight at a static object, pair frames a fixed lag apart, and
read the depth from the box-area expansion between them (the object's
class is known, the traveled distance comes from odometry).  A scalar
Kalman filter whose prediction step subtracts the known ego-motion
smooths the per-pair depth estimates before the log-log fit.

When body dimensions are trusted, analytic_distance_model produces the
same power law directly from one noiseless projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .camera import QUIET_NOISE, CameraRig, NoiseModel, sense
from .estimation import (
    DepthFilter,
    PowerLawFit,
    RejectedSampleError,
    UndefinedExpansionError,
    depth_from_expansion,
    fit_power_law,
    kalman_predict_shift,
    kalman_update,
)
from .world import Body, BodyKind, Pose3, WorldState


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class CalibrationConfig:
    start_distance: float = 12.0
    end_distance: float = 1.5
    speed: float = 1.0
    lag_ticks: int = 40
    process_var: float = 0.5
    min_samples: int = 12
    dt: float = 0.05
    altitude: float = 2.0


def analytic_distance_model(
    rig: CameraRig, body: Body, probe_distance: float | None = None
) -> PowerLawFit:
    """Power law from one noiseless projection of the body dead ahead.

    Spheres are probed at eye level; cylinders from their mid height and
    far enough back that the box cannot clip against the frame, since a
    clipped probe would bake the wrong scale into alpha.
    """
    if body.kind is BodyKind.OBSTACLE:
        observer_z = body.pose.position[2] - 0.5 * body.height
        if probe_distance is None:
            probe_distance = max(5.0, 0.75 * body.height)
    else:
        observer_z = body.pose.position[2]
        if probe_distance is None:
            probe_distance = 5.0
    observer = Body(
        id=-1,
        kind=BodyKind.CAPTOR,
        pose=Pose3(
            position=np.array(
                [
                    body.pose.position[0],
                    body.pose.position[1] - probe_distance,
                    observer_z,
                ]
            ),
            heading=0.0,
        ),
    )
    wstate = WorldState(bodies=(observer, body), tick=0)
    dets = sense(rig, -1, wstate, QUIET_NOISE)
    if not dets:
        raise CalibrationError("probe body not visible for analytic model")
    if body.kind is BodyKind.OBSTACLE:
        # Pillar distance is measured from box width squared because the
        # height clips at close range; keep the law on the same scale.
        measure = max(d.w_px * d.w_px for d in dets)
    else:
        measure = max(d.area for d in dets)
    return PowerLawFit(alpha=math.sqrt(measure) * probe_distance, beta=-0.5, rmse=0.0)


def run_calibration_flight(
    body: Body,
    rig: CameraRig,
    noise: NoiseModel,
    config: CalibrationConfig,
    rng: np.random.Generator | None = None,
) -> list[tuple[float, float]]:
    """(box area, estimated distance) samples from a straight approach.

    The observer starts config.start_distance south of the body and
    flies at it with constant speed.  Every tick with a detection logs
    the box area; lagged pairs give expansion depths at the pair's
    first tick, the ego-compensated filter smooths them, and each tick
    with both an area and a filter state emits one sample.
    """
    if config.end_distance >= config.start_distance:
        raise CalibrationError("flight must move toward the object")
    dt = config.dt
    n_ticks = int((config.start_distance - config.end_distance) / (config.speed * dt))
    step = config.speed * dt

    areas: dict[int, float] = {}
    for tick in range(n_ticks):
        y = -config.start_distance + tick * step
        observer = Body(
            id=0,
            kind=BodyKind.CAPTOR,
            pose=Pose3(position=np.array([0.0, y, -config.altitude]), heading=0.0),
        )
        wstate = WorldState(bodies=(observer, body), tick=tick)
        dets = [d for d in sense(rig, 0, wstate, noise, rng) if d.kind == body.kind]
        if dets:
            areas[tick] = max(d.area for d in dets)

    depth_by_tick: dict[int, float] = {}
    for tick, area in areas.items():
        later = areas.get(tick + config.lag_ticks)
        if later is None:
            continue
        moved = config.lag_ticks * step
        try:
            depth_by_tick[tick] = depth_from_expansion(area, later, moved)
        except (UndefinedExpansionError, RejectedSampleError):
            continue

    samples: list[tuple[float, float]] = []
    filt: DepthFilter | None = None
    last_tick: int | None = None
    for tick in sorted(areas):
        measured = depth_by_tick.get(tick)
        if filt is None:
            if measured is None:
                continue
            filt = DepthFilter(
                state=measured,
                variance=(0.25 * measured) ** 2,
                q=config.process_var,
                r=(0.08 * measured) ** 2,
            )
        else:
            elapsed = (tick - last_tick) * dt
            filt = kalman_predict_shift(filt, -(tick - last_tick) * step, elapsed)
            if measured is not None:
                filt = DepthFilter(
                    state=filt.state,
                    variance=filt.variance,
                    q=filt.q,
                    r=(0.08 * measured) ** 2,
                )
                filt = kalman_update(filt, measured, 0.0)
        last_tick = tick
        samples.append((areas[tick], filt.state))
    return samples


def fit_distance_model(
    body: Body,
    rig: CameraRig,
    noise: NoiseModel,
    config: CalibrationConfig = CalibrationConfig(),
    rng: np.random.Generator | None = None,
) -> tuple[PowerLawFit, list[tuple[float, float]]]:
    """Calibration flight plus power-law fit for one body kind."""
    samples = run_calibration_flight(body, rig, noise, config, rng)
    if len(samples) < config.min_samples:
        raise CalibrationError(
            f"only {len(samples)} usable samples, need {config.min_samples}"
        )
    areas = np.array([a for a, _ in samples])
    dists = np.array([d for _, d in samples])
    return fit_power_law(areas, dists), samples
