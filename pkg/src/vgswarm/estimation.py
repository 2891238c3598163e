"""Monocular distance and relative-position estimation.

Distance comes from bounding-box area through a per-kind power law
D = alpha * A**beta fitted in log-log space.  The calibration samples for
that fit are produced by optical expansion: when the observer moves a
known amount toward a body, the square root of the box-area ratio gives
the depth at the earlier observation.  A scalar Kalman filter smooths the
noisy distance track of each object.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .camera import CameraRig, Detection

log = logging.getLogger(__name__)


class UndefinedExpansionError(ValueError):
    """Raised when the two box areas are equal and depth is undefined."""


class RejectedSampleError(ValueError):
    """Raised when the expansion sign contradicts the observer motion."""


class FitError(ValueError):
    """Raised when the power-law fit is degenerate."""


@dataclass(frozen=True)
class PowerLawFit:
    """Distance model D = alpha * A**beta with fit quality in meters."""

    alpha: float
    beta: float
    rmse: float

    def predict(self, area: float) -> float:
        return self.alpha * area**self.beta


@dataclass(frozen=True)
class DepthFilter:
    """Scalar Kalman state for one tracked distance."""

    state: float
    variance: float
    q: float = 0.5
    r: float = 1.0


@dataclass(frozen=True)
class RelPosition:
    """Position of a detection in the observer's local frame.

    X right, Y along the nose, Z up; D is the straight-line distance the
    estimate was built from, so X**2 + Y**2 = D**2 holds by construction.
    """

    X: float
    Y: float
    Z: float
    D: float
    clamped: bool = False


def depth_from_expansion(s_i: float, s_j: float, cz_motion: float) -> float:
    """Depth at the first observation from box growth and known motion.

    s_i and s_j are box areas at the earlier and later observation;
    cz_motion is the observer displacement toward the object between the
    two (positive when closing in).  Returns a positive depth in meters.
    """
    if s_i <= 0 or s_j <= 0:
        raise ValueError("box areas must be positive")
    if s_i == s_j:
        raise UndefinedExpansionError("equal box areas carry no depth information")
    rho = math.sqrt(s_j / s_i)
    depth = cz_motion * rho / (rho - 1.0)
    if depth <= 0.0:
        raise RejectedSampleError(
            f"expansion ratio {rho:.4f} inconsistent with motion {cz_motion:+.3f} m"
        )
    return depth


def fit_power_law(areas: np.ndarray, dists: np.ndarray) -> PowerLawFit:
    """Least squares for log D = log alpha + beta log A.

    rmse is reported in meters against the fitted model.
    """
    areas = np.asarray(areas, dtype=float)
    dists = np.asarray(dists, dtype=float)
    if areas.shape != dists.shape or areas.ndim != 1:
        raise ValueError("areas and dists must be 1-d arrays of equal length")
    if areas.size < 2:
        raise FitError("need at least two samples")
    if np.any(areas <= 0) or np.any(dists <= 0):
        raise FitError("samples must be positive")
    la, ld = np.log(areas), np.log(dists)
    if np.ptp(la) < 1e-12:
        raise FitError("degenerate samples: all areas equal")
    beta, log_alpha = np.polyfit(la, ld, 1)
    alpha = float(np.exp(log_alpha))
    pred = alpha * areas**beta
    rmse = float(np.sqrt(np.mean((pred - dists) ** 2)))
    return PowerLawFit(alpha=alpha, beta=float(beta), rmse=rmse)


def decompose(
    det: Detection,
    dist: float,
    rig: CameraRig,
    corrected_y: bool = False,
) -> RelPosition:
    """Split a distance into local X, Y, Z using the box center pixels.

    The planar component follows the inverse projection: the lateral
    offset in the camera frame is X = 2*cx*D*sin(fov_h/2)/W and the
    along-boresight component is Y = sqrt(D**2 - X**2).  With
    corrected_y the vertical offset is removed from Y as well
    (Y = sqrt(D**2 - X**2 - Z**2)); off by default to keep the planar
    norm equal to D.  The camera mounting yaw rotates the result into
    the observer's nose frame.
    """
    if dist <= 0:
        raise ValueError("distance must be positive")
    x_cam = 2.0 * det.cx * dist * rig.sin_half_h / rig.width
    z_cam = 2.0 * det.cy * dist * rig.sin_half_v / rig.height
    y_sq = dist * dist - x_cam * x_cam
    if corrected_y:
        y_sq -= z_cam * z_cam
    clamped = y_sq < 0.0
    if clamped:
        log.debug("clamped Y: D=%.3f but |offsets| exceed it", dist)
        y_sq = 0.0
    y_cam = math.sqrt(y_sq)
    mount = rig.mount_yaws[det.camera_index]
    c, s = math.cos(mount), math.sin(mount)
    x_loc = c * x_cam + s * y_cam
    y_loc = -s * x_cam + c * y_cam
    return RelPosition(X=x_loc, Y=y_loc, Z=z_cam, D=dist, clamped=clamped)


def kalman_update(f: DepthFilter, measurement: float, dt: float) -> DepthFilter:
    """One predict/update step of the scalar filter."""
    var = f.variance + f.q * dt
    gain = var / (var + f.r) if var + f.r > 0 else 1.0
    state = f.state + gain * (measurement - f.state)
    return replace(f, state=state, variance=(1.0 - gain) * var)


def kalman_predict_shift(f: DepthFilter, delta: float, dt: float) -> DepthFilter:
    """Prediction step with a known state displacement (ego motion)."""
    return replace(f, state=f.state + delta, variance=f.variance + f.q * dt)
