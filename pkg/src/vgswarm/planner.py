"""Direction sampling on the concentration map and motion commands.

The bottom control layer never differentiates the field.  It sums the
concentration over five concentric sample circles along each of 180
rays, takes the ray with the smallest sum, and converts that heading
plus a dynamic step length into a velocity in the agent's local frame
(x right, y nose, z up).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grn import FieldGrid, concentration_at_many


@dataclass(frozen=True)
class SamplingScheme:
    radii: tuple[float, ...] = (0.5, 1.1, 1.7, 2.3, 2.9)
    n_directions: int = 180

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])) or self.radii[0] <= 0:
            raise ValueError("sampling radii must be positive and strictly increasing")
        if self.n_directions < 8:
            raise ValueError("need at least 8 sampling directions")

    def angles(self) -> np.ndarray:
        return np.arange(self.n_directions) * (2.0 * math.pi / self.n_directions)

    def offsets(self) -> np.ndarray:
        """Sample offsets, shape (n_directions, len(radii), 2)."""
        ang = self.angles()
        ray = np.stack([np.sin(ang), np.cos(ang)], axis=1)  # heading convention
        return ray[:, None, :] * np.asarray(self.radii)[None, :, None]


@dataclass(frozen=True)
class PlannerParams:
    """Step-law constants.

    delta_ref converts concentration error to step length.  It must be
    large enough that step * field-slope / delta_ref stays below 2 near
    the contour, or the agent ping-pongs across the level band instead
    of settling; 0.8 leaves a factor-of-two margin at the default
    morphogen parameters while still giving full speed far outside.
    """

    k_scale: float = 1.0
    delta_ref: float = 0.8
    max_climb: float = 1.0  # m/s vertical rate cap


@dataclass(frozen=True)
class MotionCommand:
    theta_dir: float
    step: float
    k_scale: float
    delta_h: float
    velocity: np.ndarray  # local frame, z up, m/s

    def __post_init__(self):
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))


def direction_sums(m_field: FieldGrid, scheme: SamplingScheme, center=(0.0, 0.0)) -> np.ndarray:
    """Summed concentration per ray, shape (n_directions,)."""
    pts = np.asarray(center, dtype=float) + scheme.offsets().reshape(-1, 2)
    vals = concentration_at_many(m_field, pts)
    return vals.reshape(scheme.n_directions, len(scheme.radii)).sum(axis=1)


def select_direction(
    m_field: FieldGrid,
    scheme: SamplingScheme,
    center=(0.0, 0.0),
    negate: bool = False,
) -> float:
    """Ray angle (radians from local +y) with the lowest concentration sum.

    With negate=True the highest sum wins (used to back out of the low
    region).  Sums are quantized to 1e-9 before the argmin so that
    symmetric fields tie-break to the smallest angle instead of
    floating-point noise.
    """
    sums = direction_sums(m_field, scheme, center)
    if negate:
        sums = -sums
    quantized = np.round(sums * 1e9)
    return float(scheme.angles()[int(np.argmin(quantized))])


def dynamic_step(c_current: float, c_pattern: float, s_max: float, delta_ref: float) -> float:
    """Step length shrinking linearly with the concentration error."""
    return s_max * min(1.0, abs(c_current - c_pattern) / delta_ref)


def clamp_velocity(v: np.ndarray, max_speed: float) -> np.ndarray:
    """Scale the planar part so |v| <= max_speed, keeping the z rate."""
    v = np.asarray(v, dtype=float).copy()
    planar = math.hypot(v[0], v[1])
    budget_sq = max_speed * max_speed - v[2] * v[2]
    if budget_sq <= 0.0:
        v[0] = v[1] = 0.0
        v[2] = math.copysign(min(abs(v[2]), max_speed), v[2])
        return v
    budget = math.sqrt(budget_sq)
    if planar > budget:
        v[0] *= budget / planar
        v[1] *= budget / planar
    return v


def make_command(
    theta_dir: float,
    step: float,
    delta_h: float,
    dt: float,
    max_speed: float,
    params: PlannerParams = PlannerParams(),
) -> MotionCommand:
    """Velocity [k s sin(theta), k s cos(theta), k dh] / dt, rate-limited.

    The vertical rate is clipped to max_climb first, then the planar
    part is scaled down if the full vector would exceed max_speed, so a
    legal climb never gets starved by a long planar step.
    """
    k = params.k_scale
    v = np.array(
        [k * step * math.sin(theta_dir), k * step * math.cos(theta_dir), k * delta_h]
    ) / dt
    v[2] = float(np.clip(v[2], -params.max_climb, params.max_climb))
    v = clamp_velocity(v, max_speed)
    return MotionCommand(
        theta_dir=theta_dir, step=step, k_scale=k, delta_h=delta_h, velocity=v
    )
