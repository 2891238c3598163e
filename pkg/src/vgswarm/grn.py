"""Morphogen concentration fields and entrapping-pattern extraction.

Every tracked object deposits a chemical-like source on an egocentric
grid.  Each species (target, obstacle, neighbor) diffuses, decays and is
produced at the source cells:

    du/dt = lap(u) + gamma - u

whose steady state is the screened Poisson equation  u - lap(u) = gamma
with zero-flux (mirrored) boundaries.  The three steady fields are fused
through logistic gates into one guidance map

    M = sig(1 - T**2) + sig(O**2) + sig(N**2)

which is low in a band around each target and high near obstacles and
neighbors.  The entrapping pattern is the lowest iso-contour of M that
closes around the target, keeps a safe standoff, and spreads its points
evenly over the four target-centered quadrants.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
import scipy.fft

# Amplitude giving a no-obstacle contour radius of about twice the default
# 2 m standoff; found once by bisection (see calibrate_source_amplitude).
DEFAULT_SOURCE_AMPLITUDE = 8058.4

# Neighbor sources use a much weaker deposit.  At full strength a single
# neighbor sitting on the entrapping ring would blanket the whole standoff
# disc and no valid contour could exist, so teammates would erase the very
# pattern they are holding.  258.7 puts the neighbor bump's reach at the
# working contour level at 1.5 m: enough to carve a local dent that keeps
# agents apart, never enough to push the contour inside the standoff.
DEFAULT_NEIGHBOR_AMPLITUDE = 258.7


class GrnError(Exception):
    pass


class SolverError(GrnError):
    def __init__(self, msg: str, residual: float):
        super().__init__(f"{msg} (residual {residual:.3e})")
        self.residual = residual


class PatternUnavailableError(GrnError):
    """No iso-contour of the fused field satisfies the pattern rules."""


class OutOfGridError(GrnError, ValueError):
    pass


@dataclass(frozen=True)
class FieldGrid:
    """Square cell-centered grid in the agent's local frame."""

    origin: np.ndarray  # xy of cell (0, 0), meters
    h: float
    values: np.ndarray  # shape (n, n), indexed [ix, iy]

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @classmethod
    def centered(cls, n: int = 121, h: float = 0.25, center=(0.0, 0.0)) -> "FieldGrid":
        half = (n - 1) / 2 * h
        origin = np.asarray(center, dtype=float) - half
        return cls(origin=origin, h=h, values=np.zeros((n, n)))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def with_values(self, values: np.ndarray) -> "FieldGrid":
        return FieldGrid(origin=self.origin.copy(), h=self.h, values=values)

    def cell_index(self, point) -> tuple[int, int]:
        """Nearest cell, clamped into the grid."""
        p = np.asarray(point, dtype=float)
        idx = np.rint((p - self.origin) / self.h).astype(int)
        return (
            int(np.clip(idx[0], 0, self.n - 1)),
            int(np.clip(idx[1], 0, self.n - 1)),
        )


@dataclass(frozen=True)
class GrnParams:
    """Gates, source strength and solver controls."""

    theta: float = 0.5
    k_sig: float = 20.0
    source_amplitude: float = DEFAULT_SOURCE_AMPLITUDE
    neighbor_amplitude: float = DEFAULT_NEIGHBOR_AMPLITUDE
    safe_distance: float = 2.0
    solver_tol: float = 1e-8
    max_iters: int = 20000
    grid_n: int = 121
    grid_h: float = 0.25
    level_step: float = 0.02
    n_levels: int = 80


@dataclass(frozen=True)
class EntrapPattern:
    """Closed iso-contour around one target."""

    contour: np.ndarray  # (m, 2), closure implicit
    level: float
    target: np.ndarray  # (2,)
    fallback: bool = False

    @property
    def mean_radius(self) -> float:
        return float(np.mean(np.linalg.norm(self.contour - self.target, axis=1)))


def stable_sigmoid(x, theta: float, k: float):
    """Logistic gate 1 / (1 + exp(-k (x - theta))), overflow-safe."""
    z = k * (np.asarray(x, dtype=float) - theta)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def source_grid(grid: FieldGrid, sources, amplitude: float) -> np.ndarray:
    """Kronecker deposits at the nearest cells, out-of-grid clamped."""
    gamma = np.zeros_like(grid.values)
    for p in sources:
        i, j = grid.cell_index(np.asarray(p, dtype=float)[:2])
        gamma[i, j] += amplitude
    return gamma


def _pad_edge(u: np.ndarray) -> np.ndarray:
    return np.pad(u, 1, mode="edge")


def _neighbor_sum(up: np.ndarray) -> np.ndarray:
    return up[:-2, 1:-1] + up[2:, 1:-1] + up[1:-1, :-2] + up[1:-1, 2:]


def residual_norm(u: np.ndarray, gamma: np.ndarray, h: float) -> float:
    """Max-norm of gamma - u + lap(u) under mirrored boundaries."""
    up = _pad_edge(u)
    lap = (_neighbor_sum(up) - 4.0 * u) / (h * h)
    return float(np.max(np.abs(gamma - u + lap)))


def _solve_dct(gamma: np.ndarray, h: float) -> np.ndarray:
    n0, n1 = gamma.shape
    ghat = scipy.fft.dctn(gamma, type=2)
    k0 = 2.0 * (1.0 - np.cos(np.pi * np.arange(n0) / n0)) / (h * h)
    k1 = 2.0 * (1.0 - np.cos(np.pi * np.arange(n1) / n1)) / (h * h)
    denom = 1.0 + k0[:, None] + k1[None, :]
    return scipy.fft.idctn(ghat / denom, type=2)


def _solve_relax(
    gamma: np.ndarray,
    h: float,
    tol: float,
    max_iters: int,
    warm: np.ndarray | None,
    jacobi: bool,
) -> np.ndarray:
    n = gamma.shape[0]
    u = np.zeros_like(gamma) if warm is None else warm.copy()
    inv_h2 = 1.0 / (h * h)
    diag = 1.0 + 4.0 * inv_h2
    if jacobi:
        omega = 0.8  # damped Jacobi
    else:
        mu = (4.0 * inv_h2 / diag) * math.cos(math.pi / n)
        omega = 2.0 / (1.0 + math.sqrt(max(1.0 - mu * mu, 0.0)))
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    red = (ii + jj) % 2 == 0
    black = ~red
    for _ in range(max_iters):
        delta = 0.0
        if jacobi:
            up = _pad_edge(u)
            new = (gamma + _neighbor_sum(up) * inv_h2) / diag
            new = u + omega * (new - u)
            delta = float(np.max(np.abs(new - u)))
            u = new
        else:
            for mask in (red, black):
                up = _pad_edge(u)
                gs = (gamma + _neighbor_sum(up) * inv_h2) / diag
                step = omega * (gs - u)
                d = float(np.max(np.abs(step[mask])))
                delta = max(delta, d)
                u[mask] += step[mask]
        if delta < tol:
            return u
    raise SolverError("field solve did not converge", residual_norm(u, gamma, h))


def solve_source_field(
    sources,
    grid: FieldGrid,
    params: GrnParams,
    method: str = "auto",
    warm: FieldGrid | None = None,
    amplitude: float | None = None,
) -> FieldGrid:
    """Steady-state species field for point sources on the given grid.

    method "auto" uses the cosine-transform direct solve (exact for this
    constant-coefficient stencil).  "sor" and "jacobi" run the matching
    relaxation iterations until the largest update drops below
    params.solver_tol; they accept a warm start and raise SolverError
    with the final residual when the iteration budget runs out.
    amplitude overrides params.source_amplitude (the neighbor species
    deposits far less than targets and obstacles).
    """
    if amplitude is None:
        amplitude = params.source_amplitude
    gamma = source_grid(grid, sources, amplitude)
    if method in ("auto", "dct"):
        values = _solve_dct(gamma, grid.h)
    elif method in ("sor", "gauss_seidel"):
        w = None if warm is None else warm.values
        values = _solve_relax(gamma, grid.h, params.solver_tol, params.max_iters, w, jacobi=False)
    elif method == "jacobi":
        w = None if warm is None else warm.values
        values = _solve_relax(gamma, grid.h, params.solver_tol, params.max_iters, w, jacobi=True)
    else:
        raise ValueError(f"unknown solver method {method!r}")
    return grid.with_values(values)


def evolve_transient(
    field: FieldGrid, sources, params: GrnParams, dt: float, steps: int
) -> FieldGrid:
    """Explicit-Euler transient integration of the species equation."""
    h = field.h
    if dt > h * h / 4.0:
        raise ValueError(f"explicit step unstable: dt must be <= {h * h / 4.0:.4g}")
    gamma = source_grid(field, sources, params.source_amplitude)
    u = field.values.copy()
    inv_h2 = 1.0 / (h * h)
    for _ in range(steps):
        up = _pad_edge(u)
        lap = (_neighbor_sum(up) - 4.0 * u) * inv_h2
        u = u + dt * (lap + gamma - u)
    return field.with_values(u)


def fuse(t_field: FieldGrid, o_field: FieldGrid, n_field: FieldGrid, params: GrnParams) -> FieldGrid:
    """Gate the three species maps into the guidance concentration M."""
    m = (
        stable_sigmoid(1.0 - t_field.values**2, params.theta, params.k_sig)
        + stable_sigmoid(o_field.values**2, params.theta, params.k_sig)
        + stable_sigmoid(n_field.values**2, params.theta, params.k_sig)
    )
    return t_field.with_values(m)


def ambient_level(params: GrnParams) -> float:
    """M far away from every source."""
    return float(
        stable_sigmoid(np.array(1.0), params.theta, params.k_sig)
        + 2.0 * stable_sigmoid(np.array(0.0), params.theta, params.k_sig)
    )


def concentration_at(grid: FieldGrid, point) -> float:
    """Bilinear sample; raises OutOfGridError outside the cell centers."""
    return float(concentration_at_many(grid, np.asarray(point, dtype=float)[None, :2])[0])


def concentration_at_many(grid: FieldGrid, points: np.ndarray) -> np.ndarray:
    pts = (np.asarray(points, dtype=float) - grid.origin) / grid.h
    if np.any(pts < -1e-9) or np.any(pts > grid.n - 1 + 1e-9):
        raise OutOfGridError("sample point outside the field grid")
    pts = np.clip(pts, 0.0, grid.n - 1)
    i0 = np.minimum(pts.astype(int), grid.n - 2)
    f = pts - i0
    v = grid.values
    ix, iy = i0[:, 0], i0[:, 1]
    fx, fy = f[:, 0], f[:, 1]
    return (
        v[ix, iy] * (1 - fx) * (1 - fy)
        + v[ix + 1, iy] * fx * (1 - fy)
        + v[ix, iy + 1] * (1 - fx) * fy
        + v[ix + 1, iy + 1] * fx * fy
    )


# --- marching squares ----------------------------------------------------

_SEGMENTS = {
    1: [(3, 0)],
    2: [(0, 1)],
    3: [(3, 1)],
    4: [(1, 2)],
    6: [(0, 2)],
    7: [(3, 2)],
    8: [(2, 3)],
    9: [(0, 2)],
    11: [(1, 2)],
    12: [(3, 1)],
    13: [(0, 1)],
    14: [(3, 0)],
}


def _edge_key(i: int, j: int, edge: int):
    # Global identity of a cell edge: ('h', i, j) joins nodes (i,j)-(i+1,j),
    # ('v', i, j) joins (i,j)-(i,j+1).
    if edge == 0:
        return ("h", i, j)
    if edge == 2:
        return ("h", i, j + 1)
    if edge == 3:
        return ("v", i, j)
    return ("v", i + 1, j)


def marching_squares(grid: FieldGrid, level: float) -> list[tuple[np.ndarray, bool]]:
    """Iso-contours of the bilinear field at one level.

    Returns (points, closed) polylines in grid xy coordinates; saddle
    cells are disambiguated with the cell-center average.
    """
    v = grid.values
    above = v >= level
    b0 = above[:-1, :-1]
    b1 = above[1:, :-1]
    b2 = above[1:, 1:]
    b3 = above[:-1, 1:]
    case = (
        b0.astype(np.int8)
        + 2 * b1.astype(np.int8)
        + 4 * b2.astype(np.int8)
        + 8 * b3.astype(np.int8)
    )
    cells = np.argwhere((case != 0) & (case != 15))
    if len(cells) == 0:
        return []

    segments: list[tuple[tuple, tuple]] = []
    for i, j in cells:
        c = case[i, j]
        if c == 5 or c == 10:
            center = 0.25 * (v[i, j] + v[i + 1, j] + v[i, j + 1] + v[i + 1, j + 1])
            if c == 5:
                pairs = [(0, 1), (2, 3)] if center >= level else [(3, 0), (1, 2)]
            else:
                pairs = [(3, 0), (1, 2)] if center >= level else [(0, 1), (2, 3)]
        else:
            pairs = _SEGMENTS[c]
        for a, b in pairs:
            segments.append((_edge_key(i, j, a), _edge_key(i, j, b)))

    def crossing(key) -> np.ndarray:
        kind, i, j = key
        va = v[i, j]
        vb = v[i + 1, j] if kind == "h" else v[i, j + 1]
        t = (level - va) / (vb - va)
        t = min(max(t, 0.0), 1.0)
        if kind == "h":
            return grid.origin + grid.h * np.array([i + t, j])
        return grid.origin + grid.h * np.array([i, j + t])

    adjacency: dict[tuple, list[int]] = defaultdict(list)
    for si, (a, b) in enumerate(segments):
        adjacency[a].append(si)
        adjacency[b].append(si)

    used = [False] * len(segments)
    out = []
    for start in range(len(segments)):
        if used[start]:
            continue
        used[start] = True
        a, b = segments[start]
        chain = [a, b]
        # Extend forward from b, then backward from a.
        for end_idx in (1, 0):
            while True:
                tip = chain[-1] if end_idx == 1 else chain[0]
                nxt = None
                for si in adjacency[tip]:
                    if not used[si]:
                        nxt = si
                        break
                if nxt is None:
                    break
                used[nxt] = True
                sa, sb = segments[nxt]
                other = sb if sa == tip else sa
                if end_idx == 1:
                    chain.append(other)
                else:
                    chain.insert(0, other)
            if end_idx == 1 and chain[0] == chain[-1] and len(chain) > 2:
                break
        closed = len(chain) > 2 and chain[0] == chain[-1]
        pts = chain[:-1] if closed else chain
        out.append((np.array([crossing(k) for k in pts]), closed))
    return out


def polygon_area(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def point_in_polygon(point, pts: np.ndarray) -> bool:
    x, y = float(point[0]), float(point[1])
    xa, ya = pts[:, 0], pts[:, 1]
    xb, yb = np.roll(xa, -1), np.roll(ya, -1)
    straddles = (ya > y) != (yb > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = xa + (y - ya) * (xb - xa) / (yb - ya)
    crosses = straddles & (x < xcross)
    return bool(np.count_nonzero(crosses) % 2)


def polyline_min_distance(pts: np.ndarray, point) -> float:
    """Min distance from a point to a closed polyline."""
    p = np.asarray(point, dtype=float)
    a = pts
    b = np.roll(pts, -1, axis=0)
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom[denom == 0.0] = 1.0
    t = np.clip(np.einsum("ij,ij->i", p - a, ab) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return float(np.min(np.linalg.norm(proj - p, axis=1)))


def quadrant_fractions(pts: np.ndarray, target) -> np.ndarray:
    d = pts - np.asarray(target, dtype=float)
    q = [
        (d[:, 0] >= 0) & (d[:, 1] >= 0),
        (d[:, 0] < 0) & (d[:, 1] >= 0),
        (d[:, 0] < 0) & (d[:, 1] < 0),
        (d[:, 0] >= 0) & (d[:, 1] < 0),
    ]
    return np.array([np.count_nonzero(m) for m in q], dtype=float) / len(pts)


def pattern_is_valid(contour: np.ndarray, target, params: GrnParams) -> bool:
    if len(contour) < 3:
        return False
    if polyline_min_distance(contour, target) < params.safe_distance:
        return False
    frac = quadrant_fractions(contour, target)
    return bool(np.all(frac >= 0.15) and np.all(frac <= 0.35))


def _window_around(m_field: FieldGrid, target: np.ndarray, half_m: float) -> FieldGrid:
    """Subgrid view spanning target +- half_m on both axes."""
    i0, j0 = m_field.cell_index(target - half_m)
    i1, j1 = m_field.cell_index(target + half_m)
    origin = m_field.origin + m_field.h * np.array([i0, j0], dtype=float)
    return FieldGrid(origin=origin, h=m_field.h, values=m_field.values[i0 : i1 + 1, j0 : j1 + 1])


def extract_pattern(m_field: FieldGrid, target, params: GrnParams) -> EntrapPattern:
    """Lowest valid iso-contour of M enclosing the target.

    Levels are scanned upward starting from the smallest concentration
    found at the safe-distance ring around the target.  Raises
    PatternUnavailableError when no scanned level yields a closed,
    simple, balanced contour with enough standoff; callers are expected
    to fall back to a plain safe-distance circle.

    The scan runs on a window four safe-distances around the target: a
    qualifying contour hugs the target at roughly twice the standoff, so
    the window loses nothing while the level sweep stays cheap on big
    grids.
    """
    target = np.asarray(target, dtype=float)[:2]
    ring = target + params.safe_distance * np.stack(
        [
            np.sin(np.linspace(0.0, 2 * math.pi, 16, endpoint=False)),
            np.cos(np.linspace(0.0, 2 * math.pi, 16, endpoint=False)),
        ],
        axis=1,
    )
    try:
        ring_vals = concentration_at_many(m_field, ring)
    except OutOfGridError as exc:
        raise PatternUnavailableError(f"target ring leaves the grid: {exc}") from exc
    base = float(np.min(ring_vals))
    ring_max = float(np.max(ring_vals))

    window = _window_around(m_field, target, 4.0 * params.safe_distance)
    ceiling = float(window.values.max())
    for k in range(params.n_levels):
        level = base + k * params.level_step
        if level > ceiling:
            break
        if ring_max > level + params.level_step:
            # Some standoff-ring bearing still reads above this level, so
            # the enclosing contour would have to cut inside the standoff
            # there; skip the marching pass, validity could never hold.
            continue
        best = None
        best_area = math.inf
        for pts, closed in marching_squares(window, level):
            if not closed or len(pts) < 3:
                continue
            if not point_in_polygon(target, pts):
                continue
            area = polygon_area(pts)
            if area < best_area:
                best, best_area = pts, area
        if best is None:
            continue
        if pattern_is_valid(best, target, params):
            return EntrapPattern(contour=best, level=level, target=target.copy())
    raise PatternUnavailableError(
        f"no valid contour in {params.n_levels} levels above {base:.4g}"
    )


def fallback_circle_pattern(m_field: FieldGrid, target, params: GrnParams) -> EntrapPattern:
    """Stand-in ring used when no field contour qualifies.

    Sits at twice the standoff distance, which is where the calibrated
    source strength puts the real contour for a lone target.  Parking
    there keeps the agents far enough out that their own presence stops
    spoiling the next extraction attempt; a circle at the standoff
    radius itself would trap the swarm in fallback for good.
    """
    target = np.asarray(target, dtype=float)[:2]
    ang = np.linspace(0.0, 2 * math.pi, 64, endpoint=False)
    radius = 2.0 * params.safe_distance
    circle = target + radius * np.stack([np.sin(ang), np.cos(ang)], axis=1)
    try:
        level = float(np.mean(concentration_at_many(m_field, circle)))
    except OutOfGridError:
        level = ambient_level(params)
    return EntrapPattern(contour=circle, level=level, target=target.copy(), fallback=True)


def calibrate_source_amplitude(
    params: GrnParams, radius_goal: float | None = None, tol: float = 0.02
) -> float:
    """Bisection on the clean-field contour radius.

    Finds the amplitude for which a single centered target yields an
    entrapping contour whose mean radius is radius_goal (twice the safe
    standoff by default).
    """
    goal = 2.0 * params.safe_distance if radius_goal is None else radius_goal
    grid = FieldGrid.centered(params.grid_n, params.grid_h)

    def radius(amp: float) -> float:
        p = GrnParams(
            theta=params.theta,
            k_sig=params.k_sig,
            source_amplitude=amp,
            safe_distance=params.safe_distance,
            grid_n=params.grid_n,
            grid_h=params.grid_h,
            level_step=params.level_step,
            n_levels=params.n_levels,
        )
        t = solve_source_field([np.zeros(2)], grid, p)
        zero = grid.with_values(np.zeros_like(grid.values))
        m = fuse(t, zero, zero, p)
        try:
            return extract_pattern(m, np.zeros(2), p).mean_radius
        except PatternUnavailableError:
            return 0.0

    lo, hi = 10.0, 1e7
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        r = radius(mid)
        if abs(r - goal) <= tol:
            return mid
        if r < goal:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)
