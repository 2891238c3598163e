"""Run evaluation: ring-distance error, entrapment success, rate tables.

A run counts as a successful entrapment at the first tick where every
120-degree sector around the target holds at least one captor that sits
within a tolerance band of the encircling ring and has essentially
stopped.  The ring radius comes from the captors' own extracted patterns
(their per-tick mean radius, averaged over the swarm); while no captor
has a usable pattern yet the standoff distance stands in.

Everything here is pure post-processing over a RunLog, so the same
functions serve live runs, replayed CSVs, and the batch harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sim import RunLog, _write_csv

DEFAULT_BAND = 0.5
STOP_SPEED_FRACTION = 0.1
CHECKPOINTS_S = (6.0, 10.0, 14.0)

_SECTOR = 2.0 * math.pi / 3.0
_PURSUIT_STATES = ("approaching", "departing", "keeping")


@dataclass(frozen=True)
class EntrapmentReport:
    """Per-run evaluation summary.

    d_i holds one row per tick with one ring-error entry per captor
    (NaN for captors that have failed out).  d_bar is the per-tick mean
    over the surviving captors.  avg_speed covers the stretch from the
    first captor leaving its search pattern until success (or the end of
    the run when the swarm never closes).
    """

    ticks: tuple[int, ...]
    d_bar: tuple[float, ...]
    d_i: tuple[tuple[float, ...], ...]
    ring_radius: tuple[float, ...]
    success_tick: int | None
    avg_speed: float
    collisions: int

    @property
    def mean_dbar_after_success(self) -> float:
        if self.success_tick is None:
            return float("nan")
        later = [d for t, d in zip(self.ticks, self.d_bar) if t > self.success_tick]
        if not later:
            return float("nan")
        return float(np.nanmean(later))


def distance_error(captors, target, ring_radius: float) -> float:
    """Mean absolute offset of the captors from the encircling ring."""
    tx, ty = float(target[0]), float(target[1])
    errors = [
        abs(math.hypot(p[0] - tx, p[1] - ty) - ring_radius) for p in captors
    ]
    if not errors:
        raise ValueError("distance_error needs at least one captor")
    return float(np.mean(errors))


def _sector(dx: float, dy: float) -> int:
    bearing = math.atan2(dx, dy) % (2.0 * math.pi)
    return min(int(bearing / _SECTOR), 2)


def is_success(
    captors,
    target,
    ring_radius: float,
    band: float = DEFAULT_BAND,
    speeds=None,
    stop_speed: float = math.inf,
    min_per_sector: int = 1,
) -> bool:
    """True when each third of the circle holds enough settled captors.

    A captor counts for its sector only if its ring error is within band
    and its planar speed is at or below stop_speed.  speeds defaults to
    all-stopped so purely geometric checks stay one-liners.
    """
    tx, ty = float(target[0]), float(target[1])
    counts = [0, 0, 0]
    for i, p in enumerate(captors):
        err = abs(math.hypot(p[0] - tx, p[1] - ty) - ring_radius)
        if err > band:
            continue
        if speeds is not None and speeds[i] > stop_speed:
            continue
        counts[_sector(p[0] - tx, p[1] - ty)] += 1
    return all(c >= min_per_sector for c in counts)


def _gated_collisions(log: RunLog) -> int:
    """Captor-captor and captor-obstacle contacts; target brushes are free."""
    n = 0
    for _, _, _, kind_a, kind_b, _ in log.collisions:
        pair = {kind_a, kind_b}
        if pair == {"captor"} or pair == {"captor", "obstacle"}:
            n += 1
    return n


def analyze(log: RunLog, band: float = DEFAULT_BAND, strict: bool = False) -> EntrapmentReport:
    """Evaluate one run; strict demands two captors per sector."""
    sc = log.scenario
    nc = len(sc.captors)
    stop_speed = STOP_SPEED_FRACTION * sc.captor_max_speed
    min_per_sector = 2 if strict else 1

    by_tick: dict[int, dict] = {}
    for row in log.rows:
        tick, body_id, kind, state = row[0], row[1], row[2], row[3]
        slot = by_tick.setdefault(tick, {"captors": {}, "target": None})
        if kind == "captor":
            slot["captors"][body_id] = (state, row[4], row[5], row[7], row[8])
        elif kind == "target" and slot["target"] is None:
            slot["target"] = (row[4], row[5])

    radii_by_tick: dict[int, list[float]] = {}
    for tick, _, mean_radius, _, fallback, _, _, _, _ in log.patterns:
        if not fallback:
            radii_by_tick.setdefault(tick, []).append(mean_radius)

    ticks, d_bar_series, d_i_series, ring_series = [], [], [], []
    success_tick: int | None = None
    pursuit_tick: int | None = None
    speed_samples: list[float] = []
    ring = sc.grn.safe_distance

    for tick in sorted(by_tick):
        slot = by_tick[tick]
        target = slot["target"]
        if tick in radii_by_tick:
            ring = float(np.mean(radii_by_tick[tick]))

        errors = [float("nan")] * nc
        active_pos, active_speeds = [], []
        for body_id, (state, x, y, vx, vy) in slot["captors"].items():
            if state == "failed":
                continue
            if target is not None:
                errors[body_id] = abs(math.hypot(x - target[0], y - target[1]) - ring)
            active_pos.append((x, y))
            active_speeds.append(math.hypot(vx, vy))
            if pursuit_tick is None and state in _PURSUIT_STATES:
                pursuit_tick = tick

        ticks.append(tick)
        ring_series.append(ring)
        d_i_series.append(tuple(errors))
        finite = [e for e in errors if not math.isnan(e)]
        d_bar_series.append(float(np.mean(finite)) if finite else float("nan"))

        if pursuit_tick is not None and (success_tick is None or tick <= success_tick):
            if active_speeds:
                speed_samples.append(float(np.mean(active_speeds)))

        if (
            success_tick is None
            and target is not None
            and active_pos
            and is_success(
                active_pos,
                target,
                ring,
                band,
                speeds=active_speeds,
                stop_speed=stop_speed,
                min_per_sector=min_per_sector,
            )
        ):
            success_tick = tick

    return EntrapmentReport(
        ticks=tuple(ticks),
        d_bar=tuple(d_bar_series),
        d_i=tuple(d_i_series),
        ring_radius=tuple(ring_series),
        success_tick=success_tick,
        avg_speed=float(np.mean(speed_samples)) if speed_samples else 0.0,
        collisions=_gated_collisions(log),
    )


def initial_distance(log: RunLog) -> float:
    """Mean planar captor-to-target range at the first logged tick."""
    first = min(row[0] for row in log.rows)
    captors, target = [], None
    for row in log.rows:
        if row[0] != first:
            continue
        if row[2] == "captor":
            captors.append((row[4], row[5]))
        elif row[2] == "target" and target is None:
            target = (row[4], row[5])
    if not captors or target is None:
        raise ValueError("run log has no captor/target rows to measure")
    return float(
        np.mean([math.hypot(x - target[0], y - target[1]) for x, y in captors])
    )


def summarize(pairs, checkpoints_s=CHECKPOINTS_S):
    """Success-rate rows grouped by initial distance.

    pairs is an iterable of (RunLog, EntrapmentReport).  Each output row
    is (initial_distance_m, rate at each checkpoint in percent, mean
    avg_speed of the successful runs).
    """
    groups: dict[float, list] = {}
    for log, report in pairs:
        key = round(initial_distance(log), 2)
        groups.setdefault(key, []).append((log, report))

    rows = []
    for key in sorted(groups):
        runs = groups[key]
        rates = []
        for cp in checkpoints_s:
            hit = sum(
                1
                for log, rep in runs
                if rep.success_tick is not None and rep.success_tick * log.scenario.dt <= cp
            )
            rates.append(100.0 * hit / len(runs))
        speeds = [rep.avg_speed for _, rep in runs if rep.success_tick is not None]
        rows.append((key, *rates, float(np.mean(speeds)) if speeds else 0.0))
    return rows


def write_report_csv(entries, path: str, force: bool = False) -> None:
    """Per-run summary CSV; entries are (run_id, seed, EntrapmentReport)."""
    rows = [
        (
            run_id,
            seed,
            rep.success_tick if rep.success_tick is not None else -1,
            rep.avg_speed,
            rep.mean_dbar_after_success,
            rep.collisions,
        )
        for run_id, seed, rep in entries
    ]
    _write_csv(
        path,
        ["run_id", "seed", "success_tick", "avg_speed_mps", "mean_dbar_after_success", "collisions"],
        rows,
        force,
    )


def write_table_csv(rows, path: str, force: bool = False, checkpoints_s=CHECKPOINTS_S) -> None:
    header = ["initial_distance_m"]
    header += [f"rate_at_{cp:g}s" for cp in checkpoints_s]
    header.append("avg_speed_mps")
    _write_csv(path, header, rows, force)


def write_traj_plotdata(log: RunLog, report: EntrapmentReport, path: str, force: bool = False) -> None:
    """Wide per-tick CSV with target/captor tracks and the d-bar series."""
    sc = log.scenario
    nc = len(sc.captors)
    pos: dict[int, dict[int, tuple[float, float]]] = {}
    target: dict[int, tuple[float, float]] = {}
    for row in log.rows:
        if row[2] == "captor":
            pos.setdefault(row[0], {})[row[1]] = (row[4], row[5])
        elif row[2] == "target" and row[0] not in target:
            target[row[0]] = (row[4], row[5])

    header = ["tick", "time_s", "d_bar", "ring_radius", "target_x", "target_y"]
    for i in range(nc):
        header += [f"captor{i}_x", f"captor{i}_y"]

    rows = []
    for idx, tick in enumerate(report.ticks):
        tx, ty = target.get(tick, (float("nan"), float("nan")))
        row = [tick, tick * sc.dt, report.d_bar[idx], report.ring_radius[idx], tx, ty]
        for i in range(nc):
            x, y = pos.get(tick, {}).get(i, (float("nan"), float("nan")))
            row += [x, y]
        rows.append(tuple(row))
    _write_csv(path, header, rows, force)
