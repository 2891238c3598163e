"""Probe: 4 captors packed on a 60 degree arc of the ring; do they spread and hold radius?"""
import math

import numpy as np

from vgswarm.world import Pose3
from vgswarm.sim import Scenario, TargetSpec, StaticPolicy, run
from vgswarm.scenarios import CRUISE_Z

bearings = [math.radians(b) for b in (0.0, 20.0, 40.0, 60.0)]
captors = tuple(
    Pose3(np.array([4.0 * math.sin(b), 4.0 * math.cos(b), CRUISE_Z]), heading=(b + math.pi))
    for b in bearings
)
sc = Scenario(
    name="arc-probe",
    bounds=((-30.0, 30.0), (-30.0, 30.0)),
    captors=captors,
    targets=(TargetSpec(pose=Pose3(np.array([0.0, 0.0, CRUISE_Z])), policy=StaticPolicy()),),
    max_ticks=240,
    seed=3,
    captor_max_speed=5.0,
)
log = run(sc)

by_tick = {}
for r in log.rows:
    if r[2] == "captor":
        by_tick.setdefault(r[0], []).append(r)

for tick in range(0, 241, 40):
    rows = by_tick.get(tick)
    if not rows:
        continue
    rad = [math.hypot(r[4], r[5]) for r in rows]
    brg = sorted(math.degrees(math.atan2(r[4], r[5])) % 360.0 for r in rows)
    gaps = [(brg[(i + 1) % 4] - brg[i]) % 360.0 for i in range(4)]
    span = 360.0 - max(gaps)
    states = ",".join(r[3][:4] for r in rows)
    print(
        f"t={tick:3d} radii={' '.join(f'{v:4.2f}' for v in rad)} "
        f"span={span:5.1f} states={states}"
    )
