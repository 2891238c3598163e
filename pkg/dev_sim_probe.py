import time

import numpy as np

from vgswarm.camera import NoiseModel
from vgswarm.sim import (
    EvadePolicy,
    Scenario,
    StaticPolicy,
    TargetSpec,
    WaypointsPolicy,
    run,
    write_runlog,
)
from vgswarm.world import Pose3

quiet = NoiseModel(sigma_px=0.0, p_miss=0.0, p_false=0.0)


def ring_captors(n, dist, target_xy=(0.0, 0.0), z=-2.0):
    out = []
    for k in range(n):
        ang = 2 * np.pi * k / n + 0.3
        x = target_xy[0] + dist * np.sin(ang)
        y = target_xy[1] + dist * np.cos(ang)
        heading = np.arctan2(target_xy[0] - x, target_xy[1] - y)
        out.append(Pose3(np.array([x, y, z]), heading))
    return tuple(out)


sc = Scenario(
    name="probe",
    bounds=((-30.0, 30.0), (-30.0, 30.0)),
    captors=ring_captors(4, 8.0),
    targets=(TargetSpec(pose=Pose3(np.array([0.0, 0.0, -2.0])), policy=StaticPolicy()),),
    noise=quiet,
    max_ticks=240,
    seed=3,
)

t0 = time.perf_counter()
log = run(sc)
el = time.perf_counter() - t0
print(f"run: {el:.2f} s for {sc.max_ticks} ticks, {el/sc.max_ticks*1000:.2f} ms/tick")

rows = log.rows
states = {}
for r in rows:
    if r[2] == "captor":
        states.setdefault(r[1], []).append(r[3])
for cid, seq in states.items():
    # print transitions
    trans = [seq[0]]
    for s in seq[1:]:
        if s != trans[-1]:
            trans.append(s)
    print(f"captor {cid}: {' -> '.join(trans)}")

last_tick = rows[-1][0]
final = [r for r in rows if r[0] == last_tick]
for r in final:
    d = float(np.hypot(r[4], r[5]))
    print(
        f"  id={r[1]} kind={r[2]} state={r[3]} planar_dist={d:.2f} "
        f"speed={float(np.hypot(r[7], r[8])):.3f} z={r[6]:.2f}"
    )

print("collisions:", len(log.collisions))
print("patterns rows:", len(log.patterns), "first:", log.patterns[0] if log.patterns else None)
print("detections rows:", len(log.detections))
