import numpy as np, math
import sys
sys.path.insert(0, "src")
from vgswarm import grn

p = grn.GrnParams()
grid = grn.FieldGrid.centered(p.grid_n, p.grid_h)
zero = grid.with_values(np.zeros_like(grid.values))
t = grn.solve_source_field([np.zeros(2)], grid, p)
o = grn.solve_source_field([np.array([6.0, 0.0])], grid, p)
m = grn.fuse(t, o, zero, p)

target = np.zeros(2)
ring = target + p.safe_distance * np.stack(
    [np.sin(np.linspace(0, 2*math.pi, 16, endpoint=False)),
     np.cos(np.linspace(0, 2*math.pi, 16, endpoint=False))], axis=1)
base = float(np.min(grn.concentration_at_many(m, ring)))
print("base:", base)
for k in range(0, 80, 4):
    level = base + k * p.level_step
    loops = grn.marching_squares(m, level)
    enc = []
    for pts, closed in loops:
        if closed and len(pts) >= 3 and grn.point_in_polygon(target, pts):
            enc.append(pts)
    if not enc:
        print(f"k={k:2d} L={level:.3f}: loops={len(loops)} none enclosing")
        continue
    best = min(enc, key=grn.polygon_area)
    md = grn.polyline_min_distance(best, target)
    qf = grn.quadrant_fractions(best, target)
    print(f"k={k:2d} L={level:.3f}: n_enc={len(enc)} pts={len(best)} min_dist={md:.2f} quad={np.round(qf,3)}")
