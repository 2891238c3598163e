import numpy as np, math
import sys
sys.path.insert(0, "src")
from vgswarm import grn

p = grn.GrnParams()
grid = grn.FieldGrid.centered(p.grid_n, p.grid_h)
zero = grid.with_values(np.zeros_like(grid.values))

# clean ring
t = grn.solve_source_field([np.zeros(2)], grid, p)
m_clean = grn.fuse(t, zero, zero, p)
pat_clean = grn.extract_pattern(m_clean, np.zeros(2), p)
print("clean radius:", pat_clean.mean_radius, "level:", pat_clean.level)

# obstacle at (6, 0): bump should push the contour inward on +x side
o = grn.solve_source_field([np.array([7.0, 0.0])], grid, p)
m_obs = grn.fuse(t, o, zero, p)
pat_obs = grn.extract_pattern(m_obs, np.zeros(2), p)
print("obstacle-case radius:", pat_obs.mean_radius, "level:", pat_obs.level)
d_obs = grn.polyline_min_distance(pat_obs.contour, np.array([7.0, 0.0]))
d_obs_clean = grn.polyline_min_distance(pat_clean.contour, np.array([7.0, 0.0]))
print("dist obstacle->contour:", d_obs, "clean:", d_obs_clean)
# radius along +x
xs = pat_obs.contour[np.abs(pat_obs.contour[:, 1]) < 0.3]
print("contour x-extent near y=0:", xs[:, 0].min(), xs[:, 0].max())
print("quadrants:", grn.quadrant_fractions(pat_obs.contour, np.zeros(2)))

# neighbor bump scale: N source alone at origin, fuse, M crosses 1.5 near ring radius
nfield = grn.solve_source_field([np.zeros(2)], grid, p)
m_n = grn.fuse(zero, zero, nfield, p)
rr = np.linspace(2.0, 6.0, 401)
mvals = grn.concentration_at_many(m_n, np.stack([rr, np.zeros_like(rr)], axis=1))
cross = rr[np.argmin(np.abs(mvals - 1.5))]
print("neighbor bump 1.5-crossing radius:", cross)

# target + one neighbor ON the ring: contour should dodge the neighbor
nb = grn.solve_source_field([np.array([4.0, 0.0])], grid, p)
m_tn = grn.fuse(t, zero, nb, p)
try:
    pat_tn = grn.extract_pattern(m_tn, np.zeros(2), p)
    print("target+neighbor: radius", pat_tn.mean_radius, "level", pat_tn.level,
          "quadrants", grn.quadrant_fractions(pat_tn.contour, np.zeros(2)))
    print("min dist to target:", grn.polyline_min_distance(pat_tn.contour, np.zeros(2)))
except grn.PatternUnavailableError as e:
    print("target+neighbor: UNAVAILABLE:", e)

# 4 captors at 90 deg on ring + target: the classic entrapment geometry
caps = [4.0 * np.array([math.sin(a), math.cos(a)]) for a in (0, math.pi/2, math.pi, 3*math.pi/2)]
nb4 = grn.solve_source_field(caps, grid, p)
m4 = grn.fuse(t, zero, nb4, p)
try:
    pat4 = grn.extract_pattern(m4, np.zeros(2), p)
    print("4-captor: radius", pat4.mean_radius, "level", pat4.level,
          "quadrants", grn.quadrant_fractions(pat4.contour, np.zeros(2)))
except grn.PatternUnavailableError as e:
    print("4-captor: UNAVAILABLE:", e)

# 10 captors crowding: saturation rescue via level scan
ang = np.linspace(0, 2*math.pi, 10, endpoint=False)
caps10 = [7.0 * np.array([math.sin(a), math.cos(a)]) for a in ang]
p10 = grn.GrnParams(safe_distance=3.5)
t10 = grn.solve_source_field([np.zeros(2)], grid, p10)
nb10 = grn.solve_source_field(caps10, grid, p10)
m10 = grn.fuse(t10, zero, nb10, p10)
try:
    pat10 = grn.extract_pattern(m10, np.zeros(2), p10)
    print("10-captor safe=3.5: radius", pat10.mean_radius, "level", pat10.level)
except grn.PatternUnavailableError as e:
    print("10-captor: UNAVAILABLE:", e)

# safe_distance=3.5 clean ring radius (needs calibrated amp for that standoff?)
m10c = grn.fuse(t10, zero, zero, p10)
try:
    pc = grn.extract_pattern(m10c, np.zeros(2), p10)
    print("clean ring with safe=3.5, default amp: radius", pc.mean_radius)
except grn.PatternUnavailableError as e:
    print("clean safe=3.5: UNAVAILABLE:", e)
amp35 = grn.calibrate_source_amplitude(grn.GrnParams(safe_distance=3.5))
print("amp for safe=3.5:", amp35)
