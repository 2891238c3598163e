import numpy as np, math, time
import scipy.special
import sys
sys.path.insert(0, "src")
from vgswarm import grn

# 1. DCT vs dense direct on 41x41
n, h = 41, 0.25
grid = grn.FieldGrid.centered(n, h)
params = grn.GrnParams(grid_n=n, grid_h=h)
rng = np.random.default_rng(7)
srcs = rng.uniform(-4, 4, size=(3, 2))

def dense_solve(gamma, h):
    n = gamma.shape[0]
    N = n * n
    A = np.zeros((N, N))
    idx = lambda i, j: i * n + j
    for i in range(n):
        for j in range(n):
            k = idx(i, j)
            diag = 1.0
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ii, jj = i + di, j + dj
                if 0 <= ii < n and 0 <= jj < n:
                    A[k, idx(ii, jj)] -= 1.0 / h**2
                    diag += 1.0 / h**2
            A[k, k] = diag
    return np.linalg.solve(A, gamma.ravel()).reshape(n, n)

gamma = grn.source_grid(grid, srcs, params.source_amplitude)
u_dense = dense_solve(gamma, h)
u_dct = grn._solve_dct(gamma, h)
print("dct vs dense:", np.max(np.abs(u_dct - u_dense)), "rel", np.max(np.abs(u_dct - u_dense))/np.max(np.abs(u_dense)))

t0 = time.perf_counter()
u_sor = grn._solve_relax(gamma, h, 1e-8, 20000, None, jacobi=False)
t1 = time.perf_counter()
print("sor vs dense:", np.max(np.abs(u_sor - u_dense)), f"({t1-t0:.3f}s)")
t0 = time.perf_counter()
u_jac = grn._solve_relax(gamma, h, 1e-8, 200000, None, jacobi=True)
t1 = time.perf_counter()
print("jacobi vs dense:", np.max(np.abs(u_jac - u_dense)), f"({t1-t0:.3f}s)")

# residual norm of dense solution should be ~0
print("residual(dense):", grn.residual_norm(u_dense, gamma, h))

# 2. K0 profile on big grid (single centered source)
n2 = 241
grid2 = grn.FieldGrid.centered(n2, h)
p2 = grn.GrnParams(grid_n=n2, grid_h=h, source_amplitude=1.0)
f = grn.solve_source_field([np.zeros(2)], grid2, p2)
c = (n2 - 1) // 2
for d_cells in (8, 16, 24, 32):  # 2,4,6,8 m
    d = d_cells * h
    pred = 1.0 * h * h * scipy.special.k0(d) / (2 * np.pi)
    got = f.values[c + d_cells, c]
    print(f"d={d}: got {got:.6e} pred {pred:.6e} ratio {got/pred:.4f}")

# 3. amplitude calibration
t0 = time.perf_counter()
amp = grn.calibrate_source_amplitude(grn.GrnParams())
t1 = time.perf_counter()
print(f"calibrated amplitude: {amp:.1f}  ({t1-t0:.2f}s)")

# verify ring with that amplitude
p3 = grn.GrnParams(source_amplitude=amp)
grid3 = grn.FieldGrid.centered(p3.grid_n, p3.grid_h)
t = grn.solve_source_field([np.zeros(2)], grid3, p3)
zero = grid3.with_values(np.zeros_like(grid3.values))
m = grn.fuse(t, zero, zero, p3)
pat = grn.extract_pattern(m, np.zeros(2), p3)
print("ring mean radius:", pat.mean_radius, "level:", pat.level, "pts:", len(pat.contour))
print("radius std:", np.std(np.linalg.norm(pat.contour, axis=1)))
print("quadrants:", grn.quadrant_fractions(pat.contour, np.zeros(2)))
print("M range:", m.values.min(), m.values.max())

# timing of 121x121 dct solve
t0 = time.perf_counter()
for _ in range(50):
    grn.solve_source_field([np.zeros(2)], grid3, p3)
t1 = time.perf_counter()
print(f"121x121 dct solve: {(t1-t0)/50*1000:.2f} ms")

# marching squares on analytic circle field: f = x^2+y^2, level r^2
gcirc = grn.FieldGrid.centered(81, 0.25)
xs = gcirc.origin[0] + np.arange(81) * 0.25
X, Y = np.meshgrid(xs, xs, indexing="ij")
gcirc = gcirc.with_values(X**2 + Y**2)
loops = grn.marching_squares(gcirc, 9.0)
print("circle loops:", [(len(p), cl) for p, cl in loops])
pts = loops[0][0]
r = np.linalg.norm(pts, axis=1)
print("circle radius range:", r.min(), r.max(), "area vs pi*9:", grn.polygon_area(pts), math.pi*9)
