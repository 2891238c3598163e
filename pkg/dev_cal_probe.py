import numpy as np

from vgswarm.calibration import (
    CalibrationConfig,
    analytic_distance_model,
    fit_distance_model,
)
from vgswarm.camera import QUIET_NOISE, CameraRig, NoiseModel, sense
from vgswarm.world import Body, BodyKind, Pose3, WorldState

rig = CameraRig()
target = Body(id=1, kind=BodyKind.TARGET, pose=Pose3(np.array([0.0, 0.0, -2.0])))

ana = analytic_distance_model(rig, target)
print("analytic alpha", ana.alpha, "beta", ana.beta)

# quiet flight
fit, samples = fit_distance_model(target, rig, QUIET_NOISE)
print("quiet: n", len(samples), "alpha", fit.alpha, "beta", fit.beta, "rmse", fit.rmse)
errs = [abs(d - ana.predict(a)) for a, d in samples]
print("quiet max |sample - truth|", max(errs))

# area of target at 5 m, noiseless, for prediction checks
obs = Body(id=0, kind=BodyKind.CAPTOR, pose=Pose3(np.array([0.0, -5.0, -2.0])))
w = WorldState(bodies=(obs, target))
area5 = max(d.area for d in sense(rig, 0, w, QUIET_NOISE))
print("area5", area5, "quiet predict(5m)", fit.predict(area5))

# noisy flights across seeds
noise = NoiseModel()
for seed in range(12):
    rng = np.random.default_rng(seed)
    f, s = fit_distance_model(target, rig, noise, CalibrationConfig(), rng)
    print(
        f"seed {seed}: n {len(s)} alpha {f.alpha:.2f} beta {f.beta:.4f} "
        f"rmse {f.rmse:.3f} pred5 {f.predict(area5):.3f}"
    )

# obstacle flight, quiet
pillar = Body(
    id=2,
    kind=BodyKind.OBSTACLE,
    pose=Pose3(np.array([0.0, 0.0, 0.0])),
    radius=0.4,
    height=4.0,
)
cfg = CalibrationConfig(end_distance=3.2)
fo, so = fit_distance_model(pillar, rig, QUIET_NOISE, cfg)
obs6 = Body(id=0, kind=BodyKind.CAPTOR, pose=Pose3(np.array([0.0, -6.0, -2.0])))
w6 = WorldState(bodies=(obs6, pillar))
area6 = max(d.area for d in sense(rig, 0, w6, QUIET_NOISE))
print("obstacle: n", len(so), "beta", fo.beta, "pred6", fo.predict(area6))
