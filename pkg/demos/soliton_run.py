"""Soliton transport with conservation monitors, then a deliberately unstable run."""

from ckdv import GridSpec, SystemParams
from ckdv.dynamics import (IntegratorConfig, integrate, integrate_with_monitor, soliton_exact,
                           soliton_initial)
from ckdv.errors import BlowUpError
from ckdv.functionals import FunctionalSpec
from ckdv.grid import random_band_limited

grid = GridSpec(512, 40.0)
cfg = IntegratorConfig(dt=1e-3, t_end=2.0, stride=250)
mons = [FunctionalSpec("H1", -1.0), FunctionalSpec("H2", -1.0), FunctionalSpec("MassU")]
traj, rep = integrate_with_monitor(cfg, SystemParams(-1.0), soliton_initial(1.0, 0.0, grid),
                                   monitors=mons)
for t, snap in zip(traj.times, traj.snapshots):
    err = (snap - soliton_exact(1.0, 0.0, t, grid)).max_abs()
    print(f"t={t:5.2f}  error vs exact translate {err:.1e}")
print("drifts:", {k: f"{v:.1e}" for k, v in rep.drifts.items()})

big = random_band_limited(1, GridSpec(256, 40.0), 10, amplitude=20.0)
try:
    integrate(IntegratorConfig(dt=1e-2, t_end=1.0), SystemParams(-1.0), big)
except BlowUpError as exc:
    print("detector:", exc)
