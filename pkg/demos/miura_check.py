"""The Miura map carries modified flows to coupled KdV flows, instantly and along trajectories."""

import numpy as np

from ckdv import FieldPair, GridSpec, SystemParams
from ckdv.dynamics import IntegratorConfig, miura_trajectory_defect
from ckdv.grid import random_band_limited
from ckdv.miura import intertwining_defect

grid = GridSpec(256, 40.0)
for lam in (-1.0, 2.0):
    p = SystemParams(lam)
    m = random_band_limited(5, grid, 10)
    scalar = FieldPair.from_arrays(grid, m.first.values, np.zeros(grid.n))
    print(f"lambda={lam:+.0f}: intertwining {intertwining_defect(m, p, relative=True):.1e}, "
          f"nu=0 sector {intertwining_defect(scalar, p, relative=True):.1e}")

cfg = IntegratorConfig(dt=1e-3, t_end=1.0)
m = random_band_limited(7, grid, 6, amplitude=0.5)
print(f"trajectory defect to t=1: {miura_trajectory_defect(cfg, SystemParams(-1.0), m):.1e}")
