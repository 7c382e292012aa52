"""Rebuild the brackets from the singular Lagrangians by finite-dimensional Dirac reduction."""

import numpy as np

from ckdv.dirac import (ConstraintVariant, casimir_of_constraints_check, constraint_matrix,
                        dirac_bracket_matrix, kernel_comparison)
from ckdv.errors import SingularConstraintError
from ckdv.grid import GridSpec, derivative_matrix

g = GridSpec(64, 40.0)
d = derivative_matrix(g)
br = dirac_bracket_matrix(ConstraintVariant("L1", -1.0), g)
mean_zero = np.sin(2 * np.pi * g.x / g.length)
print("L1 uu block vs -D:", np.max(np.abs((br.uu + d) @ mean_zero)))
print("central-difference constraint bandwidth:",
      constraint_matrix(ConstraintVariant("Lk", -1.0, 0.3), g, scheme="central").bandwidth())

for v in [ConstraintVariant("L1", 2.0), ConstraintVariant("Lk", -1.0, 0.5),
          ConstraintVariant("LkM", 2.0, 0.3)]:
    rep = kernel_comparison(v, (64, 128, 256))
    worst = max(max(x) for x in rep.defects.values())
    print(f"{v.id:4s} lambda={v.lam:+.0f}: worst block defect {worst:.1e} -> {rep.passed}")

rng = np.random.default_rng(0)
probes = [rng.standard_normal(4 * g.n) for _ in range(10)]
print("constraint Casimir defect:",
      casimir_of_constraints_check(ConstraintVariant("Lk", -1.0, 0.7), g, probes))

try:
    dirac_bracket_matrix(ConstraintVariant("Lk", 4.0, 1 / 3), g)
except SingularConstraintError as exc:
    print("excluded weight:", exc)
