"""Pencil decomposition, the lambda=0 equal-weight root, and the lambda=-1 complex brackets."""

import numpy as np

from ckdv.grid import GridSpec, random_band_limited
from ckdv.pencil import PencilParams, excluded_k
from ckdv.structures import (complex_bracket_coefficients, equal_weight_k_lambda0,
                             holomorphic_coefficient, lambda0_coefficients, pencil_defect,
                             sum_weight_k)

grid = GridSpec(256, 40.0)
f, c = random_band_limited(1, grid, 10), random_band_limited(2, grid, 10)

for lam, k in [(-1.0, 0.3), (2.0, 0.7), (0.0, 0.25)]:
    for fam in ("first-order", "miura"):
        d = pencil_defect(fam, PencilParams(lam, k), f, c)
        print(f"lambda={lam:+.1f} k={k:.2f} {fam:11s} defect {d:.1e}")

print("excluded weights at lambda=4:", excluded_k(4.0))
print("sum weight at lambda=2:", sum_weight_k(2.0))

k0 = equal_weight_k_lambda0()
c52 = lambda0_coefficients(2.5)
print(f"lambda=0 equal coefficients at k={k0:.15g}; at k=5/2 they are {c52.a:.4g} and {c52.b:.4g}")

print("\nlambda=-1, w = u + i v")
for k in (0.0, 0.3, 0.5, 1.0):
    holo, mixed = complex_bracket_coefficients(k, f, f.first.values)
    print(f"k={k:.1f}  {{w,w}} = ({holo.real:+.4f}{holo.imag:+.4f}i) d/dx"
          f"   expected {holomorphic_coefficient(k):.4f}"
          f"   real form {holomorphic_coefficient(k, real_form=True).real:+.4f}"
          f"   |{{w,conj w}}| {abs(mixed):.0e}")
assert np.isclose(k0, 0.4)
