"""Each bracket, applied to the gradient of its Hamiltonian, gives the coupled KdV flow."""

from ckdv import FieldPair, GridSpec, SystemParams
from ckdv.functionals import FunctionalSpec
from ckdv.grid import random_band_limited
from ckdv.structures import StructureSpec, coupled_kdv_rhs, hamiltonian_flow

grid = GridSpec(256, 40.0)
lam, k = -1.0, 0.4
fields = random_band_limited(3, grid, 10)
target = coupled_kdv_rhs(SystemParams(lam), fields)

pairs = [("J1", "H1"), ("J0", "H2"), ("Jk", "Hk"), ("JM1", "H1M"), ("JM0", "H2M"), ("JkM", "HkM")]
for sid, fid in pairs:
    kk = k if sid in ("Jk", "JkM") else None
    flow = hamiltonian_flow(StructureSpec(sid, lam, kk), FunctionalSpec(fid, lam, kk), fields)
    res = (flow - target).max_abs() / target.max_abs()
    print(f"{sid:4s} {fid:4s}  relative residual {res:.2e}")

# a mismatched pair is only allowed in exploratory mode
flow = hamiltonian_flow(StructureSpec("J1", lam), FunctionalSpec("H2", lam), fields, strict=False)
print(f"J1 with H2 (exploratory): residual {(flow - target).max_abs() / target.max_abs():.2f}")
assert isinstance(flow, FieldPair)
