"""Hamiltonian functionals, their gradients, and Lagrangian field equations.

All densities are written in the differentiated variables ``u = w_x``,
``v = y_x`` (and ``mu = sigma_x``, ``nu = rho_x`` for the modified system), so
potentials never have to be reconstructed.

Array-level helpers accept ``(..., n)`` arrays so the finite-difference
oracle can evaluate a whole batch of perturbed fields at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ParameterError
from .grid import FieldPair, spectral_derivative
from .pencil import check_pencil

__all__ = [
    "FUNCTIONAL_IDS",
    "LAGRANGIAN_IDS",
    "FunctionalSpec",
    "LagrangianSpec",
    "eval_functional",
    "density",
    "variational_derivative",
    "fd_variational_oracle",
    "FDCheck",
    "fd_convergence",
    "euler_lagrange_residual",
    "csv_column",
]

FUNCTIONAL_IDS = ("H1", "H2", "H1M", "H2M", "Hk", "HkM", "MassU", "MassV")
LAGRANGIAN_IDS = ("L1", "L2", "Lk", "L1M", "L2M", "LkM")

_CSV_NAMES = {"MassU": "mass_u", "MassV": "mass_v"}


def csv_column(functional_id: str) -> str:
    """Column name used for a functional in conservation tables."""
    return _CSV_NAMES.get(functional_id, functional_id)


def _validate(kind, ident, lam, k):
    if ident in ("H1", "H1M", "L1", "L1M") and lam == 0:
        raise ParameterError(f"lambda=0 invalid for {ident}: its bracket partner is not defined at lambda=0")
    if ident in ("Hk", "HkM", "Lk", "LkM"):
        if k is None:
            raise ParameterError(f"{ident} needs a pencil weight k")
        check_pencil(lam, k)


@dataclass(frozen=True)
class FunctionalSpec:
    id: str
    lam: float = -1.0
    k: float | None = None
    # "standard" uses v*u_xx in H2, "ibp" the integrated-by-parts -u_x*v_x.
    h2_form: str = "standard"

    def __post_init__(self):
        if self.id not in FUNCTIONAL_IDS:
            raise ParameterError(f"unknown functional {self.id!r}")
        if self.h2_form not in ("standard", "ibp"):
            raise ParameterError(f"unknown H2 density form {self.h2_form!r}")
        _validate("functional", self.id, self.lam, self.k)


@dataclass(frozen=True)
class LagrangianSpec:
    """A Lagrangian density for the coupled or modified system.

    ``quartic_sign`` is the sign in front of ``lam**2 * rho_x**4 / 72`` in the
    first modified density.  ``-1`` (the default) leaves a ``(lam/3) nu**2 nu_x`` residual against the modified flow, which
    ``+1`` removes.
    """

    id: str
    lam: float = -1.0
    k: float | None = None
    quartic_sign: float = -1.0

    def __post_init__(self):
        if self.id not in LAGRANGIAN_IDS:
            raise ParameterError(f"unknown Lagrangian {self.id!r}")
        _validate("lagrangian", self.id, self.lam, self.k)


# -- densities -----------------------------------------------------------------

def _h1(u, v, lam, L):
    ux = spectral_derivative(u, L, 1)
    vx = spectral_derivative(v, L, 1)
    return u ** 3 / 6 - 0.5 * ux ** 2 + 0.5 * lam * u * v ** 2 - 0.5 * lam * vx ** 2


def _h2(u, v, lam, L, form="standard"):
    if form == "ibp":
        coupling = -spectral_derivative(u, L, 1) * spectral_derivative(v, L, 1)
    else:
        coupling = v * spectral_derivative(u, L, 2)
    return 0.5 * u ** 2 * v + coupling + lam * v ** 3 / 6


def _h1m(u, v, lam, L):
    return -0.5 * (u ** 2 + lam * v ** 2)


def _h2m(u, v, lam, L):
    return -u * v


def density(spec: FunctionalSpec, u, v, length: float):
    """Density of ``spec`` sampled on the grid (arrays may be batched)."""
    lam, k = spec.lam, spec.k
    ident = spec.id
    if ident == "H1":
        return _h1(u, v, lam, length)
    if ident == "H2":
        return _h2(u, v, lam, length, spec.h2_form)
    if ident == "H1M":
        return _h1m(u, v, lam, length)
    if ident == "H2M":
        return _h2m(u, v, lam, length)
    if ident == "Hk":
        return k * _h1(u, v, lam, length) + (1 - k) * _h2(u, v, lam, length, spec.h2_form)
    if ident == "HkM":
        return k * _h1m(u, v, lam, length) + (1 - k) * _h2m(u, v, lam, length)
    if ident == "MassU":
        return np.asarray(u, dtype=float)
    return np.asarray(v, dtype=float)


def _integrate(values, length):
    n = values.shape[-1]
    return (length / n) * np.sum(values, axis=-1)


def eval_functional(spec: FunctionalSpec, fields: FieldPair) -> float:
    u, v = fields.arrays()
    return float(_integrate(density(spec, u, v, fields.grid.length), fields.grid.length))


def _grad_h1(u, v, lam, L):
    return (0.5 * u ** 2 + spectral_derivative(u, L, 2) + 0.5 * lam * v ** 2,
            lam * u * v + lam * spectral_derivative(v, L, 2))


def _grad_h2(u, v, lam, L):
    return (u * v + spectral_derivative(v, L, 2),
            0.5 * u ** 2 + spectral_derivative(u, L, 2) + 0.5 * lam * v ** 2)


def _grad_h1m(u, v, lam, L):
    return -u, -lam * v


def _grad_h2m(u, v, lam, L):
    return -v, -u


def _gradient_arrays(spec, u, v, L):
    lam, k = spec.lam, spec.k
    ident = spec.id
    if ident == "H1":
        return _grad_h1(u, v, lam, L)
    if ident == "H2":
        return _grad_h2(u, v, lam, L)
    if ident == "H1M":
        return _grad_h1m(u, v, lam, L)
    if ident == "H2M":
        return _grad_h2m(u, v, lam, L)
    if ident == "Hk":
        a, b = _grad_h1(u, v, lam, L), _grad_h2(u, v, lam, L)
        return k * a[0] + (1 - k) * b[0], k * a[1] + (1 - k) * b[1]
    if ident == "HkM":
        a, b = _grad_h1m(u, v, lam, L), _grad_h2m(u, v, lam, L)
        return k * a[0] + (1 - k) * b[0], k * a[1] + (1 - k) * b[1]
    if ident == "MassU":
        return np.ones_like(u), np.zeros_like(v)
    return np.zeros_like(u), np.ones_like(v)


def variational_derivative(spec: FunctionalSpec, fields: FieldPair) -> FieldPair:
    """Closed-form ``(dH/du, dH/dv)``."""
    u, v = fields.arrays()
    gu, gv = _gradient_arrays(spec, u, v, fields.grid.length)
    return FieldPair.from_arrays(fields.grid, gu, gv)


def fd_variational_oracle(spec: FunctionalSpec, fields: FieldPair, eps: float = 1e-5) -> FieldPair:
    """Node-wise central difference of the discrete functional.

    Perturbs one sample at a time by ``+-eps`` and divides the change in the
    functional by ``2*eps*h``; uses only :func:`density` quadrature, never
    the closed-form gradients.
    """
    if not 1e-7 <= eps <= 1e-4:
        raise ParameterError(f"eps must lie in [1e-7, 1e-4], got {eps!r}")
    grid = fields.grid
    n, L, h = grid.n, grid.length, grid.spacing
    u, v = fields.arrays()
    bump = eps * np.eye(n)
    out = []
    for which in (0, 1):
        if which == 0:
            plus = _integrate(density(spec, u + bump, np.broadcast_to(v, (n, n)), L), L)
            minus = _integrate(density(spec, u - bump, np.broadcast_to(v, (n, n)), L), L)
        else:
            plus = _integrate(density(spec, np.broadcast_to(u, (n, n)), v + bump, L), L)
            minus = _integrate(density(spec, np.broadcast_to(u, (n, n)), v - bump, L), L)
        out.append((plus - minus) / (2 * eps * h))
    return FieldPair.from_arrays(grid, *out)


class FDCheck(NamedTuple):
    error: float
    order: float
    errors: tuple


def _cubic_node_terms(spec):
    """Coefficients of ``u_j**3`` and ``v_j**3`` in the density, per sample."""
    lam = spec.lam
    if spec.id == "H1":
        return 1.0, 0.0
    if spec.id == "H2":
        return 0.0, lam
    if spec.id == "Hk":
        return spec.k, (1 - spec.k) * lam
    return 0.0, 0.0


def fd_convergence(spec: FunctionalSpec, fields: FieldPair, eps: float = 1e-5,
                   pair: tuple = (1e-4, 5e-5)) -> FDCheck:
    """Compare closed-form gradients with the oracle and estimate the oracle's order.

    ``error`` is the max-norm gap at ``eps``.  The order comes from the RMS
    gaps at the two step sizes in ``pair``.  A density without cubic terms in
    a single sample makes the central difference exact, so only rounding is
    left and the order is reported as ``inf``.
    """
    exact = variational_derivative(spec, fields)
    error = (fd_variational_oracle(spec, fields, eps) - exact).max_abs()
    rms = []
    for e in pair:
        diff = fd_variational_oracle(spec, fields, e) - exact
        rms.append(float(np.sqrt(np.mean(np.concatenate(diff.arrays()) ** 2))))
    if _cubic_node_terms(spec) == (0.0, 0.0) or rms[1] == 0:
        order = math.inf
    else:
        order = math.log(rms[0] / rms[1]) / math.log(pair[0] / pair[1])
    return FDCheck(float(error), float(order), tuple(rms))


# -- Lagrangians -----------------------------------------------------------------
#
# Each density is kinetic part  -1/2 * sum_ab K_ab a_x b_t  plus a potential
# part V in the jets of the two potentials.  The Euler operator of the kinetic
# part is K @ (a_xt, b_xt); that of V is -D(dV/da_x) + D^2(dV/da_xx) - D^3(dV/da_xxx).
# Residuals are returned as K^{-1} @ Euler, i.e. time derivative minus flow.

def _kinetic_matrix(spec):
    lam = spec.lam
    ident = spec.id.removesuffix("M")
    if ident == "L1":
        return np.array([[1.0, 0.0], [0.0, lam]])
    if ident == "L2":
        return np.array([[0.0, 1.0], [1.0, 0.0]])
    k = spec.k
    return k * np.array([[1.0, 0.0], [0.0, lam]]) + (1 - k) * np.array([[0.0, 1.0], [1.0, 0.0]])


def _partials_l1(a, b, lam, L, q=None):
    ax = spectral_derivative(a, L, 1)
    bx = spectral_derivative(b, L, 1)
    zero = np.zeros_like(a)
    return ((-0.5 * a ** 2 - 0.5 * lam * b ** 2, ax, zero),
            (-lam * a * b, lam * bx, zero))


def _partials_l2(a, b, lam, L, q=None):
    axx = spectral_derivative(a, L, 2)
    zero = np.zeros_like(a)
    return ((-a * b, zero, -b),
            (-0.5 * a ** 2 - axx - 0.5 * lam * b ** 2, zero, zero))


def _partials_l1m(a, b, lam, L, q):
    axx = spectral_derivative(a, L, 2)
    bxx = spectral_derivative(b, L, 2)
    return ((-0.5 * axx + a ** 3 / 18 + lam * b ** 2 * a / 6, np.zeros_like(a), -0.5 * a),
            (-0.5 * lam * bxx + q * lam ** 2 * b ** 3 / 18 + lam * a ** 2 * b / 6,
             np.zeros_like(a), -0.5 * lam * b))


def _partials_l2m(a, b, lam, L, q=None):
    axx = spectral_derivative(a, L, 2)
    zero = np.zeros_like(a)
    return ((a ** 2 * b / 6 + lam * b ** 3 / 18, zero, -b),
            (-axx + a ** 3 / 18 + lam * b ** 2 * a / 6, zero, zero))


def _euler(partials, L):
    p1, p2, p3 = partials
    return (-spectral_derivative(p1, L, 1) + spectral_derivative(p2, L, 2)
            - spectral_derivative(p3, L, 3))


def euler_lagrange_residual(spec: LagrangianSpec, fields: FieldPair,
                            time_derivatives: FieldPair) -> FieldPair:
    """Field equations of ``spec`` evaluated at ``fields``.

    ``fields`` holds ``(u, v)`` (or ``(mu, nu)`` for the modified
    Lagrangians) and ``time_derivatives`` their supplied time derivatives.
    The result is normalized so that it equals the evolution equation written
    as ``f_t - flow``; it vanishes when the supplied time derivatives are the
    flow.
    """
    if fields.grid != time_derivatives.grid:
        raise ParameterError("fields and time derivatives must share a grid")
    L = fields.grid.length
    a, b = fields.arrays()
    lam = spec.lam
    builders = {"L1": _partials_l1, "L2": _partials_l2, "L1M": _partials_l1m, "L2M": _partials_l2m}
    if spec.id in ("Lk", "LkM"):
        first, second = ("L1", "L2") if spec.id == "Lk" else ("L1M", "L2M")
        pa = builders[first](a, b, lam, L, spec.quartic_sign)
        pb = builders[second](a, b, lam, L, spec.quartic_sign)
        k = spec.k
        parts = tuple(tuple(k * x + (1 - k) * y for x, y in zip(ra, rb)) for ra, rb in zip(pa, pb))
    else:
        parts = builders[spec.id](a, b, lam, L, spec.quartic_sign)
    kin = _kinetic_matrix(spec)
    at, bt = time_derivatives.arrays()
    euler = np.stack([kin[0, 0] * at + kin[0, 1] * bt + _euler(parts[0], L),
                      kin[1, 0] * at + kin[1, 1] * bt + _euler(parts[1], L)])
    res = np.linalg.solve(kin, euler)
    return FieldPair.from_arrays(fields.grid, res[0], res[1])
