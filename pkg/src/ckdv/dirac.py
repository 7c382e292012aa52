"""Finite-dimensional Dirac reduction of the singular Lagrangians.

The phase space is sampled: positions ``(a, b)`` are the two potentials
(``w, y`` or ``sigma, rho``), momenta ``(p, q)`` their conjugates, each an
``n``-vector.  With the canonical bracket ``{a_i, p_j} = delta_ij / h`` every
constraint is linear,

    phi = S (D a, D b) + (p, q),

with a symmetric 2x2 weight matrix ``S``; the constraint brackets are then
``C = (2/h) S (x) D``.  Bracket matrices are reported in operator form
(kernel times ``h``) so they compare directly with differential operators.

``D`` annihilates constants and the grid-scale alternating mode, so ``C``
has a known kernel; it is inverted on the complement.  Those kernel modes of
the constraints commute with all constraints on a periodic box and are left
out of the second-class set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, SingularConstraintError
from .grid import FieldPair, GridSpec, SystemParams, derivative_matrix, random_band_limited
from .miura import miura_jacobian, miura_map
from .pencil import excluded_k, pencil_denominator
from .structures import StructureSpec, apply_structure

__all__ = [
    "VARIANT_IDS",
    "ConstraintVariant",
    "PhaseSpaceState",
    "ConstraintMatrix",
    "BracketBlocks",
    "KernelComparison",
    "constraint_weights",
    "build_constraints",
    "constraint_matrix",
    "dirac_bracket_matrix",
    "kernel_comparison",
    "casimir_of_constraints_check",
]

VARIANT_IDS = ("L1", "L2", "Lk", "L1M", "L2M", "LkM")
MAX_DENSE_N = 1024

_CLOSED_FORM = {"L1": "J1", "L2": "J0", "Lk": "Jk", "L1M": "JM1", "L2M": "JM0", "LkM": "JkM"}


@dataclass(frozen=True)
class ConstraintVariant:
    id: str
    lam: float = -1.0
    k: float | None = None

    def __post_init__(self):
        if self.id not in VARIANT_IDS:
            raise ParameterError(f"unknown constraint variant {self.id!r}")
        if self.id in ("L1", "L1M") and self.lam == 0:
            raise ParameterError(f"lambda=0 invalid for {self.id}: constraints are first class there")
        if self.id in ("Lk", "LkM") and self.k is None:
            raise ParameterError(f"{self.id} needs a pencil weight k")

    @property
    def modified(self) -> bool:
        return self.id.endswith("M")


@dataclass(frozen=True)
class PhaseSpaceState:
    positions: FieldPair
    momenta: FieldPair

    def __post_init__(self):
        if self.positions.grid != self.momenta.grid:
            raise ParameterError("positions and momenta must share one grid")

    @property
    def grid(self) -> GridSpec:
        return self.positions.grid

    def vector(self) -> np.ndarray:
        return np.concatenate([*self.positions.arrays(), *self.momenta.arrays()])


@dataclass(frozen=True)
class ConstraintMatrix:
    """Blocks ``{phi_i, phi_j}`` in operator form; ``full`` is the assembled matrix."""

    blocks: tuple
    full: np.ndarray

    def bandwidth(self) -> int:
        """Largest periodic (circulant) index offset carrying a nonzero entry."""
        n = self.blocks[0][0].shape[0]
        width = 0
        for row in self.blocks:
            for blk in row:
                i, j = np.nonzero(np.abs(blk) > 1e-13 * max(1.0, np.abs(blk).max()))
                if i.size:
                    off = np.minimum((j - i) % n, (i - j) % n)
                    width = max(width, int(off.max()))
        return width


@dataclass(frozen=True)
class BracketBlocks:
    uu: np.ndarray
    uv: np.ndarray
    vu: np.ndarray
    vv: np.ndarray

    def full(self) -> np.ndarray:
        return np.block([[self.uu, self.uv], [self.vu, self.vv]])


def constraint_weights(variant: ConstraintVariant) -> np.ndarray:
    """Symmetric ``S`` with ``phi = S (D a, D b) + momenta``."""
    lam = variant.lam
    base = variant.id.removesuffix("M")
    if base == "L1":
        return np.array([[0.5, 0.0], [0.0, 0.5 * lam]])
    if base == "L2":
        return np.array([[0.0, 0.5], [0.5, 0.0]])
    k = variant.k
    return np.array([[0.5 * k, 0.5 * (1 - k)], [0.5 * (1 - k), 0.5 * lam * k]])


def build_constraints(variant: ConstraintVariant, state: PhaseSpaceState) -> FieldPair:
    """Sampled ``(phi1, phi2)``; derivatives are spectral."""
    from .grid import deriv

    a, b = state.positions.first, state.positions.second
    p, q = state.momenta.first, state.momenta.second
    s = constraint_weights(variant)
    ax, bx = deriv(a), deriv(b)
    phi1 = p + s[0, 0] * ax + s[0, 1] * bx
    phi2 = q + s[1, 0] * ax + s[1, 1] * bx
    return FieldPair(phi1, phi2)


def _check_size(grid):
    if grid.n > MAX_DENSE_N:
        raise ParameterError(f"dense Dirac reduction is capped at n={MAX_DENSE_N}, got {grid.n}")


def _canonical(n, h):
    eye = np.eye(2 * n)
    zero = np.zeros((2 * n, 2 * n))
    return np.block([[zero, eye], [-eye, zero]]) / h


def _constraint_rows(variant, dmat):
    n = dmat.shape[0]
    s = constraint_weights(variant)
    return np.block([[s[0, 0] * dmat, s[0, 1] * dmat, np.eye(n), np.zeros((n, n))],
                     [s[1, 0] * dmat, s[1, 1] * dmat, np.zeros((n, n)), np.eye(n)]])


def _observable_rows(dmat):
    n = dmat.shape[0]
    z = np.zeros((n, n))
    return np.block([[dmat, z, z, z], [z, dmat, z, z]])


def constraint_matrix(variant: ConstraintVariant, grid: GridSpec, scheme: str = "spectral") -> ConstraintMatrix:
    _check_size(grid)
    dmat = derivative_matrix(grid, scheme)
    h = grid.spacing
    a = _constraint_rows(variant, dmat)
    c = a @ _canonical(grid.n, h) @ a.T * h
    n = grid.n
    blocks = ((c[:n, :n], c[:n, n:]), (c[n:, :n], c[n:, n:]))
    return ConstraintMatrix(blocks, c)


def _null_basis(dmat):
    u, s, vt = np.linalg.svd(dmat)
    tol = 1e-10 * s[0]
    return vt[s <= tol].T


def _generalized_inverse(c, dmat, convention):
    n = dmat.shape[0]
    null = _null_basis(dmat)
    zero = np.zeros_like(null)
    kernel = np.block([[null, zero], [zero, null]])
    svals = np.linalg.svd(c, compute_uv=False)
    rank = int(np.sum(svals > 1e-10 * svals[0])) if svals[0] > 0 else 0
    if rank < 2 * n - kernel.shape[1]:
        raise SingularConstraintError(
            f"constraint matrix has rank {rank}, expected {2 * n - kernel.shape[1]}: "
            "the constraints are not second class for this pencil weight")
    if convention == "pinv":
        return np.linalg.pinv(c, rcond=1e-10)
    if convention == "regularized":
        # integration constant fixed differently: lift the kernel by a rank-one term
        return np.linalg.inv(c + 3.0 * kernel @ kernel.T)
    raise ParameterError(f"unknown inverse convention {convention!r}")


def _variant_error(variant):
    if variant.id in ("Lk", "LkM"):
        den = pencil_denominator(variant.lam, variant.k)
        if abs(den) <= 1e-12:
            raise SingularConstraintError(
                f"k={variant.k!r} is excluded for lambda={variant.lam!r} "
                f"(excluded weights {excluded_k(variant.lam)}): constraint matrix is singular")


def _reduced_brackets(variant, grid, scheme, convention):
    _check_size(grid)
    dmat = derivative_matrix(grid, scheme)
    h = grid.spacing
    omega = _canonical(grid.n, h)
    a = _constraint_rows(variant, dmat)
    b = _observable_rows(dmat)
    c = a @ omega @ a.T
    try:
        ginv = _generalized_inverse(c, dmat, convention)
    except SingularConstraintError:
        _variant_error(variant)
        raise
    db = b @ omega @ b.T - (b @ omega @ a.T) @ ginv @ (a @ omega @ b.T)
    return db * h, dmat


def _split(mat, n):
    return BracketBlocks(mat[:n, :n], mat[:n, n:], mat[n:, :n], mat[n:, n:])


def dirac_bracket_matrix(variant: ConstraintVariant, grid: GridSpec, modified: FieldPair | None = None,
                         scheme: str = "spectral", convention: str = "pinv") -> BracketBlocks:
    """Induced bracket of the observables in operator form.

    For the first-order variants the observables are ``u = D w, v = D y``.
    For the modified variants the bracket of ``(mu, nu)`` is reduced first and
    then pushed through the Miura Jacobian frozen at ``modified``; pass
    ``modified=None`` to get the ``(mu, nu)`` blocks themselves.
    """
    red, dmat = _reduced_brackets(variant, grid, scheme, convention)
    if variant.modified and modified is not None:
        jac = miura_jacobian(modified, SystemParams(variant.lam), dmat)
        red = jac @ red @ jac.T
    return _split(red, grid.n)


@dataclass
class KernelComparison:
    variant: str
    lam: float
    k: float | None
    sizes: list
    defects: dict
    orders: dict
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(d <= self.tolerance for ds in self.defects.values() for d in ds)

    def as_dict(self) -> dict:
        return {"variant": self.variant, "lambda": self.lam, "k": self.k, "n": list(self.sizes),
                "defects": self.defects, "orders": self.orders, "tolerance": self.tolerance,
                "passed": self.passed}


def _test_vectors(grid, seed, count=8, cutoff=6):
    cols = []
    for i in range(count // 2):
        pair = random_band_limited(seed + 1000 + i, grid, min(cutoff, grid.n // 2 - 1), 1.0, mean_zero=True)
        cols.extend(pair.arrays())
    return np.array(cols).T


def _closed_form_matrix(spec, fields, vectors):
    """Operator blocks of a closed-form structure restricted to the test vectors."""
    grid = fields.grid
    zero = np.zeros(grid.n)
    blocks = {}
    for col, name in ((0, "u"), (1, "v")):
        outs_u, outs_v = [], []
        for t in vectors.T:
            cov = FieldPair.from_arrays(grid, t, zero) if col == 0 else FieldPair.from_arrays(grid, zero, t)
            r = apply_structure(spec, fields, cov)
            outs_u.append(r.first.values)
            outs_v.append(r.second.values)
        blocks["u" + name] = np.array(outs_u).T
        blocks["v" + name] = np.array(outs_v).T
    return blocks


def _order(sizes, values):
    if len(sizes) < 2 or min(values) <= 0:
        return None
    slope = np.polyfit(np.log(sizes), np.log(values), 1)[0]
    return float(-slope)


def kernel_comparison(variant: ConstraintVariant, sizes, length: float = 40.0, seed: int = 1,
                      tolerance: float | None = None, scheme: str = "spectral") -> KernelComparison:
    """Compare reduced brackets with the closed-form operators on a grid sequence.

    Per block the defect is ``|(B_dirac - B_closed) T| / |B_closed T|`` over a
    set ``T`` of mean-zero band-limited test vectors (Frobenius norms).  For
    the modified variants the coefficients are frozen at a band-limited
    ``(mu, nu)`` sample.  The order is the fitted decay rate in ``n``; it is
    ``None`` when any defect is exactly zero.
    """
    sizes = list(sizes)
    if len(sizes) < 3 or sorted(set(sizes)) != sizes:
        raise ParameterError("need at least three strictly increasing grid sizes")
    _variant_error(variant)
    if tolerance is None:
        tolerance = 1e-8 if variant.modified else 1e-10
    spec = StructureSpec(_CLOSED_FORM[variant.id], variant.lam, variant.k)
    defects = {b: [] for b in ("uu", "uv", "vu", "vv")}
    for n in sizes:
        grid = GridSpec(n, length)
        vectors = _test_vectors(grid, seed)
        modified = None
        if variant.modified:
            modified = random_band_limited(seed, grid, min(4, n // 2 - 1), 1.0)
            fields = miura_map(modified, SystemParams(variant.lam))
        else:
            fields = FieldPair.zeros(grid)
        reduced = dirac_bracket_matrix(variant, grid, modified, scheme)
        closed = _closed_form_matrix(spec, fields, vectors)
        for name in defects:
            got = getattr(reduced, name) @ vectors
            ref = closed[name]
            scale = np.linalg.norm(ref)
            err = np.linalg.norm(got - ref)
            defects[name].append(float(err / scale) if scale > 0 else float(err))
    orders = {b: _order(sizes, d) for b, d in defects.items()}
    return KernelComparison(variant.id, variant.lam, variant.k, sizes, defects, orders, tolerance)


def casimir_of_constraints_check(variant: ConstraintVariant, grid: GridSpec, probes,
                                 scheme: str = "spectral") -> float:
    """Max over probes of ``|{F, phi}_DB| / |{F, phi}_PB|`` for linear ``F``.

    Each probe is a phase-space covector (a :class:`PhaseSpaceState` or a
    flat ``4n`` array).  Only the second-class part of the constraints (the
    complement of the derivative kernel) enters.
    """
    _check_size(grid)
    _variant_error(variant)
    dmat = derivative_matrix(grid, scheme)
    h = grid.spacing
    omega = _canonical(grid.n, h)
    null = _null_basis(dmat)
    proj1 = np.eye(grid.n) - null @ null.T
    proj = np.block([[proj1, np.zeros_like(proj1)], [np.zeros_like(proj1), proj1]])
    a = proj @ _constraint_rows(variant, dmat)
    c = a @ omega @ a.T
    ginv = _generalized_inverse(c, dmat, "pinv")
    worst = 0.0
    for probe in probes:
        vec = probe.vector() if isinstance(probe, PhaseSpaceState) else np.asarray(probe, dtype=float)
        pb = vec @ omega @ a.T
        db = pb - pb @ ginv @ c
        scale = np.max(np.abs(pb))
        if scale == 0:
            continue
        worst = max(worst, float(np.max(np.abs(db)) / scale))
    return worst
