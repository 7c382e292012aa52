"""Poisson operators for the coupled system and their structural checks.

A structure is a 2x2 matrix of differential operators acting on a covector
``(g, h)`` (typically a gradient ``(dH/du, dH/dv)``).  Each entry is a sum of
three primitive skew operators with constant coefficients::

    d1    g -> g_x
    d3    g -> g_xxx
    S(f)  g -> (2 f g_x + f_x g) / 3        with f in {u, v}

The upper-right entry is stored; the lower-left is derived from it with the
antisymmetry rule  J_vu = -(J_uv)^*.  All three primitives are skew, so the
rule reproduces the same combination.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .errors import ParameterError
from .functionals import FunctionalSpec, variational_derivative
from .grid import FieldPair, SystemParams, inner, spectral_derivative
from .pencil import PencilParams, check_pencil, pencil_denominator

log = logging.getLogger(__name__)

__all__ = [
    "STRUCTURE_IDS",
    "MATCHED_PAIRS",
    "StructureSpec",
    "OperatorMatrix",
    "operator",
    "coupled_kdv_rhs",
    "mkdv_like_rescale",
    "apply_structure",
    "hamiltonian_flow",
    "skew_defect",
    "jacobi_defect",
    "PencilCoefficients",
    "pencil_coefficients",
    "lambda0_coefficients",
    "equal_weight_k_lambda0",
    "sum_weight_k",
    "pencil_defect",
    "complex_bracket_coefficients",
    "holomorphic_coefficient",
    "complexification_defect",
    "casimir_defect",
]

STRUCTURE_IDS = ("J1", "J0", "Jk", "JM1", "JM0", "JkM", "JkM_alt")

MATCHED_PAIRS = {"J1": "H1", "J0": "H2", "Jk": "Hk", "JM1": "H1M", "JM0": "H2M",
                 "JkM": "HkM", "JkM_alt": "HkM"}

_PRIMITIVES = ("d1", "d3", "Su", "Sv")
_SIGN_ADJOINT = {"d1": -1.0, "d3": -1.0, "Su": -1.0, "Sv": -1.0}


@dataclass(frozen=True)
class StructureSpec:
    """One of the bracket operators.

    ``JkM_alt`` keeps the alternative modified pencil whose ``uu`` entry
    carries ``-(1-k)/den`` in front of ``S(v)`` instead of ``lam*(1-k)/den``;
    the two agree only at ``lam = -1``.
    """

    id: str
    lam: float = -1.0
    k: float | None = None

    def __post_init__(self):
        if self.id not in STRUCTURE_IDS:
            raise ParameterError(f"unknown structure {self.id!r}")
        if not math.isfinite(self.lam):
            raise ParameterError("lambda must be finite")
        if self.id in ("J1", "JM1") and self.lam == 0:
            raise ParameterError(f"lambda=0 invalid for {self.id}: bracket not defined at lambda=0")
        if self.id in ("Jk", "JkM", "JkM_alt"):
            if self.k is None:
                raise ParameterError(f"{self.id} needs a pencil weight k")
            check_pencil(self.lam, self.k)

    @property
    def field_dependent(self) -> bool:
        return self.id.startswith("JM") or self.id.startswith("JkM")


@dataclass(frozen=True)
class OperatorMatrix:
    """Coefficient schedule ``{entry: {primitive: coefficient}}``.

    ``entry`` is one of ``"uu"``, ``"uv"``, ``"vv"``; missing primitives have
    coefficient zero.  Supports ``+`` and scalar ``*`` so pencils and
    compatibility sums can be formed directly.
    """

    uu: dict = field(default_factory=dict)
    uv: dict = field(default_factory=dict)
    vv: dict = field(default_factory=dict)

    def __add__(self, other):
        return OperatorMatrix(*(_merge(getattr(self, e), getattr(other, e), 1.0)
                                for e in ("uu", "uv", "vv")))

    def __sub__(self, other):
        return OperatorMatrix(*(_merge(getattr(self, e), getattr(other, e), -1.0)
                                for e in ("uu", "uv", "vv")))

    def __rmul__(self, scalar):
        return OperatorMatrix(*({p: scalar * c for p, c in getattr(self, e).items()}
                                for e in ("uu", "uv", "vv")))

    __mul__ = __rmul__

    @property
    def vu(self) -> dict:
        return {p: -_SIGN_ADJOINT[p] * c for p, c in self.uv.items()}

    @property
    def field_dependent(self) -> bool:
        return any(c != 0 for e in (self.uu, self.uv, self.vv)
                   for p, c in e.items() if p in ("Su", "Sv"))

    def linear_part(self) -> "OperatorMatrix":
        """Field-dependent entries only (the derivative with respect to the fields)."""
        keep = ("Su", "Sv")
        return OperatorMatrix(*({p: c for p, c in getattr(self, e).items() if p in keep}
                                for e in ("uu", "uv", "vv")))

    def apply(self, fields: FieldPair, covector: FieldPair) -> FieldPair:
        if fields.grid != covector.grid:
            raise ParameterError("fields and covector must share a grid")
        u, v = fields.arrays()
        g, h = covector.arrays()
        L = fields.grid.length
        prim_g = _primitives(g, u, v, L)
        prim_h = _primitives(h, u, v, L)
        first = _combine(self.uu, prim_g, g) + _combine(self.uv, prim_h, g)
        second = _combine(self.vu, prim_g, g) + _combine(self.vv, prim_h, g)
        return FieldPair.from_arrays(fields.grid, first, second)


def _merge(a, b, sign):
    out = dict(a)
    for p, c in b.items():
        out[p] = out.get(p, 0.0) + sign * c
    return out


def _primitives(g, u, v, L):
    gx = spectral_derivative(g, L, 1)
    cache = {}

    def get(name):
        if name not in cache:
            if name == "d1":
                cache[name] = gx
            elif name == "d3":
                cache[name] = spectral_derivative(g, L, 3)
            else:
                f = u if name == "Su" else v
                cache[name] = (2.0 * f * gx + spectral_derivative(f, L, 1) * g) / 3.0
        return cache[name]

    return get


def _combine(entry, prim, like):
    out = np.zeros_like(like)
    for p, c in entry.items():
        if c != 0:
            out = out + c * prim(p)
    return out


# P = d3 + S(u) and Q = S(v) are the two field-dependent building blocks.
_P = {"d3": 1.0, "Su": 1.0}
_Q = {"Sv": 1.0}


def _scaled(entry, c):
    return {p: c * x for p, x in entry.items()}


def operator(spec: StructureSpec) -> OperatorMatrix:
    lam, k = spec.lam, spec.k
    ident = spec.id
    if ident == "J1":
        return OperatorMatrix(uu={"d1": -1.0}, vv={"d1": -1.0 / lam})
    if ident == "J0":
        return OperatorMatrix(uv={"d1": -1.0})
    if ident == "Jk":
        den = pencil_denominator(lam, k)
        return OperatorMatrix(uu={"d1": lam * k / den}, vv={"d1": k / den},
                              uv={"d1": -(1 - k) / den})
    if ident == "JM1":
        return OperatorMatrix(uu=dict(_P), vv=_scaled(_P, 1.0 / lam), uv=dict(_Q))
    if ident == "JM0":
        return OperatorMatrix(uu=_scaled(_Q, lam), vv=dict(_Q), uv=dict(_P))
    den = pencil_denominator(lam, k)
    a, b = -lam * k / den, (1 - k) / den
    uu_q = -(1 - k) / den if ident == "JkM_alt" else lam * b
    return OperatorMatrix(uu=_merge(_scaled(_P, a), _scaled(_Q, uu_q), 1.0),
                          uv=_merge(_scaled(_P, b), _scaled(_Q, a), 1.0),
                          vv=_merge(_scaled(_P, -k / den), _scaled(_Q, b), 1.0))


def _as_operator(spec):
    return spec if isinstance(spec, OperatorMatrix) else operator(spec)


def apply_structure(spec, fields: FieldPair, covector: FieldPair) -> FieldPair:
    """Apply a structure (``StructureSpec`` or ``OperatorMatrix``) to a covector."""
    return _as_operator(spec).apply(fields, covector)


# -- flows -----------------------------------------------------------------------

def coupled_kdv_rhs(params: SystemParams, fields: FieldPair) -> FieldPair:
    """``(u_t, v_t)`` of the coupled system with coupling ``params.lam``."""
    lam = params.lam
    u, v = fields.arrays()
    L = fields.grid.length
    ux, vx = spectral_derivative(u, L, 1), spectral_derivative(v, L, 1)
    ut = -u * ux - spectral_derivative(u, L, 3) - lam * v * vx
    vt = -ux * v - vx * u - spectral_derivative(v, L, 3)
    return FieldPair.from_arrays(fields.grid, ut, vt)


def mkdv_like_rescale(fields: FieldPair, params: SystemParams, inverse: bool = False):
    """Normalize the coupling to ``sign(lam)``.

    Writing ``v = v'/sqrt|lam|`` in the system with coupling ``lam`` gives the
    system with coupling ``sign(lam)`` for ``v'``.  The forward map therefore
    returns ``(u, sqrt|lam| v)``; ``inverse`` returns ``(u, v/sqrt|lam|)``,
    taking a ``sign(lam)`` solution back to coupling ``lam``.  The second
    element of the result is the coupling of the returned pair.
    """
    lam = params.lam
    if lam == 0:
        raise ParameterError("lambda=0 cannot be rescaled to +-1")
    u, v = fields.arrays()
    s = math.sqrt(abs(lam))
    if inverse:
        return FieldPair.from_arrays(fields.grid, u, v / s), SystemParams(lam)
    return FieldPair.from_arrays(fields.grid, u, v * s), SystemParams(math.copysign(1.0, lam))


def hamiltonian_flow(structure: StructureSpec, functional: FunctionalSpec, fields: FieldPair,
                     strict: bool = True) -> FieldPair:
    """``J(fields) dH/d(u,v)``.

    With ``strict`` the structure/functional pair must be a matched one with
    identical parameters; otherwise mismatches are logged as exploratory.
    """
    matched = (MATCHED_PAIRS.get(structure.id) == functional.id
               and structure.lam == functional.lam
               and (structure.k == functional.k or structure.k is None))
    if not matched:
        msg = f"unmatched pair ({structure.id}, {functional.id}) with params " \
              f"({structure.lam}, {structure.k}) / ({functional.lam}, {functional.k})"
        if strict:
            raise ParameterError(msg)
        log.info("exploratory flow: %s", msg)
    return apply_structure(structure, fields, variational_derivative(functional, fields))


# -- structural checks -----------------------------------------------------------

def _norm(p: FieldPair) -> float:
    return math.sqrt(max(inner(p, p), 0.0))


def skew_defect(spec, fields: FieldPair, f: FieldPair, g: FieldPair) -> float:
    """``|<f, J g> + <J f, g>| / (|f| |g|)``."""
    op = _as_operator(spec)
    raw = inner(f, op.apply(fields, g)) + inner(op.apply(fields, f), g)
    scale = _norm(f) * _norm(g)
    return abs(raw) / scale if scale > 0 else abs(raw)


def jacobi_terms(spec, fields: FieldPair, f: FieldPair, g: FieldPair, h: FieldPair):
    """The three cyclic terms ``<f, J'[J h] g>`` etc. for linear observables.

    ``J'[eta]`` is the derivative of the operator along ``eta``; structures are
    affine in the fields, so it is exactly the field-dependent part evaluated
    at ``eta``.
    """
    op = _as_operator(spec)
    lin = op.linear_part()
    t1 = inner(f, lin.apply(op.apply(fields, h), g))
    t2 = inner(g, lin.apply(op.apply(fields, f), h))
    t3 = inner(h, lin.apply(op.apply(fields, g), f))
    return t1, t2, t3


def jacobi_defect(spec, fields: FieldPair, f: FieldPair, g: FieldPair, h: FieldPair) -> float:
    """Normalized cyclic sum ``|t1 + t2 + t3| / (|t1| + |t2| + |t3|)``.

    Exactly zero for field-independent structures.
    """
    op = _as_operator(spec)
    if not op.field_dependent:
        return 0.0
    t = jacobi_terms(op, fields, f, g, h)
    scale = sum(abs(x) for x in t)
    return abs(sum(t)) / scale if scale > 0 else 0.0


# -- pencils ---------------------------------------------------------------------

class PencilCoefficients(NamedTuple):
    a: float
    b: float
    basis: tuple


def pencil_coefficients(params: PencilParams) -> PencilCoefficients:
    """Weights of the pencil member in its basic structures.

    For ``lam != 0`` the basis is ``(k=1, k=0)``; at ``lam = 0`` the ``k=1``
    member is undefined and the basis is ``(k=1/2, k=0)``.
    """
    lam, k = params.lam, params.k
    if lam == 0:
        return lambda0_coefficients(k)
    den = params.denominator
    return PencilCoefficients(-lam * k / den, (1 - k) / den, (1.0, 0.0))


def lambda0_coefficients(k: float) -> PencilCoefficients:
    check_pencil(0.0, k)
    return PencilCoefficients(k / (2 * (1 - k) ** 2), (1 - 2 * k) / (1 - k) ** 2, (0.5, 0.0))


def equal_weight_k_lambda0() -> float:
    """Root of ``a(k) = b(k)`` for the ``lam = 0`` coefficients, on ``0 < k < 1``."""
    def diff(k):
        c = lambda0_coefficients(k)
        return c.a - c.b
    return brentq(diff, 1e-9, 1 - 1e-6, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def sum_weight_k(lam: float) -> float:
    """Weight at which the pencil member is the plain sum of the two basic ones."""
    if lam in (0.0, 1.0):
        raise ParameterError("the sum weight is defined for lambda != 0, 1")
    return 1.0 / (1.0 - lam)


def _family_ids(family):
    if family == "first-order":
        return "Jk", "J1", "J0"
    if family == "miura":
        return "JkM", "JM1", "JM0"
    raise ParameterError(f"unknown pencil family {family!r}")


def pencil_member(family: str, params: PencilParams, alternative: bool = False) -> StructureSpec:
    kid, _, _ = _family_ids(family)
    if alternative and family == "miura":
        kid = "JkM_alt"
    return StructureSpec(kid, params.lam, params.k)


def pencil_defect(family: str, params: PencilParams, fields: FieldPair, covector: FieldPair,
                  alternative: bool = False) -> float:
    """Max-norm of ``J_k c - a J_first c - b J_second c``, relative to ``|J_k c|``."""
    kid, one, zero = _family_ids(family)
    lam = params.lam
    coeffs = pencil_coefficients(params)
    member = apply_structure(pencil_member(family, params, alternative), fields, covector)
    if lam == 0:
        first = StructureSpec(kid, 0.0, 0.5)
        second = StructureSpec(kid, 0.0, 0.0)
    else:
        first = StructureSpec(one, lam)
        second = StructureSpec(zero, lam)
    combo = coeffs.a * apply_structure(first, fields, covector) \
        + coeffs.b * apply_structure(second, fields, covector)
    diff = (member - combo).max_abs()
    scale = member.max_abs()
    return diff / scale if scale > 0 else diff


# -- complexification at lam = -1 --------------------------------------------------

def _complex_blocks(op, fields, phi):
    zero = np.zeros_like(phi)
    grid = fields.grid
    col_u = op.apply(fields, FieldPair.from_arrays(grid, phi, zero))
    col_v = op.apply(fields, FieldPair.from_arrays(grid, zero, phi))
    juu, jvu = col_u.arrays()
    juv, jvv = col_v.arrays()
    holo = juu + 1j * (juv + jvu) - jvv
    mixed = juu - 1j * juv + 1j * jvu + jvv
    return holo, mixed


def complex_bracket_coefficients(k: float, fields: FieldPair, phi) -> tuple[complex, complex]:
    """Least-squares coefficients ``c`` with ``{w, w} phi = c phi_x`` and
    ``{w, conj w} phi = c phi_x`` for ``w = u + i v`` on the ``lam = -1`` pencil."""
    op = operator(StructureSpec("Jk", -1.0, k))
    phi = np.asarray(phi, dtype=float)
    phix = spectral_derivative(phi, fields.grid.length, 1)
    holo, mixed = _complex_blocks(op, fields, phi)
    denom = np.vdot(phix, phix).real
    return complex(np.vdot(phix, holo) / denom), complex(np.vdot(phix, mixed) / denom)


def holomorphic_coefficient(k: float, real_form: bool = False) -> complex:
    """Coefficient ``c`` in ``{w, w} = c d/dx`` for ``w = u + i v`` at ``lam = -1``.

    The bracket gives ``-2 (k + i(1-k)) / (k^2 + (1-k)^2)``.  With ``real_form``
    the real value ``-2 / (k^2 + (1-k)^2)`` is returned instead; the two agree
    only at ``k = 1``.
    """
    den = check_pencil(-1.0, k)
    if real_form:
        return complex(-2.0 / den)
    return complex(-2.0 * (k + 1j * (1 - k)) / den)


def complexification_defect(k: float, fields: FieldPair, f: FieldPair, g: FieldPair,
                            expected_holo=None):
    """Defects ``(holo, anti)`` of the complex-variable bracket relations at ``lam = -1``.

    ``anti`` measures ``{u+iv, u-iv}`` against zero.  ``holo`` measures
    ``{u+iv, u+iv}`` against ``expected_holo * d/dx``; by default the expected
    coefficient is ``-2/(k^2+(1-k)^2)``.  Both are max-norms relative to the
    max-norm of the differentiated test covector.
    """
    check_pencil(-1.0, k)
    if expected_holo is None:
        expected_holo = -2.0 / (k * k + (1 - k) ** 2)
    op = operator(StructureSpec("Jk", -1.0, k))
    L = fields.grid.length
    holo_def, anti_def = 0.0, 0.0
    for phi in (*f.arrays(), *g.arrays()):
        phix = spectral_derivative(phi, L, 1)
        scale = np.max(np.abs(phix))
        if scale == 0:
            continue
        holo, mixed = _complex_blocks(op, fields, phi)
        holo_def = max(holo_def, np.max(np.abs(holo - expected_holo * phix)) / scale)
        anti_def = max(anti_def, np.max(np.abs(mixed)) / scale)
    return float(holo_def), float(anti_def)


def casimir_defect(spec, fields: FieldPair, candidate: FunctionalSpec) -> float:
    """Max-norm of ``J dC`` for a mass functional ``C``."""
    if candidate.id not in ("MassU", "MassV"):
        raise ParameterError("Casimir candidates are MassU and MassV")
    return apply_structure(spec, fields, variational_derivative(candidate, fields)).max_abs()
