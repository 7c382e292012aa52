import math

import numpy as np
import pytest

from ckdv.errors import ParameterError
from ckdv.functionals import FunctionalSpec
from ckdv.grid import FieldPair, GridSpec, SystemParams, spectral_derivative
from ckdv.pencil import PencilParams, check_pencil, excluded_k
from ckdv.structures import (STRUCTURE_IDS, StructureSpec, apply_structure, casimir_defect,
                             complex_bracket_coefficients, complexification_defect,
                             coupled_kdv_rhs, equal_weight_k_lambda0, hamiltonian_flow,
                             holomorphic_coefficient, jacobi_defect, jacobi_terms,
                             mkdv_like_rescale, operator, pencil_coefficients, pencil_defect,
                             skew_defect, sum_weight_k)

from conftest import SEEDS, band, rel, sech2

K_SAMPLE = (-1.0, 0.25, 0.4, 0.7, 2.0)


def _spec(sid, lam, k=None):
    return StructureSpec(sid, lam, k if sid in ("Jk", "JkM", "JkM_alt") else None)


def _norm(p):
    return math.sqrt(float(np.sum(p.stacked() ** 2)) * p.grid.spacing)


# -- right-hand side and rescaling -----------------------------------------------

def test_rhs_zero(grid):
    assert coupled_kdv_rhs(SystemParams(-1.0), FieldPair.zeros(grid)).max_abs() == 0.0


def test_rhs_scalar_sector(grid):
    u = band(2, grid).first.values
    out = coupled_kdv_rhs(SystemParams(3.0), FieldPair.from_arrays(grid, u, np.zeros(grid.n)))
    L = grid.length
    ref = -u * spectral_derivative(u, L, 1) - spectral_derivative(u, L, 3)
    assert np.max(np.abs(out.first.values - ref)) <= 1e-12
    assert out.second.max_abs() == 0.0


def test_rhs_soliton_travels(grid):
    x = grid.x
    u = sum(3 * sech2((x + j * grid.length) / 2) for j in (-1, 0, 1))
    out = coupled_kdv_rhs(SystemParams(-1.0), FieldPair.from_arrays(grid, u, np.zeros(grid.n)))
    ux = spectral_derivative(u, grid.length, 1)
    assert np.max(np.abs(out.first.values + ux)) <= 1e-7


def test_rescale_examples(grid):
    const = FieldPair.from_arrays(grid, np.zeros(grid.n), np.full(grid.n, 2.0))
    back, p = mkdv_like_rescale(const, SystemParams(4.0), inverse=True)
    assert np.allclose(back.second.values, 1.0, rtol=0, atol=1e-15) and p.lam == 4.0
    prof = sech2(grid.x / 2)
    f = FieldPair.from_arrays(grid, np.zeros(grid.n), 3 * prof)
    back, _ = mkdv_like_rescale(f, SystemParams(-9.0), inverse=True)
    assert np.max(np.abs(back.second.values - prof)) <= 1e-15


@pytest.mark.parametrize("lam", [4.0, -9.0, 0.3, -1.0])
def test_rescale_commutes_with_rhs(grid, lam):
    f = band(6, grid)
    params = SystemParams(lam)
    mapped, unit = mkdv_like_rescale(f, params)
    assert unit.lam == math.copysign(1.0, lam)
    s = math.sqrt(abs(lam))
    lhs = coupled_kdv_rhs(unit, mapped)
    rhs = coupled_kdv_rhs(params, f)
    scaled = FieldPair.from_arrays(grid, rhs.first.values, s * rhs.second.values)
    assert rel(lhs - scaled, scaled) <= 1e-10
    undone, p = mkdv_like_rescale(mapped, params, inverse=True)
    assert (undone - f).max_abs() <= 1e-14 and p.lam == lam


def test_rescale_lambda_zero(grid):
    with pytest.raises(ParameterError):
        mkdv_like_rescale(band(1, grid), SystemParams(0.0))


# -- operators -------------------------------------------------------------------

def test_j1_kernel(grid):
    c = band(3, grid)
    g, h = c.arrays()
    out = apply_structure(StructureSpec("J1", 2.0), FieldPair.zeros(grid), c)
    L = grid.length
    assert np.max(np.abs(out.first.values + spectral_derivative(g, L, 1))) <= 1e-14
    assert np.max(np.abs(out.second.values + spectral_derivative(h, L, 1) / 2)) <= 1e-14


@pytest.mark.parametrize("sid", STRUCTURE_IDS)
def test_zero_covector(grid, sid):
    out = apply_structure(_spec(sid, -1.0, 0.3), band(1, grid), FieldPair.zeros(grid))
    assert out.max_abs() == 0.0


def test_jm1_constant_covector(grid):
    u = band(4, grid).first.values
    fields = FieldPair.from_arrays(grid, u, np.zeros(grid.n))
    cov = FieldPair.from_arrays(grid, np.ones(grid.n), np.zeros(grid.n))
    out = apply_structure(StructureSpec("JM1", -1.0), fields, cov)
    assert np.max(np.abs(out.first.values - spectral_derivative(u, grid.length, 1) / 3)) <= 1e-13
    assert out.second.max_abs() <= 1e-15


def test_lower_left_is_adjoint():
    op = operator(StructureSpec("JM0", 2.0))
    assert op.vu == {p: c for p, c in op.uv.items()}


def test_structure_errors():
    with pytest.raises(ParameterError):
        StructureSpec("J1", 0.0)
    with pytest.raises(ParameterError):
        StructureSpec("JM1", 0.0)
    with pytest.raises(ParameterError):
        StructureSpec("Jk", 0.0, 1.0)
    with pytest.raises(ParameterError):
        StructureSpec("Jx")
    with pytest.raises(ParameterError):
        StructureSpec("JkM", -1.0)


# -- Hamilton equations ----------------------------------------------------------

def test_flow_at_origin(grid):
    out = hamiltonian_flow(StructureSpec("J1"), FunctionalSpec("H1"), FieldPair.zeros(grid))
    assert out.max_abs() == 0.0


def _pairs(lam):
    out = [("J0", "H2", None), ("JM0", "H2M", None)]
    if lam != 0:
        out += [("J1", "H1", None), ("JM1", "H1M", None)]
    for k in K_SAMPLE:
        if lam == 0 and k == 1:
            continue
        try:
            check_pencil(lam, k)
        except ParameterError:
            continue
        out += [("Jk", "Hk", k), ("JkM", "HkM", k)]
    return out


@pytest.mark.parametrize("lam", [-1.0, -0.5, 2.0, 0.0])
def test_hamilton_equations(grid, lam):
    params = SystemParams(lam)
    for sid, fid, k in _pairs(lam):
        for seed in SEEDS:
            f = band(seed, grid)
            flow = hamiltonian_flow(StructureSpec(sid, lam, k), FunctionalSpec(fid, lam, k), f)
            assert rel(flow - coupled_kdv_rhs(params, f), coupled_kdv_rhs(params, f)) <= 1e-8, \
                (sid, k, seed)


def test_strict_rejects_mismatch(grid, caplog):
    f = band(1, grid)
    with pytest.raises(ParameterError, match="unmatched"):
        hamiltonian_flow(StructureSpec("J1"), FunctionalSpec("H2"), f)
    with pytest.raises(ParameterError):
        hamiltonian_flow(StructureSpec("Jk", -1.0, 0.3), FunctionalSpec("Hk", -1.0, 0.4), f)
    with caplog.at_level("INFO"):
        hamiltonian_flow(StructureSpec("J1"), FunctionalSpec("H2"), f, strict=False)
    assert "exploratory" in caplog.text


# -- skew and Jacobi -------------------------------------------------------------

@pytest.mark.parametrize("sid", STRUCTURE_IDS)
@pytest.mark.parametrize("lam", [-1.0, 2.0])
def test_skew(grid, sid, lam):
    for seed in SEEDS[:5]:
        fields, f, g = band(seed, grid), band(seed + 100, grid), band(seed + 200, grid)
        spec = _spec(sid, lam, 0.3)
        assert skew_defect(spec, fields, f, g) <= 1e-8
        # skew operators have a vanishing quadratic form
        assert skew_defect(spec, fields, f, f) <= 1e-9


def test_jacobi_constant_structures_exact(grid):
    f = [band(s, grid) for s in (1, 2, 3, 4)]
    for spec in (StructureSpec("J1"), StructureSpec("J0"), StructureSpec("Jk", -1.0, 0.3)):
        assert jacobi_defect(spec, *f) == 0.0
    total = operator(StructureSpec("J1")) + operator(StructureSpec("J0"))
    assert jacobi_defect(total, *f) == 0.0


@pytest.mark.parametrize("lam", [-1.0, -0.5, 2.0])
def test_jacobi_third_order(grid, lam):
    ops = [operator(StructureSpec("JM1", lam)), operator(StructureSpec("JM0", lam)),
           operator(StructureSpec("JkM", lam, 0.4)),
           operator(StructureSpec("JM1", lam)) + operator(StructureSpec("JM0", lam))]
    for seed in SEEDS[:4]:
        args = [band(seed + 10 * i, grid) for i in range(4)]
        for op in ops:
            terms = jacobi_terms(op, *args)
            # the check must not pass vacuously
            assert max(abs(t) for t in terms) > 1e-6
            assert jacobi_defect(op, *args) <= 1e-7


# -- pencils ---------------------------------------------------------------------

def test_pencil_coefficients_examples():
    for lam in (-1.0, 2.0, 0.5):
        assert pencil_coefficients(PencilParams(lam, 0.0))[:2] == (0.0, 1.0)
    for lam in (-1.0, 2.0, 3.0):
        c = pencil_coefficients(PencilParams(lam, sum_weight_k(lam)))
        assert c.a == pytest.approx(c.b, rel=1e-12)
    k = equal_weight_k_lambda0()
    assert abs(k - 0.4) <= 1e-12
    c = pencil_coefficients(PencilParams(0.0, 0.4))
    assert c.a == pytest.approx(c.b, rel=1e-12) and c.basis == (0.5, 0.0)


def test_printed_equal_weight_does_not_balance():
    c = pencil_coefficients(PencilParams(0.0, 2.5))
    assert abs(c.a - c.b) > 1.0


def test_sum_weight_errors():
    for lam in (0.0, 1.0):
        with pytest.raises(ParameterError):
            sum_weight_k(lam)


def test_exclusion_set():
    assert excluded_k(4.0) == pytest.approx([-1.0, 1 / 3])
    for k in (1 / 3, -1.0):
        with pytest.raises(ParameterError, match="denominator"):
            PencilParams(4.0, k)
        with pytest.raises(ParameterError):
            StructureSpec("JkM", 4.0, k)
    PencilParams(4.0, 1 / 3 + 1e-6)
    assert excluded_k(-2.0) == []
    with pytest.raises(ParameterError):
        PencilParams(0.0, 1.0)


@pytest.mark.parametrize("family", ["first-order", "miura"])
@pytest.mark.parametrize("lam,k", [(-1.0, 0.3), (-1.0, 0.0), (2.0, 0.7), (-0.5, 2.0),
                                   (0.0, 0.25), (0.0, -1.0)])
def test_pencil_linearity(grid, family, lam, k):
    for seed in SEEDS[:4]:
        d = pencil_defect(family, PencilParams(lam, k), band(seed, grid), band(seed + 50, grid))
        if k == 0 and lam != 0:
            assert d == 0.0
        assert d <= 1e-10


def test_alternative_modified_pencil(grid):
    f, c = band(1, grid), band(2, grid)
    assert pencil_defect("miura", PencilParams(-1.0, 0.3), f, c, alternative=True) <= 1e-10
    assert pencil_defect("miura", PencilParams(2.0, 0.3), f, c, alternative=True) > 1e-3


# -- complexification ------------------------------------------------------------

@pytest.mark.parametrize("k", [0.0, 0.3, 0.5, 1.0, 2.0])
def test_complexification_derived(grid, k):
    fields, f, g = band(1, grid), band(2, grid), band(3, grid)
    holo, anti = complexification_defect(k, fields, f, g,
                                         expected_holo=holomorphic_coefficient(k))
    assert holo <= 1e-10 and anti <= 1e-10
    ch, cm = complex_bracket_coefficients(k, fields, f.first.values)
    assert abs(ch - holomorphic_coefficient(k)) <= 1e-10 and abs(cm) <= 1e-10


def test_stated_coefficient_values():
    assert holomorphic_coefficient(0.0, real_form=True) == -2
    assert holomorphic_coefficient(0.5, real_form=True) == -4
    assert holomorphic_coefficient(1.0) == holomorphic_coefficient(1.0, real_form=True)
    assert abs(holomorphic_coefficient(0.0) - (-2j)) <= 1e-15


def test_stated_coefficient_only_matches_at_k1(grid):
    fields, f, g = band(1, grid), band(2, grid), band(3, grid)
    assert complexification_defect(1.0, fields, f, g)[0] <= 1e-10
    assert complexification_defect(0.5, fields, f, g)[0] > 1.0


# -- Casimirs --------------------------------------------------------------------

def test_mass_casimirs(grid):
    f = band(1, grid)
    assert casimir_defect(StructureSpec("J1"), f, FunctionalSpec("MassU")) == 0.0
    assert casimir_defect(StructureSpec("J0"), f, FunctionalSpec("MassV")) == 0.0
    for sid in ("J1", "J0", "Jk"):
        for mid in ("MassU", "MassV"):
            assert casimir_defect(_spec(sid, -1.0, 0.3), f, FunctionalSpec(mid)) <= 1e-12


def test_mass_not_casimir_of_modified(grid):
    u = band(4, grid).first.values
    fields = FieldPair.from_arrays(grid, u, np.zeros(grid.n))
    d = casimir_defect(StructureSpec("JM1"), fields, FunctionalSpec("MassU"))
    ux = spectral_derivative(u, grid.length, 1)
    assert d == pytest.approx(np.max(np.abs(ux)) / 3, rel=1e-12)
    assert d > 1e-3


def test_casimir_candidate_check(grid):
    with pytest.raises(ParameterError):
        casimir_defect(StructureSpec("J1"), band(1, grid), FunctionalSpec("H2"))


def test_small_grid_still_valid():
    g = GridSpec(16, 10.0)
    f = band(1, g, cutoff=3)
    assert skew_defect(StructureSpec("JM1"), f, band(2, g, cutoff=3), band(3, g, cutoff=3)) <= 1e-12
