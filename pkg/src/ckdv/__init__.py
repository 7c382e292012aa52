"""Hamiltonian structure of the parametric coupled KdV system, checked numerically.

Submodules: :mod:`~ckdv.grid` (periodic fields and spectral calculus),
:mod:`~ckdv.functionals`, :mod:`~ckdv.structures` (bracket operators),
:mod:`~ckdv.miura`, :mod:`~ckdv.dirac` (finite-dimensional constraint
reduction), :mod:`~ckdv.dynamics` and :mod:`~ckdv.cli`.
"""

__version__ = "0.1.0"

from .errors import BlowUpError, GridMismatchError, ParameterError, SingularConstraintError
from .grid import Field, FieldPair, GridSpec, SystemParams, make_grid, random_band_limited
from .pencil import PencilParams, excluded_k, pencil_denominator
from .functionals import FunctionalSpec, LagrangianSpec, eval_functional, variational_derivative
from .structures import StructureSpec, apply_structure, coupled_kdv_rhs, hamiltonian_flow
from .miura import miura_map, mkdv_rhs
from .dirac import ConstraintVariant, dirac_bracket_matrix, kernel_comparison
from .dynamics import IntegratorConfig, integrate, integrate_with_monitor, soliton_initial

__all__ = [
    "BlowUpError", "GridMismatchError", "ParameterError", "SingularConstraintError",
    "Field", "FieldPair", "GridSpec", "SystemParams", "make_grid", "random_band_limited",
    "PencilParams", "excluded_k", "pencil_denominator",
    "FunctionalSpec", "LagrangianSpec", "eval_functional", "variational_derivative",
    "StructureSpec", "apply_structure", "coupled_kdv_rhs", "hamiltonian_flow",
    "miura_map", "mkdv_rhs",
    "ConstraintVariant", "dirac_bracket_matrix", "kernel_comparison",
    "IntegratorConfig", "integrate", "integrate_with_monitor", "soliton_initial",
]
