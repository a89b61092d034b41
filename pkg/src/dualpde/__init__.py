"""Exact computations with linear PDE operator matrices over Q(x1..xn):
formal adjoints, compatibility conditions, involution, differential rank,
torsion and parametrizations."""

from .algebra import Poly, RatFunc, variable
from .cc import build_sequence, euler_poincare, generate_cc, verify_cc
from .coords import CoordinateChange
from .duality import (
    differential_rank,
    double_duality_test,
    find_annihilator,
    minimum_parametrization,
    rank_additivity_check,
    relative_parametrization_ricci,
)
from .errors import (
    DegenerateMetric,
    DeltaIrregularWarning,
    DomainError,
    DualPDEError,
    NotTorsionFree,
    OrderBudgetExceeded,
    ParseError,
    PreconditionFailed,
    ShapeError,
)
from .gallery import GALLERY, default_dimension, dim_formulas, gallery
from .jets import (
    JetSystem,
    characters,
    complete_to_involution,
    find_delta_regular,
    is_involutive,
    janet_tabular,
    prolong,
    project,
)
from .modules import RowModule, row_module_equal
from .operators import DiffOp, OpMatrix, adjoint, apply, compose, matmul, principal_symbol
from .opfile import format_operator_file, parse_operator_file

__version__ = "0.1.0"
