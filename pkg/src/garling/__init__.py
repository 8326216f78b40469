"""Garling and Lorentz sequence-space norms of finitely supported vectors."""

from .weights import Weight, make_weight, conjugate, diagnostics, classify
from .sequences import (
    FiniteSequence,
    Selection,
    SignPattern,
    ConstantBlock,
    BlockSequence,
    dyadic_blocks,
    parse_sequence,
)
from .norms import (
    NormReport,
    garling_norm,
    garling_norm_oracle,
    lorentz_norm,
    weak_lorentz_quasinorm,
    lp_norm,
    is_minimal,
    minimal_predecessor,
)
from .operators import IncreasingMap, apply_signs, project, extract, spread
from .asymptotics import (
    symmetry_defect,
    select_lp_subsequence,
    verify_factorization,
    WorkBudgetExceeded,
)

__version__ = "0.1.0"
