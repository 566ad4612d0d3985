"""mahlerkit: Mahler functions, rational approximations and irrationality-exponent bounds."""

__version__ = "0.1.0"

from .algebra import (
    GrowthBound,
    Polynomial,
    RealInterval,
    TruncatedSeries,
    eval_series_real,
    expand_series,
)
from .errors import (
    BudgetError,
    ConsistencyError,
    Defect,
    DomainError,
    HypothesisError,
    InputError,
    MahlerkitError,
    PrecisionError,
    PreconditionError,
)
from .mahler import MahlerEquation, MahlerSystem, companion_system, equation_system
from .polymat import PolyMatrix, RatMatrix

__all__ = [
    "BudgetError",
    "ConsistencyError",
    "Defect",
    "DomainError",
    "GrowthBound",
    "HypothesisError",
    "InputError",
    "MahlerEquation",
    "MahlerSystem",
    "MahlerkitError",
    "PolyMatrix",
    "Polynomial",
    "PrecisionError",
    "PreconditionError",
    "RatMatrix",
    "RealInterval",
    "TruncatedSeries",
    "companion_system",
    "equation_system",
    "eval_series_real",
    "expand_series",
]
