"""Numerical radius and (Lipschitz) numerical index computations on
finite-dimensional normed spaces."""

from .errors import (DomainError, GenerationError, InputError, LipIndexError, NotFoundError, ParseError,
                     UnsupportedKindError)
from .io import parse_space
from .linop import LinearOperator, numerical_radius, op_norm, op_norm_bracket, radius_upper_limit
from .lipop import PwlOperator, lip_norm, lip_radius, random_pwl
from .spaces import Field, NormedSpace, direct_sum, lp, polyhedral, real_line

__version__ = "0.1.0"

__all__ = [
    "DomainError", "Field", "GenerationError", "InputError", "LinearOperator", "LipIndexError",
    "NormedSpace", "NotFoundError", "ParseError", "PwlOperator", "UnsupportedKindError", "__version__",
    "direct_sum", "lip_norm", "lip_radius", "lp", "numerical_radius", "op_norm", "op_norm_bracket",
    "parse_space", "polyhedral", "radius_upper_limit", "random_pwl", "real_line",
]
