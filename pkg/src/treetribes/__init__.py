"""Random restrictions of clipped decision trees and xor tree tribes."""

from .boolfn import (Constancy, FourierSpectrum, TruthTable, bias, correlation, dt_depth,
                     evaluate, fourier_transform, influence, is_constant)
from .dtree import DecisionTree, apply_restriction, clip_report, dumps, loads, validate
from .errors import (DomainError, InvariantViolation, LiveCapExceeded, ResourceError,
                     TreeTribesError, UsageError)
from .polyrec import RationalPoly, p0_p1, p_star
from .restrict import Cell, Restriction, RestrictionLaw, mc_estimate_depth_ge
from .tribes import TribeSpec, TribeTree, build_complete_clipped, build_xor_tribe, num_vars

__version__ = "0.1.0"
