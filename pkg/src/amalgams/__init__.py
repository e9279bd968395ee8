"""Amalgam norms, fractional maximal and integral operators, and weight conditions
on discretized spaces of homogeneous type."""

from .amalgam import AmalgamExponents, amalgam_norm, dyadic_amalgam_norm, euclid_amalgam_norm
from .functions import GridFunction, lp_norm, weak_quasinorm
from .geometry import build_dyadic, verify_dyadic, vitali_select
from .operators import fractional_integral, fractional_maximal
from .orlicz import YoungFunction, conjugate, luxemburg_norm
from .space import Ball, BallFamily, Space, make_grid_space, space_from_spec

__all__ = [
    "AmalgamExponents", "Ball", "BallFamily", "GridFunction", "Space", "YoungFunction",
    "amalgam_norm", "build_dyadic", "conjugate", "dyadic_amalgam_norm", "euclid_amalgam_norm",
    "fractional_integral", "fractional_maximal", "lp_norm", "luxemburg_norm", "make_grid_space",
    "space_from_spec", "verify_dyadic", "vitali_select", "weak_quasinorm",
]
