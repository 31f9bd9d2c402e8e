"""Recovery of mixed derivatives from hyperbolic-cross point samples."""

from .bspline import (
    SplineTranslate,
    active_translates,
    bspline_derivative,
    bspline_eval,
    covering_translates,
    refinement_coeffs,
    translate_deriv,
)
from .dyadic import (
    DyadicEvaluator,
    local_interp,
    quasi_interp_eval,
    surplus_eval,
    surplus_local_poly,
)
from .functions import MixedDifference, TestFunction, get_function, mixed_difference, modulus_estimate, registry
from .grid import (
    DyadicRational,
    RecoveryPlan,
    SmoothnessParams,
    build_plan,
    choose_radius,
    count_profile,
    derive_params,
    index_set,
    tail_sum,
    weighted_sum,
    write_plan,
)
from .interp import TensorPoly, lagrange_basis_eval, nodes, poly_deriv_eval, tensor_interpolate
from .recovery import Approximant, Quadrature, SampleSet, lq_error, reconstruct, sample

__version__ = "0.1.0"

__all__ = [
    "Approximant",
    "DyadicEvaluator",
    "DyadicRational",
    "MixedDifference",
    "Quadrature",
    "RecoveryPlan",
    "SampleSet",
    "SmoothnessParams",
    "SplineTranslate",
    "TensorPoly",
    "TestFunction",
    "active_translates",
    "bspline_derivative",
    "bspline_eval",
    "build_plan",
    "choose_radius",
    "count_profile",
    "covering_translates",
    "derive_params",
    "get_function",
    "index_set",
    "lagrange_basis_eval",
    "local_interp",
    "lq_error",
    "mixed_difference",
    "modulus_estimate",
    "nodes",
    "poly_deriv_eval",
    "quasi_interp_eval",
    "reconstruct",
    "refinement_coeffs",
    "registry",
    "sample",
    "surplus_eval",
    "surplus_local_poly",
    "tail_sum",
    "tensor_interpolate",
    "translate_deriv",
    "weighted_sum",
    "write_plan",
]
