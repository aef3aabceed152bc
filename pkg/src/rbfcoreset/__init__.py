"""Sensitivity-sampling coresets for Gaussian RBF and Laplacian losses."""
from .errors import DegenerateError, InvalidInputError, PreconditionError, UnsupportedDimensionError
from .evaluation import EvalReport, beta_bounds, evaluate, loss_sum, relative_error, sample_queries, theorem4_error
from .geometry import LiftedPointSet, WeightedPointSet, lift_point, lift_points, lift_queries, lift_query, normalize_to_unit_ball
from .l1svd import L1Conditioner, compute_l1_conditioner, l1_functional, u_norm
from .rbfnn import (
    FuncApproxConfig,
    RBFNNModel,
    fit_output_weights,
    function_approx_experiment,
    rbfnn_eval,
    training_objective,
)
from .sampling import Coreset, build_coreset, coreset_laplacian, coreset_rbf, signed_coreset_pair, uniform_coreset
from .sensitivity import (
    SensitivityProfile,
    brute_force_sensitivity,
    laplacian_sensitivity_bounds,
    lower_bound_instance,
    rbf_sensitivity_bounds,
    sensitivity_bounds,
)

__version__ = "0.1.0"

__all__ = [
    "Coreset",
    "DegenerateError",
    "EvalReport",
    "FuncApproxConfig",
    "InvalidInputError",
    "L1Conditioner",
    "LiftedPointSet",
    "PreconditionError",
    "RBFNNModel",
    "SensitivityProfile",
    "UnsupportedDimensionError",
    "WeightedPointSet",
    "beta_bounds",
    "brute_force_sensitivity",
    "build_coreset",
    "compute_l1_conditioner",
    "coreset_laplacian",
    "coreset_rbf",
    "evaluate",
    "fit_output_weights",
    "function_approx_experiment",
    "l1_functional",
    "laplacian_sensitivity_bounds",
    "lift_point",
    "lift_points",
    "lift_queries",
    "lift_query",
    "loss_sum",
    "lower_bound_instance",
    "normalize_to_unit_ball",
    "rbf_sensitivity_bounds",
    "rbfnn_eval",
    "relative_error",
    "sample_queries",
    "sensitivity_bounds",
    "signed_coreset_pair",
    "theorem4_error",
    "training_objective",
    "u_norm",
    "uniform_coreset",
]
