"""Sharp constants of Markov-Bernstein-Nikolskii type for Newton-polyhedron classes."""

from .bodies import (ConvexBody, CoverageError, Parallelepiped,
                     check_pi_condition, cover_with_parallelepipeds,
                     lattice_points)
from .polycore import (DiffOperator, Polynomial, TrigPolynomial,
                       bernstein_product_constant, chebyshev_T,
                       coefficient_bound_check, faa_di_bruno_c, grlex_key,
                       labelle_constant, lift_derivative_at_zero, mu,
                       trig_lift)
from .quadrature import (GramMatrix, GridSpec, IllConditionedGramError,
                         NormValue, gram_matrix, lp_norm_body, lp_norm_cube,
                         lp_norm_cube_fn, sup_norm_cube, sup_norm_cube_fn)
from .constants import (ConvergenceStudy, DegenerateFunctionalError,
                        SharpConstantResult, convergence_study, entire_e2,
                        extremal_polynomial, lift_norm_inequality_check,
                        markov_m, tilde_m, trig_p_constant)
from .approx import (ApproxResult, RateConstants, best_approx_exp,
                     rate_constants, remez_best_approx,
                     scaling_identity_check, tensor_exp_approx)

__version__ = "0.1.0"

__all__ = [
    "ApproxResult", "ConvexBody", "ConvergenceStudy", "CoverageError",
    "DegenerateFunctionalError", "DiffOperator", "GramMatrix", "GridSpec",
    "IllConditionedGramError", "NormValue", "Parallelepiped", "Polynomial",
    "RateConstants", "SharpConstantResult", "TrigPolynomial",
    "bernstein_product_constant", "best_approx_exp", "check_pi_condition",
    "chebyshev_T", "coefficient_bound_check", "convergence_study",
    "cover_with_parallelepipeds", "entire_e2", "extremal_polynomial",
    "faa_di_bruno_c", "gram_matrix", "grlex_key", "labelle_constant",
    "lattice_points", "lift_derivative_at_zero",
    "lift_norm_inequality_check", "lp_norm_body", "lp_norm_cube",
    "lp_norm_cube_fn", "markov_m", "mu", "rate_constants",
    "remez_best_approx", "scaling_identity_check", "sup_norm_cube",
    "sup_norm_cube_fn", "tensor_exp_approx", "tilde_m", "trig_lift",
    "trig_p_constant",
]
