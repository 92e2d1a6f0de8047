"""Cartan torsion norms of (α,β)-metrics: jets, Berwald frames and bound checks."""

from .errors import (
    CartanError, DegenerateFrame, DomainError, InvalidInput, NonPositiveDefinite,
    NumericOverflow, QuadratureFailure, RiemannianFlag, SingularJet, SingularODE,
    SingularSplit, UnsupportedFamily,
)
from .families import (
    GeneralizedKropina, GeneralizedRanders, IntegralBIndependent, MetricFamily, MetricModel,
    PowerRanders, QuadraticBeta, SqrtBIndependent, admissibility_report, phi_derivatives,
    theorem1_hypothesis, theorem2_hypothesis,
)
from .frame import (
    berwald_perp, cartan_norm_2d, closed_form_perp, closed_form_xi, fg_polynomials,
    positivity_scan, xi_numeric,
)
from .independence import b_independence_scan, integral_phi_eval, ode1_residual, ode2_residual
from .oracle3d import cartan_norm_nd
from .reducibility import (
    c2like_residual, compute_aA, compute_p, decomposition_residual, norm_relation_factor,
)
from .tensors import flag_scalars, flag_tensors, metric_value

__version__ = "0.1.0"
