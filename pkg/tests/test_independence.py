import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cartan_norm.errors import QuadratureFailure, SingularODE
from cartan_norm.families import (
    GeneralizedRanders, IntegralBIndependent, MetricModel, QuadraticBeta, SqrtBIndependent,
    admissibility_report, phi_derivatives,
)
from cartan_norm.independence import (
    antiderivative, b_independence_scan, integral_phi_eval, ode1_residual, ode1_scale,
    ode2_residual, ode2_scale,
)
from cartan_norm.quadrature import adaptive_gauss_legendre

P2 = SqrtBIndependent(0.3, 1.0, 1.2)
PHI = IntegralBIndependent(0.4, 1.0, 0.3, 1.0)


def interior(b, eps=1e-3, count=64):
    return np.linspace(-b * (1 - eps), b * (1 - eps), count)


# -- ODE residuals ---------------------------------------------------------------------


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-0.9, 0.9))
def test_linear_phi_solves_ode1_exactly(c1, c2, s):
    assert ode1_residual(QuadraticBeta(c1, c2, 0.0), s, 0.95) == 0.0


@pytest.mark.parametrize("b", [0.2, 0.5, 0.9])
def test_p2_family_solves_ode1(b):
    for s in interior(b):
        assert abs(ode1_residual(P2, s, b)) < 1e-8 * ode1_scale(P2, s, b)


def test_ode2_reduces_to_ode1_at_zero_lambda():
    b = 0.7
    for s in interior(b, count=9):
        gap = b * b - s * s
        assert ode2_residual(P2, s, b, 0.0) * gap == pytest.approx(ode1_residual(P2, s, b), rel=1e-12, abs=1e-9)


@pytest.mark.parametrize("lam", [-2.0, 0.0, 1.0, 3.0])
@pytest.mark.parametrize("b", [0.3, 0.8])
def test_integral_family_solves_ode2(lam, b):
    fam = IntegralBIndependent(0.4, 1.0, 0.3, lam)
    for s in interior(b):
        assert abs(ode2_residual(fam, s, b, lam)) < 1e-7 * ode2_scale(fam, s, b, lam)


def test_homogeneous_part_solves_ode2():
    fam = IntegralBIndependent(0.7, -1.3, 0.0, 2.0)
    for s in interior(0.6, count=16):
        assert abs(ode2_residual(fam, s, 0.6, 2.0)) < 1e-9


def test_ode2_singular_endpoint():
    with pytest.raises(SingularODE):
        ode2_residual(QuadraticBeta(1, 1, 0), 0.5, 0.5, 1.0)


@pytest.mark.parametrize("lam", [0.0, 1.5])
def test_third_fraction_of_A_is_lambda(lam):
    # ODE2 rearranges to (b²-s²)φ''' - 3sφ'' = λ[(b²-s²)φ'' + φ - sφ'].
    fam = IntegralBIndependent(0.4, 1.0, 0.3, lam)
    b = 0.6
    for s in interior(b, count=9):
        phi, d1, d2, d3 = (float(v) for v in phi_derivatives(fam, s, b))
        numer = (b * b - s * s) * d3 - 3 * s * d2
        denom = (b * b - s * s) * d2 + phi - s * d1
        scale = abs((b * b - s * s) * d3) + abs(3 * s * d2) + abs(lam * denom)
        assert abs(numer - lam * denom) <= 1e-7 * scale


# -- integral family and quadrature ----------------------------------------------------


def test_integral_phi_at_zero():
    phi = integral_phi_eval((0.4, 1.0, 0.3), 1.0, 0.8, 0.0)[0]
    assert float(phi) == pytest.approx(0.8, rel=1e-15)


@pytest.mark.parametrize("s", [-0.99, -0.5, 0.1, 0.7, 0.99])
def test_zero_lambda_antiderivative(s):
    assert antiderivative(0.0, 1.0, s).value == pytest.approx(s / math.sqrt(1 - s * s), rel=1e-10)


def test_generic_antiderivative_against_trapezoid():
    lam, b, s = 1.0, 0.8, 0.5
    t = np.linspace(0.0, s, 1_000_001)
    f = np.exp(lam * t) / (b * b - t * t) ** 1.5
    oracle = float(np.trapezoid(f, t)) if hasattr(np, "trapezoid") else float(np.trapz(f, t))
    assert antiderivative(lam, b, s).value == pytest.approx(oracle, rel=1e-8)


def test_vector_evaluation_matches_scalar():
    s = np.array([-0.5, 0.0, 0.2, 0.6])
    many = integral_phi_eval((0.4, 1.0, 0.3), 1.0, 0.8, s)
    for i, si in enumerate(s):
        one = integral_phi_eval((0.4, 1.0, 0.3), 1.0, 0.8, float(si))
        for a, b in zip(many, one):
            assert float(a[i]) == pytest.approx(float(b), rel=1e-12, abs=1e-14)


def test_integral_endpoint_guard():
    with pytest.raises(SingularODE):
        integral_phi_eval((0.4, 1.0, 0.3), 1.0, 0.8, 0.7999)


def test_quadrature_cap():
    with pytest.raises(QuadratureFailure):
        adaptive_gauss_legendre(lambda x: np.abs(x - 0.3141) ** -0.9, 0.0, 1.0, max_panels=4)


def test_quadrature_reversed_limits():
    fwd = adaptive_gauss_legendre(np.exp, 0.0, 1.0).value
    assert adaptive_gauss_legendre(np.exp, 1.0, 0.0).value == -fwd
    assert fwd == pytest.approx(math.e - 1, rel=1e-14)


@pytest.mark.parametrize("lam,b,s", [(0.0, 1.0, 0.99), (1.0, 0.8, 0.79), (-2.0, 0.5, -0.49)])
def test_quadrature_error_monotone_in_tolerance(lam, b, s):
    errors = [antiderivative(lam, b, s, rtol=10.0**-j).error for j in range(4, 14)]
    assert all(e2 <= e1 for e1, e2 in zip(errors, errors[1:]))


# -- b scans ---------------------------------------------------------------------------


def test_riemannian_scan_is_flat():
    scan = b_independence_scan(GeneralizedRanders(1, 0, 1), (0.2, 0.4, 0.6, 0.8), 256)
    assert max(scan.norms) < 1e-12
    assert scan.deviation < 1e-12 and scan.passed


def test_randers_type_scan_is_reported():
    # c2² = c1c3 makes φ = 1 + s, a Randers metric; its 2-D norm grows with b.
    scan = b_independence_scan(GeneralizedRanders(1, 1, 1), (0.2, 0.4, 0.6, 0.8))
    assert scan.norms == pytest.approx((0.30152688601562466, 0.6129289310676598, 0.9486832980505152, 1.3416407864998776), rel=1e-9)
    assert scan.deviation == pytest.approx(1.040113900484253, rel=1e-9)
    assert not scan.passed


def test_p2_scan_is_reported():
    scan = b_independence_scan(P2, (0.2, 0.4, 0.6, 0.8), tolerance=1e-4)
    assert scan.deviation == pytest.approx(0.9570890543382995, rel=1e-8)
    assert scan.tolerance == 1e-4 and not scan.passed


def test_scan_with_3d_column():
    scan = b_independence_scan(QuadraticBeta(1, 1, 0), (0.3, 0.6), 256, with_3d=True, y_samples=128, u_samples=32)
    assert scan.norms_3d is not None
    assert np.allclose(scan.norms_3d, scan.norms, atol=1e-3)
    assert scan.deviation_3d == pytest.approx(scan.deviation, abs=2e-3)


def test_integral_family_is_admissible_only_when_nearly_degenerate():
    # φ - sφ' stays positive only for small c3; the admissible example is reported, not asserted flat.
    fam = IntegralBIndependent(0.0, 1.0, 1e-4, 1.0)
    for k in (0.2, 0.8):
        assert admissibility_report(MetricModel(fam, k)).admissible
    assert not admissibility_report(MetricModel(IntegralBIndependent(0.0, 1.0, 0.05, 2.0), 0.2)).admissible
