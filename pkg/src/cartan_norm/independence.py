"""ODE residuals for the b-independent families and norm-versus-b scans."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularODE
from .families import ENDPOINT_EPS, MetricFamily, MetricModel, phi_derivatives
from .frame import THETA_SAMPLES, cartan_norm_2d
from .quadrature import QuadResult, adaptive_gauss_legendre

B_TOLERANCE = 1e-4


def ode1_terms(family: MetricFamily, s, b):
    """The two terms of (b² - s²)φ''' - 3sφ''."""
    _, _, d2, d3 = phi_derivatives(family, s, b)
    return (b * b - s * s) * d3, -3.0 * s * d2


def ode1_residual(family: MetricFamily, s, b) -> float:
    t1, t2 = ode1_terms(family, s, b)
    return float(t1 + t2)


def ode1_scale(family: MetricFamily, s, b) -> float:
    return float(sum(abs(t) for t in ode1_terms(family, s, b)))


def ode2_terms(family: MetricFamily, s, b, lam):
    gap = b * b - s * s
    if abs(gap) < 1e-12:
        raise SingularODE(f"b^2 - s^2 vanishes at s={s}")
    phi, d1, d2, d3 = phi_derivatives(family, s, b)
    return d3, -(lam + 3.0 * s / gap) * d2, s * lam / gap * d1, -lam / gap * phi


def ode2_residual(family: MetricFamily, s, b, lam) -> float:
    return float(sum(ode2_terms(family, s, b, lam)))


def ode2_scale(family: MetricFamily, s, b, lam) -> float:
    return float(sum(abs(t) for t in ode2_terms(family, s, b, lam)))


# -- the integral family ---------------------------------------------------------


def _integrand(lam, b):
    return lambda t: np.exp(lam * t) / (b * b - t * t) ** 1.5


def antiderivative(lam: float, b: float, s: float, rtol: float = 1e-13) -> QuadResult:
    """∫_0^s e^{λt} (b² - t²)^{-3/2} dt by adaptive Gauss-Legendre."""
    return adaptive_gauss_legendre(_integrand(lam, b), 0.0, float(s), rtol=rtol)


def _antiderivative_many(lam, b, s):
    """Cumulative integral at every entry of s, integrating between sorted nodes."""
    flat = np.asarray(s, dtype=float).ravel()
    nodes = np.unique(np.concatenate([flat, [0.0]]))
    zero = int(np.searchsorted(nodes, 0.0))
    f = _integrand(lam, b)
    values = np.zeros_like(nodes)
    for i in range(zero + 1, len(nodes)):
        values[i] = values[i - 1] + adaptive_gauss_legendre(f, nodes[i - 1], nodes[i]).value
    for i in range(zero - 1, -1, -1):
        values[i] = values[i + 1] - adaptive_gauss_legendre(f, nodes[i], nodes[i + 1]).value
    return values[np.searchsorted(nodes, flat)].reshape(np.shape(s))


def integral_phi_eval(c, lam: float, b: float, s, eps: float = ENDPOINT_EPS):
    """(φ, φ', φ'', φ''') for φ = c1 s + c2 w + c3 w J with w = sqrt(b² - s²).

    J is the antiderivative from 0; its derivatives are closed-form, so only
    φ itself carries quadrature error.
    """
    c1, c2, c3 = c
    s = np.asarray(s, dtype=float)
    if b <= 0.0 or np.any(np.abs(s) > b * (1.0 - eps)):
        raise SingularODE(f"|s| must stay within b(1 - {eps}) of the singular endpoint")
    J = _antiderivative_many(lam, b, s) if s.ndim else antiderivative(lam, b, float(s)).value
    b2 = b * b
    w = np.sqrt(b2 - s * s)
    w1, w2, w3 = -s / w, -b2 / w**3, -3.0 * b2 * s / w**5
    E = np.exp(lam * s)
    J1 = E / w**3
    J2 = E * (lam / w**3 + 3.0 * s / w**5)
    J3 = E * (lam * lam / w**3 + 6.0 * lam * s / w**5 + 3.0 / w**5 + 15.0 * s * s / w**7)
    V0 = w * J
    V1 = w1 * J + w * J1
    V2 = w2 * J + 2.0 * w1 * J1 + w * J2
    V3 = w3 * J + 3.0 * w2 * J1 + 3.0 * w1 * J2 + w * J3
    return (
        c1 * s + c2 * w + c3 * V0,
        c1 + c2 * w1 + c3 * V1,
        c2 * w2 + c3 * V2,
        c2 * w3 + c3 * V3,
    )


# -- norm versus b ---------------------------------------------------------------


@dataclass(frozen=True)
class BScan:
    family: MetricFamily
    k_list: tuple[float, ...]
    norms: tuple[float, ...]
    tolerance: float
    norms_3d: tuple[float, ...] | None = field(default=None)

    @property
    def deviation(self) -> float:
        return max(self.norms) - min(self.norms)

    @property
    def deviation_3d(self) -> float | None:
        if self.norms_3d is None:
            return None
        return max(self.norms_3d) - min(self.norms_3d)

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance


def b_independence_scan(
    family: MetricFamily, k_list, theta_samples: int = THETA_SAMPLES,
    tolerance: float = B_TOLERANCE, with_3d: bool = False, y_samples: int = 256,
    u_samples: int = 64, seed: int = 0,
) -> BScan:
    """2-D Cartan norm at each k (b = k in the canonical model) and its spread."""
    k_list = tuple(float(k) for k in k_list)
    norms = tuple(cartan_norm_2d(MetricModel(family, k), theta_samples).norm for k in k_list)
    norms_3d = None
    if with_3d:
        from .oracle3d import cartan_norm_nd

        norms_3d = tuple(
            cartan_norm_nd(MetricModel(family, k, 3), y_samples, u_samples, seed).norm for k in k_list
        )
    return BScan(family, k_list, norms, tolerance, norms_3d)
