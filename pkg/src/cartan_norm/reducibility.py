"""Semi-C-reducibility: the p/q split of the Cartan tensor of an (α,β)-metric.

For n ≥ 3 the Cartan tensor decomposes pointwise as

    C_ijk = p/(n+1) (h_ij I_k + h_jk I_i + h_ki I_j) + q/|I|² I_i I_j I_k,

with p + q = 1 and p a function of s = β/α alone.  ``|I|²`` is g^{ij} I_i I_j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidInput, RiemannianFlag, SingularSplit
from .families import MetricFamily, MetricModel, phi_derivatives
from .tensors import _sym_hI, flag_tensors

SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class PQSplit:
    s: float
    b: float
    n: int
    a: float
    A: float
    p: float
    q: float


def _guard(value, term):
    if abs(value) < SINGULAR_TOL:
        raise SingularSplit(f"denominator '{term}' vanishes ({value:.3e})", term=term)


def _dimension(model, n):
    n = model.n if n is None else int(n)
    if n < 3:
        raise InvalidInput("the p/q split needs dimension n >= 3")
    return n


def compute_aA(model: MetricModel, s: float, n: int | None = None) -> tuple[float, float]:
    n = _dimension(model, n)
    b = model.b
    phi, d1, d2, d3 = (float(v) for v in phi_derivatives(model.family, s, b))
    tangential = phi - s * d1
    regular = (b * b - s * s) * d2 + tangential
    _guard(tangential, "phi - s phi'")
    _guard(phi, "phi")
    _guard(regular, "(b^2 - s^2) phi'' + phi - s phi'")
    a = phi * tangential
    A = (
        (n - 2) * s * d2 / tangential
        - (n + 1) * d1 / phi
        - ((b * b - s * s) * d3 - 3 * s * d2) / regular
    )
    return a, A


def c2like_residual(family: MetricFamily, s: float, b: float) -> float:
    """s(φφ'' + φ'²) - φφ'; vanishes identically exactly for C2-like φ."""
    phi, d1, d2, _ = (float(v) for v in phi_derivatives(family, s, b))
    return s * (phi * d2 + d1 * d1) - phi * d1


def compute_p(model: MetricModel, s: float, n: int | None = None) -> PQSplit:
    n = _dimension(model, n)
    a, A = compute_aA(model, s, n)
    _guard(a * A, "a A")
    p = (n + 1) / (a * A) * c2like_residual(model.family, s, model.b)
    return PQSplit(s, model.b, n, a, A, p, 1.0 - p)


# Specialized forms for the two theorem families.  Both were rederived from the
# generic definitions; tests check them against compute_p.

def A_generalized_randers(c, s, b, n):
    c1, c2, c3 = c
    Q = c1 + 2 * c2 * s + c3 * s * s
    D = c1 * c3 - c2 * c2
    lin = c1 + c2 * s
    return (
        (n - 2) * s * D / (Q * lin)
        - (n + 1) * (c2 + c3 * s) / Q
        + 3 * D * ((b * b - s * s) * (c2 + c3 * s) + s * Q) / (Q * (lin * Q + D * (b * b - s * s)))
    )


def p_generalized_randers(c, s, b, n):
    c1, c2, _ = c
    return -(n + 1) * c2 / ((c1 + c2 * s) * A_generalized_randers(c, s, b, n))


def A_quadratic_beta(c, s, b, n):
    c1, c2, c3 = c
    return (
        2 * (n - 2) * c3 * s / (c1 - c3 * s * s)
        - (n + 1) * (c2 + 2 * c3 * s) / (c1 + c2 * s + c3 * s * s)
        + 6 * c3 * s / ((c1 - c3 * s * s) + 2 * (b * b - s * s) * c3)
    )


def p_quadratic_beta(c, s, b, n):
    c1, c2, c3 = c
    A = A_quadratic_beta(c, s, b, n)
    numer = 3 * c2 * c3 * s * s + 4 * c3 * c3 * s**3 - c1 * c2
    return (n + 1) / ((c1 - c3 * s * s) * (c1 + c2 * s + c3 * s * s) * A) * numer


def norm_relation_factor(p: float, q: float, n: int) -> float:
    """|C| / |I| = sqrt((3p² + 6pq + (n+1)q²)/(n+1))."""
    if not math.isclose(p + q, 1.0, rel_tol=0.0, abs_tol=1e-12):
        raise InvalidInput(f"p + q must be 1, got {p + q!r}")
    radicand = (3 * p * p + 6 * p * q + (n + 1) * q * q) / (n + 1)
    if radicand < 0:
        raise DomainError(f"norm relation radicand is negative ({radicand:.6g})")
    return math.sqrt(radicand)


def _decomposition_parts(model, y):
    if model.n != 3:
        raise InvalidInput("decomposition check runs in the 3-dimensional model")
    t = flag_tensors(model, y)
    norm2 = float(t.mean_torsion_norm2)
    if not norm2 > SINGULAR_TOL**2:
        raise RiemannianFlag("mean Cartan torsion vanishes at this flag")
    hI = _sym_hI(t.h, t.I) / (model.n + 1)
    III = np.einsum("i,j,k->ijk", t.I, t.I, t.I) / norm2
    return t, hI, III


def slope_s(model: MetricModel, y) -> float:
    y = np.asarray(y, dtype=float)
    return float(model.k * y[0] / np.linalg.norm(y))


def decomposition_residual(model: MetricModel, y, p: float | None = None) -> float:
    """max |C - p/(n+1) sym(h I) - q I I I/|I|²| at the flag y, q = 1 - p."""
    t, hI, III = _decomposition_parts(model, y)
    if p is None:
        p = compute_p(model, slope_s(model, y)).p
    return float(np.max(np.abs(t.C - p * hI - (1.0 - p) * III)))


def fit_p(model: MetricModel, y) -> float:
    """Least-squares p for C - III = p (hI - III); independent of any formula for p."""
    t, hI, III = _decomposition_parts(model, y)
    basis = (hI - III).ravel()
    target = (t.C - III).ravel()
    return float(basis @ target / (basis @ basis))
