"""Fundamental tensor, Cartan torsion and friends at a flag of the canonical model.

Everything is obtained from one third-order jet of F² in the direction
variables: g_ij = ½ ∂²F², C_ijk = ¼ ∂³F².  Inputs may carry batch
dimensions in front of the direction axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .errors import InvalidInput, NonPositiveDefinite
from .families import MetricModel, phi_derivatives

DET_RTOL = 1e-12


@dataclass(frozen=True)
class FlagTensors:
    y: np.ndarray
    F: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    C: np.ndarray
    I: np.ndarray  # noqa: E741
    h: np.ndarray
    M: np.ndarray

    @property
    def n(self) -> int:
        return self.y.shape[-1]

    @property
    def mean_torsion_norm2(self) -> np.ndarray:
        """g^{ij} I_i I_j."""
        return np.einsum("...ij,...i,...j->...", self.g_inv, self.I, self.I)


def _directions(model: MetricModel, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != model.n:
        raise InvalidInput(f"direction has {y.shape[-1]} components, model has n={model.n}")
    if np.any(np.all(y == 0.0, axis=-1)):
        raise InvalidInput("direction y must be nonzero")
    return y


def metric_value(model: MetricModel, y) -> np.ndarray | float:
    """F(y) = α(y) φ(β(y)/α(y)) with α = |y| and β = k y¹."""
    y = _directions(model, y)
    alpha = np.linalg.norm(y, axis=-1)
    phi = phi_derivatives(model.family, model.k * y[..., 0] / alpha, model.b)[0]
    out = alpha * phi
    return float(out) if np.ndim(out) == 0 else out


def f_squared_jet(model: MetricModel, y) -> jets.TaylorJet3:
    y = _directions(model, y)
    comps = jets.seed_vector(y)
    alpha2 = comps[0] * comps[0]
    for c in comps[1:]:
        alpha2 = alpha2 + c * c
    alpha = jets.jet_sqrt(alpha2)
    s = (model.k * comps[0]) / alpha
    F = alpha * model.family.phi_jet(s, model.b)
    return F * F


def _det(m):
    if m.shape[-1] == 2:
        return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    return (
        m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
        - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
        + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0])
    )


def _adjugate(m):
    if m.shape[-1] == 2:
        adj = np.empty_like(m)
        adj[..., 0, 0] = m[..., 1, 1]
        adj[..., 1, 1] = m[..., 0, 0]
        adj[..., 0, 1] = -m[..., 0, 1]
        adj[..., 1, 0] = -m[..., 1, 0]
        return adj
    # cofactor (i, j) via cyclic indices; transpose gives the adjugate
    cof = np.empty_like(m)
    for i in range(3):
        i1, i2 = (i + 1) % 3, (i + 2) % 3
        for j in range(3):
            j1, j2 = (j + 1) % 3, (j + 2) % 3
            cof[..., i, j] = m[..., i1, j1] * m[..., i2, j2] - m[..., i1, j2] * m[..., i2, j1]
    return np.swapaxes(cof, -1, -2)


def inverse_spd(g: np.ndarray) -> np.ndarray:
    """Closed-form inverse for 2x2 / 3x3 matrices after a positive-definiteness check."""
    n = g.shape[-1]
    scale = np.max(np.abs(g), axis=(-1, -2))
    for size in range(1, n + 1):
        minor = g[..., :size, :size]
        d = minor[..., 0, 0] if size == 1 else _det(minor)
        bad = d <= DET_RTOL * scale**size
        if np.any(bad):
            idx = tuple(int(i) for i in np.argwhere(np.atleast_1d(bad))[0])
            raise NonPositiveDefinite(
                f"fundamental tensor not positive definite (leading minor {size}, batch index {idx})"
            )
    return _adjugate(g) / _det(g)[..., None, None]


def _sym_hI(h, I):  # noqa: E741
    return (
        h[..., :, :, None] * I[..., None, None, :]
        + h[..., :, None, :] * I[..., None, :, None]
        + h[..., None, :, :] * I[..., :, None, None]
    )


def flag_tensors(model: MetricModel, y) -> FlagTensors:
    y = _directions(model, y)
    jet = f_squared_jet(model, y)
    F = np.sqrt(jet.value)
    g = 0.5 * jet.hess
    C = 0.25 * jet.third
    g_inv = inverse_spd(g)
    I = np.einsum("...jk,...ijk->...i", g_inv, C)  # noqa: E741
    ell = np.einsum("...ij,...j->...i", g, y)
    h = g - ell[..., :, None] * ell[..., None, :] / (F**2)[..., None, None]
    M = C - _sym_hI(h, I) / (model.n + 1)
    return FlagTensors(y, F, g, g_inv, C, I, h, M)


def quad_form(g, u, v=None):
    v = u if v is None else v
    return np.einsum("...ij,...i,...j->...", g, u, v)


def cubic_form(C, u):
    return np.einsum("...ijk,...i,...j,...k->...", C, u, u, u)


@dataclass(frozen=True)
class FlagScalars:
    C_uuu: float
    g_uu: float
    ratio: float


def flag_scalars(tensors: FlagTensors, u) -> FlagScalars:
    """F |C(u,u,u)| / g(u,u)^{3/2}, homogeneous of degree 0 in u."""
    u = np.asarray(u, dtype=float)
    guu = quad_form(tensors.g, u)
    if np.any(~(guu > 0.0)):
        raise NonPositiveDefinite("g(u, u) <= 0")
    cuuu = cubic_form(tensors.C, u)
    ratio = tensors.F * np.abs(cuuu) / guu**1.5
    return FlagScalars(cuuu, guu, ratio)
