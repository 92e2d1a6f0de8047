"""Brute-force estimate of sup F|C(u,u,u)|/g(u,u)^{3/2} over all flags in 3 dimensions.

Directions y come from a nested low-discrepancy sequence on the sphere, so
a larger sample always contains a smaller one.  Since C(y, ., .) = 0, the
supremum over u is attained on the g-orthogonal complement of y, which is
scanned as a circle.  The best sample is then polished by coordinate ascent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CartanError, InvalidInput
from .families import MetricModel
from .frame import golden_section_max, theta_range
from .tensors import flag_tensors, quad_form

_PLASTIC = 1.324717957244746
_GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


def sphere_sequence(count: int) -> np.ndarray:
    """First ``count`` points of an R2-sequence mapped area-preservingly onto S²."""
    i = np.arange(count)
    t1 = (0.5 + i / _PLASTIC) % 1.0
    t2 = (0.5 + i / _PLASTIC**2) % 1.0
    z = 1.0 - 2.0 * t1
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    ang = 2.0 * math.pi * t2
    return np.stack([z, r * np.cos(ang), r * np.sin(ang)], axis=-1)


def circle_sequence(count: int) -> np.ndarray:
    """Nested golden-ratio angles in [0, π); |C(u,u,u)| is even in u."""
    return math.pi * ((np.arange(count) / _GOLDEN) % 1.0)


def _complement_basis(t):
    """g-orthonormal basis (e1, e2) of the g-orthogonal complement of y."""
    y = t.y / np.linalg.norm(t.y, axis=-1, keepdims=True)
    axes = np.eye(3)[np.argmin(np.abs(y), axis=-1)]
    p1 = axes - np.sum(axes * y, axis=-1, keepdims=True) * y
    p1 /= np.linalg.norm(p1, axis=-1, keepdims=True)
    p2 = np.cross(y, p1)
    F2 = (t.F**2)[..., None]

    def project(p):
        return p - quad_form(t.g, p, t.y)[..., None] / F2 * t.y

    q1, q2 = project(p1), project(p2)
    e1 = q1 / np.sqrt(quad_form(t.g, q1))[..., None]
    q2 = q2 - quad_form(t.g, q2, e1)[..., None] * e1
    e2 = q2 / np.sqrt(quad_form(t.g, q2))[..., None]
    return e1, e2


def _cubic_coeffs(t, e1, e2):
    def c(a, b, d):
        return np.einsum("...ijk,...i,...j,...k->...", t.C, a, b, d)

    return c(e1, e1, e1), c(e1, e1, e2), c(e1, e2, e2), c(e2, e2, e2)


def _circle_values(coeffs, F, psi):
    c111, c112, c122, c222 = (np.asarray(v)[..., None] for v in coeffs)
    co, si = np.cos(psi), np.sin(psi)
    cubic = c111 * co**3 + 3 * c112 * co**2 * si + 3 * c122 * co * si**2 + c222 * si**3
    return np.asarray(F)[..., None] * np.abs(cubic)


@dataclass(frozen=True)
class NDEstimate:
    norm: float
    raw_max: float
    y: np.ndarray
    u: np.ndarray


def flag_ratio(model: MetricModel, y, u) -> float:
    t = flag_tensors(model, y)
    u = np.asarray(u, dtype=float)
    return float(t.F * abs(np.einsum("ijk,i,j,k->", t.C, u, u, u)) / quad_form(t.g, u) ** 1.5)


def _best_on_circle(model, y, dense=256):
    t = flag_tensors(model, y)
    e1, e2 = _complement_basis(t)
    coeffs = _cubic_coeffs(t, e1, e2)
    psi = np.linspace(0.0, math.pi, dense, endpoint=False)
    vals = _circle_values(coeffs, t.F, psi)
    j = int(np.argmax(vals))
    step = psi[1] - psi[0]

    def f(x):
        return float(_circle_values(coeffs, t.F, np.array([x]))[0])

    x, v = golden_section_max(f, psi[j] - step, psi[j] + step, tol=1e-10)
    if v < vals[j]:
        x, v = psi[j], float(vals[j])
    return v, np.cos(x) * e1 + np.sin(x) * e2


def _spherical(y):
    y = y / np.linalg.norm(y)
    return math.acos(max(-1.0, min(1.0, y[0]))), math.atan2(y[2], y[1])


def _from_spherical(th, ph):
    return np.array([math.cos(th), math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph)])


def cartan_norm_nd(
    model: MetricModel, y_samples: int = 512, u_samples: int = 64, seed: int = 0,
    refine: bool = True,
) -> NDEstimate:
    """Lower-bound estimate of the 3-D Cartan norm at a point of the canonical model."""
    if model.n != 3:
        raise InvalidInput("brute-force oracle runs in the 3-dimensional model")
    if y_samples < 1 or u_samples < 1:
        raise InvalidInput("sample counts must be positive")
    # Polar angle acos(y0) plays the role of θ; keep s inside the working interval.
    th_lo, th_hi = theta_range(model)
    ys = sphere_sequence(y_samples)
    ys = ys[(ys[:, 0] <= math.cos(th_lo)) & (ys[:, 0] >= math.cos(th_hi))]
    if len(ys) == 0:
        raise InvalidInput("no sample direction lies inside the working interval")
    t = flag_tensors(model, ys)
    e1, e2 = _complement_basis(t)
    coeffs = _cubic_coeffs(t, e1, e2)
    psi = circle_sequence(u_samples)
    vals = _circle_values(coeffs, t.F, psi)
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
    raw = float(vals[i, j])
    best_y = ys[i]
    best_u = math.cos(psi[j]) * e1[i] + math.sin(psi[j]) * e2[i]
    if not refine or raw == 0.0:
        return NDEstimate(raw, raw, best_y, best_u)

    rng = np.random.default_rng(seed)
    best, u = _best_on_circle(model, best_y)
    if best < raw:
        best, u = raw, best_u
    params = list(_spherical(best_y))
    steps = list(2.0 / math.sqrt(y_samples) * (1.0 + 0.1 * rng.random(2)))
    while max(steps) > 1e-9:
        improved = False
        for axis in rng.permutation(2):
            for sign in (1.0, -1.0):
                trial = list(params)
                trial[axis] += sign * steps[axis]
                trial[0] = min(max(trial[0], th_lo), th_hi)
                y = _from_spherical(*trial)
                try:
                    v, u_trial = _best_on_circle(model, y)
                except CartanError:
                    continue
                if v > best:
                    best, params, u, best_y, improved = v, trial, u_trial, y, True
                    break
        if not improved:
            steps = [s * 0.5 for s in steps]
    return NDEstimate(best, raw, best_y, u)
