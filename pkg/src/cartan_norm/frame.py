"""Two-dimensional Berwald frames and the Cartan norm as a maximum over θ.

In the canonical plane model y = (cos θ, sin θ) and β = k y¹.  The frame
vector y⊥ is g_y-orthogonal to y with g_y(y⊥, y⊥) = F(y)².  The torsion
functional ξ(θ) = F |C(y⊥, y⊥, y⊥)| / g(y⊥, y⊥)^{3/2} is computed either
through the jet engine or through closed forms available for the
generalized Randers and quadratic-β families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import CartanError, DegenerateFrame, InvalidInput, NonPositiveDefinite, UnsupportedFamily
from .families import GeneralizedRanders, MetricModel, QuadraticBeta
from .tensors import cubic_form, flag_tensors, quad_form

THETA_SAMPLES = 4096
THETA_TOL = 1e-10
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def closed_form_orientation(model: MetricModel) -> int:
    """Sign of det[y, y⊥] used by the closed-form frames (negative for quadratic-β)."""
    return -1 if isinstance(model.family, QuadraticBeta) else 1


@dataclass(frozen=True)
class Frame2D:
    theta: np.ndarray
    y: np.ndarray
    y_perp: np.ndarray


def _unit(theta):
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def _require_plane(model):
    if model.n != 2:
        raise InvalidInput("Berwald frames are built in the 2-dimensional model")


def _frame_from_tensors(t, theta, orientation):
    y = t.y
    w = np.einsum("...ij,...j->...i", t.g, y)
    d = orientation * np.stack([-w[..., 1], w[..., 0]], axis=-1)
    radicand = quad_form(t.g, d) / t.F**2
    if np.any(~(radicand > 0.0)):
        bad = np.atleast_1d(theta)[np.argmax(~(np.atleast_1d(radicand) > 0.0))]
        raise DegenerateFrame(f"frame normalization radicand <= 0 at theta={bad}", theta=float(bad))
    return d / np.sqrt(radicand)[..., None]


def berwald_perp(model: MetricModel, theta, orientation: int | None = None) -> Frame2D:
    _require_plane(model)
    if orientation is None:
        orientation = closed_form_orientation(model)
    try:
        t = flag_tensors(model, _unit(theta))
    except NonPositiveDefinite as exc:
        raise DegenerateFrame(str(exc)) from exc
    return Frame2D(np.asarray(theta, dtype=float), t.y, _frame_from_tensors(t, theta, orientation))


def closed_form_perp(model: MetricModel, theta) -> np.ndarray:
    """The symbolic y⊥ (r = 1) for the two closed-form families."""
    fam, k = model.family, model.k
    ct, st = np.cos(theta), np.sin(theta)
    if isinstance(fam, GeneralizedRanders):
        c1, c2, c3 = fam.c1, fam.c2, fam.c3
        f = _f_gr(c1, c2, c3, k, ct)
        num = (-st * (c2 * k * ct + c1), c3 * k**2 * ct + c2 * k + c1 * ct + c2 * k * ct**2)
        den = f
    elif isinstance(fam, QuadraticBeta):
        c1, c2, c3 = fam.c1, fam.c2, fam.c3
        f1 = 3 * c3 * k**2 * ct**2 - 2 * c3 * k**2 - c1
        f2 = c1 + c2 * k * ct + c3 * k**2 * ct**2
        num = (
            -(-c1 + c3 * k**2 * ct**2) * st,
            -c1 * ct - c2 * k - 2 * c3 * k**2 * ct + c3 * k**2 * ct**3,
        )
        den = -f1 * f2
    else:
        raise UnsupportedFamily(f"no closed-form frame for {fam.name}")
    if np.any(~(np.asarray(den) > 0.0)):
        raise DegenerateFrame("closed-form frame radicand <= 0")
    root = np.sqrt(den)
    return np.stack([num[0] / root, num[1] / root], axis=-1)


def xi_from_frame(t, y_perp) -> np.ndarray:
    return t.F * np.abs(cubic_form(t.C, y_perp)) / quad_form(t.g, y_perp) ** 1.5


def xi_numeric(model: MetricModel, theta):
    _require_plane(model)
    try:
        t = flag_tensors(model, _unit(theta))
    except NonPositiveDefinite as exc:
        raise DegenerateFrame(str(exc)) from exc
    xi = xi_from_frame(t, _frame_from_tensors(t, theta, 1))
    return float(xi) if np.ndim(xi) == 0 else xi


def _f_gr(c1, c2, c3, k, x):
    return (
        c1 * c3 * k**2 + c2 * c3 * k**3 * x**3 + 3 * c2**2 * k**2 * x**2
        + 3 * c1 * c2 * k * x - c2**2 * k**2 + c1**2
    )


def closed_form_xi(model: MetricModel, theta):
    fam, k = model.family, model.k
    theta = np.asarray(theta, dtype=float)
    ct, st = np.cos(theta), np.sin(theta)
    if isinstance(fam, GeneralizedRanders):
        c1, c2, c3 = fam.c1, fam.c2, fam.c3
        f = _f_gr(c1, c2, c3, k, ct)
        if np.any(~(f > 0.0)):
            raise DegenerateFrame("f(k, cos theta) <= 0")
        xi = 1.5 * np.abs(c2 * k * st * (c1 + 2 * c2 * k * ct + c3 * k**2 * ct**2) ** 2 / f**1.5)
    elif isinstance(fam, QuadraticBeta):
        c1, c2, c3 = fam.c1, fam.c2, fam.c3
        f1 = 3 * c3 * k**2 * ct**2 - 2 * c3 * k**2 - c1
        f2 = c1 + c2 * k * ct + c3 * k**2 * ct**2
        rad = -f1 * f2
        if np.any(~(rad > 0.0)):
            raise DegenerateFrame("-f1 f2 <= 0")
        num = k * st * (
            -c1 * c2 - 4 * k**3 * c3**2 * ct + 8 * c3**2 * k**3 * ct**3
            - 2 * k**2 * c2 * c3 + 5 * c2 * c3 * k**2 * ct**2
        )
        xi = 1.5 * np.abs(num / (f1 * np.sqrt(rad)))
    else:
        raise UnsupportedFamily(f"no closed-form xi for {fam.name}")
    return float(xi) if np.ndim(xi) == 0 else xi


# -- the auxiliary polynomials f, f1, f2 and the bound function g ----------------


@dataclass(frozen=True)
class FGValues:
    f: float | None = None
    f1: float | None = None
    f2: float | None = None
    g: float = float("nan")
    valid: bool = True


def _family_kind(kind) -> str:
    if isinstance(kind, str):
        name = kind
    elif isinstance(kind, type):
        name = kind.name
    else:
        name = kind.family.name if isinstance(kind, MetricModel) else kind.name
    if name not in (GeneralizedRanders.name, QuadraticBeta.name):
        raise UnsupportedFamily(f"no auxiliary polynomials for {name}")
    return name


def fg_polynomials(kind, c, k, x) -> FGValues:
    """f (generalized Randers) or f1, f2 (quadratic-β) and g at (k, x)."""
    c1, c2, c3 = c
    root = np.sqrt(np.clip(1.0 - np.asarray(x) ** 2, 0.0, None))
    if _family_kind(kind) == GeneralizedRanders.name:
        f = _f_gr(c1, c2, c3, k, x)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = 1.5 * c2 * k * root * (c1 + 2 * c2 * k * x + c3 * k**2 * x**2) ** 2 / f**1.5
        return FGValues(f=f, g=g, valid=bool(np.all(f > 0)))
    f1 = 3 * c3 * k**2 * x**2 - 2 * c3 * k**2 - c1
    f2 = c1 + c2 * k * x + c3 * k**2 * x**2
    num = -c1 * c2 - 4 * k**3 * c3**2 * x + 8 * c3**2 * k**3 * x**3 - 2 * k**2 * c2 * c3 + 5 * c2 * c3 * k**2 * x**2
    rad = -f1 * f2
    with np.errstate(invalid="ignore", divide="ignore"):
        g = 1.5 * k * root * num / (f1 * np.sqrt(rad))
    return FGValues(f1=f1, f2=f2, g=g, valid=bool(np.all(rad > 0)))


@dataclass(frozen=True)
class Extremum:
    value: float
    k: float
    x: float


@dataclass(frozen=True)
class PositivityCertificate:
    kind: str
    coeffs: tuple[float, float, float]
    grid: int
    f_min: Extremum | None = None
    f1_min: Extremum | None = None
    f1_max: Extremum | None = None
    f2_min: Extremum | None = None
    f2_max: Extremum | None = None

    @property
    def f_positive(self) -> bool:
        return self.f_min is not None and self.f_min.value > 0

    @property
    def f1_constant_sign(self) -> bool:
        return self.f1_min is not None and (self.f1_min.value > 0 or self.f1_max.value < 0)

    @property
    def f2_nonvanishing(self) -> bool:
        return self.f2_min is not None and (self.f2_min.value > 0 or self.f2_max.value < 0)

    @property
    def certified(self) -> bool:
        if self.kind == GeneralizedRanders.name:
            return self.f_positive
        return self.f1_constant_sign and self.f2_nonvanishing


def _refine(fun, kk, xx, values, sign):
    """Grid extremum of sign*values, polished by a bounded local minimizer."""
    j = np.unravel_index(np.argmin(sign * values), values.shape)
    k0, x0, v0 = float(kk[j]), float(xx[j]), float(values[j])
    res = minimize(
        lambda p: sign * fun(p[0], p[1]), x0=[k0, x0], method="L-BFGS-B",
        bounds=[(0.0, 1.0), (-1.0, 1.0)], options={"ftol": 1e-15, "gtol": 1e-12},
    )
    v1 = sign * float(res.fun)
    if sign * v1 < sign * v0:
        return Extremum(v1, float(res.x[0]), float(res.x[1]))
    return Extremum(v0, k0, x0)


def positivity_scan(kind, c, grid: int = 512) -> PositivityCertificate:
    """Extrema of the auxiliary polynomials over [0,1] x [-1,1] (grid plus local polish)."""
    name = _family_kind(kind)
    c = tuple(float(v) for v in c)
    k = np.linspace(0.0, 1.0, grid)
    x = np.linspace(-1.0, 1.0, grid)
    kk, xx = np.meshgrid(k, x, indexing="ij")
    vals = fg_polynomials(name, c, kk, xx)
    if name == GeneralizedRanders.name:
        f = lambda a, b: float(fg_polynomials(name, c, a, b).f)  # noqa: E731
        return PositivityCertificate(name, c, grid, f_min=_refine(f, kk, xx, vals.f, 1.0))
    f1 = lambda a, b: float(fg_polynomials(name, c, a, b).f1)  # noqa: E731
    f2 = lambda a, b: float(fg_polynomials(name, c, a, b).f2)  # noqa: E731
    return PositivityCertificate(
        name, c, grid,
        f1_min=_refine(f1, kk, xx, vals.f1, 1.0),
        f1_max=_refine(f1, kk, xx, vals.f1, -1.0),
        f2_min=_refine(f2, kk, xx, vals.f2, 1.0),
        f2_max=_refine(f2, kk, xx, vals.f2, -1.0),
    )


# -- maximization over θ --------------------------------------------------------------


def golden_section_max(f, a: float, b: float, tol: float = THETA_TOL) -> tuple[float, float]:
    """Maximizer and maximum of a unimodal f on [a, b]."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc > fd else (d, fd)


@dataclass(frozen=True)
class FrameScan:
    model: MetricModel
    theta_grid: np.ndarray
    xi_values: np.ndarray
    norm: float
    theta_argmax: float
    method: str

    @property
    def grid_max(self) -> float:
        return float(self.xi_values.max())


def theta_range(model: MetricModel) -> tuple[float, float]:
    """θ-interval in [0, π] whose s = k cos θ stays in the family's working interval."""
    k = model.k
    if k == 0.0:
        return 0.0, math.pi
    lo, hi = model.family.working_interval(model.b)
    return math.acos(min(hi / k, 1.0)), math.acos(max(lo / k, -1.0))


def _xi_function(model, method):
    if method == "jet":
        return lambda th: xi_numeric(model, th)
    if method == "closed_form":
        return lambda th: closed_form_xi(model, th)
    raise InvalidInput(f"unknown method {method!r}")


def _locate_failure(xi, theta, exc):
    for th in np.atleast_1d(theta):
        try:
            xi(float(th))
        except DegenerateFrame as inner:
            raise DegenerateFrame(str(inner), theta=float(th)) from exc
        except CartanError as inner:
            raise type(inner)(f"{inner} (theta={float(th)!r})") from exc
    raise exc


def cartan_norm_2d(model: MetricModel, theta_samples: int = THETA_SAMPLES, method: str = "jet") -> FrameScan:
    """Dense θ-grid of ξ over [0, π] followed by golden-section refinement.

    ξ(θ) = ξ(2π - θ) in the canonical model, so half the circle suffices.
    """
    if theta_samples < 64:
        raise InvalidInput("theta_samples must be >= 64")
    _require_plane(model)
    xi = _xi_function(model, method)
    lo, hi = theta_range(model)
    grid = np.linspace(lo, hi, theta_samples)
    try:
        values = np.asarray(xi(grid))
    except CartanError as exc:
        _locate_failure(xi, grid, exc)
    j = int(np.argmax(values))
    best_theta, best = float(grid[j]), float(values[j])
    a, b = grid[max(j - 1, 0)], grid[min(j + 1, theta_samples - 1)]
    if best > 0.0:
        t_ref, v_ref = golden_section_max(xi, float(a), float(b))
        if v_ref > best:
            best_theta, best = t_ref, v_ref
    return FrameScan(model, grid, values, best, best_theta, method)
