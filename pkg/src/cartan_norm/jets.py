"""Truncated third-order Taylor arithmetic in a few variables.

A :class:`TaylorJet3` carries the value of a scalar function together with
its gradient, Hessian and third-derivative cube.  Every field may carry
leading batch dimensions, so a whole grid of points is differentiated in a
single pass: ``value`` has shape ``B``, ``grad`` has ``B + (n,)``, ``hess``
``B + (n, n)`` and ``third`` ``B + (n, n, n)``.

Univariate functions (reciprocal, sqrt, exp, powers) all go through
:func:`jet_compose`, the order-3 chain rule fed with the first three
derivatives of the outer function at the point.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .errors import DomainError, InvalidInput, NumericOverflow, SingularJet

MAX_VARS = 3
_EXP_LIMIT = 709.0


@lru_cache(maxsize=None)
def _canonical_index(n: int, rank: int):
    """Index arrays sending every multi-index to its sorted representative."""
    grids = np.indices((n,) * rank)
    return tuple(np.sort(grids, axis=0))


def _symmetrize(arr, rank: int):
    """Average over index permutations, then copy canonical entries so symmetry is bit-exact."""
    axes = tuple(range(arr.ndim - rank, arr.ndim))
    lead = tuple(range(arr.ndim - rank))
    perms = list(itertools.permutations(axes))
    mean = sum(np.transpose(arr, lead + p) for p in perms) / len(perms)
    return mean[(Ellipsis,) + _canonical_index(arr.shape[-1], rank)]


def _sym3(mat, vec):
    """X_ij v_k + X_ik v_j + X_jk v_i for batched X, v."""
    return (
        mat[..., :, :, None] * vec[..., None, None, :]
        + mat[..., :, None, :] * vec[..., None, :, None]
        + mat[..., None, :, :] * vec[..., :, None, None]
    )


class TaylorJet3:
    __slots__ = ("value", "grad", "hess", "third")

    def __init__(self, value, grad, hess, third):
        self.value = np.asarray(value, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = np.asarray(hess, dtype=float)
        self.third = np.asarray(third, dtype=float)

    @property
    def nvars(self) -> int:
        return self.grad.shape[-1]

    @property
    def shape(self) -> tuple:
        return self.value.shape

    def __repr__(self):
        return f"TaylorJet3(value={self.value!r}, grad={self.grad!r})"

    # -- helpers ---------------------------------------------------------
    def _lift(self, other) -> "TaylorJet3":
        if isinstance(other, TaylorJet3):
            if other.nvars != self.nvars:
                raise InvalidInput(f"nvars mismatch: {self.nvars} vs {other.nvars}")
            return other
        return constant(other, self.nvars)

    def __add__(self, other):
        return jet_arith("add", self, self._lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return jet_arith("sub", self, self._lift(other))

    def __rsub__(self, other):
        return jet_arith("sub", self._lift(other), self)

    def __mul__(self, other):
        if not isinstance(other, TaylorJet3):
            c = np.asarray(other, dtype=float)
            return TaylorJet3(
                self.value * c,
                self.grad * c[..., None],
                self.hess * c[..., None, None],
                self.third * c[..., None, None, None],
            )
        return jet_arith("mul", self, self._lift(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return jet_arith("div", self, self._lift(other))

    def __rtruediv__(self, other):
        return jet_arith("div", self._lift(other), self)

    def __neg__(self):
        return TaylorJet3(-self.value, -self.grad, -self.hess, -self.third)

    def __pow__(self, m):
        if isinstance(m, (int, np.integer)):
            return jet_pow_int(self, int(m))
        return jet_pow(self, float(m))


def constant(value, nvars: int) -> TaylorJet3:
    v = np.asarray(value, dtype=float)
    n = nvars
    return TaylorJet3(
        v,
        np.zeros(v.shape + (n,)),
        np.zeros(v.shape + (n, n)),
        np.zeros(v.shape + (n, n, n)),
    )


def jet_seed(index, value, nvars: int) -> TaylorJet3:
    """Seed variable ``index`` (or a constant when ``index`` is None) at ``value``."""
    if not 1 <= nvars <= MAX_VARS:
        raise InvalidInput(f"nvars must be in 1..{MAX_VARS}, got {nvars}")
    jet = constant(value, nvars)
    if index is None:
        return jet
    if not 0 <= index < nvars:
        raise InvalidInput(f"seed index {index} out of range for nvars={nvars}")
    jet.grad[..., index] = 1.0
    return jet


def seed_vector(y) -> list[TaylorJet3]:
    """Seed every component of ``y`` (shape ``B + (n,)``) as an independent variable."""
    y = np.asarray(y, dtype=float)
    n = y.shape[-1]
    return [jet_seed(i, y[..., i], n) for i in range(n)]


def jet_arith(op: str, a: TaylorJet3, b: TaylorJet3) -> TaylorJet3:
    if a.nvars != b.nvars:
        raise InvalidInput(f"nvars mismatch: {a.nvars} vs {b.nvars}")
    if op == "add":
        return TaylorJet3(a.value + b.value, a.grad + b.grad, a.hess + b.hess, a.third + b.third)
    if op == "sub":
        return TaylorJet3(a.value - b.value, a.grad - b.grad, a.hess - b.hess, a.third - b.third)
    if op == "mul":
        return _mul(a, b)
    if op == "div":
        return _mul(a, jet_reciprocal(b))
    raise InvalidInput(f"unknown jet operation {op!r}")


def _mul(f: TaylorJet3, g: TaylorJet3) -> TaylorJet3:
    fv, gv = f.value, g.value
    value = fv * gv
    grad = f.grad * gv[..., None] + fv[..., None] * g.grad
    fg = f.grad[..., :, None] * g.grad[..., None, :]
    hess = f.hess * gv[..., None, None] + fg + np.swapaxes(fg, -1, -2) + fv[..., None, None] * g.hess
    third = (
        f.third * gv[..., None, None, None]
        + _sym3(f.hess, g.grad)
        + _sym3(g.hess, f.grad)
        + fv[..., None, None, None] * g.third
    )
    return TaylorJet3(value, grad, _symmetrize(hess, 2), _symmetrize(third, 3))


def jet_compose(a: TaylorJet3, d0, d1, d2, d3) -> TaylorJet3:
    """Chain rule for h = f(a) given f and its first three derivatives at a.value."""
    d0, d1, d2, d3 = (np.asarray(d, dtype=float) for d in (d0, d1, d2, d3))
    g = a.grad
    gg = g[..., :, None] * g[..., None, :]
    hess = d2[..., None, None] * gg + d1[..., None, None] * a.hess
    third = (
        d3[..., None, None, None] * gg[..., :, :, None] * g[..., None, None, :]
        + d2[..., None, None, None] * _sym3(a.hess, g)
        + d1[..., None, None, None] * a.third
    )
    return TaylorJet3(
        np.broadcast_to(d0, a.value.shape).copy(), d1[..., None] * g,
        _symmetrize(hess, 2), _symmetrize(third, 3),
    )


def jet_reciprocal(a: TaylorJet3) -> TaylorJet3:
    v = a.value
    if np.any(v == 0.0):
        raise SingularJet("reciprocal of a jet with zero value")
    r = 1.0 / v
    return jet_compose(a, r, -r**2, 2.0 * r**3, -6.0 * r**4)


def jet_sqrt(a: TaylorJet3) -> TaylorJet3:
    v = a.value
    if np.any(~(v > 0.0)):
        raise DomainError(f"sqrt of non-positive value (min {np.min(v):.3e})")
    r = np.sqrt(v)
    return jet_compose(a, r, 0.5 / r, -0.25 / (r * v), 0.375 / (r * v * v))


def jet_exp(a: TaylorJet3) -> TaylorJet3:
    v = a.value
    if np.any(v > _EXP_LIMIT):
        raise NumericOverflow(f"exp overflow at {np.max(v):.6g}")
    e = np.exp(v)
    return jet_compose(a, e, e, e, e)


def jet_pow_int(a: TaylorJet3, m: int) -> TaylorJet3:
    if m < 0:
        if np.any(a.value == 0.0):
            raise SingularJet("negative power of a zero-valued jet")
        return jet_reciprocal(jet_pow_int(a, -m))
    result = constant(np.ones_like(a.value), a.nvars)
    base = a
    while m:
        if m & 1:
            result = _mul(result, base)
        m >>= 1
        if m:
            base = _mul(base, base)
    return result


def jet_pow(a: TaylorJet3, r: float) -> TaylorJet3:
    """Real power a**r for a.value > 0."""
    if float(r).is_integer():
        return jet_pow_int(a, int(r))
    v = a.value
    if np.any(~(v > 0.0)):
        raise DomainError("real power of a non-positive value")
    p = v**r
    return jet_compose(
        a,
        p,
        r * p / v,
        r * (r - 1.0) * p / v**2,
        r * (r - 1.0) * (r - 2.0) * p / v**3,
    )
