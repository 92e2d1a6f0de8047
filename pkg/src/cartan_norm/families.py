"""The φ-families F = α·φ(β/α) and their admissibility checks.

Each family provides two independent routes to φ and its derivatives:
hand-written analytic formulas (:meth:`derivatives`) and a composition of
jet primitives (:meth:`phi_jet`).  The tensor engine uses the jet route;
tests compare the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np

from . import jets
from .errors import DomainError, InvalidInput

#: Margin kept from the endpoint |s| = b for families singular there.
ENDPOINT_EPS = 1e-3
#: Largest admissible k for families singular at b = 1 (Randers-type).
K_MAX_SINGULAR = 1.0 - 1e-3


def _arr(s):
    return np.asarray(s, dtype=float)


@dataclass(frozen=True)
class MetricFamily:
    """Base class.  Subclasses are frozen dataclasses of their coefficients."""

    name: ClassVar[str] = ""
    #: Whether the family's φ contains b explicitly.
    uses_b: ClassVar[bool] = False
    #: Whether φ is singular (or undefined) at |s| = b.
    open_at_b: ClassVar[bool] = False
    needs_positive_k: ClassVar[bool] = False

    def derivatives(self, s, b):
        raise NotImplementedError

    def phi_jet(self, s: jets.TaylorJet3, b: float) -> jets.TaylorJet3:
        # Generic route: feed the analytic derivatives to the chain-rule kernel.
        return jets.jet_compose(s, *self.derivatives(s.value, b))

    def working_interval(self, b: float, eps: float = ENDPOINT_EPS) -> tuple[float, float]:
        """Closed s-interval on which grids and scans evaluate φ."""
        if self.open_at_b:
            return -b * (1.0 - eps), b * (1.0 - eps)
        return -b, b

    def csv_coeffs(self) -> tuple[float, float, float]:
        raise NotImplementedError

    def max_k(self) -> float:
        return K_MAX_SINGULAR

    def label(self) -> str:
        return f"{self.name}{self.csv_coeffs()}"


@dataclass(frozen=True)
class GeneralizedRanders(MetricFamily):
    """φ(s) = sqrt(c1 + 2 c2 s + c3 s²)."""

    c1: float
    c2: float
    c3: float
    name: ClassVar[str] = "gen-randers"

    def _radicand(self, s):
        q = self.c1 + 2.0 * self.c2 * s + self.c3 * s * s
        if np.any(~(q > 0.0)):
            raise DomainError("gen-randers radicand c1 + 2c2 s + c3 s^2 is not positive")
        return q

    def derivatives(self, s, b):
        s = _arr(s)
        q = self._radicand(s)
        phi = np.sqrt(q)
        w = self.c2 + self.c3 * s
        disc = self.c1 * self.c3 - self.c2**2
        return phi, w / phi, disc / phi**3, -3.0 * disc * w / phi**5

    def phi_jet(self, s, b):
        self._radicand(s.value)
        return jets.jet_sqrt(self.c1 + 2.0 * self.c2 * s + self.c3 * (s * s))

    def csv_coeffs(self):
        return (self.c1, self.c2, self.c3)

    def max_k(self):
        # The positivity argument behind Theorem 1 covers k in [0, 1] when its hypotheses hold.
        return 1.0 if theorem1_hypothesis(self.c1, self.c2, self.c3).holds else K_MAX_SINGULAR


@dataclass(frozen=True)
class QuadraticBeta(MetricFamily):
    """φ(s) = c1 + c2 s + c3 s²; Randers at c3 = 0, Berwald's metric at (1, 2, 1)."""

    c1: float
    c2: float
    c3: float
    name: ClassVar[str] = "quadratic-beta"

    def derivatives(self, s, b):
        s = _arr(s)
        phi = self.c1 + self.c2 * s + self.c3 * s * s
        d1 = self.c2 + 2.0 * self.c3 * s
        d2 = np.full_like(s, 2.0 * self.c3)
        return phi, d1, d2, np.zeros_like(s)

    def phi_jet(self, s, b):
        return self.c1 + self.c2 * s + self.c3 * (s * s)

    def csv_coeffs(self):
        return (self.c1, self.c2, self.c3)


def _check_open(s, b, name):
    if b <= 0.0:
        raise DomainError(f"{name} needs b > 0")
    if np.any(~(np.abs(s) < b)):
        raise DomainError(f"{name} is only defined for |s| < b = {b}")


@dataclass(frozen=True)
class SqrtBIndependent(MetricFamily):
    """φ(s) = d1 sqrt(b² - s²)/b² + d2 s + d3."""

    d1: float
    d2: float
    d3: float
    name: ClassVar[str] = "sqrt-b"
    uses_b: ClassVar[bool] = True
    open_at_b: ClassVar[bool] = True
    needs_positive_k: ClassVar[bool] = True

    def derivatives(self, s, b):
        s = _arr(s)
        _check_open(s, b, self.name)
        b2 = b * b
        w = np.sqrt(b2 - s * s)
        c = self.d1 / b2
        phi = c * w + self.d2 * s + self.d3
        return phi, -c * s / w + self.d2, -c * b2 / w**3, -3.0 * c * b2 * s / w**5

    def phi_jet(self, s, b):
        _check_open(s.value, b, self.name)
        return (self.d1 / (b * b)) * jets.jet_sqrt(b * b - s * s) + self.d2 * s + self.d3

    def csv_coeffs(self):
        return (self.d1, self.d2, self.d3)


@dataclass(frozen=True)
class IntegralBIndependent(MetricFamily):
    """φ(s) = c1 s + c2 w + c3 w ∫_0^s e^{λt} w(t)^{-3} dt with w = sqrt(b² - s²)."""

    c1: float
    c2: float
    c3: float
    lam: float = 0.0
    eps: float = ENDPOINT_EPS
    name: ClassVar[str] = "integral-b"
    uses_b: ClassVar[bool] = True
    open_at_b: ClassVar[bool] = True
    needs_positive_k: ClassVar[bool] = True

    def derivatives(self, s, b):
        from .independence import integral_phi_eval

        return integral_phi_eval((self.c1, self.c2, self.c3), self.lam, b, s, eps=self.eps)

    def working_interval(self, b, eps=None):
        e = self.eps if eps is None else max(eps, self.eps)
        return -b * (1.0 - e), b * (1.0 - e)

    def csv_coeffs(self):
        return (self.c1, self.c2, self.c3)


@dataclass(frozen=True)
class GeneralizedKropina(MetricFamily):
    """φ(s) = s^{-m}, i.e. F = α^{m+1}/β^m; defined on s > 0 only."""

    m: float
    name: ClassVar[str] = "kropina"
    needs_positive_k: ClassVar[bool] = True

    def __post_init__(self):
        if self.m == 0:
            raise InvalidInput("generalized Kropina needs m != 0")

    def derivatives(self, s, b):
        s = _arr(s)
        if np.any(~(s > 0.0)):
            raise DomainError("kropina is only defined for s > 0")
        m = self.m
        p = s ** (-m)
        return p, -m * p / s, m * (m + 1) * p / s**2, -m * (m + 1) * (m + 2) * p / s**3

    def phi_jet(self, s, b):
        if np.any(~(s.value > 0.0)):
            raise DomainError("kropina is only defined for s > 0")
        return jets.jet_pow(s, -self.m)

    def working_interval(self, b, eps=ENDPOINT_EPS):
        return b * eps, b

    def csv_coeffs(self):
        return (self.m, 0.0, 0.0)


@dataclass(frozen=True)
class PowerRanders(MetricFamily):
    """φ(s) = (1 + s)^m, i.e. F = (α + β)^m / α^{m-1}."""

    m: float
    name: ClassVar[str] = "power-randers"

    def derivatives(self, s, b):
        s = _arr(s)
        t = 1.0 + s
        if np.any(~(t > 0.0)):
            raise DomainError("power-randers needs 1 + s > 0")
        m = self.m
        p = t**m
        return p, m * p / t, m * (m - 1) * p / t**2, m * (m - 1) * (m - 2) * p / t**3

    def phi_jet(self, s, b):
        t = 1.0 + s
        if np.any(~(t.value > 0.0)):
            raise DomainError("power-randers needs 1 + s > 0")
        return jets.jet_pow(t, self.m)

    def csv_coeffs(self):
        return (self.m, 0.0, 0.0)


def phi_derivatives(family: MetricFamily, s, b: float):
    """(φ, φ', φ'', φ''') at s for the given b."""
    return family.derivatives(s, b)


@dataclass(frozen=True)
class MetricModel:
    """Canonical flat model: a_ij = δ_ij and b = (k, 0, ..., 0)."""

    family: MetricFamily
    k: float
    n: int = 2
    allow_unit_k: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.n not in (2, 3):
            raise InvalidInput(f"dimension must be 2 or 3, got {self.n}")
        if not 0.0 <= self.k <= 1.0:
            raise InvalidInput(f"k must lie in [0, 1], got {self.k}")
        kmax = 1.0 if self.allow_unit_k else self.family.max_k()
        if self.k > kmax:
            raise InvalidInput(f"k = {self.k} exceeds {kmax} for {self.family.name}")
        if self.family.needs_positive_k and self.k <= 0.0:
            raise InvalidInput(f"{self.family.name} needs k > 0")

    @property
    def b(self) -> float:
        return self.k

    def with_k(self, k: float) -> "MetricModel":
        return MetricModel(self.family, k, self.n, self.allow_unit_k)

    def with_n(self, n: int) -> "MetricModel":
        return MetricModel(self.family, self.k, n, self.allow_unit_k)


@dataclass(frozen=True)
class AdmissibilityReport:
    min_phi: float
    min_phi_minus_s_dphi: float
    min_regularity: float
    s_interval: tuple[float, float]

    @property
    def admissible(self) -> bool:
        return self.min_phi > 0 and self.min_phi_minus_s_dphi > 0 and self.min_regularity > 0


def admissibility_report(model: MetricModel, samples: int = 401) -> AdmissibilityReport:
    """Minima of φ, φ - sφ' and φ - sφ' + (b² - s²)φ'' over the working s-interval."""
    if samples < 2:
        raise InvalidInput("samples must be >= 2")
    b = model.b
    lo, hi = model.family.working_interval(b)
    s = np.linspace(lo, hi, samples)
    phi, d1, d2, _ = phi_derivatives(model.family, s, b)
    tangential = phi - s * d1
    return AdmissibilityReport(
        float(phi.min()),
        float(tangential.min()),
        float((tangential + (b * b - s * s) * d2).min()),
        (lo, hi),
    )


# -- theorem hypotheses ---------------------------------------------------


@dataclass(frozen=True)
class Inequality:
    label: str
    lhs: float
    rhs: float
    relation: str  # "<" or ">"

    @property
    def holds(self) -> bool:
        return self.lhs < self.rhs if self.relation == "<" else self.lhs > self.rhs

    @property
    def slack(self) -> float:
        """Positive when the strict inequality holds."""
        return self.rhs - self.lhs if self.relation == "<" else self.lhs - self.rhs

    def describe(self) -> str:
        rel = self.relation if self.holds else "!" + self.relation
        return f"{self.label}: {self.lhs:g} {rel} {self.rhs:g}"


@dataclass(frozen=True)
class HypothesisReport:
    theorem: str
    inequalities: tuple[Inequality, ...]

    @property
    def holds(self) -> bool:
        return all(q.holds for q in self.inequalities)

    def __bool__(self):
        return self.holds

    def describe(self) -> str:
        if self.holds:
            shown = self.inequalities
        else:
            # Strict violations first; a boundary equality is named only when it is the sole cause.
            shown = [q for q in self.inequalities if q.slack < 0] or [
                q for q in self.inequalities if not q.holds
            ]
        body = "; ".join(q.describe() for q in shown)
        return f"{self.theorem}: {'PASS' if self.holds else 'FAIL'} ({body})"


def theorem1_hypothesis(c1: float, c2: float, c3: float) -> HypothesisReport:
    """Sufficient condition for bounded torsion of sqrt(c1 α² + 2 c2 αβ + c3 β²)."""
    return HypothesisReport(
        "theorem1",
        (
            Inequality("c2^2 < c1c3", c2 * c2, c1 * c3, "<"),
            Inequality("c1^2 > |c2(3c1+c3)|", c1 * c1, abs(c2 * (3 * c1 + c3)), ">"),
        ),
    )


def theorem2_hypothesis(c1: float, c2: float, c3: float) -> HypothesisReport:
    """Sufficient condition for bounded torsion of c1 α + c2 β + c3 β²/α."""
    return HypothesisReport(
        "theorem2",
        (
            Inequality("c2^2 < 4c1c3", c2 * c2, 4 * c1 * c3, "<"),
            Inequality("|c1| > |c3|", abs(c1), abs(c3), ">"),
        ),
    )


# -- construction from key/value parameters --------------------------------

SPEC_KEYS = frozenset({"family", "c1", "c2", "c3", "d1", "d2", "d3", "lambda", "m", "k", "n"})

_P1_MESSAGE = (
    "family 'p1' (phi = -d1 sqrt(s^2 - b^2)/b^2 + d2 s + d3) is not instantiable: "
    "the radical is imaginary on |s| <= b unless d1 = 0; use 'sqrt-b' instead"
)


def _need(params, *keys):
    missing = [key for key in keys if params.get(key) is None]
    if missing:
        raise InvalidInput(f"family {params.get('family')!r} requires {', '.join(missing)}")
    return [float(params[key]) for key in keys]


def family_from_params(params: dict) -> MetricFamily:
    name = params.get("family")
    if name is None:
        raise InvalidInput("missing 'family'")
    if name in ("gen-randers", "generalized-randers"):
        return GeneralizedRanders(*_need(params, "c1", "c2", "c3"))
    if name in ("quadratic-beta", "berwald-type"):
        return QuadraticBeta(*_need(params, "c1", "c2", "c3"))
    if name == "randers":
        c1 = float(params.get("c1") or 1.0)
        c2 = float(params.get("c2") or 1.0)
        return QuadraticBeta(c1, c2, 0.0)
    if name == "sqrt-b":
        return SqrtBIndependent(*_need(params, "d1", "d2", "d3"))
    if name == "integral-b":
        c1, c2, c3 = _need(params, "c1", "c2", "c3")
        return IntegralBIndependent(c1, c2, c3, float(params.get("lambda") or 0.0))
    if name == "kropina":
        return GeneralizedKropina(*_need(params, "m"))
    if name == "power-randers":
        return PowerRanders(*_need(params, "m"))
    if name == "p1":
        raise InvalidInput(_P1_MESSAGE)
    raise InvalidInput(f"unknown family {name!r}")


def parse_metric_spec(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    params: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInput(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SPEC_KEYS:
            raise InvalidInput(f"line {lineno}: unknown key {key!r}")
        if key == "family":
            params[key] = value
            continue
        try:
            params[key] = int(value) if key == "n" else float(value)
        except ValueError:
            raise InvalidInput(f"line {lineno}: {key} needs a number, got {value!r}") from None
        if key != "n" and not math.isfinite(params[key]):
            raise InvalidInput(f"line {lineno}: {key} must be finite")
    return params


def model_from_params(params: dict, allow_unit_k: bool = False) -> MetricModel:
    family = family_from_params(params)
    k = params.get("k")
    if k is None:
        raise InvalidInput("missing 'k'")
    return MetricModel(family, float(k), int(params.get("n") or 2), allow_unit_k)
