"""Named numerical checks run by ``cartan-norm verify``.

Every check returns a :class:`Check`; numerical errors inside a check are
turned into a failed check carrying the error text, never propagated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import CartanError, RiemannianFlag
from .families import (
    GeneralizedRanders, IntegralBIndependent, MetricFamily, MetricModel, PowerRanders,
    QuadraticBeta, SqrtBIndependent, admissibility_report, theorem1_hypothesis,
    theorem2_hypothesis,
)
from .frame import (
    berwald_perp, cartan_norm_2d, closed_form_perp, closed_form_xi, positivity_scan, xi_numeric,
)
from .independence import (
    B_TOLERANCE, b_independence_scan, ode1_residual, ode1_scale, ode2_residual, ode2_scale,
)
from .oracle3d import cartan_norm_nd
from .reducibility import (
    decomposition_residual, fit_p, p_generalized_randers, p_quadratic_beta, slope_s, compute_p,
)
from .tensors import flag_tensors, quad_form

XI_RTOL = 1e-8
XI_ATOL = 1e-12  # floor for exact zeros of ξ at θ = 0, π
FRAME_TOL = 1e-9
IDENTITY_TOL = 1e-10
MATSUMOTO_TOL = 1e-9
DECOMP_TOL = 1e-6
PLANE_TOL = 1e-3
ODE1_TOL = 1e-8
ODE2_TOL = 1e-7
FRAME_THETAS = 256
B_K_LIST = (0.2, 0.4, 0.6, 0.8)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str
    informational: bool = False

    def line(self) -> str:
        tag = "INFO" if self.informational else ("PASS" if self.passed else "FAIL")
        return f"{tag} {self.name}: {self.detail}"


def _guarded(name: str, fn: Callable[[], Check]) -> Check:
    try:
        return fn()
    except CartanError as exc:
        return Check(name, False, f"{type(exc).__name__}: {exc}")


def is_closed_form_family(family: MetricFamily) -> bool:
    return isinstance(family, (GeneralizedRanders, QuadraticBeta))


def is_randers(family: MetricFamily) -> bool:
    if isinstance(family, QuadraticBeta):
        return family.c3 == 0.0
    if isinstance(family, PowerRanders):
        return family.m == 1
    if isinstance(family, GeneralizedRanders):
        return family.c2**2 == family.c1 * family.c3 and family.c2 >= 0.0
    return False


def is_riemannian(family: MetricFamily) -> bool:
    if isinstance(family, GeneralizedRanders):
        return family.c2 == 0.0
    if isinstance(family, QuadraticBeta):
        return family.c2 == 0.0 and family.c3 == 0.0
    return False


def is_b_independent_class(family: MetricFamily) -> bool:
    if isinstance(family, (SqrtBIndependent, IntegralBIndependent)):
        return True
    return isinstance(family, GeneralizedRanders) and family.c2**2 == family.c1 * family.c3


def relative_gap(a, b, rtol=XI_RTOL, atol=XI_ATOL):
    """Largest |a - b| / (rtol max(|a|,|b|) + atol); <= 1 means agreement."""
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / (rtol * np.maximum(np.abs(a), np.abs(b)) + atol)))


def random_flags(count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    y = rng.normal(size=(count, 3))
    return y / np.linalg.norm(y, axis=-1, keepdims=True)


# -- individual checks --------------------------------------------------------------


def check_admissible(family, ks) -> Check:
    def run():
        worst = None
        for k in ks:
            rep = admissibility_report(MetricModel(family, k, allow_unit_k=True))
            if not rep.admissible:
                return Check("admissibility", False, f"k={k!r}: {rep}")
            m = min(rep.min_phi, rep.min_phi_minus_s_dphi, rep.min_regularity)
            worst = m if worst is None else min(worst, m)
        return Check("admissibility", True, f"smallest regularity minimum {worst!r} over {len(ks)} k values")

    return _guarded("admissibility", run)


def check_hypothesis(family) -> Check | None:
    if isinstance(family, GeneralizedRanders):
        rep = theorem1_hypothesis(family.c1, family.c2, family.c3)
    elif isinstance(family, QuadraticBeta):
        rep = theorem2_hypothesis(family.c1, family.c2, family.c3)
    else:
        return None
    return Check("hypothesis", rep.holds, rep.describe(), informational=True)


def check_frame(family, ks, thetas=FRAME_THETAS) -> list[Check]:
    theta = np.linspace(0.0, 2.0 * math.pi, thetas, endpoint=False)
    out = []

    def c0():
        worst = 0.0
        for k in ks:
            model = MetricModel(family, k, allow_unit_k=True)
            fr = berwald_perp(model, theta)
            t = flag_tensors(model, fr.y)
            F2 = t.F**2
            worst = max(
                worst,
                float(np.max(np.abs(quad_form(t.g, fr.y, fr.y_perp)) / F2)),
                float(np.max(np.abs(quad_form(t.g, fr.y_perp) - F2) / F2)),
            )
        return Check("frame-c0", worst <= FRAME_TOL, f"max relative violation {worst:.3e} (tol {FRAME_TOL:g})")

    out.append(_guarded("frame-c0", c0))
    if not is_closed_form_family(family):
        return out

    def perp():
        worst = 0.0
        for k in ks:
            model = MetricModel(family, k, allow_unit_k=True)
            diff = berwald_perp(model, theta).y_perp - closed_form_perp(model, theta)
            worst = max(worst, float(np.max(np.abs(diff))))
        return Check("closed-form-frame", worst <= FRAME_TOL, f"max component gap {worst:.3e} (tol {FRAME_TOL:g})")

    def xi():
        worst = 0.0
        for k in ks:
            model = MetricModel(family, k, allow_unit_k=True)
            worst = max(worst, relative_gap(xi_numeric(model, theta), closed_form_xi(model, theta)))
        return Check(
            "closed-form-xi", worst <= 1.0,
            f"max gap {worst:.3e} in units of (rtol {XI_RTOL:g}, atol {XI_ATOL:g})",
        )

    out.append(_guarded("closed-form-frame", perp))
    out.append(_guarded("closed-form-xi", xi))
    return out


def check_positivity(family) -> Check | None:
    if not is_closed_form_family(family):
        return None
    hyp = check_hypothesis(family)
    c = (family.c1, family.c2, family.c3)
    cert = positivity_scan(family.name, c)
    if isinstance(family, GeneralizedRanders):
        detail = f"min f = {cert.f_min.value!r} at (k, x) = ({cert.f_min.k:.6f}, {cert.f_min.x:.6f})"
    else:
        detail = (
            f"f1 in [{cert.f1_min.value!r}, {cert.f1_max.value!r}], "
            f"f2 in [{cert.f2_min.value!r}, {cert.f2_max.value!r}]"
        )
    # Without the theorem's hypotheses no sign is claimed; the scan is reported only.
    return Check("positivity", cert.certified, detail, informational=not hyp.passed)


def check_norm_scan(family, ks, theta_samples) -> tuple[Check, list]:
    scans = []

    def run():
        for k in ks:
            scans.append(cartan_norm_2d(MetricModel(family, k, allow_unit_k=True), theta_samples))
        norms = [s.norm for s in scans]
        finite = all(math.isfinite(v) for v in norms)
        return Check("norm-scan", finite, f"max norm {max(norms)!r} over {len(ks)} k values")

    return _guarded("norm-scan", run), scans


def check_norm_methods(family, scans, theta_samples) -> Check | None:
    if not is_closed_form_family(family) or not scans:
        return None

    def run():
        worst = 0.0
        for scan in scans:
            other = cartan_norm_2d(scan.model, theta_samples, method="closed_form")
            worst = max(worst, abs(other.norm - scan.norm))
        return Check("norm-jet-vs-closed", worst <= 1e-8, f"max |difference| {worst:.3e} (tol 1e-08)")

    return _guarded("norm-jet-vs-closed", run)


def check_identities(family, k, seed, count=20) -> Check:
    def run():
        model = MetricModel(family, k, 3, allow_unit_k=True)
        t = flag_tensors(model, random_flags(count, seed))
        F2 = t.F**2
        scale = np.max(np.abs(t.C), axis=(-1, -2, -3)) + 1.0
        worst = max(
            float(np.max(np.abs(np.einsum("...ij,...jk->...ik", t.g, t.g_inv) - np.eye(3)))),
            float(np.max(np.abs(quad_form(t.g, t.y) - F2) / F2)),
            float(np.max(np.abs(np.einsum("...ijk,...k->...ij", t.C, t.y)) / scale[:, None, None])),
            float(np.max(np.abs(np.einsum("...ij,...j->...i", t.h, t.y)) / F2[:, None])),
            float(np.max(np.abs(np.einsum("...ijk,...k->...ij", t.M, t.y)) / scale[:, None, None])),
        )
        return Check("tensor-identities", worst <= IDENTITY_TOL, f"max violation {worst:.3e} (tol {IDENTITY_TOL:g})")

    return _guarded("tensor-identities", run)


def check_matsumoto(family, k, seed, count=100) -> Check:
    def run():
        model = MetricModel(family, k, 3, allow_unit_k=True)
        worst = float(np.max(np.abs(flag_tensors(model, random_flags(count, seed)).M)))
        if is_randers(family):
            return Check("matsumoto", worst < MATSUMOTO_TOL, f"max |M| {worst:.3e} (tol {MATSUMOTO_TOL:g})")
        return Check("matsumoto", True, f"max |M| {worst:.3e} (non-Randers, reported only)", informational=True)

    return _guarded("matsumoto", run)


def check_riemannian(family, k, seed) -> Check | None:
    if not is_riemannian(family):
        return None

    def run():
        t = flag_tensors(MetricModel(family, k, 3, allow_unit_k=True), random_flags(20, seed))
        worst = float(max(np.max(np.abs(t.C)), np.max(np.abs(t.I)), np.max(np.abs(t.M))))
        return Check("riemannian-torsion", worst <= 1e-10, f"max |C|, |I|, |M| {worst:.3e}")

    return _guarded("riemannian-torsion", run)


def specialized_p(family, s, b, n):
    if isinstance(family, GeneralizedRanders):
        return p_generalized_randers((family.c1, family.c2, family.c3), s, b, n)
    if isinstance(family, QuadraticBeta):
        return p_quadratic_beta((family.c1, family.c2, family.c3), s, b, n)
    return None


def check_decomposition(family, k, seed, count=20) -> Check | None:
    if is_riemannian(family) or k == 0.0:
        return None

    def run():
        model = MetricModel(family, k, 3, allow_unit_k=True)
        res = fit_gap = formula_gap = 0.0
        for y in random_flags(count, seed):
            try:
                s = slope_s(model, y)
                p = compute_p(model, s).p
                res = max(res, decomposition_residual(model, y, p))
                fit_gap = max(fit_gap, abs(fit_p(model, y) - p))
                ps = specialized_p(family, s, model.b, 3)
                if ps is not None:
                    formula_gap = max(formula_gap, abs(ps - p))
            except RiemannianFlag:
                continue
        ok = res < DECOMP_TOL and fit_gap < DECOMP_TOL and formula_gap < DECOMP_TOL
        return Check(
            "semi-c-decomposition", ok,
            f"residual {res:.3e}, |p_fit - p| {fit_gap:.3e}, |p_formula - p| {formula_gap:.3e} (tol {DECOMP_TOL:g})",
        )

    return _guarded("semi-c-decomposition", run)


def check_plane_reduction(family, k, seed, theta_samples) -> Check:
    def run():
        n2 = cartan_norm_2d(MetricModel(family, k, allow_unit_k=True), theta_samples).norm
        n3 = cartan_norm_nd(MetricModel(family, k, 3, allow_unit_k=True), 512, 64, seed).norm
        gap = abs(n3 - n2)
        return Check("plane-reduction", gap <= PLANE_TOL, f"3-D {n3!r} vs 2-D {n2!r} at k={k!r} (gap {gap:.3e})")

    return _guarded("plane-reduction", run)


def check_odes(family, k) -> Check | None:
    if not isinstance(family, (SqrtBIndependent, IntegralBIndependent)):
        return None
    lo, hi = family.working_interval(k)
    grid = np.linspace(lo, hi, 64)

    def run():
        if isinstance(family, SqrtBIndependent):
            worst = max(abs(ode1_residual(family, s, k)) / ode1_scale(family, s, k) for s in grid)
            return Check("ode1", worst < ODE1_TOL, f"max scaled residual {worst:.3e} (tol {ODE1_TOL:g})")
        lam = family.lam
        worst = max(abs(ode2_residual(family, s, k, lam)) / ode2_scale(family, s, k, lam) for s in grid)
        return Check("ode2", worst < ODE2_TOL, f"max scaled residual {worst:.3e} (tol {ODE2_TOL:g})")

    return _guarded("ode", run)


def check_b_independence(family, k_list=B_K_LIST, theta_samples=4096, tolerance=B_TOLERANCE) -> Check:
    def run():
        scan = b_independence_scan(family, k_list, theta_samples, tolerance)
        norms = ", ".join(f"{k:g}:{v!r}" for k, v in zip(scan.k_list, scan.norms))
        return Check(
            f"b-independence[{family.label()}]", scan.passed,
            f"deviation {scan.deviation!r} (tol {tolerance:g}); norms {norms}",
        )

    return _guarded(f"b-independence[{family.label()}]", run)


# -- suites ---------------------------------------------------------------------------


def model_checks(family: MetricFamily, ks: Iterable[float], theta_samples: int = 4096, seed: int = 0) -> list[Check]:
    ks = [float(k) for k in ks]
    checks: list[Check | None] = [check_admissible(family, ks), check_hypothesis(family)]
    checks += check_frame(family, ks)
    checks.append(_guarded("positivity", lambda: check_positivity(family)) if is_closed_form_family(family) else None)
    scan_check, scans = check_norm_scan(family, ks, theta_samples)
    checks += [scan_check, check_norm_methods(family, scans, theta_samples)]
    k_mid = ks[len(ks) // 2]
    if k_mid == 0.0 and len(ks) > 1:
        k_mid = ks[-1]
    checks += [
        check_identities(family, k_mid, seed),
        check_riemannian(family, k_mid, seed),
        check_matsumoto(family, k_mid, seed),
        check_decomposition(family, k_mid, seed),
        check_plane_reduction(family, k_mid, seed, theta_samples),
        check_odes(family, k_mid),
    ]
    if is_b_independent_class(family):
        checks.append(check_b_independence(family, theta_samples=theta_samples))
    return [c for c in checks if c is not None]


def randers_bound_check(theta_samples: int = 4096) -> Check:
    def run():
        ks = np.round(np.linspace(0.0, 0.999, 112), 12)
        fam = QuadraticBeta(1.0, 1.0, 0.0)
        norms = [cartan_norm_2d(MetricModel(fam, float(k)), theta_samples).norm for k in ks]
        bound = 3.0 / math.sqrt(2.0)
        top = max(norms)
        at995 = cartan_norm_2d(MetricModel(fam, 0.995), theta_samples).norm
        ok = top < bound - 1e-6 and at995 > 2.0 + 1e-6
        return Check("randers-bound", ok, f"max norm {top!r} < {bound!r}; norm(k=0.995) = {at995!r} > 2")

    return _guarded("randers-bound", run)


def reference_checks(theta_samples: int = 4096, seed: int = 0) -> list[Check]:
    ks = [round(0.05 + 0.1 * i, 12) for i in range(10)]
    checks = []
    for fam in (GeneralizedRanders(1.0, 0.2, 1.0), QuadraticBeta(1.0, 1.0, 0.5)):
        checks += [Check(c.name + f"[{fam.label()}]", c.passed, c.detail, c.informational)
                   for c in model_checks(fam, ks, theta_samples, seed)]
    checks.append(randers_bound_check(theta_samples))
    checks.append(check_matsumoto(QuadraticBeta(1.0, 1.0, 0.0), 0.5, seed))
    berwald = QuadraticBeta(1.0, 2.0, 1.0)

    def berwald_m():
        model = MetricModel(berwald, 0.5, 3)
        worst = float(np.max(np.abs(flag_tensors(model, random_flags(100, seed)).M)))
        return Check("matsumoto-berwald", worst > 1e-3, f"max |M| {worst:.3e} (must exceed 1e-3)")

    checks.append(_guarded("matsumoto-berwald", berwald_m))
    checks.append(check_b_independence(GeneralizedRanders(1.0, 1.0, 1.0), theta_samples=theta_samples))
    checks.append(check_b_independence(SqrtBIndependent(0.3, 1.0, 1.2), theta_samples=theta_samples))
    return checks


def summarize(checks: list[Check]) -> tuple[list[str], Check | None]:
    lines = [c.line() for c in checks]
    failures = [c for c in checks if not c.passed and not c.informational]
    lines.append(f"verify: {len(checks)} checks, {len(failures)} failed")
    if failures:
        lines.append(f"first failure: {failures[0].name}")
    return lines, (failures[0] if failures else None)
