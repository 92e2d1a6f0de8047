"""Acceptance criteria 1-10; each prints one ``criterion N: PASS|FAIL ...`` line.

Run with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import contextlib
import io
import math
import time

import numpy as np
import pytest

from cartan_norm.cli import main as cli_main
from cartan_norm.errors import CartanError
from cartan_norm.families import (
    GeneralizedRanders, IntegralBIndependent, MetricModel, QuadraticBeta, SqrtBIndependent,
    theorem1_hypothesis, theorem2_hypothesis,
)
from cartan_norm.frame import (
    berwald_perp, cartan_norm_2d, closed_form_perp, closed_form_xi, positivity_scan, xi_numeric,
)
from cartan_norm.independence import (
    antiderivative, b_independence_scan, ode1_residual, ode1_scale, ode2_residual, ode2_scale,
)
from cartan_norm.oracle3d import cartan_norm_nd
from cartan_norm.reducibility import (
    compute_p, decomposition_residual, fit_p, p_generalized_randers, p_quadratic_beta, slope_s,
)
from cartan_norm.tensors import flag_tensors, quad_form

GR = GeneralizedRanders(1.0, 0.2, 1.0)
QB = QuadraticBeta(1.0, 1.0, 0.5)
RANDERS = QuadraticBeta(1.0, 1.0, 0.0)
BERWALD = QuadraticBeta(1.0, 2.0, 1.0)
THETAS = np.linspace(0.0, 2.0 * math.pi, 256)
KS = np.linspace(0.05, 0.95, 10)


class Outcome:
    def __init__(self, number: int):
        self.number = number
        self.failures: list[str] = []
        self.notes: list[str] = []
        self.start = time.perf_counter()

    def require(self, ok, message: str) -> None:
        if not ok:
            self.failures.append(message)

    def note(self, message: str) -> None:
        self.notes.append(message)

    def within(self, seconds: float) -> None:
        elapsed = time.perf_counter() - self.start
        self.note(f"{elapsed:.1f}s")
        self.require(elapsed < seconds, f"runtime {elapsed:.1f}s >= {seconds}s")

    @property
    def passed(self) -> bool:
        return not self.failures

    def line(self) -> str:
        detail = "; ".join(self.failures if self.failures else self.notes)
        return f"criterion {self.number}: {'PASS' if self.passed else 'FAIL'} ({detail})"


def unit_directions(count: int, seed: int) -> np.ndarray:
    y = np.random.default_rng(seed).normal(size=(count, 3))
    return y / np.linalg.norm(y, axis=-1, keepdims=True)


def random_triples(hypothesis, sampler, count: int, seed: int) -> list[tuple[float, float, float]]:
    rng = np.random.default_rng(seed)
    found = []
    while len(found) < count:
        c = sampler(rng)
        if hypothesis(*c).holds:
            found.append(c)
    return found


# -- criteria ---------------------------------------------------------------------


def criterion_1() -> Outcome:
    out = Outcome(1)
    worst = 0.0
    for fam in (GR, QB):
        for k in KS:
            model = MetricModel(fam, float(k))
            num, exact = xi_numeric(model, THETAS), closed_form_xi(model, THETAS)
            gap = np.abs(num - exact) / (1e-8 * np.abs(exact) + 1e-12)
            worst = max(worst, float(gap.max()))
    out.require(worst <= 1.0, f"xi mismatch at {worst:.2f} x tolerance")
    out.note(f"worst gap {worst:.3g} x (1e-8 rel + 1e-12 abs)")
    out.within(5.0)
    return out


def criterion_2() -> Outcome:
    out = Outcome(2)
    orth = unit = perp = 0.0
    for fam in (GR, QB):
        for k in KS:
            model = MetricModel(fam, float(k))
            fr = berwald_perp(model, THETAS)
            t = flag_tensors(model, fr.y)
            F2 = t.F**2
            orth = max(orth, float(np.abs(quad_form(t.g, fr.y, fr.y_perp) / F2).max()))
            unit = max(unit, float(np.abs(quad_form(t.g, fr.y_perp) / F2 - 1.0).max()))
            perp = max(perp, float(np.abs(fr.y_perp - closed_form_perp(model, THETAS)).max()))
    out.require(orth <= 1e-9, f"g(y, y_perp)/F^2 = {orth:.3g}")
    out.require(unit <= 1e-9, f"g(y_perp, y_perp)/F^2 - 1 = {unit:.3g}")
    out.require(perp <= 1e-9, f"y_perp vs closed form {perp:.3g}")
    out.note(f"orth {orth:.2g}, unit {unit:.2g}, closed form {perp:.2g}")
    return out


def criterion_3() -> Outcome:
    out = Outcome(3)

    def sample(rng):
        c1 = rng.uniform(0.5, 2.0)
        return (c1, rng.uniform(-0.5, 0.5) * c1, rng.uniform(0.05, 3.0) * c1)

    triples = random_triples(theorem1_hypothesis, sample, 20, 11)
    f_min = math.inf
    for c in triples:
        cert = positivity_scan("gen-randers", c)
        f_min = min(f_min, cert.f_min.value)
        out.require(cert.f_positive, f"f not positive for {c}")
        for k in np.linspace(0.0, 1.0, 6):
            try:
                norm = cartan_norm_2d(MetricModel(GeneralizedRanders(*c), float(k))).norm
            except CartanError as exc:
                out.require(False, f"{c} k={k}: {type(exc).__name__}")
                continue
            out.require(math.isfinite(norm), f"non-finite norm for {c} k={k}")
    out.note(f"20 triples, min f {f_min:.3g}")
    out.within(30.0)
    return out


def criterion_4() -> Outcome:
    out = Outcome(4)

    def sample(rng):
        c1 = rng.uniform(0.5, 2.0)
        c3 = rng.uniform(-1.0, 1.0) * c1
        bound = 2.0 * math.sqrt(max(c1 * c3, 0.0))
        return (c1, rng.uniform(-1.0, 1.0) * bound, c3)

    triples = random_triples(theorem2_hypothesis, sample, 20, 12)
    for c in triples:
        cert = positivity_scan("quadratic-beta", c)
        out.require(cert.f1_constant_sign, f"f1 changes sign for {c}")
        out.require(cert.f2_nonvanishing, f"f2 vanishes for {c}")
        endpoint = [c[2] * k0**2 - c[0] for k0 in (0.0, 0.5, 1.0)]
        expected_negative = all(v < 0 for v in endpoint)
        out.require((cert.f1_max.value < 0) == expected_negative, f"f1 sign disagrees with c3 k0^2 - c1 for {c}")
        for k in (0.0, 0.25, 0.5, 0.75, 0.999):
            try:
                norm = cartan_norm_2d(MetricModel(QuadraticBeta(*c), k)).norm
            except CartanError as exc:
                out.require(False, f"{c} k={k}: {type(exc).__name__}")
                continue
            out.require(math.isfinite(norm), f"non-finite norm for {c} k={k}")
    out.note("20 triples, f1 < 0 and f2 > 0 throughout")
    return out


def criterion_5() -> Outcome:
    out = Outcome(5)
    bound = 3.0 / math.sqrt(2.0)
    ks = sorted(set(np.round(np.arange(0.0, 0.999, 0.03), 12)) | {0.99, 0.995, 0.999})
    norms = {k: cartan_norm_2d(MetricModel(RANDERS, float(k))).norm for k in ks}
    fine = max(cartan_norm_2d(MetricModel(RANDERS, float(k)), method="closed_form").norm for k in np.linspace(0.0, 0.999, 1000))
    top = max(max(norms.values()), fine)
    out.require(top < bound - 1e-6, f"max norm {top!r} not below 3/sqrt2")
    out.require(norms[0.995] > 2.0 + 1e-6, f"norm at k=0.995 is {norms[0.995]!r}")
    out.note(f"max {top:.10f} < {bound:.10f}, k=0.995 gives {norms[0.995]:.10f}")
    out.within(10.0)
    return out


def criterion_6() -> Outcome:
    out = Outcome(6)
    randers = flag_tensors(MetricModel(RANDERS, 0.8, 3), unit_directions(100, 6))
    berwald = flag_tensors(MetricModel(BERWALD, 0.5, 3), unit_directions(100, 7))
    r_max, b_max = float(np.abs(randers.M).max()), float(np.abs(berwald.M).max())
    out.require(r_max < 1e-9, f"Randers |M| = {r_max:.3g}")
    out.require(b_max > 1e-3, f"Berwald |M| = {b_max:.3g}")
    out.note(f"Randers max|M| {r_max:.2g}, Berwald max|M| {b_max:.3g}")
    return out


def criterion_7() -> Outcome:
    out = Outcome(7)
    worst_res = worst_fit = 0.0
    for fam, k, formula in ((GR, 0.5, p_generalized_randers), (QB, 0.7, p_quadratic_beta)):
        model = MetricModel(fam, k, 3)
        c = fam.csv_coeffs()
        for y in unit_directions(100, 70):
            p = formula(c, slope_s(model, y), k, 3)
            worst_res = max(worst_res, decomposition_residual(model, y, p))
            worst_fit = max(worst_fit, abs(fit_p(model, y) - p))
    randers = MetricModel(RANDERS, 0.8, 3)
    p_dev = max(abs(compute_p(randers, s).p - 1.0) for s in np.linspace(-0.75, 0.75, 11))
    out.require(worst_res < 1e-6, f"decomposition residual {worst_res:.3g}")
    out.require(worst_fit <= 1e-6, f"fitted p off by {worst_fit:.3g}")
    out.require(p_dev <= 1e-9, f"Randers p off by {p_dev:.3g}")
    out.note(f"residual {worst_res:.2g}, fit gap {worst_fit:.2g}, Randers |p-1| {p_dev:.2g}")
    return out


def criterion_8() -> Outcome:
    out = Outcome(8)
    p2 = SqrtBIndependent(0.3, 1.0, 1.2)
    lam = 1.0
    phi = IntegralBIndependent(0.4, 1.0, 0.3, lam)
    b = 0.6
    s_grid = np.linspace(-b * 0.999, b * 0.999, 64)
    r1 = max(abs(ode1_residual(p2, float(s), b)) / ode1_scale(p2, float(s), b) for s in s_grid)
    r2 = max(abs(ode2_residual(phi, float(s), b, lam)) / ode2_scale(phi, float(s), b, lam) for s in s_grid)
    q = max(abs(antiderivative(0.0, 1.0, float(s)).value - s / math.sqrt(1.0 - s * s)) for s in np.linspace(-0.99, 0.99, 64))
    out.require(r1 < 1e-8, f"ODE1 scaled residual {r1:.3g}")
    out.require(r2 < 1e-7, f"ODE2 scaled residual {r2:.3g}")
    out.require(q <= 1e-10, f"quadrature gap {q:.3g}")
    out.note(f"ODE1 {r1:.2g}, ODE2 {r2:.2g}, quadrature {q:.2g}")
    return out


PLANE_MODELS = ((GR, 0.5), (QB, 0.7), (RANDERS, 0.8), (BERWALD, 0.3), (GeneralizedRanders(2.0, -0.4, 0.9), 0.6))


def criterion_9() -> Outcome:
    out = Outcome(9)
    worst = 0.0
    for fam, k in PLANE_MODELS:
        n2 = cartan_norm_2d(MetricModel(fam, k)).norm
        n3 = cartan_norm_nd(MetricModel(fam, k, 3)).norm
        worst = max(worst, abs(n3 - n2))
        out.require(abs(n3 - n2) <= 1e-3, f"{fam.label()} k={k}: |3-D - 2-D| = {abs(n3 - n2):.3g}")
    out.note(f"5 models, worst |3-D - 2-D| {worst:.2g}")
    out.within(60.0)
    return out


def criterion_10() -> Outcome:
    out = Outcome(10)
    ks = (0.2, 0.4, 0.6, 0.8)
    for fam in (GeneralizedRanders(1.0, 1.0, 1.0), SqrtBIndependent(0.3, 1.0, 1.2)):
        scan = b_independence_scan(fam, ks, tolerance=1e-4)
        out.require(scan.tolerance == 1e-4, "scan threshold is not 1e-4")
        out.require(scan.passed == (scan.deviation <= 1e-4), "pass flag disagrees with deviation")
        out.note(f"{fam.label()} deviation {scan.deviation:.6g} ({'flat' if scan.passed else 'not flat'})")
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli_main(["verify"])
    report = buf.getvalue()
    scan_lines = [ln for ln in report.splitlines() if "b-independence[" in ln and "(tol 0.0001)" in ln]
    out.require(len(scan_lines) >= 2, "verify report omits a b-scan")
    any_fail = "FAIL" in report
    out.require((code == 1) == any_fail, f"verify exit {code} disagrees with the report")
    out.note(f"verify exit {code}")
    return out


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 11)])
def test_criterion(criterion, capsys):
    outcome = criterion()
    with capsys.disabled():
        print("\n" + outcome.line())
    assert outcome.passed, outcome.line()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    for r in results:
        print(r.line())
    raise SystemExit(0 if all(r.passed for r in results) else 1)
