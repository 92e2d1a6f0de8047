"""Command-line front end: ``cartan-norm <command> [options]``.

Commands
    norm        Cartan norm of the 2-D canonical model over a k grid (CSV).
    verify      Named numerical checks; exit 1 names the first failure.
    hypotheses  Print the theorem hypothesis predicates (always exit 0).
    pq          p/q split of the Cartan tensor along an s grid (CSV).
    ode         ODE residuals along an s grid (CSV).
    bscan       Norm versus b = k and its spread (CSV); exit 1 above tolerance.
    oracle      3-D brute-force norm against the 2-D norm (CSV).

Exit codes: 0 success, 1 verification or I/O failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import verify as vf
from .errors import CartanError, InvalidInput
from .families import (
    GeneralizedRanders, MetricFamily, MetricModel, QuadraticBeta, family_from_params,
    model_from_params, parse_metric_spec, theorem1_hypothesis, theorem2_hypothesis,
)
from .frame import THETA_SAMPLES, cartan_norm_2d
from .independence import B_TOLERANCE, b_independence_scan, ode1_residual, ode1_scale, ode2_residual, ode2_scale
from .oracle3d import cartan_norm_nd
from .reducibility import c2like_residual, compute_p

COMMANDS = ("norm", "verify", "hypotheses", "pq", "ode", "bscan", "oracle")

NORM_HEADER = ("family", "c1", "c2", "c3", "k", "theta_argmax", "norm", "method")
PQ_HEADER = ("family", "c1", "c2", "c3", "k", "n", "s", "a", "A", "p", "q")
ODE_HEADER = ("family", "c1", "c2", "c3", "k", "s", "ode1", "ode1_scale", "ode2", "ode2_scale", "c2like")
BSCAN_HEADER = ("family", "c1", "c2", "c3", "k", "norm", "norm_3d")
ORACLE_HEADER = ("family", "c1", "c2", "c3", "k", "norm_2d", "norm_3d", "abs_diff", "raw_3d")

_COEFF_FLAGS = ("c1", "c2", "c3", "d1", "d2", "d3", "lambda", "m")


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    k_grid: tuple[float, float, float] | None = None
    theta_samples: int = THETA_SAMPLES
    tolerances: dict = field(default_factory=dict)
    output: str | None = None
    method: str = "jet"
    n: int = 3
    s_points: int = 9
    seed: int = 0
    y_samples: int = 512
    u_samples: int = 64
    with_3d: bool = False
    allow_unit_k: bool = False

    @property
    def k_values(self) -> list[float]:
        return k_grid_values(self.k_grid) if self.k_grid else []


def parse_k_grid(text: str) -> tuple[float, float, float]:
    """``start:stop:step`` (stop inclusive) or a single value."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            grid = (v, v, 1.0)
        elif len(parts) == 3:
            grid = tuple(float(p) for p in parts)
        else:
            raise ValueError
    except ValueError:
        raise InvalidInput(f"--k expects start:stop:step or a number, got {text!r}") from None
    start, stop, step = grid
    if not all(math.isfinite(v) for v in grid):
        raise InvalidInput("k grid entries must be finite")
    if step <= 0:
        raise InvalidInput(f"k grid step must be positive, got {step!r}")
    if stop < start:
        raise InvalidInput(f"k grid stop {stop!r} is below start {start!r}")
    if start < 0 or stop > 1:
        raise InvalidInput(f"k grid [{start!r}, {stop!r}] leaves [0, 1]")
    return grid


def k_grid_values(grid) -> list[float]:
    start, stop, step = grid
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [min(round(start + i * step, 12), stop) for i in range(count)]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cartan-norm", description="Cartan torsion norms of (alpha,beta)-metrics.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--spec", help="metric-spec file of 'key = value' lines")
    parser.add_argument("--family")
    for name in _COEFF_FLAGS:
        parser.add_argument(f"--{name}", type=float, dest=name)
    parser.add_argument("--k", help="start:stop:step (stop inclusive) or one value")
    parser.add_argument("--n", type=int, default=None, help="dimension for pq (default 3)")
    parser.add_argument("--theta-samples", type=int, default=THETA_SAMPLES)
    parser.add_argument("--method", choices=("jet", "closed_form"), default="jet")
    parser.add_argument("--s-points", type=int, default=9)
    parser.add_argument("--tol", type=float, default=None, help="b-scan deviation tolerance")
    parser.add_argument("--with-3d", action="store_true", help="bscan: add the 3-D oracle column")
    parser.add_argument("--y-samples", type=int, default=512)
    parser.add_argument("--u-samples", type=int, default=64)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--allow-unit-k", action="store_true", help="permit k = 1 where the family allows it")
    parser.add_argument("--out", help="output path (default stdout)")
    return parser


def parse_config(argv, parser: argparse.ArgumentParser | None = None) -> RunConfig:
    parser = parser or build_parser()
    ns = parser.parse_args(argv)
    params: dict = {}
    if ns.spec:
        try:
            with open(ns.spec, encoding="utf-8") as fh:
                params.update(parse_metric_spec(fh.read()))
        except OSError as exc:
            raise InvalidInput(f"cannot read spec file: {exc}") from None
    if ns.family is not None:
        params["family"] = ns.family
    for name in _COEFF_FLAGS:
        value = getattr(ns, name)
        if value is not None:
            if not math.isfinite(value):
                raise InvalidInput(f"--{name} must be finite")
            params[name] = value
    k_grid = None
    if ns.k is not None:
        k_grid = parse_k_grid(ns.k)
    elif "k" in params:
        k_grid = parse_k_grid(repr(float(params["k"])))
    if ns.theta_samples < 64:
        raise InvalidInput(f"--theta-samples must be at least 64, got {ns.theta_samples}")
    n = ns.n if ns.n is not None else int(params.get("n") or 3)
    if ns.s_points < 2 or ns.y_samples < 1 or ns.u_samples < 1:
        raise InvalidInput("sample counts must be positive (--s-points at least 2)")
    tol = B_TOLERANCE if ns.tol is None else ns.tol
    if not tol > 0:
        raise InvalidInput("--tol must be positive")
    return RunConfig(
        command=ns.command, params=params, k_grid=k_grid, theta_samples=ns.theta_samples,
        tolerances={"bscan": tol}, output=ns.out, method=ns.method, n=n,
        s_points=ns.s_points, seed=ns.seed, y_samples=ns.y_samples, u_samples=ns.u_samples,
        with_3d=ns.with_3d, allow_unit_k=ns.allow_unit_k,
    )


# -- output ---------------------------------------------------------------------


def _field(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def format_csv(rows, header=NORM_HEADER) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_field(v) for v in row])
    return buf.getvalue()


def write_text(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_csv(rows, path: str | None, header=NORM_HEADER) -> None:
    write_text(format_csv(rows, header), path)


# -- commands ---------------------------------------------------------------------


def _family(config) -> MetricFamily:
    return family_from_params(config.params)


def _require_k(config) -> list[float]:
    if config.k_grid is None:
        raise InvalidInput(f"'{config.command}' needs --k (or k in the spec file)")
    return config.k_values


def _prefix(family, k):
    return (family.name, *family.csv_coeffs(), k)


def cmd_norm(config) -> int:
    family = _family(config)
    rows = []
    for k in _require_k(config):
        model = MetricModel(family, k, 2, config.allow_unit_k)
        scan = cartan_norm_2d(model, config.theta_samples, config.method)
        rows.append((*_prefix(family, k), scan.theta_argmax, scan.norm, config.method))
    write_csv(rows, config.output)
    return 0


def cmd_hypotheses(config) -> int:
    p = config.params
    c = [p.get(key) for key in ("c1", "c2", "c3")]
    if any(v is None for v in c):
        raise InvalidInput("hypotheses needs --c1, --c2 and --c3")
    fam = p.get("family")
    lines = []
    if fam in (None, GeneralizedRanders.name, "generalized-randers"):
        lines.append(theorem1_hypothesis(*c).describe())
    if fam in (None, QuadraticBeta.name, "berwald-type"):
        lines.append(theorem2_hypothesis(*c).describe())
    if not lines:
        raise InvalidInput(f"no theorem hypotheses for family {fam!r}")
    write_text("\n".join(lines) + "\n", config.output)
    return 0


def _s_grid(family, k, count):
    lo, hi = family.working_interval(k)
    return np.linspace(lo, hi, count)


def cmd_pq(config) -> int:
    family = _family(config)
    rows = []
    for k in _require_k(config):
        model = MetricModel(family, k, max(config.n, 3), config.allow_unit_k)
        for s in _s_grid(family, k, config.s_points):
            split = compute_p(model, float(s), config.n)
            rows.append((*_prefix(family, k), config.n, float(s), split.a, split.A, split.p, split.q))
    write_csv(rows, config.output, PQ_HEADER)
    return 0


def cmd_ode(config) -> int:
    family = _family(config)
    lam = float(config.params.get("lambda") or 0.0)
    rows = []
    for k in _require_k(config):
        MetricModel(family, k, 2, config.allow_unit_k)
        for s in _s_grid(family, k, config.s_points):
            s = float(s)
            rows.append((
                *_prefix(family, k), s,
                ode1_residual(family, s, k), ode1_scale(family, s, k),
                ode2_residual(family, s, k, lam), ode2_scale(family, s, k, lam),
                c2like_residual(family, s, k),
            ))
    write_csv(rows, config.output, ODE_HEADER)
    return 0


def cmd_bscan(config) -> int:
    family = _family(config)
    ks = config.k_values or list(vf.B_K_LIST)
    tol = config.tolerances["bscan"]
    scan = b_independence_scan(
        family, ks, config.theta_samples, tol, config.with_3d, config.y_samples,
        config.u_samples, config.seed,
    )
    norms_3d = scan.norms_3d or (None,) * len(ks)
    rows = [(*_prefix(family, k), v, v3) for k, v, v3 in zip(scan.k_list, scan.norms, norms_3d)]
    write_csv(rows, config.output, BSCAN_HEADER)
    status = "PASS" if scan.passed else "FAIL"
    print(f"bscan {family.label()}: {status} deviation {scan.deviation!r} (tol {tol!r})", file=sys.stderr)
    return 0 if scan.passed else 1


def cmd_oracle(config) -> int:
    family = _family(config)
    rows = []
    for k in _require_k(config):
        n2 = cartan_norm_2d(MetricModel(family, k, 2, config.allow_unit_k), config.theta_samples).norm
        est = cartan_norm_nd(
            MetricModel(family, k, 3, config.allow_unit_k), config.y_samples, config.u_samples, config.seed,
        )
        rows.append((*_prefix(family, k), n2, est.norm, abs(est.norm - n2), est.raw_max))
    write_csv(rows, config.output, ORACLE_HEADER)
    return 0


def cmd_verify(config) -> int:
    if config.params.get("family") is None:
        checks = vf.reference_checks(config.theta_samples, config.seed)
    else:
        family = _family(config)
        ks = config.k_values or [round(0.05 + 0.1 * i, 12) for i in range(10)]
        for k in ks:
            MetricModel(family, k, 2, config.allow_unit_k)
        checks = vf.model_checks(family, ks, config.theta_samples, config.seed)
    lines, failure = vf.summarize(checks)
    write_text("\n".join(lines) + "\n", config.output)
    return 0 if failure is None else 1


_DISPATCH = {
    "norm": cmd_norm, "verify": cmd_verify, "hypotheses": cmd_hypotheses, "pq": cmd_pq,
    "ode": cmd_ode, "bscan": cmd_bscan, "oracle": cmd_oracle,
}


def run(config: RunConfig) -> int:
    return _DISPATCH[config.command](config)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        config = parse_config(argv, parser)
        return run(config)
    except InvalidInput as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{parser.prog}: I/O error: {exc}", file=sys.stderr)
        return 1
    except CartanError as exc:
        print(f"{parser.prog}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
