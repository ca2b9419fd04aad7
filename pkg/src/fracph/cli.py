"""Command-line interface: ``fracph {sample,density,laplace,project,verify}``.

Exit codes: 0 success, 1 invalid model or arguments, 2 failed check, 3 I/O
error.  ``--out -`` writes to standard output.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import sys

import numpy as np

from .constructors import BivariateMPHAlpha
from .frac_phase import FracPHDist, fph_density
from .modelfile import fph_document, load_model
from .mph import (
    NoClosedFormError,
    mpha_laplace,
    mpha_sample_path,
    mpha_sample_product,
    power_density,
    power_transform,
    project,
)
from .numerics import MLAccuracyError
from .phase_type import PHDist, ValidationError, ph_density
from .rng import RngStream
from .verify import (
    as_mpha,
    check_kolmogorov,
    check_laplace,
    check_projection,
    check_sampler_agreement,
    check_tail_index,
    write_reports,
)

EXIT_OK, EXIT_INVALID, EXIT_CHECK, EXIT_IO = 0, 1, 2, 3
DENSITY_FLOOR = 1e-4

SUITES = {
    # laplace N, agreement N, projection N, tail N (0 skips), tail fraction
    "fast": dict(laplace=20_000, agreement=10_000, projection=20_000, tail=0, fraction=0.01),
    "full": dict(laplace=200_000, agreement=10_000, projection=100_000, tail=1_000_000, fraction=0.01),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


@contextlib.contextmanager
def _open_out(path):
    if path == "-":
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _axis(text: str):
    try:
        lo, hi, steps = text.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise UsageError(f"grid axis must be min:max:steps, got {text!r}") from None
    if steps < 1 or lo < 0 or hi < lo:
        raise UsageError(f"invalid grid axis {text!r}")
    return np.linspace(lo, hi, steps)


def _alpha(dist) -> float:
    return float(getattr(dist, "alpha", 1.0))


def cmd_sample(args) -> int:
    model = load_model(args.model)
    if args.n < 0:
        raise UsageError("--n must be nonnegative")
    d = as_mpha(model.dist)
    rng = RngStream(args.seed)
    sampler = mpha_sample_path if args.sampler == "path" else mpha_sample_product
    Y = sampler(rng, d, args.n) if args.n else np.zeros((0, d.n))
    if model.nu is not None:
        Y = power_transform(Y, model.nu)
    header = ["x"] if d.n == 1 else [f"y{k + 1}" for k in range(d.n)]
    with _open_out(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows([_fmt(v) for v in row] for row in Y)
    return EXIT_OK


def _univariate_density(model):
    dist = model.dist
    if model.nu is not None:
        return power_density(as_mpha(dist), model.nu)
    if isinstance(dist, PHDist):
        return lambda x: ph_density(dist, x)
    if isinstance(dist, FracPHDist):
        return lambda x: fph_density(dist, x)
    return power_density(as_mpha(dist), np.ones(1))


def cmd_density(args) -> int:
    model = load_model(args.model)
    n = model.n
    axes = [_axis(g) for g in (args.grid or ["0:4:50"])]
    if len(axes) == 1:
        axes = axes * n
    if len(axes) != n or n > 2:
        raise UsageError(f"need one grid axis per component (n={n}); densities are tabulated for n <= 2")
    if _alpha(model.dist) < 1.0:
        axes = [np.maximum(a, args.floor) for a in axes]
    with _open_out(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        if n == 1:
            f = _univariate_density(model)(axes[0])
            w.writerow(["x", "f"])
            w.writerows([_fmt(x), _fmt(v)] for x, v in zip(axes[0], np.atleast_1d(f)))
        else:
            dist = model.dist
            if model.nu is not None:
                fxy = power_density(dist, model.nu)
            elif isinstance(dist, BivariateMPHAlpha):
                fxy = dist.ac_density
            else:
                raise NoClosedFormError("bivariate densities need a bivariate block model")
            X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
            F = fxy(X, Y)
            w.writerow(["x", "y", "f"])
            w.writerows([_fmt(x), _fmt(y), _fmt(v)] for x, y, v in zip(X.ravel(), Y.ravel(), F.ravel()))
    return EXIT_OK


def cmd_laplace(args) -> int:
    model = load_model(args.model)
    if model.nu is not None:
        raise NoClosedFormError("no closed-form transform for power-transformed models")
    d = as_mpha(model.dist)
    thetas = [_vector(t) for t in args.theta]
    rows = []
    for theta in thetas:
        if theta.shape != (d.n,):
            raise UsageError(f"--theta needs {d.n} entries, got {theta.size}")
        rows.append([*theta, mpha_laplace(d, theta)])
    with _open_out(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"theta{k + 1}" for k in range(d.n)] + ["laplace"])
        w.writerows([_fmt(v) for v in row] for row in rows)
    return EXIT_OK


def cmd_project(args) -> int:
    model = load_model(args.model)
    result = project(as_mpha(model.dist), _vector(args.w))
    with _open_out(args.out) as fh:
        json.dump(fph_document(result.dist, result.atom), fh, indent=2)
        fh.write("\n")
    return EXIT_OK


def _theta_grid(n: int) -> np.ndarray:
    if n == 1:
        return np.array([[0.25], [0.5], [1.0], [2.0], [4.0], [8.0]])
    alt = np.resize([1.0, 2.0], n)
    return np.array([0.5 * np.ones(n), np.ones(n), alt, alt[::-1] if n == 2 else np.roll(alt, 1),
                     np.resize([0.2, 3.0], n), np.resize([3.0, 0.2], n)])


def run_suite(model, suite: str, seed: int):
    """All checks of a suite, each on its own stream of ``seed``."""
    cfg = SUITES[suite]
    d = as_mpha(model.dist)
    streams = iter(range(1, 10_000))
    reports = []
    grid = _theta_grid(d.n)
    for sampler in ("path", "product"):
        reports.append(check_laplace(d, sampler, grid, cfg["laplace"], RngStream(seed, next(streams))))
    reports.append(check_sampler_agreement(d, cfg["agreement"], RngStream(seed, next(streams))))
    for k in range(d.n):
        w = np.zeros(d.n)
        w[k] = 1.0
        reports.append(check_projection(d, w, cfg["projection"], RngStream(seed, next(streams))))
    if d.n > 1:
        reports.append(check_projection(d, np.ones(d.n), cfg["projection"], RngStream(seed, next(streams))))
    if cfg["tail"] and d.alpha < 1.0:
        for k in range(d.n):
            reports.append(check_tail_index(
                d, k, cfg["tail"], RngStream(seed, next(streams)), nu=model.nu, fraction=cfg["fraction"],
            ))
    reports.append(check_kolmogorov(FracPHDist(d.base, d.alpha), [0.5, 1.0, 2.0]))
    return reports


def cmd_verify(args) -> int:
    model = load_model(args.model)
    reports = run_suite(model, args.suite, args.seed)
    with _open_out(args.out) as fh:
        write_reports(reports, fh)
    for r in reports:
        print(r.line(), file=sys.stderr)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracph", description="Multivariate fractional phase-type distributions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, seed=False):
        p.add_argument("--model", required=True, help="model JSON file or preset:<name>")
        p.add_argument("--out", default="-", help="output path, '-' for stdout")
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("sample", help="draw samples as CSV")
    common(p, seed=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sampler", choices=("path", "product"), default="path")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("density", help="tabulate a density on a grid")
    common(p)
    p.add_argument("--grid", action="append", help="min:max:steps, once per axis (or once for all)")
    p.add_argument("--floor", type=float, default=DENSITY_FLOOR, help="smallest grid coordinate when alpha < 1")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("laplace", help="evaluate the joint Laplace transform")
    common(p)
    p.add_argument("--theta", action="append", required=True, help="comma-separated; repeatable")
    p.set_defaults(func=cmd_laplace)

    p = sub.add_parser("project", help="law of <Y, w> as an fph model")
    common(p)
    p.add_argument("--w", required=True, help="comma-separated nonnegative weights")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("verify", help="run a verification suite, NDJSON reports")
    common(p, seed=True)
    p.add_argument("--suite", choices=tuple(SUITES), default="fast")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, UsageError, NoClosedFormError, MLAccuracyError) as exc:
        print(f"fracph: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        # json.JSONDecodeError is a ValueError but an I/O problem here
        if isinstance(exc, json.JSONDecodeError):
            print(f"fracph: cannot parse model file: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"fracph: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"fracph: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
