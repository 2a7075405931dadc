"""Command-line interface.

Subcommands
-----------
estimate   fit the factor model to CSV data and write plot-ready CSVs
simulate   run Monte Carlo cells from a YAML configuration
distance   subspace distance between two bases stored as CSV

Exit codes: 0 success, 2 input or usage errors, 3 numerical failures
(collinear regressors, weak instruments), 4 failed replicates under
``simulate --strict``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections import OrderedDict

import numpy as np

from . import io
from .errors import BasisOverflow, InputError, NumericalError, SingularCrossMoment, SingularGram
from .factorspace import fit_factor_model, heuristic_c_t
from .metrics import space_distance_mixed
from .montecarlo import run_table
from .numerics import is_half_orthogonal, orthonormalize
from .panel import Panel
from .regress import SieveBasis, default_order

log = logging.getLogger("tsfactor")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_REPLICATES = 0, 2, 3, 4
REGRESSION_ERRORS = (SingularGram, SingularCrossMoment, BasisOverflow)


class StageError(Exception):
    def __init__(self, stage: str, exc: Exception):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage
        self.exc = exc


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (InputError, NumericalError, OSError) as exc:
        raise StageError(name, exc) from exc


def _fit(*args, **kwargs):
    try:
        return fit_factor_model(*args, **kwargs)
    except REGRESSION_ERRORS as exc:
        raise StageError("regression", exc) from exc
    except (InputError, NumericalError) as exc:
        raise StageError("factor estimation", exc) from exc


def _r_arg(text: str):
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'auto' or a positive integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError("r must be >= 1")
    return value


def _ct_arg(text: str):
    if text == "auto":
        return "auto"
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'auto' or a nonnegative number") from None
    if value < 0:
        raise argparse.ArgumentTypeError("c_t must be nonnegative")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsfactor", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="fit the model to CSV data")
    est.add_argument("--y", help="observations CSV (rows = time, columns = series)")
    est.add_argument("--z", help="regressors CSV; for --method sieve, the covariate u")
    est.add_argument("--w", help="instruments CSV (required by --method iv)")
    est.add_argument("--method", choices=["ols", "iv", "sieve", "none"])
    est.add_argument("--kbar", type=_positive, help="lags in M_hat (default 1; sieve: floor(2 T^0.2))")
    est.add_argument("--r", type=_r_arg, default=None, help="'auto' (default) or number of factors")
    est.add_argument("--ct", type=_ct_arg, default=None,
                     help="adjusted-ratio penalty; 'auto' uses the residual-variance heuristic")
    est.add_argument("--m", type=_positive, help="sieve basis size (default floor(2 T^0.2))")
    est.add_argument("--out", help="output directory (default ./out)")
    est.add_argument("--sectors", help="CSV mapping series label -> group label")
    est.add_argument("--orientation", choices=io.ORIENTATIONS, default=None,
                     help="layout of all input CSVs (default time_rows)")
    est.add_argument("--config", help="YAML estimate configuration; flags override it")

    sim = sub.add_parser("simulate", help="run Monte Carlo cells")
    sim.add_argument("--spec", required=True, help="YAML simulation configuration")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--workers", type=_positive, default=1)
    sim.add_argument("--strict", action="store_true", help="exit 4 if any replicate failed")
    sim.add_argument("--no-timing", action="store_true",
                     help="leave wall_time_s empty so table.csv is reproducible byte for byte")

    dist = sub.add_parser("distance", help="distance between two column spaces")
    dist.add_argument("--a", required=True, help="CSV basis (rows = coordinates, columns = vectors)")
    dist.add_argument("--b", required=True)
    dist.add_argument("--orthonormalize", action="store_true",
                      help="orthonormalize the inputs instead of rejecting them")
    return parser


# --------------------------------------------------------------------------
# estimate

def _estimate_config(args) -> io.EstimateConfig:
    base = io.read_spec(args.config) if args.config else None
    if base is not None and not isinstance(base, io.EstimateConfig):
        raise InputError(f"{args.config} is not an estimate configuration (kind: estimate)")
    fields = {} if base is None else dict(base.__dict__)
    overrides = {
        "y": args.y, "z": args.z, "w": args.w, "method": args.method, "k_bar": args.kbar,
        "r": args.r, "c_t": args.ct, "m": args.m, "out": args.out, "sectors": args.sectors,
        "orientation": args.orientation,
    }
    fields.update({key: value for key, value in overrides.items() if value is not None})
    if not fields.get("y"):
        raise InputError("--y is required")
    return io.EstimateConfig(**fields)


def _group_rows(labels, mapping) -> "OrderedDict[str, list[int]]":
    groups: OrderedDict[str, list[int]] = OrderedDict()
    for i, label in enumerate(labels):
        groups.setdefault(mapping.get(label, "other"), []).append(i)
    return groups


def cmd_estimate(args) -> int:
    cfg = _estimate_config(args)
    orient = cfg.orientation
    y = _stage("reading --y", io.read_panel, cfg.y, orientation=orient)
    z = _stage("reading --z", io.read_panel, cfg.z, orientation=orient) if cfg.z else None
    w = _stage("reading --w", io.read_panel, cfg.w, orientation=orient) if cfg.w else None
    method = cfg.method or ("ols" if z is not None else "none")
    if method == "iv" and w is None:
        raise StageError("arguments", InputError("--method iv requires --w"))
    if method != "none" and z is None:
        raise StageError("arguments", InputError(f"--method {method} requires --z"))
    if method == "none" and z is not None:
        raise StageError("arguments", InputError("--method none takes no --z"))

    basis = None
    if method == "sieve":
        basis = _stage("sieve basis", SieveBasis, m=cfg.m or default_order(y.T), input_dim=z.p)
    c_t = cfg.c_t
    if c_t == "auto":
        # the heuristic needs residuals; fit once without the penalty
        pre = _fit(y, z, method, cfg.k_bar, 1, 0.0, w=w, basis=basis)
        c_t = heuristic_c_t(Panel(pre.residuals))
    fit = _fit(y, z, method, cfg.k_bar, cfg.r, float(c_t), w=w, basis=basis)

    out = _stage("output directory", io.ensure_dir, cfg.out)
    series = y.series_labels or [f"s{i + 1}" for i in range(y.p)]
    times = y.time_labels
    r_cols = [f"factor{j + 1}" for j in range(fit.r_used)]

    def write():
        if fit.d_hat.shape[1]:
            if method == "sieve":
                regressors = [f"l{j + 1}" for j in range(fit.d_hat.shape[1])]
            else:
                regressors = z.series_labels or [f"z{j + 1}" for j in range(z.p)]
            io.write_matrix(out / "dhat.csv", fit.d_hat, regressors, series, "series")
        else:
            io.write_matrix(out / "dhat.csv", np.zeros((y.p, 0)), [], series, "series")
        io.write_series(out / "eigenvalues.csv", fit.eigenvalues)
        io.write_series(out / "ratios.csv", fit.ratios)
        io.write_matrix(out / "loadings.csv", fit.loadings, r_cols, series, "series")
        io.write_matrix(out / "factors.csv", fit.factors.T, r_cols, times, "time")
        io.write_matrix(out / "common.csv", fit.common.T, series, times, "time")
        lines = [str(fit.r_ratio)]
        (out / "rhat.txt").write_text("\n".join(lines) + "\n")
        if fit.r_adjusted is not None:
            (out / "rhat_adjusted.txt").write_text(f"{fit.r_adjusted}\n")
        if cfg.sectors:
            mapping = io.read_sector_map(cfg.sectors)
            unknown = sorted(set(mapping) - set(series))
            if unknown:
                log.warning("sector map names unknown series: %s", ", ".join(unknown[:5]))
            summary = []
            for group, rows in _group_rows(series, mapping).items():
                name = io.safe_name(group)
                labels = [series[i] for i in rows]
                io.write_matrix(out / f"loadings_{name}.csv", fit.loadings[rows], r_cols, labels, "series")
                io.write_matrix(out / f"common_{name}.csv", fit.common[rows].T, labels, times, "time")
                io.write_series(out / f"sector_factor_{name}.csv", fit.common[rows].mean(axis=0),
                                "t", "latent_part")
                summary.append([group, len(rows), float(np.std(fit.common[rows].mean(axis=0)))])
            io.write_matrix(out / "sectors.csv", np.array([[n, s] for _, n, s in summary]),
                            ["n_series", "latent_sd"], [g for g, _, _ in summary], "group")

    _stage("writing outputs", write)
    print(f"r_hat={fit.r_ratio}" + (f" r_adjusted={fit.r_adjusted}" if fit.r_adjusted is not None else ""))
    return EXIT_OK


# --------------------------------------------------------------------------
# simulate

def cmd_simulate(args) -> int:
    specs = _stage("reading --spec", io.read_specs, args.spec)
    out = _stage("output directory", io.ensure_dir, args.out)
    results = run_table(specs, workers=args.workers, strict=False)

    def write():
        io.write_results_table(results, out / "table.csv", timing=not args.no_timing)
        io.write_boxplot_summaries(results, out / "boxplots.csv")
        cells = io.ensure_dir(out / "cells")
        for i, res in enumerate(results, start=1):
            io.write_replicates(res, cells / io.cell_filename(i, res.spec))

    _stage("writing outputs", write)
    failed = sum(res.errors_count for res in results)
    for res in results:
        print(f"{res.spec.key}: P(r_hat=r)={res.freq_r_correct:.3f} errors={res.errors_count}")
    if failed and args.strict:
        print(f"error: {failed} replicate(s) failed", file=sys.stderr)
        return EXIT_REPLICATES
    return EXIT_OK


# --------------------------------------------------------------------------
# distance

def _basis(path, orthonormalize_input: bool, flag: str):
    values, _, _ = _stage(f"reading {flag}", io.read_table, path, None, None)
    if orthonormalize_input:
        return _stage(f"orthonormalizing {flag}", orthonormalize, values)
    if not is_half_orthogonal(values, 1e-6):
        raise StageError(f"checking {flag}", InputError(
            f"{path} does not have orthonormal columns (use --orthonormalize)"))
    return values


def cmd_distance(args) -> int:
    a = _basis(args.a, args.orthonormalize, "--a")
    b = _basis(args.b, args.orthonormalize, "--b")
    dist = _stage("distance", space_distance_mixed, a, b)
    print(f"{dist.value:.10g}")
    return EXIT_OK


COMMANDS = {"estimate": cmd_estimate, "simulate": cmd_simulate, "distance": cmd_distance}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except StageError as err:
        code = EXIT_NUMERIC if isinstance(err.exc, NumericalError) else EXIT_INPUT
        print(f"error during {err.stage}: {err.exc}", file=sys.stderr)
        return code
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
