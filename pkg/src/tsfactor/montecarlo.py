"""Replicated simulation experiments.

A cell is one (design, delta, estimator, p, T) combination run over many
seeded replicates. Replicate ``i`` of a cell always sees the dataset
generated from ``replicate_seed(master_seed, i)``, so cells that differ only
in estimator are compared on identical data, and results do not depend on
how replicates are spread over worker processes.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Union

import numpy as np

from .dgp import R_TRUE, DgpConfig, simulate
from .errors import Empty, FactorModelError, InputError, ReplicateFailed
from .factorspace import factors_from_residuals, fit_factor_model
from .metrics import coef_error, space_distance_mixed
from .panel import DESIGNS
from .regress import IvConfig, SieveBasis, default_order

log = logging.getLogger(__name__)

ESTIMATORS = ("known_d", "ols", "iv", "sieve")
T_RULES = {"half_p": 0.5, "p": 1.0, "one_half_p": 1.5}


def replicate_seed(master_seed: int, index: int) -> int:
    """64-bit seed for one replicate.

    Mixes the pair through numpy's ``SeedSequence(master_seed,
    spawn_key=(index,))`` and takes its first 64-bit output word.
    """
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def resolve_t(p: int, t_rule: Union[str, int]) -> int:
    if isinstance(t_rule, str):
        if t_rule not in T_RULES:
            raise InputError(f"unknown t_rule {t_rule!r}; expected one of {sorted(T_RULES)}")
        return int(round(T_RULES[t_rule] * p))
    return int(t_rule)


@dataclass(frozen=True)
class ExperimentSpec:
    """One table cell.

    ``k_bar`` and ``m`` of ``None`` mean the defaults: 1 lag for linear
    estimators and floor(2 T^(1/5)) for the sieve. ``r_mode`` is ``"auto"``
    (plain ratio, or adjusted when ``c_t > 0``) or a fixed integer.
    """

    design: str
    p: int
    t_rule: Union[str, int] = "one_half_p"
    delta: float = 0.0
    estimator: str = "ols"
    replicates: int = 200
    k_bar: Optional[int] = None
    r_mode: Union[str, int] = "auto"
    master_seed: int = 0
    c_t: float = 0.0
    m: Optional[int] = None
    burn_in: int = 100

    def __post_init__(self):
        if self.design not in DESIGNS:
            raise InputError(f"unknown design {self.design!r}")
        if self.estimator not in ESTIMATORS:
            raise InputError(f"unknown estimator {self.estimator!r}")
        if self.estimator == "iv" and self.design != "endogenous":
            raise InputError("the iv estimator needs the endogenous design (it supplies instruments)")
        if self.estimator == "sieve" and self.design != "nonlinear":
            raise InputError("the sieve estimator applies to the nonlinear design")
        if self.design == "nonlinear" and self.estimator not in ("sieve", "known_d"):
            raise InputError("the nonlinear design is fitted with 'sieve' or 'known_d'")
        if self.replicates < 1:
            raise InputError("replicates must be >= 1")
        if self.T < 10:
            raise InputError(f"T resolves to {self.T}; need >= 10")
        if self.r_mode != "auto" and int(self.r_mode) < 1:
            raise InputError("fixed r must be >= 1")
        # validates delta, p and seed range
        self.dgp_config(0)

    @property
    def T(self) -> int:
        return resolve_t(self.p, self.t_rule)

    @property
    def resolved_k_bar(self) -> int:
        if self.k_bar is not None:
            return int(self.k_bar)
        return default_order(self.T) if self.estimator == "sieve" or self.design == "nonlinear" else 1

    @property
    def resolved_m(self) -> int:
        return int(self.m) if self.m is not None else default_order(self.T)

    @property
    def key(self) -> tuple:
        return (self.design, self.delta, self.estimator, self.p, self.T)

    def dgp_config(self, index: int) -> DgpConfig:
        return DgpConfig(
            design=self.design,
            p=self.p,
            t_len=self.T,
            delta=self.delta,
            seed=replicate_seed(self.master_seed, index),
            burn_in=self.burn_in,
        )


class FiveNumber(NamedTuple):
    min: float
    q1: float
    median: float
    q3: float
    max: float


class ReplicateResult(NamedTuple):
    index: int
    r_hat: int
    d2: float
    coef_err: float
    error: Optional[str] = None


@dataclass(frozen=True)
class CellResult:
    spec: ExperimentSpec
    freq_r_correct: float
    d2_summary: FiveNumber
    coef_error_summary: Optional[FiveNumber]
    errors_count: int
    wall_time: float
    r_hats: np.ndarray = field(repr=False)
    d2_values: np.ndarray = field(repr=False)
    coef_errors: np.ndarray = field(repr=False)

    def same_numbers(self, other: "CellResult") -> bool:
        """Equality ignoring wall time (NaN-aware, bitwise on floats)."""
        return (
            self.spec == other.spec
            and self.freq_r_correct == other.freq_r_correct
            and self.errors_count == other.errors_count
            and np.array_equal(self.r_hats, other.r_hats)
            and np.array_equal(self.d2_values, other.d2_values, equal_nan=True)
            and np.array_equal(self.coef_errors, other.coef_errors, equal_nan=True)
        )


def summarize_boxplot(values) -> FiveNumber:
    """Min, quartiles, median and max.

    Quantiles interpolate linearly: for probability q the position is
    h = (n - 1) q, and the value is x[floor(h)] + (h - floor(h)) *
    (x[floor(h) + 1] - x[floor(h)]) on the sorted sample.
    """
    x = np.sort(np.asarray(values, dtype=float).ravel())
    if x.size == 0:
        raise Empty("cannot summarize an empty sample")
    out = []
    for q in (0.0, 0.25, 0.5, 0.75, 1.0):
        h = (x.size - 1) * q
        lo = int(np.floor(h))
        hi = min(lo + 1, x.size - 1)
        out.append(float(x[lo] + (h - lo) * (x[hi] - x[lo])))
    return FiveNumber(*out)


def _fit(spec: ExperimentSpec, data):
    truth = data.truth
    r = spec.r_mode if spec.r_mode == "auto" else int(spec.r_mode)
    k_bar = spec.resolved_k_bar
    if spec.estimator == "known_d":
        eta = data.y.with_data(data.y.data - truth.regression_part)
        d = truth.d_true if truth.d_true is not None else np.zeros((spec.p, 0))
        return factors_from_residuals(eta, d, "known_d", k_bar, r, spec.c_t)
    if spec.estimator == "ols":
        return fit_factor_model(data.y, data.z, "ols", k_bar, r, spec.c_t)
    if spec.estimator == "iv":
        return fit_factor_model(data.y, data.z, "iv", k_bar, r, spec.c_t, w=data.w, iv=IvConfig())
    basis = SieveBasis(m=spec.resolved_m)
    return fit_factor_model(data.y, data.u, "sieve", k_bar, r, spec.c_t, basis=basis)


def run_replicate(spec: ExperimentSpec, index: int) -> ReplicateResult:
    """Generate, fit and score replicate ``index`` of ``spec``."""
    data = simulate(spec.dgp_config(index))
    try:
        fit = _fit(spec, data)
    except FactorModelError as exc:
        return ReplicateResult(index, 0, float("nan"), float("nan"), f"{type(exc).__name__}: {exc}")
    truth = data.truth
    r_hat = fit.r_adjusted if (spec.c_t > 0 and fit.r_adjusted is not None) else fit.r_ratio
    d2 = space_distance_mixed(fit.loadings, truth.a_basis).value ** 2
    if spec.estimator in ("ols", "iv"):
        cerr = coef_error(fit.d_hat, truth.d_true)
    else:
        cerr = float("nan")
    return ReplicateResult(index, int(r_hat), float(d2), float(cerr))


def _run_chunk(spec: ExperimentSpec, indices: list[int]) -> list[ReplicateResult]:
    return [run_replicate(spec, i) for i in indices]


def _chunks(n: int, parts: int) -> list[list[int]]:
    parts = max(1, min(parts, n))
    return [list(range(k, n, parts)) for k in range(parts)]


def run_cell(spec: ExperimentSpec, workers: int = 1, strict: bool = False) -> CellResult:
    """Run all replicates of one cell.

    Parameters
    ----------
    workers : int
        Number of processes. Output is identical for any value.
    strict : bool
        Raise on the first failed replicate instead of counting it.
    """
    start = time.perf_counter()
    n = spec.replicates
    if workers <= 1:
        results = _run_chunk(spec, list(range(n)))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, spec, idx) for idx in _chunks(n, workers)]
            results = [res for fut in futures for res in fut.result()]
    results.sort(key=lambda res: res.index)
    return _aggregate(spec, results, time.perf_counter() - start, strict)


def _aggregate(spec, results, wall_time, strict) -> CellResult:
    failed = [res for res in results if res.error is not None]
    if failed and strict:
        raise ReplicateFailed(
            f"replicate {failed[0].index} of cell {spec.key} failed: {failed[0].error}"
        )
    for res in failed:
        log.warning("replicate %d of %s failed: %s", res.index, spec.key, res.error)
    ok = [res for res in results if res.error is None]
    r_hats = np.array([res.r_hat for res in results], dtype=int)
    d2 = np.array([res.d2 for res in results])
    cerr = np.array([res.coef_err for res in results])
    hits = sum(1 for res in ok if res.r_hat == R_TRUE)
    freq = hits / len(results)
    d2_ok = d2[~np.isnan(d2)]
    d2_summary = summarize_boxplot(d2_ok) if d2_ok.size else FiveNumber(*[float("nan")] * 5)
    cerr_ok = cerr[~np.isnan(cerr)]
    cerr_summary = summarize_boxplot(cerr_ok) if cerr_ok.size else None
    return CellResult(
        spec=spec,
        freq_r_correct=freq,
        d2_summary=d2_summary,
        coef_error_summary=cerr_summary,
        errors_count=len(failed),
        wall_time=wall_time,
        r_hats=r_hats,
        d2_values=d2,
        coef_errors=cerr,
    )


def run_table(specs, workers: int = 1, strict: bool = False) -> list[CellResult]:
    """Run cells in order; each cell is independent."""
    specs = list(specs)
    if not specs:
        raise Empty("no cells to run")
    return [run_cell(spec, workers=workers, strict=strict) for spec in specs]


def with_estimator(spec: ExperimentSpec, estimator: str) -> ExperimentSpec:
    return replace(spec, estimator=estimator)
