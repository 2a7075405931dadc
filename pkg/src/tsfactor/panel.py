"""Panels of multivariate time series and the records produced by fitting.

A :class:`Panel` stores one series per row and one time point per column,
so ``panel.data[:, t]`` is the observation vector at time ``t``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InputError, NonFinite, ShapeMismatch
from .numerics import orthonormalize

METHODS = ("ols", "iv", "sieve", "known_d", "none")
DESIGNS = ("stationary", "endogenous", "nonstationary", "nonlinear")


def _labels(labels, n: int, what: str) -> Optional[tuple]:
    if labels is None:
        return None
    labels = tuple(str(x) for x in labels)
    if len(labels) != n:
        raise ShapeMismatch(f"{len(labels)} {what} labels for {n} {what}s")
    return labels


@dataclass(frozen=True)
class Panel:
    """A p x T block of observations (rows are series, columns are times)."""

    data: np.ndarray
    series_labels: Optional[Sequence[str]] = None
    time_labels: Optional[Sequence[str]] = None

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        if data.ndim == 1:
            data = data[None, :]
        if data.ndim != 2:
            raise ShapeMismatch(f"panel data must be 2-D, got {data.ndim}-D")
        p, T = data.shape
        if p < 1 or T < 2:
            raise ShapeMismatch(f"panel needs p >= 1 and T >= 2, got p={p}, T={T}")
        if not np.all(np.isfinite(data)):
            raise NonFinite("panel has non-finite entries")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "series_labels", _labels(self.series_labels, p, "series"))
        object.__setattr__(self, "time_labels", _labels(self.time_labels, T, "time"))

    @property
    def p(self) -> int:
        return self.data.shape[0]

    @property
    def T(self) -> int:
        return self.data.shape[1]

    def with_data(self, data) -> "Panel":
        """Same time axis, new rows. Series labels are kept only if p is unchanged."""
        data = np.asarray(data, dtype=float)
        series = self.series_labels if data.ndim == 2 and data.shape[0] == self.p else None
        return Panel(data, series, self.time_labels)

    def select_rows(self, rows) -> "Panel":
        rows = list(rows)
        labels = None if self.series_labels is None else [self.series_labels[i] for i in rows]
        return Panel(self.data[rows], labels, self.time_labels)


def as_panel(x) -> Panel:
    return x if isinstance(x, Panel) else Panel(x)


def check_same_length(*panels: Panel) -> int:
    lengths = {pn.T for pn in panels if pn is not None}
    if len(lengths) > 1:
        raise ShapeMismatch(f"panels have different lengths: {sorted(lengths)}")
    return lengths.pop()


def center_rows(panel: Panel) -> tuple[Panel, np.ndarray]:
    """Subtract each series' time average.

    Returns
    -------
    centered : Panel
    row_means : (p,) ndarray
    """
    panel = as_panel(panel)
    means = panel.data.mean(axis=1)
    return panel.with_data(panel.data - means[:, None]), means


@dataclass(frozen=True)
class FactorFit:
    """Everything estimated by one run of the factor pipeline.

    ``eigenvalues`` holds the full spectrum of the lag-autocovariance
    statistic so the number of factors can be re-selected without refitting.
    ``loadings`` and ``factors`` use ``r_used`` columns/rows, which is
    ``r_ratio`` unless the caller fixed r.
    """

    d_hat: np.ndarray
    eigenvalues: np.ndarray
    loadings: np.ndarray
    factors: np.ndarray
    r_ratio: int
    k_bar: int
    method: str
    r_adjusted: Optional[int] = None
    ratios: Optional[np.ndarray] = None
    residuals: Optional[np.ndarray] = None
    common: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"unknown method {self.method!r}")

    @property
    def r_used(self) -> int:
        return self.loadings.shape[1]


@dataclass(frozen=True)
class DgpTruth:
    """Ground truth of a simulated dataset.

    ``a_true`` is the raw loading matrix as generated (possibly sparsified);
    ``a_basis`` is an orthonormal basis of its column space, which is what
    subspace distances are computed against. ``regression_part`` is the
    p x T matrix ``D z_t`` (or ``g(u_t)``) so that "known regression" fits
    can be formed without knowing the design.
    """

    d_true: Optional[np.ndarray]
    a_true: np.ndarray
    x_true: np.ndarray
    r_true: int
    delta: float
    design: str
    regression_part: np.ndarray
    g_params: Optional[dict] = None
    a_basis: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.design not in DESIGNS:
            raise InputError(f"unknown design {self.design!r}")
        if self.a_basis is None:
            object.__setattr__(self, "a_basis", orthonormalize(self.a_true))

    @property
    def common(self) -> np.ndarray:
        return self.a_true @ self.x_true
