"""Estimators for the regression coefficient matrix D in y_t = D z_t + eta_t.

Three routes are provided: least squares (:func:`ols_fit`), instrument
variables (:func:`iv_fit`) for regressors correlated with the latent factors,
and a polynomial sieve (:func:`sieve_fit`) for a nonlinear regression
function g(u_t). None of them adds an intercept; series are assumed to have
mean zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BasisOverflow, InputError, ShapeMismatch, SingularCrossMoment, UnsupportedBasis
from .numerics import solve_gram
from .panel import Panel, as_panel, check_same_length

BASIS_LIMIT = 1e12


def default_order(T: int) -> int:
    """Default sieve size and lag count: floor(2 * T**(1/5))."""
    return max(1, math.floor(2.0 * T ** 0.2))


@dataclass(frozen=True)
class SieveBasis:
    """Basis functions l_1, ..., l_m for the sieve regression.

    Only ``kind="polynomial"`` with scalar input is implemented:
    l_j(u) = u**(j - 1).
    """

    m: int
    kind: str = "polynomial"
    input_dim: int = 1

    def __post_init__(self):
        if self.kind != "polynomial":
            raise UnsupportedBasis(f"basis kind {self.kind!r} is not implemented")
        if self.m < 1:
            raise InputError("basis needs m >= 1")
        if self.input_dim < 1:
            raise InputError("basis needs input_dim >= 1")

    def evaluate(self, u) -> np.ndarray:
        """Basis values, shape (m, n), for ``u`` of shape (d, n), (n,) or scalar."""
        u = np.asarray(u, dtype=float)
        if u.ndim == 0:
            u = u.reshape(1, 1)
        elif u.ndim == 1:
            u = u[None, :] if self.input_dim == 1 else u[:, None]
        if u.shape[0] != self.input_dim:
            raise ShapeMismatch(f"basis expects input dimension {self.input_dim}, got {u.shape[0]}")
        if self.input_dim != 1:
            raise UnsupportedBasis("polynomial basis is implemented for scalar u only")
        powers = np.arange(self.m)[:, None]
        with np.errstate(over="ignore", invalid="ignore"):
            values = u[0][None, :] ** powers
        if not np.all(np.isfinite(values)) or np.max(np.abs(values), initial=0.0) > BASIS_LIMIT:
            raise BasisOverflow(f"polynomial basis of order {self.m} exceeds {BASIS_LIMIT:g}")
        return values


@dataclass(frozen=True)
class IvConfig:
    """Mixing matrix R (m x q, full row rank) and optional ridge."""

    r_matrix: Optional[np.ndarray] = None
    ridge: float = 0.0

    def __post_init__(self):
        if self.r_matrix is not None:
            R = np.atleast_2d(np.asarray(self.r_matrix, dtype=float))
            s = np.linalg.svd(R, compute_uv=False)
            if R.shape[0] > R.shape[1] or s.min() <= 1e-10 * s.max():
                raise InputError(f"R of shape {R.shape} does not have full row rank")
            object.__setattr__(self, "r_matrix", R)
        if self.ridge < 0:
            raise InputError("ridge must be nonnegative")

    def resolve(self, m: int, q: int) -> np.ndarray:
        if self.r_matrix is None:
            if q != m:
                raise InputError(f"R must be given when q ({q}) differs from m ({m})")
            return np.eye(m)
        if self.r_matrix.shape != (m, q):
            raise ShapeMismatch(f"R has shape {self.r_matrix.shape}, expected {(m, q)}")
        return self.r_matrix


def ols_fit(y: Panel, z: Panel, ridge: float = 0.0) -> np.ndarray:
    """Least squares estimate of D (p x m).

    Row i is ``(T^-1 sum_t z_t z_t')^-1 (T^-1 sum_t y_it z_t)``.
    """
    y, z = as_panel(y), as_panel(z)
    T = check_same_length(y, z)
    if z.p >= T:
        raise InputError(f"need fewer regressors than time points (m={z.p}, T={T})")
    Z = z.data
    gram = Z @ Z.T / T
    cross = Z @ y.data.T / T
    return solve_gram(gram, cross, ridge).T


def iv_fit(y: Panel, z: Panel, w: Panel, cfg: IvConfig | None = None) -> np.ndarray:
    """Instrument-variables estimate of D.

    ``D = (T^-1 sum y_t w_t' R') (T^-1 sum z_t w_t' R')^-1``. The m x m cross
    moment is not symmetric, so it is inverted with a general LU solve.
    """
    cfg = cfg or IvConfig()
    y, z, w = as_panel(y), as_panel(z), as_panel(w)
    T = check_same_length(y, z, w)
    m, q = z.p, w.p
    if q < m:
        raise InputError(f"need at least as many instruments as regressors (q={q}, m={m})")
    R = cfg.resolve(m, q)
    WR = w.data.T @ R.T  # T x m
    yw = y.data @ WR / T
    zw = z.data @ WR / T + cfg.ridge * np.eye(m)
    s = np.linalg.svd(zw, compute_uv=False)
    if s.max() == 0 or s.min() < 1e-10 * s.max():
        raise SingularCrossMoment(
            "regressor-instrument cross moment is (nearly) singular; weak or invalid instruments"
        )
    # D zw = yw  <=>  zw' D' = yw'
    return np.linalg.solve(zw.T, yw.T).T


def sieve_fit(y: Panel, u: Panel, basis: SieveBasis | None = None, ridge: float = 0.0):
    """Sieve estimate of the nonlinear regression function.

    Expands u_t into ``z_t = (l_1(u_t), ..., l_m(u_t))`` and runs OLS.

    Returns
    -------
    d_hat : (p, m) ndarray
    z : Panel
        The basis expansion, reused to form residuals.
    """
    y, u = as_panel(y), as_panel(u)
    T = check_same_length(y, u)
    if basis is None:
        basis = SieveBasis(m=default_order(T), input_dim=u.p)
    if basis.input_dim != u.p:
        raise ShapeMismatch(f"basis input_dim {basis.input_dim} but u has {u.p} rows")
    if basis.m >= T:
        raise InputError(f"basis size m={basis.m} must be below T={T}")
    z = Panel(basis.evaluate(u.data), time_labels=u.time_labels)
    return ols_fit(y, z, ridge), z


def eval_g(d_hat, basis: SieveBasis, u_point) -> np.ndarray:
    """Fitted regression function at a single point: ``D_hat @ l(u)``."""
    d_hat = np.atleast_2d(np.asarray(d_hat, dtype=float))
    if d_hat.shape[1] != basis.m:
        raise ShapeMismatch(f"d_hat has {d_hat.shape[1]} columns, basis has m={basis.m}")
    u_point = np.asarray(u_point, dtype=float).reshape(basis.input_dim, 1)
    return d_hat @ basis.evaluate(u_point)[:, 0]


def residuals(y: Panel, z: Panel | None, d_hat) -> Panel:
    """eta_hat_t = y_t - D_hat z_t, column by column."""
    y = as_panel(y)
    if z is None:
        return y
    z = as_panel(z)
    check_same_length(y, z)
    d_hat = np.atleast_2d(np.asarray(d_hat, dtype=float))
    if d_hat.shape != (y.p, z.p):
        raise ShapeMismatch(f"d_hat has shape {d_hat.shape}, expected {(y.p, z.p)}")
    return y.with_data(y.data - d_hat @ z.data)
