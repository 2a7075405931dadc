"""Latent factor estimation from regression residuals.

The loading space is estimated by the leading eigenvectors of

    M_hat = sum_{k=1}^{k_bar} S(k) S(k)'

where S(k) is the lag-k sample autocovariance of the residuals. Because the
idiosyncratic noise is serially uncorrelated, only the factor part survives
at nonzero lags. The number of factors is the position of the sharpest
drop in the eigenvalues of M_hat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import (
    EmptySpectrum,
    InputError,
    LagTooLarge,
    NotHalfOrthogonal,
    RankTooLarge,
    ShapeMismatch,
)
from .numerics import SymEigen, is_half_orthogonal, sym_eig
from .panel import FactorFit, Panel, as_panel, check_same_length
from .regress import IvConfig, SieveBasis, default_order, iv_fit, ols_fit, residuals, sieve_fit


@dataclass(frozen=True)
class MStat:
    m_matrix: np.ndarray
    k_bar: int
    eigen: SymEigen
    min_eigenvalue_raw: float


@dataclass(frozen=True)
class RatioSelection:
    r_hat: int
    ratios: np.ndarray
    r_max: int
    c_t: float


def lag_autocov(eta: Panel, k: int) -> np.ndarray:
    """Lag-k sample autocovariance of the residual panel.

    ``(T-k)^-1 sum_{t=1}^{T-k} (eta_{t+k} - eta_bar)(eta_t - eta_bar)'`` with
    ``eta_bar`` the mean over all T observations, used for both factors.
    """
    eta = as_panel(eta)
    T = eta.T
    if k < 1 or k > T - 2:
        raise LagTooLarge(f"lag {k} outside 1..{T - 2} for T={T}")
    centered = eta.data - eta.data.mean(axis=1, keepdims=True)
    return centered[:, k:] @ centered[:, : T - k].T / (T - k)


def build_m(eta: Panel, k_bar: int = 1) -> MStat:
    """Sum of S(k) S(k)' over lags 1..k_bar, with its eigen-decomposition."""
    eta = as_panel(eta)
    if k_bar < 1:
        raise InputError("k_bar must be >= 1")
    if k_bar > eta.T - 2:
        raise LagTooLarge(f"k_bar={k_bar} exceeds T-2={eta.T - 2}")
    M = np.zeros((eta.p, eta.p))
    for k in range(1, k_bar + 1):
        S = lag_autocov(eta, k)
        M += S @ S.T
    M = 0.5 * (M + M.T)
    raw = sym_eig(M)
    eigen = SymEigen(values=np.maximum(raw.values, 0.0), vectors=np.array(raw.vectors))
    return MStat(m_matrix=M, k_bar=k_bar, eigen=eigen, min_eigenvalue_raw=float(raw.values[-1]))


def default_r_max(p: int) -> int:
    return max(1, p // 2)


def pipeline_r_max(p: int, T: int) -> int:
    """Search range for the ratio estimator inside the fitting pipeline.

    Half the attainable rank of M_hat, i.e. floor(min(p, T - 2) / 2). For
    T - 2 >= p this is the usual floor(p/2). When T < p the statistic has
    rank about T and its trailing eigenvalues collapse towards zero; a ratio
    taken there would always win the argmin.
    """
    return max(1, min(p, T - 2) // 2)


def select_r_ratio(eigen_values, r_max: Optional[int] = None, c_t: float = 0.0) -> RatioSelection:
    """Pick the number of factors at the smallest eigenvalue ratio.

    Minimizes ``(lam[j+1] + c_t) / (lam[j] + c_t)`` over ``j = 1..r_max``
    (1-based). ``c_t = 0`` gives the plain ratio estimator; a positive
    ``c_t`` damps ratios among near-zero eigenvalues. A ratio with a zero
    denominator counts as 1. Ties resolve to the smallest j.
    """
    lam = np.asarray(eigen_values, dtype=float)
    if lam.ndim != 1 or lam.size < 2:
        raise EmptySpectrum("need at least two eigenvalues")
    if np.any(lam < 0):
        raise InputError("eigenvalues must be nonnegative")
    if c_t < 0:
        raise InputError("c_t must be nonnegative")
    if r_max is None:
        r_max = default_r_max(lam.size)
    if not 1 <= r_max <= lam.size - 1:
        raise InputError(f"r_max={r_max} outside 1..{lam.size - 1}")
    num = lam[1 : r_max + 1] + c_t
    den = lam[:r_max] + c_t
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(den > 0, num / np.where(den > 0, den, 1.0), 1.0)
    r_hat = int(np.argmin(ratios)) + 1
    return RatioSelection(r_hat=r_hat, ratios=ratios, r_max=r_max, c_t=float(c_t))


def heuristic_c_t(eta: Panel) -> float:
    """Data-driven penalty for the adjusted ratio: sigma2 * p * T^-1/2 * log T.

    ``sigma2`` is the median residual variance (diagonal of the lag-0
    autocovariance).
    """
    eta = as_panel(eta)
    p, T = eta.p, eta.T
    sigma2 = float(np.median(eta.data.var(axis=1)))
    return sigma2 * p * math.log(T) / math.sqrt(T)


def estimate_loadings(mstat: MStat, r: int) -> np.ndarray:
    """First r eigenvectors of M_hat (p x r, orthonormal columns)."""
    p = mstat.m_matrix.shape[0]
    if not 1 <= r <= p:
        raise RankTooLarge(f"r={r} outside 1..{p}")
    return np.array(mstat.eigen.vectors[:, :r])


def recover_factors(eta: Panel, a_hat) -> tuple[np.ndarray, np.ndarray]:
    """Project residuals on the loadings.

    Returns
    -------
    factors : (r, T) ndarray
        ``A_hat' eta_t``.
    common : (p, T) ndarray
        ``A_hat A_hat' eta_t``.
    """
    eta = as_panel(eta)
    a_hat = np.atleast_2d(np.asarray(a_hat, dtype=float))
    if a_hat.shape[0] != eta.p:
        raise ShapeMismatch(f"loadings have {a_hat.shape[0]} rows, panel has {eta.p}")
    if not is_half_orthogonal(a_hat, 1e-6):
        raise NotHalfOrthogonal("loadings must have orthonormal columns")
    factors = a_hat.T @ eta.data
    return factors, a_hat @ factors


def factors_from_residuals(
    eta: Panel,
    d_hat: np.ndarray,
    method: str,
    k_bar: int = 1,
    r: Union[int, str] = "auto",
    c_t: float = 0.0,
    r_max: Optional[int] = None,
) -> FactorFit:
    """Factor part of the pipeline, given residuals already formed."""
    eta = as_panel(eta)
    mstat = build_m(eta, k_bar)
    values = mstat.eigen.values
    if r_max is None:
        r_max = min(pipeline_r_max(eta.p, eta.T), values.size - 1)
    plain = select_r_ratio(values, r_max, 0.0)
    adjusted = select_r_ratio(values, r_max, c_t).r_hat if c_t > 0 else None
    if r == "auto":
        r_used = adjusted if adjusted is not None else plain.r_hat
    else:
        r_used = int(r)
    a_hat = estimate_loadings(mstat, r_used)
    factors, common = recover_factors(eta, a_hat)
    return FactorFit(
        d_hat=np.asarray(d_hat, dtype=float),
        eigenvalues=np.array(values),
        loadings=a_hat,
        factors=factors,
        r_ratio=plain.r_hat,
        r_adjusted=adjusted,
        k_bar=k_bar,
        method=method,
        ratios=plain.ratios,
        residuals=eta.data,
        common=common,
    )


def fit_factor_model(
    y: Panel,
    z: Optional[Panel] = None,
    method: Optional[str] = None,
    k_bar: Optional[int] = None,
    r: Union[int, str] = "auto",
    c_t: float = 0.0,
    *,
    w: Optional[Panel] = None,
    iv: Optional[IvConfig] = None,
    basis: Optional[SieveBasis] = None,
    d_known=None,
    ridge: float = 0.0,
    r_max: Optional[int] = None,
) -> FactorFit:
    """Regression, residuals, M_hat, factor count, loadings and factors.

    Parameters
    ----------
    y : Panel
        Observations, p x T.
    z : Panel or None
        Regressors (m x T). For ``method="sieve"`` this is the scalar
        covariate u_t that gets expanded. ``None`` fits a pure factor model.
    method : {"ols", "iv", "sieve", "known_d", "none"}
        Defaults to ``"ols"`` when z is given and ``"none"`` otherwise.
    k_bar : int, optional
        Number of lags in M_hat. Defaults to 1, or floor(2 T^(1/5)) for sieve.
    r : int or "auto"
        Number of factors to extract. With "auto" the ratio estimator
        decides (adjusted ratio if ``c_t > 0``).
    c_t : float
        Penalty for the adjusted ratio estimator; 0 disables it.
    w : Panel, optional
        Instruments, required for ``method="iv"``.
    d_known : array_like, optional
        True coefficients, required for ``method="known_d"``.
    """
    y = as_panel(y)
    if method is None:
        method = "none" if z is None else "ols"
    if method != "none" and z is None:
        raise InputError(f"method {method!r} needs regressors z")
    if z is not None:
        z = as_panel(z)
        check_same_length(y, z)

    regressors = z
    if method == "none":
        d_hat = np.zeros((y.p, 0))
        regressors = None
    elif method == "ols":
        d_hat = ols_fit(y, z, ridge)
    elif method == "iv":
        if w is None:
            raise InputError("method 'iv' needs instruments w")
        d_hat = iv_fit(y, z, as_panel(w), iv)
    elif method == "sieve":
        if basis is None:
            basis = SieveBasis(m=default_order(y.T), input_dim=z.p)
        d_hat, regressors = sieve_fit(y, z, basis, ridge)
    elif method == "known_d":
        if d_known is None:
            raise InputError("method 'known_d' needs d_known")
        d_hat = np.atleast_2d(np.asarray(d_known, dtype=float))
    else:
        raise InputError(f"unknown method {method!r}")

    if k_bar is None:
        k_bar = default_order(y.T) if method == "sieve" else 1
    eta = residuals(y, regressors, d_hat)
    return factors_from_residuals(eta, d_hat, method, k_bar, r, c_t, r_max)
