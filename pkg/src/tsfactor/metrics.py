"""Discrepancies between estimated and true quantities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotHalfOrthogonal, ShapeMismatch
from .numerics import is_half_orthogonal


@dataclass(frozen=True)
class SubspaceDistance:
    value: float
    r1: int
    r2: int
    modified: bool

    def __float__(self) -> float:
        return self.value


def _check_basis(h, name: str) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.ndim == 1:
        h = h[:, None]
    if h.ndim != 2:
        raise ShapeMismatch(f"{name} must be a matrix")
    if not is_half_orthogonal(h, 1e-6):
        raise NotHalfOrthogonal(f"{name} does not have orthonormal columns")
    return h


def _distance(h1, h2, modified: bool) -> SubspaceDistance:
    h1 = _check_basis(h1, "h1")
    h2 = _check_basis(h2, "h2")
    if h1.shape[0] != h2.shape[0]:
        raise ShapeMismatch(f"bases live in R^{h1.shape[0]} and R^{h2.shape[0]}")
    r1, r2 = h1.shape[1], h2.shape[1]
    if not modified and r1 != r2:
        raise ShapeMismatch(f"column counts differ ({r1} vs {r2}); use space_distance_mixed")
    # With B the basis with more columns and S the other one,
    # max(r1, r2) - tr(H1 H1' H2 H2') = ||B - S S' B||_F^2. The residual form
    # avoids the cancellation in 1 - tr/r, which the square root would
    # amplify to ~1e-8 for nearly equal spaces.
    big, small = (h1, h2) if r1 >= r2 else (h2, h1)
    resid = big - small @ (small.T @ big)
    # inputs passed the 1e-6 orthonormality check, so values outside [0, 1] are roundoff
    radicand = min(max(float(np.sum(resid**2)) / max(r1, r2), 0.0), 1.0)
    return SubspaceDistance(float(np.sqrt(radicand)), r1, r2, modified)


def space_distance(h1, h2) -> SubspaceDistance:
    """sqrt(1 - tr(H1 H1' H2 H2') / r) for two p x r orthonormal bases.

    0 when the column spaces coincide, 1 when they are orthogonal.
    """
    return _distance(h1, h2, modified=False)


def space_distance_mixed(h1, h2) -> SubspaceDistance:
    """Distance between spaces of possibly different dimensions.

    Normalizes the trace by ``max(r1, r2)``; equals :func:`space_distance`
    when the dimensions agree.
    """
    return _distance(h1, h2, modified=True)


def coef_error(d_hat, d_true) -> float:
    """Normalized Frobenius error p^{-1/2} ||D_hat - D||_F."""
    d_hat = np.atleast_2d(np.asarray(d_hat, dtype=float))
    d_true = np.atleast_2d(np.asarray(d_true, dtype=float))
    if d_hat.shape != d_true.shape:
        raise ShapeMismatch(f"{d_hat.shape} vs {d_true.shape}")
    return float(np.linalg.norm(d_hat - d_true) / np.sqrt(d_hat.shape[0]))


def common_component_error(ahat_xhat, a_x_true) -> np.ndarray:
    """Per-time error p^{-1/2} ||A_hat x_hat_t - A x_t||_2."""
    est = np.atleast_2d(np.asarray(ahat_xhat, dtype=float))
    true = np.atleast_2d(np.asarray(a_x_true, dtype=float))
    if est.shape != true.shape:
        raise ShapeMismatch(f"{est.shape} vs {true.shape}")
    return np.linalg.norm(est - true, axis=0) / np.sqrt(est.shape[0])
