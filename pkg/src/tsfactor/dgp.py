"""Seeded simulation designs for the factor model with regressors.

All designs share the latent block: three factors, loadings with
independent U(-2, 2) entries, and N(0, I_p) idiosyncratic noise. In the
weak-factor case (delta = 0.5) all but floor(sqrt(p)) entries of every
loading column are set to zero.

Random draws happen in a fixed order so a seed pins down the dataset:

1. regression parameters (D row-major, or the nonlinear-g parameters),
2. loadings A (row-major), then the zeroed positions column by column,
3. innovations of the burned-in recursions, one row of shape (burn_in + T, k)
   per step,
4. innovations that have no burn-in (nonstationary factors), shape (T, k),
5. the idiosyncratic noise, shape (T, p).

Recursions with burn-in start at zero and discard the first ``burn_in`` steps.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import InputError
from .panel import DESIGNS, DgpTruth, Panel

Z_COEF = np.array([[5 / 8, 1 / 8], [1 / 8, 5 / 8]])
X_COEF = np.diag([0.6, -0.5, 0.3])
U_COEF = 0.5
R_TRUE = 3
DELTAS = {"strong": 0.0, "weak": 0.5}


@dataclass(frozen=True)
class DgpConfig:
    design: str
    p: int
    t_len: int
    delta: float = 0.0
    seed: int = 0
    burn_in: int = 100

    def __post_init__(self):
        if self.design not in DESIGNS:
            raise InputError(f"unknown design {self.design!r}; expected one of {DESIGNS}")
        delta = DELTAS.get(self.delta, self.delta) if isinstance(self.delta, str) else self.delta
        if delta not in (0.0, 0.5):
            raise InputError(f"delta must be 0 (strong) or 0.5 (weak), got {self.delta!r}")
        object.__setattr__(self, "delta", float(delta))
        if self.p < 4:
            raise InputError(f"p must be >= 4, got {self.p}")
        if self.t_len < 10:
            raise InputError(f"T must be >= 10, got {self.t_len}")
        if self.burn_in < 0:
            raise InputError("burn_in must be >= 0")
        if not 0 <= int(self.seed) < 2**64:
            raise InputError("seed must be a 64-bit unsigned integer")


class Dataset(NamedTuple):
    y: Panel
    z: Optional[Panel]
    truth: DgpTruth
    w: Optional[Panel] = None
    u: Optional[Panel] = None


def _loadings(rng: np.random.Generator, p: int, delta: float) -> np.ndarray:
    A = rng.uniform(-2.0, 2.0, size=(p, R_TRUE))
    if delta > 0:
        keep = math.isqrt(p)
        for j in range(R_TRUE):
            zeroed = rng.choice(p, size=p - keep, replace=False)
            A[zeroed, j] = 0.0
    return A


def _var1(coef: np.ndarray, innovations: np.ndarray, burn_in: int) -> np.ndarray:
    """x_s = coef x_{s-1} + e_s from x_0 = 0; returns the post burn-in path, k x T."""
    coef = np.atleast_2d(coef)
    n, k = innovations.shape
    path = np.empty((n, k))
    state = np.zeros(k)
    for s in range(n):
        state = coef @ state + innovations[s]
        path[s] = state
    return path[burn_in:].T


def _noise(rng: np.random.Generator, T: int, p: int) -> np.ndarray:
    return rng.standard_normal((T, p)).T


def _stationary_factors(innovations: np.ndarray, burn_in: int) -> np.ndarray:
    return _var1(X_COEF, innovations, burn_in)


def gen_stationary(cfg: DgpConfig):
    """Linear model with VAR(1) regressors and stationary VAR(1) factors.

    Returns ``(y, z, truth)`` with y p x T and z 2 x T.
    """
    rng = np.random.default_rng(int(cfg.seed))
    p, T, b = cfg.p, cfg.t_len, cfg.burn_in
    D = rng.uniform(-2.0, 2.0, size=(p, 2))
    A = _loadings(rng, p, cfg.delta)
    innov = rng.standard_normal((b + T, 2 + R_TRUE))
    eps = _noise(rng, T, p)
    z = _var1(Z_COEF, innov[:, :2], b)
    x = _stationary_factors(innov[:, 2:], b)
    signal = D @ z
    y = signal + A @ x + eps
    truth = DgpTruth(D, A, x, R_TRUE, cfg.delta, "stationary", signal)
    return Panel(y), Panel(z), truth


def gen_endogenous(cfg: DgpConfig):
    """Regressors built from the factors and an AR(1) instrument source u_t.

    z_1 = 0.3 x_1 + 0.5 u + 0.5 u^2 and z_2 = 0.3 x_2 - 0.5 u + 0.5 u^2, with
    instruments w_t = (u_t, u_t^2). Returns ``(y, z, w, truth)``; truth keeps
    the structural D, which least squares does not estimate consistently here.
    """
    rng = np.random.default_rng(int(cfg.seed))
    p, T, b = cfg.p, cfg.t_len, cfg.burn_in
    D = rng.uniform(-2.0, 2.0, size=(p, 2))
    A = _loadings(rng, p, cfg.delta)
    innov = rng.standard_normal((b + T, R_TRUE + 1))
    eps = _noise(rng, T, p)
    x = _stationary_factors(innov[:, :R_TRUE], b)
    u = _var1(np.array([[U_COEF]]), innov[:, R_TRUE:], b)[0]
    z = np.vstack([
        0.3 * x[0] + 0.5 * u + 0.5 * u**2,
        0.3 * x[1] - 0.5 * u + 0.5 * u**2,
    ])
    w = np.vstack([u, u**2])
    signal = D @ z
    y = signal + A @ x + eps
    truth = DgpTruth(D, A, x, R_TRUE, cfg.delta, "endogenous", signal)
    return Panel(y), Panel(z), Panel(w), truth


def gen_nonstationary(cfg: DgpConfig):
    """Stationary VAR(1) regressors with trending and integrated factors.

    x_1 is an AR(1) (coefficient 0.8) around the trend 2t/T, x_2 = 3t/T and
    x_3 is a random walk with step standard deviation sqrt(10/T); all start
    from 0 at t = 0. Returns ``(y, z, truth)``.
    """
    rng = np.random.default_rng(int(cfg.seed))
    p, T, b = cfg.p, cfg.t_len, cfg.burn_in
    D = rng.uniform(-2.0, 2.0, size=(p, 2))
    A = _loadings(rng, p, cfg.delta)
    z_innov = rng.standard_normal((b + T, 2))
    x_innov = rng.standard_normal((T, 2))
    eps = _noise(rng, T, p)
    z = _var1(Z_COEF, z_innov, b)

    t = np.arange(1, T + 1)
    trend = 2.0 * t / T
    deviation = _var1(np.array([[0.8]]), x_innov[:, :1], 0)[0]
    x = np.vstack([
        trend + deviation,
        3.0 * t / T,
        np.cumsum(math.sqrt(10.0 / T) * x_innov[:, 1]),
    ])
    signal = D @ z
    y = signal + A @ x + eps
    truth = DgpTruth(D, A, x, R_TRUE, cfg.delta, "nonstationary", signal)
    return Panel(y), Panel(z), truth


def g_values(g_params: dict, u) -> np.ndarray:
    """Evaluate the simulated regression function, p x n."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    logistic = g_params["alpha_logistic"][:, None] * u[None, :]
    sine = g_params["alpha_sine"][:, None] * u[None, :]
    return np.vstack([1.0 / (1.0 + np.exp(-logistic)), np.sin(sine)])


def gen_nonlinear(cfg: DgpConfig):
    """Nonlinear regression on a scalar AR(1) covariate u_t.

    The first p/2 series respond through exp(a u) / (1 + exp(a u)) with
    a ~ N(0, 4); the rest through sin(b u) with b ~ U(-2, 2). Returns
    ``(y, u, truth)`` with u 1 x T.
    """
    rng = np.random.default_rng(int(cfg.seed))
    p, T, b = cfg.p, cfg.t_len, cfg.burn_in
    half = p // 2
    if p % 2:
        warnings.warn(f"odd p={p}: first {half} series get the logistic response", stacklevel=2)
    g_params = {
        "alpha_logistic": rng.normal(0.0, 2.0, size=half),
        "alpha_sine": rng.uniform(-2.0, 2.0, size=p - half),
    }
    A = _loadings(rng, p, cfg.delta)
    innov = rng.standard_normal((b + T, R_TRUE + 1))
    eps = _noise(rng, T, p)
    x = _stationary_factors(innov[:, :R_TRUE], b)
    u = _var1(np.array([[U_COEF]]), innov[:, R_TRUE:], b)
    signal = g_values(g_params, u[0])
    y = signal + A @ x + eps
    truth = DgpTruth(None, A, x, R_TRUE, cfg.delta, "nonlinear", signal, g_params=g_params)
    return Panel(y), Panel(u), truth


def simulate(cfg: DgpConfig) -> Dataset:
    """Run the generator for ``cfg.design`` and return a :class:`Dataset`."""
    if cfg.design == "stationary":
        y, z, truth = gen_stationary(cfg)
        return Dataset(y, z, truth)
    if cfg.design == "endogenous":
        y, z, w, truth = gen_endogenous(cfg)
        return Dataset(y, z, truth, w=w)
    if cfg.design == "nonstationary":
        y, z, truth = gen_nonstationary(cfg)
        return Dataset(y, z, truth)
    y, u, truth = gen_nonlinear(cfg)
    return Dataset(y, u, truth, u=u)
